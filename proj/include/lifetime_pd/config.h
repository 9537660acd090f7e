#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lifetime_pd/experiment.h"

namespace lifetime_pd {

/// A parsed run configuration together with the bytes it came from.
struct LoadedConfig {
  RunConfig run;
  std::vector<std::string> state_labels;
  std::string source_name;
  std::uint64_t content_hash = 0;  // FNV-1a of the file bytes
};

/// Parses the TOML run configuration. Tables: [portfolio], [ttc], [betas],
/// [composite_index], [macro_model], [anchor], [scenario.<name>] and
/// [experiment]. Any problem is reported as a ConfigError naming the source,
/// line and field.
LoadedConfig load_config_string(const std::string& text,
                                const std::string& source_name = "<string>");
LoadedConfig load_config_file(const std::filesystem::path& path);

/// Completes a beta matrix by copying each listed downgrade sensitivity
/// i -> j (i < j, j not default) onto the mirrored upgrade j -> i when the
/// upgrade was left unset.
Matrix complete_symmetric_upgrades(const Matrix& betas, const std::vector<std::vector<bool>>& set,
                                   int default_index);

}  // namespace lifetime_pd
