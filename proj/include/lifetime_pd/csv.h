#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lifetime_pd {

/// Shortest form that still round-trips: 17 significant digits, general
/// notation, locale independent.
std::string format_number(double value);

/// Writes `cells` joined by commas and terminated by '\n'.
void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace lifetime_pd
