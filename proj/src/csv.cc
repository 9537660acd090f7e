#include "lifetime_pd/csv.h"

#include <array>
#include <charconv>

namespace lifetime_pd {

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out << ',';
    out << cells[i];
  }
  out << '\n';
}

}  // namespace lifetime_pd
