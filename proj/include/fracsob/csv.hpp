#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fracsob {

/// Shortest decimal text that parses back to the same double; locale-free.
std::string format_double(double v);
double parse_double(const std::string& text);

/// Comma-separated table with a header row; cells are written as given.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  void write(std::ostream& os) const;
  static CsvTable read(std::istream& is);

  [[nodiscard]] const std::vector<std::string>& header() const { return header_; }
  [[nodiscard]] const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  /// Column index by name; throws InvalidInput when absent.
  [[nodiscard]] std::size_t column(const std::string& name) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace fracsob
