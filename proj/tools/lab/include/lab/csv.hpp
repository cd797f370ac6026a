#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lab {

/// In-memory table with a fixed column order.  Cells are stored as text so
/// the bytes written are exactly the bytes formatted.
class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  /// Index of `name`; throws `missing column 'name'` when absent.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;

  /// Row of preformatted cells; size must match the header.
  void add_row(std::vector<std::string> cells);

  double real(std::size_t row, std::size_t col) const;

  std::string to_csv() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Cell formatting shared by every writer: shortest round-trip decimal.
std::string cell(double v);
std::string cell(std::size_t v);
inline std::string cell(const std::string& s) { return s; }
inline std::string cell(const char* s) { return s; }

Table read_csv(const std::filesystem::path& path);
Table parse_csv(const std::string& text, const std::string& source);

}  // namespace lab
