#include "lab/csv.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lab/config.hpp"
#include "scorelab/mixture.hpp"

namespace lab {

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i] == name) return i;
  }
  throw std::invalid_argument("missing column '" + name + "'");
}

bool Table::has_column(const std::string& name) const {
  for (const auto& c : columns_) {
    if (c == name) return true;
  }
  return false;
}

void Table::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) throw std::invalid_argument("Table::add_row: wrong number of cells");
  rows_.push_back(std::move(cells));
}

double Table::real(std::size_t row, std::size_t col) const {
  const auto v = parse_real(rows_.at(row).at(col));
  if (!v) {
    throw std::invalid_argument("row " + std::to_string(row + 1) + ", column '" + columns_[col] +
                                "': not a number: '" + rows_[row][col] + "'");
  }
  return *v;
}

std::string Table::to_csv() const {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out.push_back(',');
      out += r[i];
    }
    out.push_back('\n');
  };
  emit(columns_);
  for (const auto& r : rows_) emit(r);
  return out;
}

std::string cell(double v) { return scorelab::format_real(v); }
std::string cell(std::size_t v) { return std::to_string(v); }

Table parse_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(source + ": empty CSV (no header)");
  Table t(split_row(line));
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line == "\r") continue;
    auto cells = split_row(line);
    if (cells.size() != t.columns().size()) {
      throw std::invalid_argument(source + ":" + std::to_string(n) + ": expected " +
                                  std::to_string(t.columns().size()) + " cells, got " +
                                  std::to_string(cells.size()));
    }
    t.add_row(std::move(cells));
  }
  return t;
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument(path.string() + ": cannot open CSV");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), path.string());
}

}  // namespace lab
