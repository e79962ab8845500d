#include "fracsob/csv.hpp"

#include "fracsob/errors.hpp"
#include "fracsob/experiments.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

namespace fracsob {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw InvalidInput("not a number: '" + text + "'");
  return v;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw InvalidInput("CSV table needs at least one column");
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw InvalidInput("CSV row width does not match the header");
  for (const auto& c : cells)
    if (c.find_first_of(",\n") != std::string::npos) throw InvalidInput("CSV cell contains a separator");
  rows_.push_back(std::move(cells));
}

namespace {

void write_line(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].find_first_of(",\n") != std::string::npos) throw InvalidInput("CSV cell contains a separator");
    os << (i ? "," : "") << cells[i];
  }
  os << '\n';
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

void CsvTable::write(std::ostream& os) const {
  write_line(os, header_);
  for (const auto& r : rows_) write_line(os, r);
}

CsvTable CsvTable::read(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidInput("empty CSV input");
  CsvTable t(split_line(line));
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    t.add_row(split_line(line));
  }
  return t;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header_.size(); ++i)
    if (header_[i] == name) return i;
  throw InvalidInput("CSV has no column '" + name + "'");
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  CsvTable t({"level", "h", "c_h", "value", "quadrature_slack", "wall_time"});
  for (const SweepRecord& r : records)
    t.add_row({std::to_string(r.level), format_double(r.h), format_double(r.c_h), format_double(r.value),
               format_double(r.quadrature_slack), format_double(r.wall_time)});
  t.write(os);
}

std::vector<SweepRecord> read_sweep_csv(std::istream& is) {
  const CsvTable t = CsvTable::read(is);
  const std::size_t cl = t.column("level"), ch = t.column("h"), cc = t.column("c_h"), cv = t.column("value"),
                    cs = t.column("quadrature_slack"), cw = t.column("wall_time");
  std::vector<SweepRecord> out;
  for (const auto& row : t.rows()) {
    SweepRecord r;
    r.level = static_cast<int>(parse_double(row[cl]));
    r.h = parse_double(row[ch]);
    r.c_h = parse_double(row[cc]);
    r.value = parse_double(row[cv]);
    r.quadrature_slack = parse_double(row[cs]);
    r.wall_time = parse_double(row[cw]);
    out.push_back(r);
  }
  return out;
}

}  // namespace fracsob
