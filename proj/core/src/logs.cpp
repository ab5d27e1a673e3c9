#include "circnav/logs.hpp"

#include "circnav/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace circnav {

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // folds -0
  return fmt::format("{:.9g}", v);
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw Error(ErrorKind::schema,
                fmt::format("row has {} cells but the header has {}", cells.size(), header_.size()));
  }
  rows_.push_back(std::move(cells));
}

std::size_t CsvTable::column(std::string_view name, std::string_view table) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  throw Error(ErrorKind::schema,
              table.empty() ? fmt::format("missing column '{}'", name)
                            : fmt::format("missing column '{}' in {}", name, table));
}

double CsvTable::real(std::size_t row, std::size_t col) const {
  const std::string& s = rows_[row][col];
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::schema, fmt::format("column '{}' row {}: '{}' is not a number", header_[col], row, s));
  }
  return v;
}

long CsvTable::integer(std::size_t row, std::size_t col) const {
  const std::string& s = rows_[row][col];
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::schema, fmt::format("column '{}' row {}: '{}' is not an integer", header_[col], row, s));
  }
  return v;
}

std::string CsvTable::to_csv() const {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  emit(header_);
  for (const auto& r : rows_) emit(r);
  return out;
}

CsvTable CsvTable::parse(std::string_view text, std::string_view table) {
  std::vector<std::vector<std::string>> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t c = 0;
    while (true) {
      const std::size_t comma = line.find(',', c);
      cells.emplace_back(line.substr(c, comma == std::string_view::npos ? std::string_view::npos : comma - c));
      if (comma == std::string_view::npos) break;
      c = comma + 1;
    }
    lines.push_back(std::move(cells));
  }
  if (lines.empty()) {
    throw Error(ErrorKind::schema, fmt::format("{} has no header row", table.empty() ? "csv" : table));
  }
  CsvTable t(std::move(lines.front()));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].size() != t.header_.size()) {
      throw Error(ErrorKind::schema, fmt::format("{} line {} has {} cells, expected {}",
                                                 table.empty() ? "csv" : table, i + 1, lines[i].size(),
                                                 t.header_.size()));
    }
    t.rows_.push_back(std::move(lines[i]));
  }
  return t;
}

namespace logs {

std::vector<std::string> world_header() {
  return {"k", "t", "entity", "alive", "px", "py", "vx", "vy", "psi"};
}

std::vector<std::string> relative_header() {
  return {"k", "t", "agent", "neighbor", "pair", "kind", "px_hat", "py_hat", "vx_hat", "vy_hat",
          "px_true", "py_true", "error", "trace_P"};
}

std::vector<std::string> target_header() {
  return {"k", "t", "agent", "mode", "los", "e_m", "e_e", "px_hat", "py_hat", "px_true", "py_true", "trace_P"};
}

std::vector<std::string> controller_header() {
  return {"k", "t", "agent", "theta", "p_star_x", "p_star_y", "u_raw_x", "u_raw_y", "u_x", "u_y",
          "psi", "psi_hat", "yaw_rate", "radius_error", "radius_error_true"};
}

std::vector<std::string> uwb_header() {
  return {"k", "n", "pair", "raw", "outlier", "smoothed", "held", "emitted"};
}

std::vector<std::string> comms_header() {
  return {"step", "sender", "recipient", "kind", "delivered"};
}

}  // namespace logs

void write_logs(const LogSet& set, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::configuration, fmt::format("cannot create output directory {}: {}", dir, ec.message()));
  for (const auto& [name, table] : set) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw Error(ErrorKind::configuration, fmt::format("cannot write {}/{}", dir, name));
    out << table.to_csv();
  }
}

LogSet read_logs(const std::string& dir) {
  namespace fs = std::filesystem;
  LogSet set;
  for (const char* name : {logs::kWorld, logs::kRelative, logs::kTarget, logs::kController, logs::kUwb, logs::kComms}) {
    const fs::path p = fs::path(dir) / name;
    if (!fs::exists(p)) continue;
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    set.emplace(name, CsvTable::parse(buf.str(), name));
  }
  return set;
}

}  // namespace circnav
