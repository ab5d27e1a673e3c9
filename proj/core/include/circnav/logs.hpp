#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace circnav {

/// Renders a double with 9 significant digits ("nan" for missing values).
std::string format_real(double v);

/// One CSV log: fixed header, rows of already-formatted cells.
class CsvTable {
 public:
  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  /// Cells must match the header width.
  void add_row(std::vector<std::string> cells);

  /// Index of a column; throws a schema error naming `table` and `column`.
  std::size_t column(std::string_view column, std::string_view table = "") const;

  double real(std::size_t row, std::size_t col) const;
  long integer(std::size_t row, std::size_t col) const;
  const std::string& text(std::size_t row, std::size_t col) const { return rows_[row][col]; }

  std::string to_csv() const;
  static CsvTable parse(std::string_view text, std::string_view table = "");

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Log file name (e.g. "relative.csv") to contents.
using LogSet = std::map<std::string, CsvTable>;

namespace logs {
inline constexpr const char* kWorld = "world.csv";
inline constexpr const char* kRelative = "relative.csv";
inline constexpr const char* kTarget = "target.csv";
inline constexpr const char* kController = "controller.csv";
inline constexpr const char* kUwb = "uwb.csv";
inline constexpr const char* kComms = "comms.csv";

std::vector<std::string> world_header();
std::vector<std::string> relative_header();
std::vector<std::string> target_header();
std::vector<std::string> controller_header();
std::vector<std::string> uwb_header();
std::vector<std::string> comms_header();
}  // namespace logs

void write_logs(const LogSet& logs, const std::string& dir);

/// Reads the standard log files present in `dir`; missing files are skipped.
LogSet read_logs(const std::string& dir);

}  // namespace circnav
