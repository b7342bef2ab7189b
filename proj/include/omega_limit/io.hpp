#pragma once

#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace omega_limit {

/// Shortest-safe text form of a double: 17 significant digits, '.' decimal
/// separator, independent of the global locale. Round-trips bit-exactly.
std::string format_double(double value);

/// Builds CSV text in memory: mandatory header, ',' separator, LF endings.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  CsvWriter& row(std::span<const double> values);
  CsvWriter& row(std::initializer_list<double> values);

  std::size_t columns() const noexcept { return columns_; }
  std::size_t rows() const noexcept { return rows_; }
  const std::string& str() const noexcept { return text_; }

 private:
  std::string text_;
  std::size_t columns_;
  std::size_t rows_ = 0;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable parse_csv(std::string_view text);

/// Writes via a sibling temporary file and rename, so readers never observe
/// a partially written artifact. Throws Error(io) on failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace omega_limit
