#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace creditvote::pipeline {

// Whole-file CSV with a header row. Fields may be double-quoted; quotes
// inside quoted fields are doubled.
class CsvTable {
 public:
  static CsvTable read(const std::filesystem::path& path);
  static CsvTable parse(std::string_view text, std::string source = "<memory>");

  const std::vector<std::string>& header() const { return header_; }
  std::size_t size() const { return rows_.size(); }

  // Throws DataError naming every missing column.
  void require(std::initializer_list<std::string_view> columns) const;
  bool has(std::string_view column) const { return index_.contains(std::string(column)); }

  const std::string& text(std::size_t row, std::string_view column) const;
  long long integer(std::size_t row, std::string_view column) const;
  std::uint64_t unsigned_integer(std::size_t row, std::string_view column) const;
  double real(std::size_t row, std::string_view column) const;
  // Empty field -> nullopt.
  std::optional<double> optional_real(std::size_t row, std::string_view column) const;

 private:
  [[noreturn]] void fail(std::size_t row, std::string_view column, std::string_view why) const;
  std::size_t column_index(std::string_view column) const;

  std::string source_;
  std::vector<std::string> header_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::size_t> lines_;
};

// Buffers rows and writes the file in one go. Reals use the shortest
// round-trip-safe form at 17 significant digits.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  CsvWriter& field(std::string_view s);
  CsvWriter& field(long long v);
  CsvWriter& field(std::uint64_t v);
  CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
  CsvWriter& field(double v);
  CsvWriter& field(std::optional<double> v);
  CsvWriter& end_row();

  const std::string& str() const { return buffer_; }
  void write(const std::filesystem::path& path) const;

 private:
  void separator();
  std::size_t columns_;
  std::size_t in_row_ = 0;
  std::string buffer_;
};

std::string format_real(double v);

// Reads/writes whole files; failures raise DataError.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace creditvote::pipeline
