#include "creditvote/pipeline/csv.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "creditvote/errors.hpp"

namespace creditvote::pipeline {

namespace {

bool needs_quotes(std::string_view s) {
  return s.find_first_of(",\"\n\r") != std::string_view::npos;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError(fmt::format("write to {} failed", path.string()));
}

CsvTable CsvTable::read(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw DataError(fmt::format("missing input {}", path.string()));
  return parse(read_file(path), path.string());
}

CsvTable CsvTable::parse(std::string_view text, std::string source) {
  CsvTable t;
  t.source_ = std::move(source);
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  std::size_t line = 1;
  std::size_t record_line = 1;

  auto finish_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    if (!(record.size() == 1 && record[0].empty() && !any)) {
      if (t.header_.empty() && t.rows_.empty() && t.index_.empty()) {
        t.header_ = std::move(record);
        for (std::size_t i = 0; i < t.header_.size(); ++i) t.index_[t.header_[i]] = i;
      } else {
        if (record.size() != t.header_.size())
          throw DataError(fmt::format("{}:{}: expected {} fields, found {}", t.source_, record_line,
                                      t.header_.size(), record.size()));
        t.rows_.push_back(std::move(record));
        t.lines_.push_back(record_line);
      }
    }
    record = {};
    any = false;
    record_line = line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        ++line;
        finish_record();
        break;
      default:
        field += c;
        any = true;
    }
  }
  if (quoted) throw DataError(fmt::format("{}: unterminated quoted field", t.source_));
  if (any || !field.empty()) finish_record();
  if (t.header_.empty()) throw DataError(fmt::format("{}: empty file, header expected", t.source_));
  return t;
}

void CsvTable::require(std::initializer_list<std::string_view> columns) const {
  std::vector<std::string> missing;
  for (auto c : columns)
    if (!has(c)) missing.emplace_back(c);
  if (!missing.empty())
    throw DataError(fmt::format("{}: missing column(s) {}; header is {}", source_, fmt::join(missing, ", "),
                                fmt::join(header_, ",")));
}

std::size_t CsvTable::column_index(std::string_view column) const {
  auto it = index_.find(std::string(column));
  if (it == index_.end()) throw DataError(fmt::format("{}: missing column {}", source_, column));
  return it->second;
}

void CsvTable::fail(std::size_t row, std::string_view column, std::string_view why) const {
  throw DataError(fmt::format("{}:{}: column {}: {}", source_, lines_.at(row), column, why));
}

const std::string& CsvTable::text(std::size_t row, std::string_view column) const {
  return rows_.at(row)[column_index(column)];
}

long long CsvTable::integer(std::size_t row, std::string_view column) const {
  const auto& s = text(row, column);
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    fail(row, column, fmt::format("'{}' is not an integer", s));
  return v;
}

std::uint64_t CsvTable::unsigned_integer(std::size_t row, std::string_view column) const {
  const auto& s = text(row, column);
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    fail(row, column, fmt::format("'{}' is not a nonnegative integer", s));
  return v;
}

double CsvTable::real(std::size_t row, std::string_view column) const {
  const auto& s = text(row, column);
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    fail(row, column, fmt::format("'{}' is not a number", s));
  if (!std::isfinite(v)) fail(row, column, "non-finite value");
  return v;
}

std::optional<double> CsvTable::optional_real(std::size_t row, std::string_view column) const {
  if (text(row, column).empty()) return std::nullopt;
  return real(row, column);
}

// --- Writer

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  for (const auto& h : header) field(h);
  end_row();
}

void CsvWriter::separator() {
  if (in_row_++ > 0) buffer_ += ',';
}

CsvWriter& CsvWriter::field(std::string_view s) {
  separator();
  if (needs_quotes(s)) {
    buffer_ += '"';
    for (char c : s) {
      if (c == '"') buffer_ += '"';
      buffer_ += c;
    }
    buffer_ += '"';
  } else {
    buffer_ += s;
  }
  return *this;
}

CsvWriter& CsvWriter::field(long long v) {
  separator();
  buffer_ += fmt::format("{}", v);
  return *this;
}

CsvWriter& CsvWriter::field(std::uint64_t v) {
  separator();
  buffer_ += fmt::format("{}", v);
  return *this;
}

CsvWriter& CsvWriter::field(double v) {
  separator();
  buffer_ += format_real(v);
  return *this;
}

CsvWriter& CsvWriter::field(std::optional<double> v) {
  separator();
  if (v) buffer_ += format_real(*v);
  return *this;
}

CsvWriter& CsvWriter::end_row() {
  if (in_row_ != columns_)
    throw std::logic_error(fmt::format("csv row has {} fields, header has {}", in_row_, columns_));
  buffer_ += '\n';
  in_row_ = 0;
  return *this;
}

void CsvWriter::write(const std::filesystem::path& path) const { write_file(path, buffer_); }

}  // namespace creditvote::pipeline
