#include "qlab/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "qlab/errors.hpp"

namespace qlab::csv {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a real number: '" + std::string(text) + "'");
  }
  return v;
}

Row::Row(std::string source, std::size_t line, std::vector<std::string> fields, std::vector<std::size_t> columns)
    : source_(std::move(source)), line_(line), fields_(std::move(fields)), columns_(std::move(columns)) {}

void Row::fail(std::size_t i, const std::string& what) const {
  throw ParseError(source_, line_, i < columns_.size() ? columns_[i] : 1, what);
}

double Row::real(std::size_t i) const {
  const std::string& f = fields_.at(i);
  double v = 0.0;
  const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
  if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size()) {
    fail(i, "expected a real number, got '" + f + "'");
  }
  return v;
}

long long Row::integer(std::size_t i) const {
  const std::string& f = fields_.at(i);
  long long v = 0;
  const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
  if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size()) {
    fail(i, "expected an integer, got '" + f + "'");
  }
  return v;
}

bool Row::flag(std::size_t i) const {
  const std::string& f = fields_.at(i);
  if (f == "0") return false;
  if (f == "1") return true;
  fail(i, "expected 0 or 1, got '" + f + "'");
}

namespace {

void split_fields(std::string_view line, std::vector<std::string>& fields, std::vector<std::size_t>& columns) {
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    const auto end = comma == std::string_view::npos ? line.size() : comma;
    fields.emplace_back(line.substr(start, end - start));
    columns.push_back(start + 1);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
}

}  // namespace

Document parse(std::string_view text, std::string_view header, const std::string& source) {
  Document doc;
  bool saw_header = false;
  std::size_t expected_fields = 1;
  for (char c : header) expected_fields += c == ',' ? 1 : 0;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (!saw_header) {
      if (!line.empty() && line.front() == '#') {
        line.remove_prefix(1);
        if (!line.empty() && line.front() == ' ') line.remove_prefix(1);
        doc.comments.emplace_back(line);
        continue;
      }
      if (line != header) {
        throw ParseError(source, line_no, 1, "expected header '" + std::string(header) + "'");
      }
      saw_header = true;
      continue;
    }
    if (line.empty()) {
      if (pos >= text.size()) break;
      throw ParseError(source, line_no, 1, "empty line");
    }
    std::vector<std::string> fields;
    std::vector<std::size_t> columns;
    split_fields(line, fields, columns);
    if (fields.size() != expected_fields) {
      throw ParseError(source, line_no, columns.back(),
                       "expected " + std::to_string(expected_fields) + " fields, got " + std::to_string(fields.size()));
    }
    doc.rows.emplace_back(source, line_no, std::move(fields), std::move(columns));
  }
  if (!saw_header) throw ParseError(source, line_no + 1, 1, "missing header");
  return doc;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Document read(const std::filesystem::path& path, std::string_view header) {
  return parse(read_file(path), header, path.string());
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::string comment_value(const Document& doc, std::string_view key, std::string_view fallback) {
  for (const auto& c : doc.comments) {
    std::string_view line(c);
    std::size_t pos = 0;
    while (pos < line.size()) {
      auto sp = line.find(' ', pos);
      if (sp == std::string_view::npos) sp = line.size();
      const auto token = line.substr(pos, sp - pos);
      const auto eq = token.find('=');
      if (eq != std::string_view::npos && token.substr(0, eq) == key) return std::string(token.substr(eq + 1));
      pos = sp + 1;
    }
  }
  return std::string(fallback);
}

}  // namespace qlab::csv
