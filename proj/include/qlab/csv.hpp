#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace qlab::csv {

/// Shortest representation that parses back to the identical double.
std::string format_double(double v);

/// Exact inverse of format_double. Throws std::invalid_argument on bad text.
double parse_double(std::string_view text);

/// One parsed data row. Column positions are kept for error reporting.
class Row {
 public:
  Row(std::string source, std::size_t line, std::vector<std::string> fields, std::vector<std::size_t> columns);

  std::size_t size() const { return fields_.size(); }
  std::size_t line() const { return line_; }
  const std::string& text(std::size_t i) const { return fields_.at(i); }

  double real(std::size_t i) const;
  long long integer(std::size_t i) const;
  /// Accepts exactly "0" or "1".
  bool flag(std::size_t i) const;

  [[noreturn]] void fail(std::size_t i, const std::string& what) const;

 private:
  std::string source_;
  std::size_t line_;
  std::vector<std::string> fields_;
  std::vector<std::size_t> columns_;
};

/// A whole CSV document: leading '#' comment lines, one header, data rows.
struct Document {
  std::vector<std::string> comments;  // without the leading "# "
  std::vector<Row> rows;
};

/// Reads `path`, checks the header matches `header` exactly and that each
/// row has the header's field count. Throws IoError / ParseError.
Document read(const std::filesystem::path& path, std::string_view header);
Document parse(std::string_view text, std::string_view header, const std::string& source = "<memory>");

/// Writes text to `path`, throwing IoError on failure.
void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

/// Looks up "key=value" among comment lines.
std::string comment_value(const Document& doc, std::string_view key, std::string_view fallback = {});

}  // namespace qlab::csv
