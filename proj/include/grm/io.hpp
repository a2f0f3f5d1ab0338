#pragma once

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace grm::io {

/// Reads a text file line by line. Gzip-compressed input is detected and
/// decompressed transparently.
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path);
  ~LineReader();
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  /// Next line without its trailing newline (and '\r'), or nullopt at EOF.
  std::optional<std::string> next();
  /// 1-based number of the line last returned.
  std::size_t line_number() const noexcept { return line_; }
  const std::string& source() const noexcept { return source_; }

 private:
  void* handle_;
  std::string source_;
  std::size_t line_ = 0;
  std::vector<char> buf_;
};

/// Buffered text writer that throws on I/O failure.
class TextWriter {
 public:
  explicit TextWriter(const std::filesystem::path& path);
  ~TextWriter();
  TextWriter(const TextWriter&) = delete;
  TextWriter& operator=(const TextWriter&) = delete;

  void write(std::string_view text);
  void close();

 private:
  std::FILE* file_;
  std::string path_;
};

/// Shortest decimal form that parses back to exactly `value`.
std::string format_exact(double value);
/// Fixed-point with two decimals, as used by the ONE movement format.
std::string format_fixed2(double value);

/// Parses a whole token as a double / unsigned integer; nullopt if malformed.
std::optional<double> parse_double(std::string_view token);
std::optional<unsigned long long> parse_uint(std::string_view token);

/// Splits on runs of spaces/tabs.
std::vector<std::string_view> split_ws(std::string_view line);
/// Splits on a single delimiter character; fields are trimmed.
std::vector<std::string_view> split_char(std::string_view line, char delim);
std::string_view trim(std::string_view s);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
/// Hex SHA-256 of a string.
std::string sha256_string(std::string_view data);

}  // namespace grm::io
