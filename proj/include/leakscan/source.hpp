//===- source.hpp - Source files, spans and diagnostics ----------*- C++ -*-===//
//
// Every token and AST node carries a Span. Spans are (file, offset, length)
// triples; line/column rendering goes through SourceManager.
//
//===----------------------------------------------------------------------===//
#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace leakscan {

using FileId = std::uint32_t;

struct Span {
  FileId file = 0;
  std::uint32_t offset = 0;
  std::uint32_t length = 0;

  std::uint32_t end() const { return offset + length; }
  bool contains(const Span &other) const {
    return file == other.file && offset <= other.offset &&
           other.end() <= end();
  }
  /// Smallest span covering both; both must be in the same file.
  static Span cover(const Span &a, const Span &b);

  auto operator<=>(const Span &) const = default;
};

struct LineCol {
  std::uint32_t line = 1;
  std::uint32_t column = 1;
};

/// Owns the text of every loaded source file.
class SourceManager {
public:
  FileId add(std::string path, std::string text);

  const std::string &path(FileId id) const { return files_.at(id).path; }
  const std::string &text(FileId id) const { return files_.at(id).text; }
  std::size_t size() const { return files_.size(); }

  LineCol line_col(const Span &span) const;
  std::string_view slice(const Span &span) const;
  /// Full text of the source line containing the start of span.
  std::string_view line_text(const Span &span) const;
  /// "file:line:col"
  std::string describe(const Span &span) const;

private:
  struct File {
    std::string path;
    std::string text;
    std::vector<std::uint32_t> line_starts;
  };
  std::vector<File> files_;
};

/// Base of all errors raised by the analyzer. Analysis-phase problems are
/// reported as diagnostics instead; only frontend, I/O and decoding failures
/// throw.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class SpannedError : public Error {
public:
  SpannedError(const std::string &what, Span span)
      : Error(what), span_(span) {}
  Span span() const { return span_; }

private:
  Span span_;
};

class LexError : public SpannedError {
  using SpannedError::SpannedError;
};

class ParseError : public SpannedError {
  using SpannedError::SpannedError;
};

class LinkError : public Error {
public:
  explicit LinkError(std::vector<std::string> problems);
  const std::vector<std::string> &problems() const { return problems_; }

private:
  std::vector<std::string> problems_;
};

class DecodeError : public Error {
  using Error::Error;
};

class ManifestError : public Error {
  using Error::Error;
};

class IoError : public Error {
  using Error::Error;
};

std::string read_file(const std::string &path);
void write_file(const std::string &path, std::string_view contents);

} // namespace leakscan
