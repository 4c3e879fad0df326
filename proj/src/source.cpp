#include "leakscan/source.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace leakscan {

Span Span::cover(const Span &a, const Span &b) {
  std::uint32_t lo = std::min(a.offset, b.offset);
  std::uint32_t hi = std::max(a.end(), b.end());
  return Span{a.file, lo, hi - lo};
}

FileId SourceManager::add(std::string path, std::string text) {
  File f{std::move(path), std::move(text), {0}};
  for (std::uint32_t i = 0; i < f.text.size(); ++i)
    if (f.text[i] == '\n')
      f.line_starts.push_back(i + 1);
  files_.push_back(std::move(f));
  return static_cast<FileId>(files_.size() - 1);
}

LineCol SourceManager::line_col(const Span &span) const {
  const File &f = files_.at(span.file);
  auto it = std::upper_bound(f.line_starts.begin(), f.line_starts.end(),
                             span.offset);
  auto line = static_cast<std::uint32_t>(it - f.line_starts.begin());
  return LineCol{line, span.offset - f.line_starts[line - 1] + 1};
}

std::string_view SourceManager::slice(const Span &span) const {
  const std::string &t = files_.at(span.file).text;
  if (span.offset >= t.size())
    return {};
  return std::string_view(t).substr(span.offset, span.length);
}

std::string_view SourceManager::line_text(const Span &span) const {
  const File &f = files_.at(span.file);
  LineCol lc = line_col(span);
  std::uint32_t start = f.line_starts[lc.line - 1];
  std::uint32_t end = lc.line < f.line_starts.size()
                          ? f.line_starts[lc.line] - 1
                          : static_cast<std::uint32_t>(f.text.size());
  return std::string_view(f.text).substr(start, end - start);
}

std::string SourceManager::describe(const Span &span) const {
  LineCol lc = line_col(span);
  return path(span.file) + ":" + std::to_string(lc.line) + ":" +
         std::to_string(lc.column);
}

static std::string join_problems(const std::vector<std::string> &problems) {
  std::string out = "link failed:";
  for (const auto &p : problems)
    out += "\n  " + p;
  return out;
}

LinkError::LinkError(std::vector<std::string> problems)
    : Error(join_problems(problems)), problems_(std::move(problems)) {}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string &path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out)
    throw IoError("write to '" + path + "' failed");
}

} // namespace leakscan
