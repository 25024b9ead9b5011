#pragma once

// Small helpers shared by the rule-file readers.

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lingware/featstruct.hpp"

namespace lingware::text {

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

/// Removes a `//` comment, ignoring occurrences inside double quotes.
inline std::string strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (!quoted && line[i] == '/' && i + 1 < line.size() && line[i + 1] == '/') return std::string(line.substr(0, i));
  }
  return std::string(line);
}

inline bool starts_with_word(std::string_view line, std::string_view kw) {
  return line.substr(0, kw.size()) == kw && (line.size() == kw.size() || std::isspace(static_cast<unsigned char>(line[kw.size()])));
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// A logical line: physical lines joined while brackets stay open, plus
/// indented continuation lines.
struct Line {
  int number = 0;
  std::string text;
};

inline std::vector<Line> logical_lines(std::string_view content) {
  std::vector<Line> out;
  std::istringstream in{std::string(content)};
  std::string raw;
  int lineno = 0;
  Line cur;
  int depth = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string s = strip_comment(raw);
    if (depth == 0) {
      if (trim(s).empty()) continue;
      // An indented line continues the previous one.
      if ((s[0] == ' ' || s[0] == '\t') && !out.empty()) {
        cur = std::move(out.back());
        out.pop_back();
      } else {
        cur = Line{lineno, {}};
      }
    }
    cur.text += (cur.text.empty() ? "" : " ") + trim(s);
    bool quoted = false;
    for (char c : s) {
      if (c == '"') quoted = !quoted;
      if (quoted) continue;
      if (c == '[' || c == '{' || c == '(') ++depth;
      if (c == ']' || c == '}' || c == ')') --depth;
    }
    if (depth <= 0) {
      depth = 0;
      out.push_back(cur);
      cur = Line{};
    }
  }
  if (!cur.text.empty()) out.push_back(cur);
  return out;
}

/// Scans one FS value (`[..]`, `{..}`, `?V`, `?V:value`, `"q"`, atom)
/// starting at `pos`; returns the index just past it.
inline std::size_t scan_value(std::string_view s, std::size_t pos) {
  auto fail = [&] { throw SyntaxError("malformed feature value", pos); };
  if (pos >= s.size()) fail();
  char c = s[pos];
  if (c == '[' || c == '{') {
    int depth = 0;
    bool quoted = false;
    for (std::size_t i = pos; i < s.size(); ++i) {
      if (s[i] == '"') quoted = !quoted;
      if (quoted) continue;
      if (s[i] == '[' || s[i] == '{') ++depth;
      if (s[i] == ']' || s[i] == '}') {
        if (--depth == 0) return i + 1;
      }
    }
    fail();
  }
  if (c == '"') {
    auto e = s.find('"', pos + 1);
    if (e == std::string_view::npos) fail();
    return e + 1;
  }
  if (c == '?') {
    std::size_t i = pos + 1;
    while (i < s.size() && detail::is_ident_char(s[i])) ++i;
    if (i < s.size() && s[i] == ':' ) return scan_value(s, i + 1);
    return i;
  }
  std::size_t i = pos;
  while (i < s.size() && detail::is_ident_char(s[i])) ++i;
  if (i == pos) fail();
  return i;
}

/// `NP[agr=?A] VP ?X:[f=g]` -> {("NP","[agr=?A]"), ("VP",""), ("?","")...}
struct CatText {
  std::string cat;
  std::string fs;  // empty when absent
};

inline std::vector<CatText> split_categories(std::string_view s) {
  std::vector<CatText> out;
  std::size_t i = 0;
  auto skip = [&] {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  };
  for (;;) {
    skip();
    if (i >= s.size()) break;
    std::size_t b = i;
    while (i < s.size() && detail::is_ident_char(s[i]) && s[i] != '?') ++i;
    if (i == b) throw SyntaxError("expected a category name", i);
    CatText ct{std::string(s.substr(b, i - b)), {}};
    std::size_t save = i;
    skip();
    if (i < s.size() && (s[i] == '[' || s[i] == '?')) {
      std::size_t e = scan_value(s, i);
      ct.fs = std::string(s.substr(i, e - i));
      i = e;
    } else {
      i = save;
    }
    out.push_back(std::move(ct));
  }
  return out;
}

}  // namespace lingware::text
