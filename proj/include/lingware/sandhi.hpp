#pragma once

// Inter-word spelling: elision, hyphen realisation, `cet` reduction and
// silent `#`, written as two-level rules over the token lexical forms
// joined by the boundary symbol `##`, followed by a table-driven
// contraction pass (de le -> du).
//
// A sandhi file is a spelling-rule file with four extra directives:
//
//   token - = -%-          lexical spelling of a citation form
//   contract de le = du    adjacent surfaces fused into one
//   probe left va vont     neighbours used to enumerate surface variants
//   probe right avoir vol
//
// Segmentation is driven by the renderer: candidate token sequences are
// proposed from a variant table and a known-word callback, and only those
// that render back to the input are kept.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lingware/textutil.hpp"
#include "lingware/twolevel.hpp"
#include "lingware/unicode.hpp"

namespace lingware::sandhi {

enum class TokenKind { Word, Hyphen, Multiword };

struct LexToken {
  std::string form;  // citation form: "le", "#onze", "-", "--", "est-ce que"
  TokenKind kind = TokenKind::Word;

  static LexToken make(std::string form) {
    LexToken t;
    t.form = utf8::nfc(form);
    if (t.form == "-" || t.form == "--") t.kind = TokenKind::Hyphen;
    else if (t.form.find(' ') != std::string::npos) t.kind = TokenKind::Multiword;
    return t;
  }

  friend auto operator<=>(const LexToken&, const LexToken&) = default;
};

using TokenSeq = std::vector<LexToken>;

inline std::string join_tokens(const TokenSeq& ts, std::string_view sep = " ") {
  std::string s;
  for (std::size_t i = 0; i < ts.size(); ++i) s += (i ? std::string(sep) : "") + ts[i].form;
  return s;
}

struct Contraction {
  std::string first, second, fused;
};

struct Segmented {
  TokenSeq tokens;
  char terminal = 0;  // '?', '!', '.' or 0
};

class Sandhi {
public:
  Sandhi() : rules_(twolevel::CompiledSpelling::compile({}, {})) {}

  static Sandhi from_text(std::string_view content, const std::string& origin = "<sandhi>") {
    Sandhi s;
    std::string rules;
    std::istringstream in{std::string(content)};
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
      ++lineno;
      std::string line = text::trim(text::strip_comment(raw));
      auto fail = [&](const std::string& m) {
        return twolevel::RuleError(origin + ":" + std::to_string(lineno) + ": " + m);
      };
      if (text::starts_with_word(line, "token")) {
        auto eq = line.find(" = ");
        if (eq == std::string::npos) throw fail("expected 'token FORM = LEXICAL'");
        s.lexical_[utf8::nfc(text::trim(line.substr(5, eq - 5)))] = utf8::nfc(text::trim(line.substr(eq + 3)));
        rules += "\n";
      } else if (text::starts_with_word(line, "contract")) {
        auto eq = line.find(" = ");
        auto parts = twolevel::detail::split_ws(line.substr(8, eq == std::string::npos ? 0 : eq - 8));
        if (eq == std::string::npos || parts.size() != 2) throw fail("expected 'contract A B = AB'");
        s.contractions_.push_back({utf8::nfc(parts[0]), utf8::nfc(parts[1]), utf8::nfc(text::trim(line.substr(eq + 3)))});
        rules += "\n";
      } else if (text::starts_with_word(line, "probe")) {
        auto parts = twolevel::detail::split_ws(line.substr(5));
        if (parts.empty() || (parts[0] != "left" && parts[0] != "right")) throw fail("expected 'probe left|right WORD...'");
        auto& dst = parts[0] == "left" ? s.probe_left_ : s.probe_right_;
        for (std::size_t i = 1; i < parts.size(); ++i) dst.push_back(utf8::nfc(parts[i]));
        rules += "\n";
      } else {
        rules += raw + "\n";
      }
    }
    s.rules_ = twolevel::compile_rule_file(rules, origin);
    return s;
  }

  const twolevel::CompiledSpelling& rules() const { return rules_; }
  const std::vector<Contraction>& contractions() const { return contractions_; }

  std::u32string lexical_of(const LexToken& t) const {
    auto it = lexical_.find(t.form);
    return utf8::decode(it == lexical_.end() ? t.form : it->second);
  }

  /// Per-token surfaces and whether each following boundary is realised
  /// as a space, before contraction.
  struct Rendered {
    std::vector<std::string> surfaces;
    std::vector<bool> space_after;
  };

  Rendered render_tokens(const TokenSeq& tokens) const {
    Rendered out;
    if (tokens.empty()) return out;
    std::vector<twolevel::Segment> segs;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) segs.push_back({std::u32string(1, twolevel::kWordBoundary), nullptr});
      segs.push_back({lexical_of(tokens[i]), nullptr});
    }
    auto alignments = rules_.realize(segs);
    out.surfaces.resize(tokens.size());
    out.space_after.assign(tokens.size(), false);
    if (alignments.empty()) {
      // Every lexical symbol has at least its identity or a declared pair,
      // so this only happens when the rule set is contradictory.
      for (std::size_t i = 0; i < tokens.size(); ++i) out.surfaces[i] = tokens[i].form;
      return out;
    }
    const auto& a = alignments.front();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      out.surfaces[i] = a.surface_of(static_cast<int>(2 * i));
      if (i + 1 < tokens.size()) out.space_after[i] = !a.surface_of(static_cast<int>(2 * i + 1)).empty();
    }
    return out;
  }

  /// Surface text for a token sequence (lower case, no punctuation).
  std::string render(const TokenSeq& tokens) const {
    Rendered r = render_tokens(tokens);
    std::vector<std::string> surf = r.surfaces;
    std::vector<bool> space = r.space_after;
    for (std::size_t i = 0; i + 1 < surf.size(); ++i) {
      if (!space[i]) continue;
      for (const auto& c : contractions_) {
        if (surf[i] == c.first && surf[i + 1] == c.second) {
          surf[i] = c.fused;
          space[i] = space[i + 1];
          surf.erase(surf.begin() + static_cast<long>(i) + 1);
          space.erase(space.begin() + static_cast<long>(i) + 1);
          break;
        }
      }
    }
    std::string out;
    for (std::size_t i = 0; i < surf.size(); ++i) {
      out += surf[i];
      if (i + 1 < surf.size() && space[i]) out += ' ';
    }
    return out;
  }

  /// Registers citation forms whose surface may differ from the citation
  /// (function words, hyphens, multiword units).
  void add_vocabulary(const std::vector<std::string>& forms) {
    for (const auto& f : forms) {
      LexToken t = LexToken::make(f);
      std::vector<std::optional<std::string>> lefts{std::nullopt}, rights{std::nullopt};
      for (const auto& l : probe_left_) lefts.push_back(l);
      for (const auto& r : probe_right_) rights.push_back(r);
      for (const auto& l : lefts)
        for (const auto& r : rights) {
          TokenSeq seq;
          if (l) seq.push_back(LexToken::make(*l));
          seq.push_back(t);
          if (r) seq.push_back(LexToken::make(*r));
          auto rt = render_tokens(seq);
          std::string s = rt.surfaces[l ? 1 : 0];
          if (!s.empty()) variants_[s].insert({t});
        }
    }
    for (const auto& c : contractions_) variants_[c.fused].insert({LexToken::make(c.first), LexToken::make(c.second)});
  }

  using KnownWord = std::function<std::vector<std::string>(std::string_view piece)>;

  /// All token sequences rendering as `text`. `known` proposes citation
  /// forms for a letter run (content words, proper names).
  std::vector<Segmented> segment(std::string_view input, const KnownWord& known) const {
    std::string text = normalize(input);
    char terminal = 0;
    while (!text.empty()) {
      char c = text.back();
      if (c == '?' || c == '!' || c == '.') {
        if (!terminal) terminal = c;
        text.pop_back();
        text = text::trim(text);
      } else {
        break;
      }
    }
    // Leading inverted marks.
    for (std::string_view lead : {"¿", "¡"})
      while (text.rfind(lead, 0) == 0) text = text::trim(text.substr(lead.size()));
    std::set<TokenSeq> found;
    if (!text.empty()) {
      segment_text(text, known, found);
      std::string lowered = utf8::lower_first(text);
      if (lowered != text) segment_text(lowered, known, found);
    }
    std::vector<Segmented> out;
    for (const auto& ts : found) out.push_back({ts, terminal});
    return out;
  }

  static std::string normalize(std::string_view input) {
    std::string s = utf8::nfc(input);
    std::string out;
    // Typographic apostrophe and whitespace runs.
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s.compare(i, 3, "’") == 0) {
        out += '\'';
        i += 2;
        continue;
      }
      char c = s[i];
      if (c == '\t' || c == '\n' || c == '\r') c = ' ';
      if (c == ' ' && (out.empty() || out.back() == ' ')) continue;
      out += c;
    }
    out = text::trim(out);
    // "vol ?" -> "vol?"
    std::string cleaned;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i] == ' ' && i + 1 < out.size() && (out[i + 1] == '?' || out[i + 1] == '!' || out[i + 1] == '.')) continue;
      cleaned += out[i];
    }
    return cleaned;
  }

private:
  void segment_text(const std::string& text, const KnownWord& known, std::set<TokenSeq>& found) const {
    std::u32string t = utf8::decode(text);
    TokenSeq cur;
    search(t, 0, known, cur, text, found);
  }

  static bool is_word_char(char32_t c) { return c != U' ' && c != U'-' && c != U'\''; }

  void search(const std::u32string& t, std::size_t i, const KnownWord& known, TokenSeq& cur, const std::string& text,
              std::set<TokenSeq>& found) const {
    if (i < t.size() && t[i] == U' ') ++i;
    if (i == t.size()) {
      if (!cur.empty() && render(cur) == text) found.insert(cur);
      return;
    }
    if (cur.size() > t.size()) return;
    auto at_boundary = [&](std::size_t j, const std::u32string& v) {
      if (j == t.size() || t[j] == U' ' || t[j] == U'-') return true;
      return !v.empty() && (v.back() == U'\'' || v.back() == U'-');
    };
    // Variant table.
    for (const auto& [surf, seqs] : variants_) {
      std::u32string v = utf8::decode(surf);
      if (t.compare(i, v.size(), v) != 0 || !at_boundary(i + v.size(), v)) continue;
      for (const auto& seq : seqs) {
        cur.insert(cur.end(), seq.begin(), seq.end());
        search(t, i + v.size(), known, cur, text, found);
        cur.resize(cur.size() - seq.size());
      }
    }
    // Letter run through the callback, also as a silent-# word.
    std::size_t j = i;
    while (j < t.size() && is_word_char(t[j])) ++j;
    if (j > i && known) {
      std::string piece = utf8::encode(std::u32string_view(t).substr(i, j - i));
      std::set<std::string> cands;
      for (auto& c : known(piece)) cands.insert(c);
      for (auto& c : known("#" + piece)) cands.insert(c);
      for (const auto& c : cands) {
        cur.push_back(LexToken::make(c));
        search(t, j, known, cur, text, found);
        cur.pop_back();
      }
    }
  }

  twolevel::CompiledSpelling rules_;
  std::map<std::string, std::string> lexical_;
  std::vector<Contraction> contractions_;
  std::vector<std::string> probe_left_, probe_right_;
  std::map<std::string, std::set<TokenSeq>> variants_;
};

}  // namespace lingware::sandhi
