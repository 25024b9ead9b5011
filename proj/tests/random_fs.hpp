#pragma once

// Small random feature structures for law checks: depth <= 4, at most six
// attributes per node, atom sets over a tiny vocabulary and a few shared
// variables so reentrancy is exercised.

#include <algorithm>
#include <random>
#include <string>

#include "lingware/featstruct.hpp"

namespace lingware::testing {

class RandomFs {
public:
  explicit RandomFs(std::mt19937& rng) : rng_(rng) {}

  // Texts that bind one variable to clashing atoms are redrawn.
  FeatureStructure make() {
    for (;;) {
      try {
        return FeatureStructure::parse(text(0));
      } catch (const SyntaxError&) {
      }
    }
  }

  std::string text(int depth) {
    std::string out = "[";
    int n = pick(0, depth == 0 ? 4 : 3);
    // Attributes are drawn without replacement.
    std::string attrs = "abcdef";
    std::shuffle(attrs.begin(), attrs.end(), rng_);
    for (int i = 0; i < n; ++i) {
      if (i) out += ", ";
      out += attrs[i];
      out += '=';
      out += value(depth + 1);
    }
    return out + "]";
  }

private:
  std::string value(int depth) {
    int r = pick(0, 9);
    if (depth < 4 && r < 3) return text(depth);
    if (r < 5) return atoms();
    if (r < 6) return "_";
    std::string v = "?V" + std::to_string(pick(0, 2));
    if (pick(0, 1)) v += ":" + atoms();
    return v;
  }

  std::string atoms() {
    static const char* vocab[] = {"p", "q", "r"};
    int mask = pick(1, 7);
    std::string out;
    int count = 0;
    for (int i = 0; i < 3; ++i)
      if (mask & (1 << i)) {
        out += (count++ ? "," : "");
        out += vocab[i];
      }
    return count > 1 ? "{" + out + "}" : out;
  }

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  std::mt19937& rng_;
};

}  // namespace lingware::testing
