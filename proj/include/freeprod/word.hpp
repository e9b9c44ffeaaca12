#pragma once

#include <compare>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

namespace freeprod {

/// One letter of a reduced word: a basis label inside one free-product factor.
struct Letter {
    std::uint32_t factor = 0;
    std::int64_t label = 0;

    friend auto operator<=>(const Letter&, const Letter&) = default;
};

/// Reduced word: alternating sequence of letters (adjacent factors distinct).
/// The empty word represents the unit; block length is the sequence length.
using Word = std::vector<Letter>;

inline int block_length(const Word& w) { return static_cast<int>(w.size()); }

inline bool alternating(const Word& w) {
    for (std::size_t i = 1; i < w.size(); ++i)
        if (w[i].factor == w[i - 1].factor) return false;
    return true;
}

inline Word concat(const Word& a, const Word& b) {
    Word out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

inline Word prefix(const Word& w, std::size_t n) { return Word(w.begin(), w.begin() + n); }
inline Word suffix(const Word& w, std::size_t n) { return Word(w.end() - n, w.end()); }

/// Longest common prefix length of two words, letter by letter.
inline int common_prefix(const Word& a, const Word& b) {
    std::size_t n = 0;
    while (n < a.size() && n < b.size() && a[n] == b[n]) ++n;
    return static_cast<int>(n);
}

inline int common_suffix(const Word& a, const Word& b) {
    std::size_t n = 0;
    while (n < a.size() && n < b.size() && a[a.size() - 1 - n] == b[b.size() - 1 - n]) ++n;
    return static_cast<int>(n);
}

inline std::string word_to_string(const Word& w) {
    if (w.empty()) return "1";
    std::ostringstream os;
    for (const Letter& l : w) os << '(' << l.factor << ':' << l.label << ')';
    return os.str();
}

}  // namespace freeprod
