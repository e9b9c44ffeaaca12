#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "freeprod/algebra.hpp"
#include "freeprod/word.hpp"

namespace freeprod {

/// Sparse linear combination of reduced words. Immutable value semantics; no
/// stored coefficient is zero (float mode prunes below the family tolerance).
template <class S>
class Element {
public:
    using Terms = std::map<Word, S>;

    Element() = default;

    static Element zero() { return {}; }
    static Element unit() { return single(Word{}); }
    static Element single(Word w, S c = scalar_traits<S>::one()) {
        Element e;
        if (!scalar_traits<S>::is_zero(c, 0.0)) e.terms_.emplace(std::move(w), std::move(c));
        return e;
    }

    bool is_zero() const { return terms_.empty(); }
    std::size_t support_size() const { return terms_.size(); }
    const Terms& terms() const { return terms_; }

    S coefficient(const Word& w) const {
        auto it = terms_.find(w);
        return it == terms_.end() ? scalar_traits<S>::zero() : it->second;
    }

    int max_level() const {
        int lvl = 0;
        for (const auto& [w, c] : terms_) lvl = std::max(lvl, block_length(w));
        return lvl;
    }

    void add_term(const Word& w, const S& c, double prune_tol) {
        auto [it, inserted] = terms_.try_emplace(w, c);
        if (!inserted) {
            it->second += c;
            if (scalar_traits<S>::is_zero(it->second, prune_tol)) terms_.erase(it);
        } else if (scalar_traits<S>::is_zero(it->second, prune_tol)) {
            terms_.erase(it);
        }
    }

    Element& add_scaled(const Element& other, const S& factor, double prune_tol) {
        for (const auto& [w, c] : other.terms_) add_term(w, factor * c, prune_tol);
        return *this;
    }

    friend Element operator+(const Element& a, const Element& b) {
        Element out = a;
        out.add_scaled(b, scalar_traits<S>::one(), 0.0);
        return out;
    }
    friend Element operator-(const Element& a, const Element& b) {
        Element out = a;
        out.add_scaled(b, -scalar_traits<S>::one(), 0.0);
        return out;
    }
    friend Element operator*(const S& c, const Element& a) {
        Element out;
        if (scalar_traits<S>::is_zero(c, 0.0)) return out;
        for (const auto& [w, x] : a.terms_) out.terms_.emplace(w, c * x);
        return out;
    }

    friend bool operator==(const Element&, const Element&) = default;

private:
    Terms terms_;
};

/// Orthonormality of the reduced-word basis makes the trace inner product a
/// coefficientwise sum: <a,b> = sum a_w conj(b_w).
template <class S>
S inner_product(const Element<S>& a, const Element<S>& b) {
    S acc = scalar_traits<S>::zero();
    const auto& ta = a.terms();
    const auto& tb = b.terms();
    auto ia = ta.begin();
    auto ib = tb.begin();
    while (ia != ta.end() && ib != tb.end()) {
        if (ia->first < ib->first)
            ++ia;
        else if (ib->first < ia->first)
            ++ib;
        else {
            acc += ia->second * scalar_traits<S>::conjugate(ib->second);
            ++ia;
            ++ib;
        }
    }
    return acc;
}

template <class S>
typename scalar_traits<S>::real_type norm_sq(const Element<S>& a) {
    typename scalar_traits<S>::real_type acc{};
    for (const auto& [w, c] : a.terms()) acc += scalar_traits<S>::abs_sq(c);
    return acc;
}

template <class S>
double two_norm(const Element<S>& a) {
    return std::sqrt(scalar_traits<S>::to_double(norm_sq(a)));
}

template <class S>
S trace(const Element<S>& a) {
    return a.coefficient(Word{});
}

/// Orthogonal projection onto the span of words of block length n.
template <class S>
Element<S> project_level(const Element<S>& a, int n) {
    Element<S> out;
    for (const auto& [w, c] : a.terms())
        if (block_length(w) == n) out.add_term(w, c, 0.0);
    return out;
}

/// Letters appearing in the support of an element, grouped by factor, with
/// the derived support constant (max per-factor root sum of squared letter
/// norms) and the top block length.
template <class S>
struct SupportProfile {
    std::map<std::uint32_t, std::set<std::int64_t>> letters;
    typename scalar_traits<S>::real_type k_constant_sq{};
    double k_constant = 0.0;
    int max_level = 0;
};

/// The reduced free product of a family of factors. Holds the factor tables
/// and implements all word/element arithmetic. Elements are only meaningful
/// relative to the family they were built over.
template <class S>
class FreeProduct {
public:
    explicit FreeProduct(std::vector<Algebra<S>> factors, double prune_tol = 1e-14)
        : factors_(std::move(factors)), prune_tol_(scalar_traits<S>::exact ? 0.0 : prune_tol) {
        if (factors_.size() < 2) throw std::invalid_argument("free product needs at least two factors");
        for (std::uint32_t i = 0; i < factors_.size(); ++i) {
            auto [it, inserted] = by_id_.emplace(factors_[i].id, i);
            if (!inserted) throw std::invalid_argument("duplicate factor id: " + factors_[i].id);
        }
    }

    std::size_t factor_count() const { return factors_.size(); }
    const Algebra<S>& factor(std::uint32_t idx) const {
        if (idx >= factors_.size()) throw std::invalid_argument("unknown factor index " + std::to_string(idx));
        return factors_[idx];
    }
    std::optional<std::uint32_t> index_of(std::string_view id) const {
        auto it = by_id_.find(std::string(id));
        if (it == by_id_.end()) return std::nullopt;
        return it->second;
    }
    double prune_tol() const { return prune_tol_; }

    void check_word(const Word& w) const {
        if (!alternating(w)) throw std::invalid_argument("word is not reduced: " + word_to_string(w));
        for (const Letter& l : w) factor(l.factor).check_label(l.label);
    }

    // -- multiplication --------------------------------------------------

    /// Product of two reduced words by boundary contraction: same-factor
    /// boundary letters expand through the structure constants, splitting
    /// into a unit part (shorter recursive product) and reduced joins.
    Element<S> multiply_words(const Word& v, const Word& w) const {
        Element<S> out;
        accumulate_word_product(v, w, scalar_traits<S>::one(), out);
        return out;
    }

    Element<S> multiply(const Element<S>& a, const Element<S>& b) const {
        Element<S> out;
        for (const auto& [v, av] : a.terms())
            for (const auto& [w, bw] : b.terms()) accumulate_word_product(v, w, av * bw, out);
        return out;
    }

    Element<S> power(const Element<S>& a, int m) const {
        if (m < 0) throw std::invalid_argument("negative power");
        Element<S> out = Element<S>::unit();
        for (int i = 0; i < m; ++i) out = multiply(out, a);
        return out;
    }

    // -- adjoint ----------------------------------------------------------

    /// Word adjoint: reversed sequence of starred letters; each star expands
    /// through the factor star map, so the result can have several terms.
    Element<S> word_adjoint(const Word& w) const {
        Element<S> out = Element<S>::unit();
        // Build right-to-left: (l_1 ... l_n)* = l_n* ... l_1*
        for (auto it = w.rbegin(); it != w.rend(); ++it) {
            const auto expansion = factor(it->factor).star(it->label);
            Element<S> next;
            for (const auto& [word, c] : out.terms())
                for (const auto& term : expansion) {
                    Word ext = word;
                    ext.push_back(Letter{it->factor, term.label});
                    next.add_term(ext, c * term.coeff, prune_tol_);
                }
            out = std::move(next);
        }
        return out;
    }

    Element<S> adjoint(const Element<S>& a) const {
        Element<S> out;
        for (const auto& [w, c] : a.terms())
            out.add_scaled(word_adjoint(w), scalar_traits<S>::conjugate(c), prune_tol_);
        return out;
    }

    // -- closed form for level components of word products ----------------

    /// Unit coefficient of the product of two words of equal block length:
    /// <vw, 1>. Contracts strictly through unit parts of the structure
    /// constants, independent of the general multiplication path.
    S word_pair_trace(const Word& v, const Word& w) const {
        if (v.size() != w.size()) return scalar_traits<S>::zero();
        S acc = scalar_traits<S>::one();
        std::size_t n = v.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Letter& x = v[n - 1 - i];
            const Letter& y = w[i];
            if (x.factor != y.factor) return scalar_traits<S>::zero();
            S u = factor(x.factor).product(x.label, y.label).unit;
            if (scalar_traits<S>::is_zero(u, 0.0)) return scalar_traits<S>::zero();
            acc *= u;
        }
        return acc;
    }

    /// Level-n component of the product of two reduced words, evaluated by
    /// the split-at-the-overlap closed form rather than by multiplying out.
    /// Serves as the independent cross-check of multiply + project_level.
    Element<S> word_product_level(const Word& v, const Word& w, int n) const {
        const int k = block_length(v);
        const int l = block_length(w);
        if (n < std::abs(k - l) || n > k + l) return Element<S>::zero();

        if (n == std::abs(k - l)) {
            const int q = std::min(k, l);
            Word v1 = prefix(v, static_cast<std::size_t>(k - q));
            Word v2 = suffix(v, static_cast<std::size_t>(q));
            Word w2 = prefix(w, static_cast<std::size_t>(q));
            Word w1 = suffix(w, static_cast<std::size_t>(l - q));
            S c = word_pair_trace(v2, w2);
            if (scalar_traits<S>::is_zero(c, prune_tol_)) return Element<S>::zero();
            return Element<S>::single(concat(v1, w1), c);  // v1 or w1 is empty
        }

        const int diff = k + l - n;
        const int q = diff / 2;
        // here 0 <= q < min(k, l), so both middle letters exist
        Word v1 = prefix(v, static_cast<std::size_t>(k - q - 1));
        Letter x = v[static_cast<std::size_t>(k - q - 1)];
        Word v2 = suffix(v, static_cast<std::size_t>(q));
        Word w2 = prefix(w, static_cast<std::size_t>(q));
        Letter y = w[static_cast<std::size_t>(q)];
        Word w1 = suffix(w, static_cast<std::size_t>(l - q - 1));

        if (diff % 2 == 0) {
            if (x.factor == y.factor) return Element<S>::zero();
            S c = word_pair_trace(v2, w2);
            if (scalar_traits<S>::is_zero(c, prune_tol_)) return Element<S>::zero();
            Word mid = v1;
            mid.push_back(x);
            mid.push_back(y);
            mid.insert(mid.end(), w1.begin(), w1.end());
            return Element<S>::single(std::move(mid), c);
        }

        if (x.factor != y.factor) return Element<S>::zero();
        S c = word_pair_trace(v2, w2);
        if (scalar_traits<S>::is_zero(c, prune_tol_)) return Element<S>::zero();
        Element<S> out;
        for (const auto& term : factor(x.factor).product(x.label, y.label).terms) {
            Word mid = v1;
            mid.push_back(Letter{x.factor, term.label});
            mid.insert(mid.end(), w1.begin(), w1.end());
            out.add_term(mid, c * term.coeff, prune_tol_);
        }
        return out;
    }

    // -- support ----------------------------------------------------------

    SupportProfile<S> support_profile(const Element<S>& a) const {
        if (a.is_zero()) throw std::domain_error("support profile of the zero element is undefined");
        SupportProfile<S> prof;
        for (const auto& [w, c] : a.terms()) {
            prof.max_level = std::max(prof.max_level, block_length(w));
            for (const Letter& l : w) prof.letters[l.factor].insert(l.label);
        }
        bool first = true;
        for (const auto& [fidx, labels] : prof.letters) {
            typename scalar_traits<S>::real_type sum{};
            for (std::int64_t x : labels) sum += factor(fidx).letter_norm_sq(x);
            if (first || prof.k_constant_sq < sum) prof.k_constant_sq = sum;
            first = false;
        }
        prof.k_constant = std::sqrt(scalar_traits<S>::to_double(prof.k_constant_sq));
        return prof;
    }

    /// Support constant with the convention K = 1 for elements supported on
    /// the empty word only (the max over an empty letter set).
    double support_constant(const Element<S>& a) const {
        if (a.is_zero()) throw std::domain_error("support constant of the zero element is undefined");
        SupportProfile<S> prof = support_profile(a);
        if (prof.letters.empty()) return 1.0;
        return prof.k_constant;
    }

private:
    void accumulate_word_product(const Word& v, const Word& w, const S& scale, Element<S>& out) const {
        if (scalar_traits<S>::is_zero(scale, prune_tol_)) return;
        if (v.empty()) {
            out.add_term(w, scale, prune_tol_);
            return;
        }
        if (w.empty()) {
            out.add_term(v, scale, prune_tol_);
            return;
        }
        const Letter& x = v.back();
        const Letter& y = w.front();
        if (x.factor != y.factor) {
            out.add_term(concat(v, w), scale, prune_tol_);
            return;
        }
        FactorCombo<S> combo = factor(x.factor).product(x.label, y.label);
        Word v1(v.begin(), v.end() - 1);
        Word w1(w.begin() + 1, w.end());
        for (const auto& term : combo.terms) {
            Word mid = v1;
            mid.push_back(Letter{x.factor, term.label});
            mid.insert(mid.end(), w1.begin(), w1.end());
            out.add_term(mid, scale * term.coeff, prune_tol_);
        }
        if (!scalar_traits<S>::is_zero(combo.unit, 0.0))
            accumulate_word_product(v1, w1, scale * combo.unit, out);
    }

    std::vector<Algebra<S>> factors_;
    std::map<std::string, std::uint32_t, std::less<>> by_id_;
    double prune_tol_;
};

}  // namespace freeprod
