#pragma once

#include "freeprod/element.hpp"

namespace freeprod {

/// Decomposition of a triple product v w z (block lengths r, s, t with
/// s < min(r, t)) into
///   - shaped reduced words that keep at least r - s leading letters of v and
///     t - s trailing letters of z around a short middle, and
///   - junction terms: coefficients times prefix(v, p) * suffix(z, q) with
///     p >= r - s, q >= t - s, left as possibly-unreduced products.
/// Expanding the junction products and adding the shaped part recovers
/// multiply(multiply(v, w), z) exactly.
template <class S>
struct TripleShape {
    struct Junction {
        int keep_prefix = 0;
        int keep_suffix = 0;
        S coeff{};
    };
    Element<S> shaped;
    std::vector<Junction> junctions;

    Element<S> expand(const FreeProduct<S>& fp, const Word& v, const Word& z) const {
        Element<S> total = shaped;
        for (const auto& j : junctions) {
            Element<S> prod = fp.multiply_words(prefix(v, static_cast<std::size_t>(j.keep_prefix)),
                                                suffix(z, static_cast<std::size_t>(j.keep_suffix)));
            total.add_scaled(prod, j.coeff, fp.prune_tol());
        }
        return total;
    }
};

namespace detail {

template <class S>
void triple_shape_rec(const FreeProduct<S>& fp, const Word& v, const Word& z, int p, Word mid,
                      int q, const S& coeff, TripleShape<S>& out) {
    using T = scalar_traits<S>;
    if (T::is_zero(coeff, fp.prune_tol())) return;
    if (mid.empty()) {
        out.junctions.push_back({p, q, coeff});
        return;
    }
    const Letter left_bound = v[static_cast<std::size_t>(p - 1)];
    const Letter right_bound = z[static_cast<std::size_t>(block_length(z) - q)];
    const Letter front = mid.front();
    const Letter back = mid.back();
    const bool contract_left = left_bound.factor == front.factor;
    const bool contract_right = back.factor == right_bound.factor;

    auto emit = [&](Word word, const S& c) {
        if (!T::is_zero(c, fp.prune_tol())) out.shaped.add_term(word, c, fp.prune_tol());
    };
    auto glue = [&](int pp, const Word& m, int qq) {
        Word word = prefix(v, static_cast<std::size_t>(pp));
        word.insert(word.end(), m.begin(), m.end());
        Word tail = suffix(z, static_cast<std::size_t>(qq));
        word.insert(word.end(), tail.begin(), tail.end());
        return word;
    };

    if (!contract_left && !contract_right) {
        emit(glue(p, mid, q), coeff);
        return;
    }

    if (contract_left && contract_right && mid.size() == 1) {
        // single middle letter shared with both boundaries: fold the whole
        // 3-letter block of the common factor into one modified letter
        const auto& alg = fp.factor(front.factor);
        FactorCombo<S> two = alg.product(left_bound.label, front.label);
        S unit_total = T::zero();
        FactorCombo<S> letters;
        for (const auto& term : two.terms) {
            FactorCombo<S> three = alg.product(term.label, right_bound.label);
            unit_total += term.coeff * three.unit;
            for (const auto& t3 : three.terms) letters.add_term(t3.label, term.coeff * t3.coeff);
        }
        if (!T::is_zero(two.unit, 0.0)) {
            // (x b) had a unit part: x b c = <x b, 1> c + (rest), and the
            // leftover c is a plain letter of the common factor
            letters.add_term(right_bound.label, two.unit);
        }
        for (const auto& term : letters.terms)
            emit(glue(p - 1, Word{Letter{front.factor, term.label}}, q - 1), coeff * term.coeff);
        triple_shape_rec(fp, v, z, p - 1, Word{}, q - 1, coeff * unit_total, out);
        return;
    }

    if (contract_left && contract_right) {
        const auto& algl = fp.factor(front.factor);
        const auto& algr = fp.factor(back.factor);
        FactorCombo<S> cl = algl.product(left_bound.label, front.label);
        FactorCombo<S> cr = algr.product(back.label, right_bound.label);
        Word inner(mid.begin() + 1, mid.end() - 1);
        for (const auto& tu : cl.terms)
            for (const auto& tw : cr.terms) {
                Word m;
                m.push_back(Letter{front.factor, tu.label});
                m.insert(m.end(), inner.begin(), inner.end());
                m.push_back(Letter{back.factor, tw.label});
                emit(glue(p - 1, m, q - 1), coeff * tu.coeff * tw.coeff);
            }
        if (!T::is_zero(cl.unit, 0.0))
            for (const auto& tw : cr.terms) {
                Word m = inner;
                m.push_back(Letter{back.factor, tw.label});
                triple_shape_rec(fp, v, z, p - 1, std::move(m), q - 1, coeff * cl.unit * tw.coeff, out);
            }
        if (!T::is_zero(cr.unit, 0.0))
            for (const auto& tu : cl.terms) {
                Word m;
                m.push_back(Letter{front.factor, tu.label});
                m.insert(m.end(), inner.begin(), inner.end());
                triple_shape_rec(fp, v, z, p - 1, std::move(m), q - 1, coeff * cr.unit * tu.coeff, out);
            }
        if (!T::is_zero(cl.unit, 0.0) && !T::is_zero(cr.unit, 0.0))
            triple_shape_rec(fp, v, z, p - 1, inner, q - 1, coeff * cl.unit * cr.unit, out);
        return;
    }

    if (contract_left) {
        const auto& alg = fp.factor(front.factor);
        FactorCombo<S> cl = alg.product(left_bound.label, front.label);
        Word rest(mid.begin() + 1, mid.end());
        for (const auto& tu : cl.terms) {
            Word m;
            m.push_back(Letter{front.factor, tu.label});
            m.insert(m.end(), rest.begin(), rest.end());
            emit(glue(p - 1, m, q), coeff * tu.coeff);
        }
        if (!T::is_zero(cl.unit, 0.0))
            triple_shape_rec(fp, v, z, p - 1, std::move(rest), q, coeff * cl.unit, out);
        return;
    }

    // contract_right only
    const auto& alg = fp.factor(back.factor);
    FactorCombo<S> cr = alg.product(back.label, right_bound.label);
    Word rest(mid.begin(), mid.end() - 1);
    for (const auto& tw : cr.terms) {
        Word m = rest;
        m.push_back(Letter{back.factor, tw.label});
        emit(glue(p, m, q - 1), coeff * tw.coeff);
    }
    if (!T::is_zero(cr.unit, 0.0))
        triple_shape_rec(fp, v, z, p, std::move(rest), q - 1, coeff * cr.unit, out);
}

}  // namespace detail

/// Shape decomposition of a triple product with a short middle word. Requires
/// block_length(w) < min(block_length(v), block_length(z)).
template <class S>
TripleShape<S> triple_word_shape(const FreeProduct<S>& fp, const Word& v, const Word& w,
                                 const Word& z) {
    const int r = block_length(v), s = block_length(w), t = block_length(z);
    if (!(s < r && s < t))
        throw std::invalid_argument("triple_word_shape: need s < min(r, t)");
    fp.check_word(v);
    fp.check_word(w);
    fp.check_word(z);
    TripleShape<S> out;
    detail::triple_shape_rec(fp, v, z, r, w, t, scalar_traits<S>::one(), out);
    return out;
}

}  // namespace freeprod
