#pragma once

#include <random>

#include "freeprod/element.hpp"

namespace freeprod {

struct RandomElementOptions {
    int max_level = 3;
    int max_terms = 5;
    bool homogeneous = false;  // all words at exactly max_level
    int integer_label_range = 3;
};

namespace detail {

template <class S>
std::int64_t random_label(const Algebra<S>& alg, std::mt19937_64& rng, int integer_range) {
    if (alg.kind == AlgebraKind::Integer) {
        std::uniform_int_distribution<int> mag(1, integer_range);
        std::bernoulli_distribution sign(0.5);
        int p = mag(rng);
        return sign(rng) ? p : -p;
    }
    std::uniform_int_distribution<std::int64_t> pick(1, alg.order - 1);
    return pick(rng);
}

template <class S>
S random_coeff(std::mt19937_64& rng) {
    if constexpr (scalar_traits<S>::exact) {
        std::uniform_int_distribution<int> num(-9, 9);
        std::uniform_int_distribution<int> den(1, 9);
        Rational re(num(rng), den(rng));
        Rational im(num(rng), den(rng));
        if (re == 0 && im == 0) re = 1;
        return S{re, im};
    } else {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        double re = u(rng), im = u(rng);
        if (re == 0.0 && im == 0.0) re = 1.0;
        return S{re, im};
    }
}

}  // namespace detail

template <class S>
Word random_reduced_word(const FreeProduct<S>& fp, std::mt19937_64& rng, int level,
                         int integer_range = 3) {
    std::uniform_int_distribution<std::uint32_t> pick_factor(0, static_cast<std::uint32_t>(fp.factor_count()) - 1);
    Word w;
    std::uint32_t prev = 0;
    for (int i = 0; i < level; ++i) {
        std::uint32_t f = pick_factor(rng);
        while (i > 0 && f == prev) f = pick_factor(rng);
        w.push_back(Letter{f, detail::random_label(fp.factor(f), rng, integer_range)});
        prev = f;
    }
    return w;
}

template <class S>
Element<S> random_element(const FreeProduct<S>& fp, std::mt19937_64& rng,
                          const RandomElementOptions& opt = {}) {
    std::uniform_int_distribution<int> nterms(1, opt.max_terms);
    std::uniform_int_distribution<int> lvl(0, opt.max_level);
    Element<S> out;
    const int n = nterms(rng);
    for (int i = 0; i < n; ++i) {
        int level = opt.homogeneous ? opt.max_level : lvl(rng);
        Word w = random_reduced_word(fp, rng, level, opt.integer_label_range);
        out.add_term(w, detail::random_coeff<S>(rng), fp.prune_tol());
    }
    if (out.is_zero())
        out.add_term(random_reduced_word(fp, rng, std::max(1, opt.max_level), opt.integer_label_range),
                     scalar_traits<S>::one(), fp.prune_tol());
    return out;
}

}  // namespace freeprod
