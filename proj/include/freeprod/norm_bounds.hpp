#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "freeprod/element.hpp"
#include "freeprod/random_elements.hpp"

namespace freeprod {

/// Raised when a certificate cannot be issued (a verification step failed).
struct CertificateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <class S>
std::string element_brief(const Element<S>& a) {
    std::ostringstream os;
    os << "terms=" << a.support_size() << " level=" << a.max_level() << " two_norm=" << two_norm(a);
    return os.str();
}

// ---------------------------------------------------------------------------
// Haagerup-type upper bounds
// ---------------------------------------------------------------------------

/// Upper bound (2k+1) K(a) |a|_2 for an element homogeneous at block length k.
template <class S>
double haagerup_homogeneous_bound(const FreeProduct<S>& fp, const Element<S>& a) {
    if (a.is_zero()) return 0.0;
    const int k = a.max_level();
    for (const auto& [w, c] : a.terms())
        if (block_length(w) != k)
            throw std::invalid_argument("haagerup_homogeneous_bound: element is not homogeneous");
    return (2.0 * k + 1.0) * fp.support_constant(a) * two_norm(a);
}

/// Upper bound (2k+1)^{3/2} K(a) |a|_2 for support inside levels 0..k.
template <class S>
double haagerup_bound(const FreeProduct<S>& fp, const Element<S>& a, int level_cap) {
    if (a.is_zero()) return 0.0;
    if (level_cap < a.max_level())
        throw std::invalid_argument("haagerup_bound: level cap below the top support level");
    return std::pow(2.0 * level_cap + 1.0, 1.5) * fp.support_constant(a) * two_norm(a);
}

/// Letter length of a word over free-generator factors: each letter lambda^p
/// counts |p| generator letters. Rejects non-free-generator factors.
template <class S>
long generator_length(const FreeProduct<S>& fp, const Word& w) {
    long len = 0;
    for (const Letter& l : w) {
        if (fp.factor(l.factor).kind != AlgebraKind::Integer)
            throw std::invalid_argument("generator_length: factor " + fp.factor(l.factor).id +
                                        " is not a free generator");
        len += std::llabs(l.label);
    }
    return len;
}

template <class S>
long max_generator_length(const FreeProduct<S>& fp, const Element<S>& a) {
    long n = 0;
    for (const auto& [w, c] : a.terms()) n = std::max(n, generator_length(fp, w));
    return n;
}

/// Free-group word bound 2 (N+1)^2 |a|_2 with N the maximum generator-letter
/// length over the support (computed when not supplied).
template <class S>
double free_group_word_bound(const FreeProduct<S>& fp, const Element<S>& a, long letter_cap = -1) {
    if (a.is_zero()) return 0.0;
    const long n = max_generator_length(fp, a);
    if (letter_cap < 0) letter_cap = n;
    if (letter_cap < n)
        throw std::invalid_argument("free_group_word_bound: letter cap below the actual maximum length");
    return 2.0 * (letter_cap + 1.0) * (letter_cap + 1.0) * two_norm(a);
}

// ---------------------------------------------------------------------------
// Empirical lower bound
// ---------------------------------------------------------------------------

namespace detail {

/// Keep the max_terms largest coefficients (ties broken by word order). The
/// truncated vector is still a legitimate norm test vector.
template <class S>
Element<S> truncate_largest(const Element<S>& a, std::size_t max_terms) {
    if (a.support_size() <= max_terms) return a;
    using Real = typename scalar_traits<S>::real_type;
    std::vector<std::pair<Real, const Word*>> ranked;
    ranked.reserve(a.support_size());
    for (const auto& [w, c] : a.terms()) ranked.emplace_back(scalar_traits<S>::abs_sq(c), &w);
    std::nth_element(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(max_terms) - 1,
                     ranked.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    Element<S> out;
    for (std::size_t i = 0; i < max_terms; ++i)
        out.add_term(*ranked[i].second, a.coefficient(*ranked[i].second), 0.0);
    return out;
}

}  // namespace detail

/// max |a b|_2 over random unit test elements b, optionally polished by a few
/// Krylov steps b <- (a* a) b / |.| (truncated to the dominant terms so the
/// support cannot blow up). Every test element is a unit vector, so the
/// result is always a valid lower bound for the operator norm.
template <class S>
double opnorm_lower(const FreeProduct<S>& fp, const Element<S>& a, int trials, std::uint64_t seed,
                    int level_cap = 4, int refine_steps = 4, std::size_t term_cap = 64) {
    if (trials < 1) throw std::invalid_argument("opnorm_lower: trials must be >= 1");
    if (a.is_zero()) return 0.0;
    std::mt19937_64 rng(seed);
    Element<S> a_star = fp.adjoint(a);
    double best = 0.0;
    RandomElementOptions opt;
    opt.max_level = level_cap;
    opt.max_terms = 6;
    for (int t = 0; t < trials; ++t) {
        Element<S> b = random_element(fp, rng, opt);
        for (int r = 0; r <= refine_steps; ++r) {
            b = detail::truncate_largest(b, term_cap);
            double nb = two_norm(b);
            if (nb == 0.0) break;
            S inv = scalar_traits<S>::from_double(1.0 / nb);
            b = inv * b;
            Element<S> ab = fp.multiply(a, b);
            best = std::max(best, two_norm(ab));
            if (r < refine_steps) b = fp.multiply(a_star, ab);
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Certified spectral-radius upper bounds
// ---------------------------------------------------------------------------

struct RadiusTrailEntry {
    long m = 0;
    double power_two_norm_log10 = 0.0;  // log10 |(uav)^m|_2, finite for any m
    long degree_bound = 0;              // m (k + 2l)
    double bound = 0.0;                 // (K (2 m (k+2l) + 1)^{3/2})^{1/m} |a|_2
};

struct RadiusCertificate {
    std::string element;
    std::string conjugators;
    double element_two_norm = 0.0;
    double k_constant = 0.0;  // K(uav)
    int base_level = 0;       // top block length of a
    int conj_level = 0;       // top block length of u, v
    long m_max = 0;
    std::vector<RadiusTrailEntry> trail;
    double best_bound = 0.0;
    long best_m = 0;
    int verified_powers = 0;   // powers checked against the two-norm identity
    bool identity_assumed = false;
};

inline double radius_bound_entry(double k_constant, double element_two_norm, int base_level,
                                 int conj_level, long m) {
    const double deg = 2.0 * static_cast<double>(m) * (base_level + 2.0 * conj_level) + 1.0;
    return std::exp((std::log(k_constant) + 1.5 * std::log(deg)) / static_cast<double>(m)) *
           element_two_norm;
}

namespace detail {

// Audit-trail thinning for very large m budgets: keep the head, powers of
// two, entries that improve the best bound, and the final entry.
inline bool keep_trail_entry(long m, long m_max, bool improved) {
    if (m <= 128 || m == m_max || improved) return true;
    return (m & (m - 1)) == 0;
}

}  // namespace detail

struct RadiusOptions {
    int verify_cap = 5;       // powers to check numerically
    double tol = 1e-9;        // float-mode tolerance for the identity check
    bool assume_identity = true;  // closed-form trail; else explicit powers (capped)
    int fallback_cap = 8;
};

/// Certificate for r(uav): per-m trail of bounds derived from the exact power
/// two-norm identity plus the Haagerup-type estimate at degree m(k+2l). The
/// identity is spot-checked by explicit multiplication for small m and the
/// certificate is refused if it fails.
template <class S>
RadiusCertificate certified_radius(const FreeProduct<S>& fp, const Element<S>& a,
                                   const Element<S>& u, const Element<S>& v, long m_max,
                                   const RadiusOptions& opt = {}) {
    if (a.is_zero()) throw std::invalid_argument("certified_radius: zero element");
    if (m_max < 1) throw std::invalid_argument("certified_radius: m_max must be >= 1");

    RadiusCertificate cert;
    cert.element = element_brief(a);
    cert.conjugators = "u[" + element_brief(u) + "] v[" + element_brief(v) + "]";
    cert.element_two_norm = two_norm(a);
    cert.base_level = a.max_level();
    cert.conj_level = std::max(u.max_level(), v.max_level());
    cert.m_max = m_max;
    cert.identity_assumed = opt.assume_identity;

    const Element<S> uav = fp.multiply(fp.multiply(u, a), v);
    cert.k_constant = fp.support_constant(uav);

    const auto base_norm_sq = norm_sq(a);

    // Spot-check the power identity |(uav)^m|_2^2 = (|a|_2^2)^m.
    const int check_to = static_cast<int>(std::min<long>(opt.verify_cap, m_max));
    Element<S> pw = Element<S>::unit();
    typename scalar_traits<S>::real_type expect{1};
    for (int m = 1; m <= check_to; ++m) {
        pw = fp.multiply(pw, uav);
        expect = expect * base_norm_sq;
        const auto got = norm_sq(pw);
        if constexpr (scalar_traits<S>::exact) {
            if (got != expect)
                throw CertificateError("certified_radius: power two-norm identity violated at m=" +
                                       std::to_string(m));
        } else {
            double g = scalar_traits<S>::to_double(got);
            double e = scalar_traits<S>::to_double(expect);
            if (std::abs(g - e) > opt.tol * std::max(1.0, e))
                throw CertificateError("certified_radius: power two-norm identity violated at m=" +
                                       std::to_string(m));
        }
        cert.verified_powers = m;
    }

    const long effective_max = opt.assume_identity
                                   ? m_max
                                   : std::min<long>(m_max, opt.fallback_cap);
    Element<S> fallback_pw = pw;  // currently (uav)^check_to
    long fallback_count = check_to;
    double best = 0.0;
    long best_m = 0;
    const double log_a2 = std::log(cert.element_two_norm);
    for (long m = 1; m <= effective_max; ++m) {
        // log |(uav)^m|_2: the certified identity gives m log |a|_2 exactly;
        // the fallback path multiplies powers out.
        const double deg = 2.0 * static_cast<double>(m) * (cert.base_level + 2.0 * cert.conj_level) + 1.0;
        double log_pow, bound;
        if (opt.assume_identity || m <= check_to) {
            // |a|_2 factored out of the exponential keeps the bound exactly
            // homogeneous under scaling of a
            log_pow = static_cast<double>(m) * log_a2;
            bound = std::exp((std::log(cert.k_constant) + 1.5 * std::log(deg)) / static_cast<double>(m)) *
                    cert.element_two_norm;
        } else {
            while (fallback_count < m) {
                fallback_pw = fp.multiply(fallback_pw, uav);
                ++fallback_count;
            }
            log_pow = std::log(two_norm(fallback_pw));
            bound = std::exp((std::log(cert.k_constant) + 1.5 * std::log(deg) + log_pow) /
                             static_cast<double>(m));
        }
        const bool improved = best_m == 0 || bound < best;
        if (improved) {
            best = bound;
            best_m = m;
        }
        if (detail::keep_trail_entry(m, effective_max, improved))
            cert.trail.push_back({m, log_pow / std::log(10.0),
                                  m * (cert.base_level + 2L * cert.conj_level), bound});
    }
    cert.best_bound = best;
    cert.best_m = best_m;
    return cert;
}

}  // namespace freeprod
