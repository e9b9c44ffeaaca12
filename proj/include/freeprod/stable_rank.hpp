#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "freeprod/norm_bounds.hpp"

namespace freeprod {

/// A unitary letter x in one factor and two trace-orthogonal unitary letters
/// y, z in another; the hypothesis under which conjugators with exact power
/// norms exist.
struct AvitzourTriple {
    std::uint32_t factor_x = 0;
    std::int64_t x = 0;
    std::uint32_t factor_yz = 0;
    std::int64_t y = 0;
    std::int64_t z = 0;
};

/// Checks unitarity of the three letters, y != z, and tau(z* y) = 0 via the
/// factor tables. Throws on violation.
template <class S>
void validate_triple(const FreeProduct<S>& fp, const AvitzourTriple& t) {
    using T = scalar_traits<S>;
    if (t.factor_x == t.factor_yz)
        throw std::invalid_argument("avitzour triple: the two factors must be distinct");
    const auto& ax = fp.factor(t.factor_x);
    const auto& ayz = fp.factor(t.factor_yz);
    if (!ax.unitary_letter(t.x))
        throw std::invalid_argument("avitzour triple: x is not a unitary letter of " + ax.id);
    if (!ayz.unitary_letter(t.y) || !ayz.unitary_letter(t.z))
        throw std::invalid_argument("avitzour triple: y, z must be unitary letters of " + ayz.id);
    if (t.y == t.z) throw std::invalid_argument("avitzour triple: y and z must be distinct");
    // tau(z* y): expand z* against y through the structure constants.
    S ip = T::zero();
    for (const auto& term : ayz.star(t.z)) ip += term.coeff * ayz.product(term.label, t.y).unit;
    if (!T::is_zero(ip, 1e-12))
        throw std::invalid_argument("avitzour triple: tau(z* y) != 0, letters are not orthogonal");
}

enum class ConjugatorChoice { Auto, General, FreeShortcut };

/// Canonical triple over a family whose first two factors are free
/// generators: x = the first generator, y, z = the second generator and its
/// square. Distinct group elements are automatically trace-orthogonal.
inline AvitzourTriple default_free_triple() { return AvitzourTriple{0, 1, 1, 1, 2}; }

template <class S>
struct ConjugatorPair {
    Element<S> left;   // u
    Element<S> right;  // v
    int base_level = 0;     // top block length of a
    int conj_level = 0;     // top block length of u, v
    long shortcut_offset = 0;  // generator power in the free-group shortcut
    bool used_shortcut = false;

    std::string describe() const {
        std::ostringstream os;
        os << (used_shortcut ? "free-shortcut" : "general") << " base_level=" << base_level
           << " conj_level=" << conj_level;
        if (used_shortcut) os << " offset=" << shortcut_offset;
        return os.str();
    }
};

namespace detail {

template <class S>
bool all_factors_free(const FreeProduct<S>& fp) {
    for (std::uint32_t i = 0; i < fp.factor_count(); ++i)
        if (fp.factor(i).kind != AlgebraKind::Integer) return false;
    return true;
}

/// Smallest generator power p such that conjugating every nonempty support
/// word by the power word moves both ends into the designated second factor.
template <class S>
std::optional<long> shortcut_offset(const FreeProduct<S>& fp, const Element<S>& a,
                                    std::uint32_t f2, long cap = 64) {
    for (long p = 1; p <= cap; ++p) {
        Word left{Letter{f2, p}};
        Word right{Letter{f2, -p}};
        bool ok = true;
        for (const auto& [w, c] : a.terms()) {
            if (w.empty()) continue;  // the unit conjugates to itself, harmless
            Element<S> conj = fp.multiply(fp.multiply_words(left, w), Element<S>::single(right));
            if (conj.support_size() != 1) {
                ok = false;
                break;
            }
            const Word& cw = conj.terms().begin()->first;
            if (cw.empty() || cw.front().factor != f2 || cw.back().factor != f2) {
                ok = false;
                break;
            }
        }
        if (ok) return p;
    }
    return std::nullopt;
}

}  // namespace detail

/// Free-group shortcut conjugators: u = lambda(g1 g2^p), v = lambda(g2^-p g1)
/// over the first two free-generator factors, with the smallest admissible p.
template <class S>
ConjugatorPair<S> build_free_shortcut(const FreeProduct<S>& fp, const Element<S>& a) {
    if (!detail::all_factors_free(fp))
        throw std::invalid_argument("free shortcut requires all factors of free-generator kind");
    if (a.is_zero()) throw std::invalid_argument("conjugators of the zero element");
    const std::uint32_t f1 = 0, f2 = 1;
    auto p = detail::shortcut_offset(fp, a, f2);
    if (!p) throw CertificateError("free shortcut: no admissible conjugating power found");

    ConjugatorPair<S> out;
    out.left = Element<S>::single(Word{Letter{f1, 1}, Letter{f2, *p}});
    out.right = Element<S>::single(Word{Letter{f2, -*p}, Letter{f1, 1}});
    out.base_level = a.max_level();
    out.conj_level = 2;
    out.shortcut_offset = *p;
    out.used_shortcut = true;
    return out;
}

/// General conjugators built from an Avitzour triple:
///   u' = (x y*)^l,  v = (x z)^l,  u = (xy)(xz)^m(xy) u',
/// with the smallest l >= (k+3)/2 and m >= (2l+k+1)/2 for support level k.
/// Every support word of u w v then starts with x and ends with z, powers of
/// uav never cancel, and the support constant of the powers is constant.
template <class S>
ConjugatorPair<S> build_general_conjugators(const FreeProduct<S>& fp, const Element<S>& a,
                                            const AvitzourTriple& t) {
    validate_triple(fp, t);
    if (a.is_zero()) throw std::invalid_argument("conjugators of the zero element");

    const int k = a.max_level();
    const int l = (k + 4) / 2;       // smallest integer >= (k+3)/2
    const int m = (2 * l + k + 2) / 2;  // smallest integer >= (2l+k+1)/2

    const Element<S> x_el = Element<S>::single(Word{Letter{t.factor_x, t.x}});
    const Element<S> y_star = fp.word_adjoint(Word{Letter{t.factor_yz, t.y}});
    const Element<S> xy_star = fp.multiply(x_el, y_star);

    Element<S> u_prime = Element<S>::unit();
    for (int i = 0; i < l; ++i) u_prime = fp.multiply(u_prime, xy_star);

    Word v_word;
    for (int i = 0; i < l; ++i) {
        v_word.push_back(Letter{t.factor_x, t.x});
        v_word.push_back(Letter{t.factor_yz, t.z});
    }

    Word r_word{Letter{t.factor_x, t.x}, Letter{t.factor_yz, t.y}};
    for (int i = 0; i < m; ++i) {
        r_word.push_back(Letter{t.factor_x, t.x});
        r_word.push_back(Letter{t.factor_yz, t.z});
    }
    r_word.push_back(Letter{t.factor_x, t.x});
    r_word.push_back(Letter{t.factor_yz, t.y});

    ConjugatorPair<S> out;
    out.left = fp.multiply(Element<S>::single(r_word), u_prime);
    out.right = Element<S>::single(v_word);
    out.base_level = k;
    out.conj_level = std::max(out.left.max_level(), out.right.max_level());
    out.used_shortcut = false;
    return out;
}

// ---------------------------------------------------------------------------
// Power-identity verification
// ---------------------------------------------------------------------------

struct PowerCheckRow {
    int m = 0;
    double norm_sq = 0.0;
    double expected_norm_sq = 0.0;
    bool norm_ok = false;
    double k_constant_sq = 0.0;
    bool k_ok = true;
    std::size_t support = 0;
    std::size_t expected_support = 0;
    bool support_ok = false;
};

struct PowerIdentityReport {
    int m_cap = 0;
    bool norm_identity = true;
    bool k_constant = true;
    bool support_multiplicative = true;
    int first_violation_m = 0;
    std::vector<PowerCheckRow> rows;

    bool passed() const { return norm_identity && k_constant && support_multiplicative; }
};

struct PowerIdentityOptions {
    bool check_k_constant = true;
    double tol = 1e-9;
};

/// Computes (uav)^m by explicit multiplication for m <= m_cap and checks the
/// exact two-norm identity |(uav)^m|_2^2 = (|a|_2^2)^m, constancy of the
/// support constant, and multiplicativity of the support size.
template <class S>
PowerIdentityReport verify_power_identity(const FreeProduct<S>& fp, const Element<S>& a,
                                          const Element<S>& u, const Element<S>& v, int m_cap,
                                          const PowerIdentityOptions& opt = {}) {
    using T = scalar_traits<S>;
    if (m_cap < 1) throw std::invalid_argument("verify_power_identity: m_cap must be >= 1");
    PowerIdentityReport rep;
    rep.m_cap = m_cap;

    const Element<S> uav = fp.multiply(fp.multiply(u, a), v);
    const auto base_norm = norm_sq(a);
    const auto base_k = fp.support_profile(uav).k_constant_sq;
    const std::size_t base_support = uav.support_size();

    Element<S> pw = Element<S>::unit();
    typename T::real_type expect{1};
    double expect_support = 1.0;
    for (int m = 1; m <= m_cap; ++m) {
        pw = fp.multiply(pw, uav);
        expect = expect * base_norm;
        expect_support *= static_cast<double>(base_support);

        PowerCheckRow row;
        row.m = m;
        const auto got = norm_sq(pw);
        row.norm_sq = T::to_double(got);
        row.expected_norm_sq = T::to_double(expect);
        if constexpr (T::exact)
            row.norm_ok = (got == expect);
        else
            row.norm_ok = std::abs(row.norm_sq - row.expected_norm_sq) <=
                          opt.tol * std::max(1.0, row.expected_norm_sq);

        const auto k_sq = fp.support_profile(pw).k_constant_sq;
        row.k_constant_sq = T::to_double(k_sq);
        if (opt.check_k_constant) {
            if constexpr (T::exact)
                row.k_ok = (k_sq == base_k);
            else
                row.k_ok = std::abs(T::to_double(k_sq) - T::to_double(base_k)) <= opt.tol;
        }

        row.support = pw.support_size();
        row.expected_support = static_cast<std::size_t>(expect_support + 0.5);
        row.support_ok = (expect_support > 1e15) || (row.support == row.expected_support);

        if (!row.norm_ok) rep.norm_identity = false;
        if (!row.k_ok) rep.k_constant = false;
        if (!row.support_ok) rep.support_multiplicative = false;
        if ((!row.norm_ok || !row.k_ok || !row.support_ok) && rep.first_violation_m == 0)
            rep.first_violation_m = m;
        rep.rows.push_back(row);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Distance-to-invertibles certificates
// ---------------------------------------------------------------------------

template <class S>
struct DistanceCertificate {
    Element<S> left;            // u
    Element<S> right;           // v
    Element<S> approximant;     // z = a - lambda u* v*, invertible when reached
    double lambda = 0.0;        // chosen positive scalar; |lambda| is the claim
    double claimed_distance = 0.0;
    double epsilon = 0.0;
    double target_bound = 0.0;  // |a|_2 + epsilon/2
    bool reached_target = false;
    double unitary_residual = 0.0;  // | (u*v*)(v u) - 1 |_2 transcript entry
    RadiusCertificate radius;
    PowerIdentityReport verification;
    std::string conjugator_desc;
};

struct DistanceOptions {
    ConjugatorChoice choice = ConjugatorChoice::Auto;
    long m_budget = 1000000;
    int verify_cap = 3;
    double tol = 1e-9;
};

template <class S>
ConjugatorPair<S> build_conjugators(const FreeProduct<S>& fp, const Element<S>& a,
                                    const AvitzourTriple& triple,
                                    ConjugatorChoice choice = ConjugatorChoice::Auto) {
    switch (choice) {
        case ConjugatorChoice::FreeShortcut:
            return build_free_shortcut(fp, a);
        case ConjugatorChoice::General:
            return build_general_conjugators(fp, a, triple);
        case ConjugatorChoice::Auto:
            break;
    }
    if (detail::all_factors_free(fp)) {
        // Prefer the cheaper shortcut, but fall back to the general
        // construction if its verification fails for this element.
        ConjugatorPair<S> pair = build_free_shortcut(fp, a);
        PowerIdentityOptions vopt;
        vopt.check_k_constant = false;
        auto rep = verify_power_identity(fp, a, pair.left, pair.right, 3, vopt);
        if (rep.norm_identity && rep.support_multiplicative) return pair;
    }
    return build_general_conjugators(fp, a, triple);
}

/// Certificate for dist(a, GL) <= |a|_2 + epsilon: conjugators, verified power
/// identity, certified radius bound, and the explicit invertible approximant
/// z = a - lambda u* v* at |lambda| = best bound + epsilon/2. If the radius
/// bound cannot reach |a|_2 + epsilon/2 within the m budget the certificate
/// carries the achieved bound and is flagged.
template <class S>
DistanceCertificate<S> distance_certificate(const FreeProduct<S>& fp, const Element<S>& a,
                                            const AvitzourTriple& triple, double epsilon,
                                            const DistanceOptions& opt = {}) {
    if (a.is_zero()) throw std::invalid_argument("distance_certificate: zero element");
    if (epsilon <= 0) throw std::invalid_argument("distance_certificate: epsilon must be positive");

    DistanceCertificate<S> cert;
    cert.epsilon = epsilon;

    ConjugatorPair<S> pair = build_conjugators(fp, a, triple, opt.choice);
    cert.left = pair.left;
    cert.right = pair.right;
    cert.conjugator_desc = pair.describe();

    PowerIdentityOptions vopt;
    vopt.check_k_constant = !pair.used_shortcut;
    vopt.tol = opt.tol;
    cert.verification = verify_power_identity(fp, a, pair.left, pair.right, opt.verify_cap, vopt);
    if (!cert.verification.norm_identity)
        throw CertificateError("distance_certificate: power two-norm identity failed at m=" +
                               std::to_string(cert.verification.first_violation_m));

    const double a2 = two_norm(a);
    cert.target_bound = a2 + epsilon / 2.0;

    const Element<S> uav = fp.multiply(fp.multiply(pair.left, a), pair.right);
    const double k_const = fp.support_constant(uav);
    const int deg_step = pair.base_level + 2 * pair.conj_level;

    long m_star = 0;
    for (long m = 1; m <= opt.m_budget; ++m) {
        const double bound =
            std::exp((std::log(k_const) + 1.5 * std::log(2.0 * static_cast<double>(m) * deg_step + 1.0)) /
                     static_cast<double>(m)) *
            a2;
        if (bound <= cert.target_bound) {
            m_star = m;
            break;
        }
    }
    cert.reached_target = (m_star != 0);

    RadiusOptions ropt;
    ropt.verify_cap = opt.verify_cap;
    ropt.tol = opt.tol;
    cert.radius = certified_radius(fp, a, pair.left, pair.right, cert.reached_target ? m_star : opt.m_budget, ropt);

    cert.lambda = cert.radius.best_bound + epsilon / 2.0;
    cert.claimed_distance = cert.lambda;

    const Element<S> ustar_vstar = fp.multiply(fp.adjoint(pair.left), fp.adjoint(pair.right));
    const Element<S> vu = fp.multiply(pair.right, pair.left);
    const Element<S> should_be_unit = fp.multiply(ustar_vstar, vu);
    cert.unitary_residual = two_norm(should_be_unit - Element<S>::unit());

    cert.approximant = a - scalar_traits<S>::from_double(cert.lambda) * ustar_vstar;
    return cert;
}

}  // namespace freeprod
