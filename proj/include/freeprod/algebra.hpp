#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "freeprod/scalar.hpp"

namespace freeprod {

enum class AlgebraKind { Integer, Cyclic, FiniteGroup, FiniteDim };

inline const char* kind_name(AlgebraKind k) {
    switch (k) {
        case AlgebraKind::Integer: return "integer";
        case AlgebraKind::Cyclic: return "cyclic";
        case AlgebraKind::FiniteGroup: return "finite_group";
        case AlgebraKind::FiniteDim: return "finite_dim";
    }
    return "?";
}

template <class S>
struct LinearTerm {
    std::int64_t label;
    S coeff;

    friend bool operator==(const LinearTerm&, const LinearTerm&) = default;
};

/// Element of one factor written against its orthonormal basis:
/// unit * 1 + sum of coeff * x over trace-zero basis labels x.
template <class S>
struct FactorCombo {
    S unit{};
    std::vector<LinearTerm<S>> terms;  // sorted by label, nonzero coefficients

    void add_term(std::int64_t label, const S& c) {
        auto it = std::lower_bound(terms.begin(), terms.end(), label,
                                   [](const LinearTerm<S>& t, std::int64_t l) { return t.label < l; });
        if (it != terms.end() && it->label == label)
            it->coeff += c;
        else
            terms.insert(it, LinearTerm<S>{label, c});
    }
};

/// One free-product factor: basis labels for X (minus the unit), the star map,
/// structure constants and letter norms. Group kinds compute products from the
/// group law; finite-dimensional factors carry tabulated expansions built by
/// gram_schmidt_onb. Instances are immutable after construction.
template <class S>
struct Algebra {
    using Real = typename scalar_traits<S>::real_type;

    std::string id;
    AlgebraKind kind = AlgebraKind::Integer;

    // Cyclic / FiniteGroup: element 0 is the identity, labels 1..order-1 form X°.
    std::int64_t order = 0;
    std::vector<std::vector<std::int64_t>> group_table;
    std::vector<std::int64_t> group_inverse;

    // FiniteDim: labels 1..order-1 index the ONB vectors beyond the unit.
    std::map<std::pair<std::int64_t, std::int64_t>, FactorCombo<S>> product_table;
    std::map<std::int64_t, std::vector<LinearTerm<S>>> star_table;
    std::map<std::int64_t, Real> norm_sq_table;
    std::set<std::int64_t> unitary_labels;

    bool valid_label(std::int64_t x) const {
        if (kind == AlgebraKind::Integer) return x != 0;
        return x >= 1 && x < order;
    }

    /// Structure constants: x * y = unit * 1 + sum of coeff * u.
    FactorCombo<S> product(std::int64_t x, std::int64_t y) const {
        check_label(x);
        check_label(y);
        FactorCombo<S> out;
        switch (kind) {
            case AlgebraKind::Integer: {
                std::int64_t s = x + y;
                if (s == 0)
                    out.unit = scalar_traits<S>::one();
                else
                    out.terms.push_back({s, scalar_traits<S>::one()});
                return out;
            }
            case AlgebraKind::Cyclic:
            case AlgebraKind::FiniteGroup: {
                std::int64_t p = group_table[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
                if (p == 0)
                    out.unit = scalar_traits<S>::one();
                else
                    out.terms.push_back({p, scalar_traits<S>::one()});
                return out;
            }
            case AlgebraKind::FiniteDim: {
                auto it = product_table.find({x, y});
                if (it == product_table.end())
                    throw std::logic_error(id + ": missing structure constants for (" +
                                           std::to_string(x) + "," + std::to_string(y) + ")");
                return it->second;
            }
        }
        return out;
    }

    /// Star map on basis labels: x* as a combination of basis labels.
    /// Never has a unit component (the trace of a starred basis vector is 0).
    std::vector<LinearTerm<S>> star(std::int64_t x) const {
        check_label(x);
        switch (kind) {
            case AlgebraKind::Integer:
                return {{-x, scalar_traits<S>::one()}};
            case AlgebraKind::Cyclic:
            case AlgebraKind::FiniteGroup:
                return {{group_inverse[static_cast<std::size_t>(x)], scalar_traits<S>::one()}};
            case AlgebraKind::FiniteDim: {
                auto it = star_table.find(x);
                if (it == star_table.end())
                    throw std::logic_error(id + ": missing star expansion for " + std::to_string(x));
                return it->second;
            }
        }
        return {};
    }

    /// Squared operator norm of a basis letter in its factor.
    Real letter_norm_sq(std::int64_t x) const {
        check_label(x);
        if (kind != AlgebraKind::FiniteDim) return Real(1);
        auto it = norm_sq_table.find(x);
        if (it == norm_sq_table.end())
            throw std::logic_error(id + ": missing letter norm for " + std::to_string(x));
        return it->second;
    }

    bool unitary_letter(std::int64_t x) const {
        if (!valid_label(x)) return false;
        if (kind != AlgebraKind::FiniteDim) return true;
        return unitary_labels.count(x) > 0;
    }

    /// Labels to enumerate for validation and random sampling. Lazy (integer)
    /// bases expose generator powers up to the requested depth.
    std::vector<std::int64_t> sample_labels(int depth) const {
        std::vector<std::int64_t> out;
        if (kind == AlgebraKind::Integer) {
            for (int p = 1; p <= depth; ++p) {
                out.push_back(p);
                out.push_back(-p);
            }
        } else {
            for (std::int64_t x = 1; x < order; ++x) out.push_back(x);
        }
        return out;
    }

    void check_label(std::int64_t x) const {
        if (!valid_label(x))
            throw std::invalid_argument(id + ": invalid basis label " + std::to_string(x));
    }
};

template <class S>
Algebra<S> make_integer_algebra(std::string id) {
    Algebra<S> a;
    a.id = std::move(id);
    a.kind = AlgebraKind::Integer;
    return a;
}

/// Validates a multiplication table (element 0 must be the identity) and
/// builds the group-algebra factor. Throws with a diagnostic on a
/// non-associative table or missing inverses.
template <class S>
Algebra<S> make_group_algebra(std::string id, std::vector<std::vector<std::int64_t>> table,
                              AlgebraKind kind = AlgebraKind::FiniteGroup) {
    const std::size_t n = table.size();
    if (n < 2) throw std::invalid_argument(id + ": group must have at least 2 elements");
    for (const auto& row : table)
        if (row.size() != n) throw std::invalid_argument(id + ": multiplication table is not square");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (table[i][j] < 0 || static_cast<std::size_t>(table[i][j]) >= n)
                throw std::invalid_argument(id + ": table entry out of range");
    for (std::size_t i = 0; i < n; ++i)
        if (table[0][i] != static_cast<std::int64_t>(i) || table[i][0] != static_cast<std::int64_t>(i))
            throw std::invalid_argument(id + ": element 0 is not an identity");
    std::vector<std::int64_t> inverse(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            if (table[i][j] == 0 && table[j][i] == 0) {
                inverse[i] = static_cast<std::int64_t>(j);
                break;
            }
        if (inverse[i] < 0) throw std::invalid_argument(id + ": element " + std::to_string(i) + " has no inverse");
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) {
                auto ij_k = table[static_cast<std::size_t>(table[i][j])][k];
                auto i_jk = table[i][static_cast<std::size_t>(table[j][k])];
                if (ij_k != i_jk)
                    throw std::invalid_argument(id + ": table is not associative at (" + std::to_string(i) +
                                                "," + std::to_string(j) + "," + std::to_string(k) + ")");
            }

    Algebra<S> a;
    a.id = std::move(id);
    a.kind = kind;
    a.order = static_cast<std::int64_t>(n);
    a.group_table = std::move(table);
    a.group_inverse = std::move(inverse);
    return a;
}

template <class S>
Algebra<S> make_cyclic_algebra(std::string id, int n) {
    if (n < 2) throw std::invalid_argument(id + ": cyclic order must be at least 2");
    std::vector<std::vector<std::int64_t>> table(static_cast<std::size_t>(n),
                                                 std::vector<std::int64_t>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = (i + j) % n;
    return make_group_algebra<S>(std::move(id), std::move(table), AlgebraKind::Cyclic);
}

// ---------------------------------------------------------------------------
// Table validation
// ---------------------------------------------------------------------------

struct ValidationIssue {
    std::string check;
    std::string where;
    double magnitude = 0.0;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    double max_residual = 0.0;
    int checks_run = 0;

    bool pass() const { return issues.empty(); }
    void note_residual(double r) { max_residual = std::max(max_residual, r); }
    void fail(std::string check, std::string where, double magnitude) {
        issues.push_back({std::move(check), std::move(where), magnitude});
    }
};

namespace detail {

/// tau(v * x) for a star expansion v applied against a single label: the unit
/// coefficient of the expanded product.
template <class S>
S pairing_against_unit(const Algebra<S>& alg, const std::vector<LinearTerm<S>>& left, std::int64_t x) {
    S acc = scalar_traits<S>::zero();
    for (const auto& t : left) acc += t.coeff * alg.product(t.label, x).unit;
    return acc;
}

/// Full expansion of (star y) * x inside one factor.
template <class S>
FactorCombo<S> star_product(const Algebra<S>& alg, std::int64_t y, std::int64_t x) {
    FactorCombo<S> out;
    for (const auto& t : alg.star(y)) {
        FactorCombo<S> p = alg.product(t.label, x);
        out.unit += t.coeff * p.unit;
        for (const auto& pt : p.terms) out.add_term(pt.label, t.coeff * pt.coeff);
    }
    return out;
}

template <class S>
double combo_deviation_from_unit(const FactorCombo<S>& c) {
    using T = scalar_traits<S>;
    double dev = T::to_double(T::abs_sq(c.unit - T::one()));
    for (const auto& t : c.terms) dev = std::max(dev, T::to_double(T::abs_sq(t.coeff)));
    return dev;
}

}  // namespace detail

/// Checks orthonormality, the star involution, trace symmetry and unitarity of
/// declared unitary letters over all label pairs up to sample_depth (lazy
/// bases) or the whole basis (finite kinds). Violations are reported with
/// magnitudes; the report never throws.
template <class S>
ValidationReport validate_table(const Algebra<S>& alg, int sample_depth, double tol = 1e-12) {
    using T = scalar_traits<S>;
    ValidationReport rep;
    const auto labels = alg.sample_labels(sample_depth);

    for (std::int64_t y : labels) {
        // involution: star(star(y)) == y
        FactorCombo<S> twice;
        for (const auto& t : alg.star(y))
            for (const auto& s : alg.star(t.label)) twice.add_term(s.label, t.coeff * s.coeff);
        double dev = 0.0;
        bool saw_self = false;
        for (const auto& t : twice.terms) {
            if (t.label == y) {
                saw_self = true;
                dev = std::max(dev, T::to_double(T::abs_sq(t.coeff - T::one())));
            } else {
                dev = std::max(dev, T::to_double(T::abs_sq(t.coeff)));
            }
        }
        if (!saw_self) dev = 1.0;
        ++rep.checks_run;
        rep.note_residual(dev);
        if (dev > tol) rep.fail("star_involution", alg.id + ":" + std::to_string(y), dev);
    }

    for (std::int64_t x : labels) {
        for (std::int64_t y : labels) {
            // orthonormality: tau(y* x) == delta_{xy}
            S ip = detail::pairing_against_unit(alg, alg.star(y), x);
            S expect = (x == y) ? T::one() : T::zero();
            double dev = T::to_double(T::abs_sq(ip - expect));
            ++rep.checks_run;
            rep.note_residual(dev);
            if (dev > tol) rep.fail("orthonormality", alg.id + ":(" + std::to_string(x) + "," + std::to_string(y) + ")", dev);

            // trace symmetry: tau(xy) == tau(yx)
            S txy = alg.product(x, y).unit;
            S tyx = alg.product(y, x).unit;
            dev = T::to_double(T::abs_sq(txy - tyx));
            ++rep.checks_run;
            rep.note_residual(dev);
            if (dev > tol) rep.fail("trace_symmetry", alg.id + ":(" + std::to_string(x) + "," + std::to_string(y) + ")", dev);
        }
    }

    for (std::int64_t x : labels) {
        if (!alg.unitary_letter(x)) continue;
        // x x* == 1 == x* x under the table expansion
        FactorCombo<S> xxs;
        for (const auto& t : alg.star(x)) {
            FactorCombo<S> p = alg.product(x, t.label);
            xxs.unit += p.unit * t.coeff;
            for (const auto& pt : p.terms) xxs.add_term(pt.label, pt.coeff * t.coeff);
        }
        double dev = detail::combo_deviation_from_unit(xxs);
        FactorCombo<S> xsx = detail::star_product(alg, x, x);
        dev = std::max(dev, detail::combo_deviation_from_unit(xsx));
        ++rep.checks_run;
        rep.note_residual(dev);
        if (dev > tol) rep.fail("unitarity", alg.id + ":" + std::to_string(x), dev);
    }

    return rep;
}

}  // namespace freeprod
