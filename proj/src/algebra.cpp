#include "freeprod/finite_dim.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace freeprod {

namespace {

using CD = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

Vec to_vec(const std::vector<CD>& v) {
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = v[static_cast<std::size_t>(i)];
    return out;
}

std::vector<CD> from_vec(const Vec& v) {
    std::vector<CD> out(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = v[i];
    return out;
}

struct Ctx {
    const FiniteDimSpec& spec;
    int d;

    Vec mul(const Vec& a, const Vec& b) const {
        Vec out = Vec::Zero(d);
        for (int i = 0; i < d; ++i) {
            if (a[i] == CD{}) continue;
            for (int j = 0; j < d; ++j) {
                CD c = a[i] * b[j];
                if (c == CD{}) continue;
                const auto& coords = spec.mult[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                for (int k = 0; k < d; ++k) out[k] += c * coords[static_cast<std::size_t>(k)];
            }
        }
        return out;
    }

    // Star is conjugate-linear in the coordinates.
    Vec adj(const Vec& a) const {
        Vec out = Vec::Zero(d);
        for (int i = 0; i < d; ++i) {
            CD c = std::conj(a[i]);
            if (c == CD{}) continue;
            const auto& coords = spec.star[static_cast<std::size_t>(i)];
            for (int k = 0; k < d; ++k) out[k] += c * coords[static_cast<std::size_t>(k)];
        }
        return out;
    }

    CD tr(const Vec& a) const {
        CD out{};
        for (int i = 0; i < d; ++i) out += a[i] * spec.trace[static_cast<std::size_t>(i)];
        return out;
    }

    // <a,b> = tau(b* a)
    CD ip(const Vec& a, const Vec& b) const { return tr(mul(adj(b), a)); }
};

void check_spec_shape(const FiniteDimSpec& spec) {
    const auto d = static_cast<std::size_t>(spec.dim);
    if (spec.dim < 1) throw std::invalid_argument("finite_dim: dimension must be positive");
    if (spec.mult.size() != d || spec.star.size() != d || spec.trace.size() != d || spec.unit.size() != d)
        throw std::invalid_argument("finite_dim: spec arrays do not match the dimension");
    for (const auto& row : spec.mult) {
        if (row.size() != d) throw std::invalid_argument("finite_dim: mult tensor is not d x d x d");
        for (const auto& coords : row)
            if (coords.size() != d) throw std::invalid_argument("finite_dim: mult tensor is not d x d x d");
    }
    for (const auto& coords : spec.star)
        if (coords.size() != d) throw std::invalid_argument("finite_dim: star matrix is not d x d");
    if (spec.seed.empty()) throw std::invalid_argument("finite_dim: seed set must contain the unit");
    for (const auto& coords : spec.seed)
        if (coords.size() != d) throw std::invalid_argument("finite_dim: seed vector has wrong length");
}

}  // namespace

GramSchmidtOutput gram_schmidt_onb_full(std::string id, const FiniteDimSpec& spec, double tol) {
    check_spec_shape(spec);
    const int d = spec.dim;
    Ctx ctx{spec, d};

    // Faithful trace <=> positive definite Gram matrix of the spanning set.
    Mat gram(d, d);
    for (int i = 0; i < d; ++i) {
        Vec ei = Vec::Zero(d);
        ei[i] = 1.0;
        for (int j = 0; j < d; ++j) {
            Vec ej = Vec::Zero(d);
            ej[j] = 1.0;
            gram(j, i) = ctx.ip(ei, ej);
        }
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(gram);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < tol)
        throw std::invalid_argument(id + ": trace not faithful (Gram matrix singular beyond tolerance)");

    // Seed checks: first vector is the unit, set is orthonormal.
    Vec unit = to_vec(spec.unit);
    std::vector<Vec> basis;
    for (const auto& s : spec.seed) basis.push_back(to_vec(s));
    if ((basis[0] - unit).norm() > 1e-9)
        throw std::invalid_argument(id + ": seed set must start with the unit");
    for (std::size_t i = 0; i < basis.size(); ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            CD v = ctx.ip(basis[i], basis[j]);
            CD expect = (i == j) ? CD{1.0} : CD{};
            if (std::abs(v - expect) > 1e-9)
                throw std::invalid_argument(id + ": seed set not orthonormal");
        }

    // Complete to an ONB of the whole algebra by modified Gram-Schmidt over
    // the spanning vectors, with one reorthogonalization pass.
    for (int i = 0; i < d; ++i) {
        Vec cand = Vec::Zero(d);
        cand[i] = 1.0;
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec& b : basis) cand -= ctx.ip(cand, b) * b;
        double nrm = std::sqrt(std::abs(ctx.ip(cand, cand).real()));
        if (nrm > 1e-8) basis.push_back(cand / nrm);
    }
    if (static_cast<int>(basis.size()) != d)
        throw std::invalid_argument(id + ": orthonormal completion has wrong size (got " +
                                    std::to_string(basis.size()) + ", expected " + std::to_string(d) + ")");

    Algebra<CD> alg;
    alg.id = std::move(id);
    alg.kind = AlgebraKind::FiniteDim;
    alg.order = d;

    const double prune = 1e-13;
    auto expand = [&](const Vec& v) {
        FactorCombo<CD> combo;
        combo.unit = ctx.ip(v, unit);
        if (std::abs(combo.unit) <= prune) combo.unit = CD{};
        for (int k = 1; k < d; ++k) {
            CD c = ctx.ip(v, basis[static_cast<std::size_t>(k)]);
            if (std::abs(c) > prune) combo.terms.push_back({k, c});
        }
        return combo;
    };

    for (int i = 1; i < d; ++i) {
        const Vec& xi = basis[static_cast<std::size_t>(i)];
        Vec xs = ctx.adj(xi);
        FactorCombo<CD> star_combo = expand(xs);
        // tau(x*) = conj(tau(x)) = 0 for trace-zero basis vectors
        alg.star_table[i] = star_combo.terms;

        for (int j = 1; j < d; ++j)
            alg.product_table[{i, j}] = expand(ctx.mul(xi, basis[static_cast<std::size_t>(j)]));

        // Operator norm via the left regular representation on the ONB: the
        // trace is faithful, so this is the C*-norm of the letter.
        Mat lm(d, d);
        for (int j = 0; j < d; ++j) {
            Vec col = ctx.mul(xi, basis[static_cast<std::size_t>(j)]);
            for (int r = 0; r < d; ++r) lm(r, j) = ctx.ip(col, basis[static_cast<std::size_t>(r)]);
        }
        Eigen::JacobiSVD<Mat> svd(lm);
        double sigma = svd.singularValues()[0];
        alg.norm_sq_table[i] = sigma * sigma;

        Vec xxs = ctx.mul(xi, xs);
        Vec xsx = ctx.mul(xs, xi);
        if ((xxs - unit).norm() <= 1e-9 && (xsx - unit).norm() <= 1e-9) alg.unitary_labels.insert(i);
    }

    GramSchmidtOutput out;
    out.table = std::move(alg);
    for (const Vec& b : basis) out.basis.push_back(from_vec(b));
    return out;
}

FiniteDimSpec matrix_algebra_spec(int n) {
    if (n < 2) throw std::invalid_argument("matrix_algebra_spec: n must be at least 2");
    const int d = n * n;
    auto idx = [n](int r, int c) { return r * n + c; };

    FiniteDimSpec spec;
    spec.dim = d;
    spec.mult.assign(static_cast<std::size_t>(d),
                     std::vector<std::vector<CD>>(static_cast<std::size_t>(d),
                                                  std::vector<CD>(static_cast<std::size_t>(d))));
    spec.star.assign(static_cast<std::size_t>(d), std::vector<CD>(static_cast<std::size_t>(d)));
    spec.trace.assign(static_cast<std::size_t>(d), CD{});
    spec.unit.assign(static_cast<std::size_t>(d), CD{});

    // e_{rc} e_{st} = delta_{cs} e_{rt}; e_{rc}* = e_{cr}; tau(e_{rc}) = delta_{rc}/n
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            int i = idx(r, c);
            spec.star[static_cast<std::size_t>(i)][static_cast<std::size_t>(idx(c, r))] = 1.0;
            if (r == c) {
                spec.trace[static_cast<std::size_t>(i)] = 1.0 / n;
                spec.unit[static_cast<std::size_t>(i)] = 1.0;
            }
            for (int s = 0; s < n; ++s)
                for (int t = 0; t < n; ++t)
                    if (c == s)
                        spec.mult[static_cast<std::size_t>(i)][static_cast<std::size_t>(idx(s, t))]
                                 [static_cast<std::size_t>(idx(r, t))] = 1.0;
        }

    spec.seed.push_back(spec.unit);
    if (n == 2) {
        std::vector<CD> u(static_cast<std::size_t>(d)), v(static_cast<std::size_t>(d));
        u[static_cast<std::size_t>(idx(0, 0))] = 1.0;
        u[static_cast<std::size_t>(idx(1, 1))] = -1.0;
        v[static_cast<std::size_t>(idx(0, 1))] = 1.0;
        v[static_cast<std::size_t>(idx(1, 0))] = 1.0;
        spec.seed.push_back(u);
        spec.seed.push_back(v);
    }
    return spec;
}

FiniteDimSpec two_point_algebra_spec(double w1, double w2) {
    if (w1 <= 0 || w2 <= 0 || std::abs(w1 + w2 - 1.0) > 1e-12)
        throw std::invalid_argument("two_point_algebra_spec: weights must be positive and sum to 1");
    FiniteDimSpec spec;
    spec.dim = 2;
    spec.mult = {{{1.0, 0.0}, {0.0, 0.0}}, {{0.0, 0.0}, {0.0, 1.0}}};
    spec.star = {{1.0, 0.0}, {0.0, 1.0}};
    spec.trace = {w1, w2};
    spec.unit = {1.0, 1.0};
    spec.seed = {spec.unit};
    return spec;
}

double spanning_reconstruction_residual(const FiniteDimSpec& spec, const GramSchmidtOutput& out) {
    const int d = spec.dim;
    Ctx ctx{spec, d};
    std::vector<Vec> basis;
    for (const auto& b : out.basis) basis.push_back(to_vec(b));
    double worst = 0.0;
    for (int i = 0; i < d; ++i) {
        Vec ei = Vec::Zero(d);
        ei[i] = 1.0;
        Vec recon = Vec::Zero(d);
        for (const Vec& b : basis) recon += ctx.ip(ei, b) * b;
        worst = std::max(worst, (recon - ei).norm());
    }
    return worst;
}

}  // namespace freeprod
