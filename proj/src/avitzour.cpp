#include "freeprod/avitzour.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace freeprod {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

using CD = std::complex<double>;

// Adaptive Simpson quadrature on a complex-valued integrand.
CD simpson_step(double a, double b, CD fa, CD fm, CD fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

CD adaptive_simpson_rec(const std::function<CD(double)>& f, double a, double b, CD fa, CD fm, CD fb,
                        CD whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const CD flm = f(lm);
    const CD frm = f(rm);
    const CD left = simpson_step(a, m, fa, flm, fm);
    const CD right = simpson_step(m, b, fm, frm, fb);
    const CD delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

CD adaptive_simpson(const std::function<CD(double)>& f, double a, double b, double tol) {
    if (a == b) return {};
    const CD fa = f(a);
    const CD fm = f(0.5 * (a + b));
    const CD fb = f(b);
    const CD whole = simpson_step(a, b, fa, fm, fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 28);
}

double golden_min(const std::function<double(double)>& f, double a, double b, int iters = 60) {
    const double phi = 0.6180339887498949;
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 < f2 ? x1 : x2;
}

}  // namespace

// ---------------------------------------------------------------------------
// Measures
// ---------------------------------------------------------------------------

double DensityInterval::density(double x) const {
    double acc = 0.0;
    for (std::size_t i = poly.size(); i-- > 0;) acc = acc * x + poly[i];
    return acc;
}

double DensityInterval::mass(double a, double b) const {
    auto anti = [this](double x) {
        double acc = 0.0;
        for (std::size_t i = poly.size(); i-- > 0;)
            acc = acc * x + poly[i] / static_cast<double>(i + 1);
        return acc * x;
    };
    return anti(b) - anti(a);
}

double DiscreteTracialSpace::total_mass() const {
    double m = 0.0;
    for (const auto& a : atoms) m += a.mass;
    for (const auto& iv : intervals) m += iv.mass(iv.lo, iv.hi);
    return m;
}

void DiscreteTracialSpace::validate(double tol) const {
    for (const auto& a : atoms)
        if (a.mass < 0) throw std::invalid_argument("measure: negative atom mass");
    for (const auto& iv : intervals) {
        if (!(iv.lo < iv.hi)) throw std::invalid_argument("measure: empty or inverted interval");
        for (int i = 0; i <= 64; ++i) {
            double x = iv.lo + (iv.hi - iv.lo) * i / 64.0;
            if (iv.density(x) < -tol) throw std::invalid_argument("measure: negative density");
        }
    }
    if (std::abs(total_mass() - 1.0) > tol)
        throw std::invalid_argument("measure: total mass is not 1");
}

PiecewiseMonotoneFn PiecewiseMonotoneFn::identity() {
    PiecewiseMonotoneFn f;
    f.fn = [](double x) { return x; };
    return f;
}

// ---------------------------------------------------------------------------
// Haar phase functions
// ---------------------------------------------------------------------------

struct PhaseFunction::Impl {
    struct Piece {
        double lo, hi;
        const DensityInterval* src;
        bool increasing;
        double f_lo, f_hi;
    };

    DiscreteTracialSpace measure;
    PiecewiseMonotoneFn f;
    std::vector<Piece> pieces;

    double solve_in_piece(const Piece& p, double t) const {
        double a = p.lo, b = p.hi;
        for (int i = 0; i < 64; ++i) {
            double m = 0.5 * (a + b);
            double v = f.fn(m);
            if ((v < t) == p.increasing)
                a = m;
            else
                b = m;
        }
        return 0.5 * (a + b);
    }

    // Pushforward cdf: mass of { f <= t }.
    double cdf(double t) const {
        double acc = 0.0;
        for (const auto& p : pieces) {
            const double flo = p.increasing ? p.f_lo : p.f_hi;
            const double fhi = p.increasing ? p.f_hi : p.f_lo;
            if (t >= fhi) {
                acc += p.src->mass(p.lo, p.hi);
            } else if (t > flo) {
                double x = solve_in_piece(p, t);
                acc += p.increasing ? p.src->mass(p.lo, x) : p.src->mass(x, p.hi);
            }
        }
        return acc;
    }

    double h(double x) const { return cdf(f.fn(x)); }
};

double PhaseFunction::h(double x) const { return impl_->h(x); }

CD PhaseFunction::u(double x) const {
    const double hx = impl_->h(x);
    return {std::cos(kTwoPi * hx), std::sin(kTwoPi * hx)};
}

CD PhaseFunction::moment(int n, double tol) const {
    if (n == 0) return {1.0, 0.0};
    CD acc{};
    // pre-split each piece into an odd, frequency-dependent number of panels;
    // a bare dyadic Simpson grid aliases oscillations at power-of-two n
    const int panels = 4 * std::abs(n) + 5;
    const double panel_tol = tol / (std::max<std::size_t>(1, impl_->pieces.size()) * panels);
    for (const auto& p : impl_->pieces) {
        auto integrand = [&](double x) -> CD {
            const double phase = kTwoPi * n * impl_->h(x);
            return CD{std::cos(phase), std::sin(phase)} * p.src->density(x);
        };
        for (int i = 0; i < panels; ++i) {
            const double a = p.lo + (p.hi - p.lo) * i / panels;
            const double b = p.lo + (p.hi - p.lo) * (i + 1) / panels;
            acc += adaptive_simpson(integrand, a, b, panel_tol);
        }
    }
    return acc;
}

PhaseFunction haar_unitary_from_measure(const DiscreteTracialSpace& measure,
                                        const PiecewiseMonotoneFn& f) {
    measure.validate();
    if (!measure.diffuse())
        throw std::invalid_argument("haar unitary: measure has atoms, no Haar phase exists");
    if (!f.fn) throw std::invalid_argument("haar unitary: missing function");

    auto impl = std::make_shared<PhaseFunction::Impl>();
    impl->measure = measure;
    impl->f = f;

    for (const auto& iv : impl->measure.intervals) {
        std::vector<double> cuts{iv.lo, iv.hi};
        for (double b : f.breakpoints)
            if (b > iv.lo && b < iv.hi) cuts.push_back(b);
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            PhaseFunction::Impl::Piece p;
            p.lo = cuts[i];
            p.hi = cuts[i + 1];
            p.src = &iv;
            p.f_lo = f.fn(p.lo);
            p.f_hi = f.fn(p.hi);

            // Monotonicity check and detection of flat stretches carrying
            // positive mass (those would create an atom in the pushforward).
            const int samples = 128;
            double prev = p.f_lo;
            int dir = 0;
            double flat_from = p.lo;
            bool in_flat = false;
            for (int s = 1; s <= samples; ++s) {
                double x = p.lo + (p.hi - p.lo) * s / samples;
                double v = f.fn(x);
                double step = v - prev;
                const double flat_tol = 1e-13 * std::max(1.0, std::abs(v));
                if (std::abs(step) <= flat_tol) {
                    if (!in_flat) {
                        in_flat = true;
                        flat_from = p.lo + (p.hi - p.lo) * (s - 1) / samples;
                    }
                } else {
                    if (in_flat) {
                        if (iv.mass(flat_from, x) > 1e-9)
                            throw std::invalid_argument(
                                "haar unitary: f is constant on a set of positive mass");
                        in_flat = false;
                    }
                    int d = step > 0 ? 1 : -1;
                    if (dir == 0)
                        dir = d;
                    else if (d != dir)
                        throw std::invalid_argument(
                            "haar unitary: f is not monotone between breakpoints");
                }
                prev = v;
            }
            if (in_flat && iv.mass(flat_from, p.hi) > 1e-9)
                throw std::invalid_argument("haar unitary: f is constant on a set of positive mass");
            p.increasing = p.f_hi >= p.f_lo;
            impl->pieces.push_back(p);
        }
    }
    return PhaseFunction(std::move(impl));
}

std::vector<ShippedMeasure> shipped_measures() {
    std::vector<ShippedMeasure> out;
    {
        ShippedMeasure m;
        m.name = "lebesgue_01";
        m.measure.intervals = {{0.0, 1.0, {1.0}}};
        m.f = PiecewiseMonotoneFn::identity();
        out.push_back(std::move(m));
    }
    {
        ShippedMeasure m;
        m.name = "linear_density";
        m.measure.intervals = {{0.0, 1.0, {0.0, 2.0}}};
        m.f = PiecewiseMonotoneFn::identity();
        out.push_back(std::move(m));
    }
    {
        ShippedMeasure m;
        m.name = "two_band";
        m.measure.intervals = {{0.0, 0.5, {1.0}}, {1.0, 1.5, {1.0}}};
        m.f = PiecewiseMonotoneFn::identity();
        out.push_back(std::move(m));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Unitaries from projections
// ---------------------------------------------------------------------------

std::vector<CD> root_of_unity_unitary(int n, const std::vector<double>& traces, double tol) {
    if (n < 2) throw std::invalid_argument("root_of_unity_unitary: n must be >= 2");
    if (static_cast<int>(traces.size()) != n)
        throw std::invalid_argument("root_of_unity_unitary: need exactly n projection traces");
    for (double t : traces)
        if (std::abs(t - 1.0 / n) > tol)
            throw std::invalid_argument("root_of_unity_unitary: traces must all equal 1/n");
    std::vector<CD> coeffs(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double phase = kTwoPi * k / n;
        coeffs[static_cast<std::size_t>(k)] = {std::cos(phase), std::sin(phase)};
    }
    return coeffs;
}

ZeroTraceUnitary zero_trace_unitary(const std::vector<double>& traces, double tol) {
    if (traces.size() < 2) throw std::invalid_argument("zero_trace_unitary: need at least 2 projections");
    double sum = std::accumulate(traces.begin(), traces.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("zero_trace_unitary: traces must sum to 1");
    for (double t : traces) {
        if (t < 0) throw std::invalid_argument("zero_trace_unitary: negative trace");
        if (t > 0.5 + 1e-12)
            throw std::invalid_argument(
                "zero_trace_unitary: a trace exceeds 1/2, infeasible for this construction");
    }

    // Merge into three blocks, each of trace <= 1/2: greedy descending into
    // the least-loaded block.
    std::vector<std::size_t> order(traces.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return traces[a] > traces[b]; });
    std::array<double, 3> load{0.0, 0.0, 0.0};
    std::vector<int> assignment(traces.size(), 0);
    for (std::size_t idx : order) {
        int target = 0;
        for (int b = 1; b < 3; ++b)
            if (load[static_cast<std::size_t>(b)] < load[static_cast<std::size_t>(target)]) target = b;
        load[static_cast<std::size_t>(target)] += traces[idx];
        assignment[idx] = target;
    }

    // Relabel blocks descending.
    std::array<int, 3> rank{0, 1, 2};
    std::sort(rank.begin(), rank.end(), [&](int a, int b) {
        return load[static_cast<std::size_t>(a)] > load[static_cast<std::size_t>(b)];
    });
    std::array<int, 3> relabel{};
    for (int newi = 0; newi < 3; ++newi) relabel[static_cast<std::size_t>(rank[static_cast<std::size_t>(newi)])] = newi;
    for (auto& a : assignment) a = relabel[static_cast<std::size_t>(a)];

    ZeroTraceUnitary out;
    out.assignment = assignment;
    for (int b = 0; b < 3; ++b)
        out.merged_traces[static_cast<std::size_t>(b)] =
            load[static_cast<std::size_t>(rank[static_cast<std::size_t>(b)])];
    const double t1 = out.merged_traces[0], t2 = out.merged_traces[1], t3 = out.merged_traces[2];

    // |t1 + lambda t2| must equal t3; reachable because the merged traces obey
    // the triangle conditions. mu then cancels the remainder.
    CD lambda, mu;
    if (t3 <= tol) {
        lambda = {-1.0, 0.0};
        mu = {1.0, 0.0};
    } else {
        double c = (t3 * t3 - t1 * t1 - t2 * t2) / (2.0 * t1 * t2);
        c = std::clamp(c, -1.0, 1.0);
        const double theta = std::acos(c);
        lambda = {std::cos(theta), std::sin(theta)};
        const CD s = t1 + lambda * t2;
        mu = -s / t3;
    }
    out.phases = {CD{1.0, 0.0}, lambda, mu};
    out.trace_residual = std::abs(t1 * out.phases[0] + t2 * out.phases[1] + t3 * out.phases[2]);
    return out;
}

MatrixPair matrix_avitzour_pair(int n) {
    if (n < 2) throw std::invalid_argument("matrix_avitzour_pair: n must be >= 2");
    MatrixPair out;
    out.n = n;
    out.u.assign(static_cast<std::size_t>(n) * n, CD{});
    out.v.assign(static_cast<std::size_t>(n) * n, CD{});
    auto at = [n](std::vector<CD>& m, int r, int c) -> CD& {
        return m[static_cast<std::size_t>(r) * static_cast<std::size_t>(n) + static_cast<std::size_t>(c)];
    };
    if (n == 2) {
        at(out.u, 0, 0) = 1.0;
        at(out.u, 1, 1) = -1.0;
        at(out.v, 0, 1) = 1.0;
        at(out.v, 1, 0) = 1.0;
        return out;
    }
    for (int k = 0; k < n; ++k) {
        const double phase = kTwoPi * k / n;
        at(out.u, k, k) = CD{std::cos(phase), std::sin(phase)};
        at(out.v, (k + 1) % n, k) = 1.0;  // cyclic shift e_k -> e_{k+1}
    }
    return out;
}

// ---------------------------------------------------------------------------
// Obstructions
// ---------------------------------------------------------------------------

AtomObstructionVerdict atom_obstruction(int n, double atom_mass) {
    if (n < 2) throw std::invalid_argument("atom_obstruction: n must be >= 2");
    if (!(atom_mass > 0.0 && atom_mass < 1.0))
        throw std::invalid_argument("atom_obstruction: atom mass must lie in (0,1)");
    AtomObstructionVerdict out;
    out.n = n;
    out.atom_mass = atom_mass;
    out.alpha = atom_mass / (1.0 - atom_mass);

    Eigen::MatrixXd gram(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) gram(i, j) = (i == j) ? 1.0 : -out.alpha;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    out.min_eigenvalue = es.eigenvalues().minCoeff();
    out.feasible = out.min_eigenvalue >= 0.0;
    return out;
}

namespace {

struct FourPointObjective {
    double w;     // mass of each of the first three points
    double beta;  // mass of the fourth point, gauge-fixed to phase 1

    CD integral(const std::array<double, 3>& ang) const {
        CD s{beta, 0.0};
        for (double a : ang) s += w * CD{std::cos(a), std::sin(a)};
        return s;
    }
    CD cross(const std::array<double, 3>& th, const std::array<double, 3>& ph) const {
        CD s{beta, 0.0};
        for (int j = 0; j < 3; ++j) {
            double d = th[static_cast<std::size_t>(j)] - ph[static_cast<std::size_t>(j)];
            s += w * CD{std::cos(d), std::sin(d)};
        }
        return s;
    }
    double residual(const std::array<double, 3>& th, const std::array<double, 3>& ph) const {
        return std::norm(integral(th)) + std::norm(integral(ph)) + std::norm(cross(th, ph));
    }
};

}  // namespace

FourPointResult four_point_infeasibility(double beta, int restarts, std::uint64_t seed) {
    if (beta < 0.0 || beta > 1.0 / 3.0 + 1e-12)
        throw std::invalid_argument("four_point_infeasibility: beta must lie in [0, 1/3]");
    if (restarts < 1) throw std::invalid_argument("four_point_infeasibility: restarts must be >= 1");

    FourPointObjective obj{(1.0 - beta) / 3.0, beta};
    FourPointResult best;
    best.beta = beta;
    best.restarts = restarts;
    best.residual = std::numeric_limits<double>::infinity();

    for (int r = 0; r < restarts; ++r) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(r) * 0x9e3779b97f4a7c15ULL);
        std::uniform_real_distribution<double> unif(0.0, kTwoPi);
        std::array<double, 3> th, ph;
        for (auto& a : th) a = unif(rng);
        for (auto& a : ph) a = unif(rng);

        // Cyclic exact coordinate minimization: the residual is affine in
        // (cos, sin) of each single angle, so the per-angle optimum is closed
        // form.
        double cur = obj.residual(th, ph);
        for (int sweep = 0; sweep < 4000; ++sweep) {
            for (int j = 0; j < 3; ++j) {
                const auto js = static_cast<std::size_t>(j);
                CD eth{std::cos(th[js]), std::sin(th[js])};
                CD eph{std::cos(ph[js]), std::sin(ph[js])};
                CD a_rest = obj.integral(th) - obj.w * eth;
                CD b_rest = obj.cross(th, ph) - obj.w * eth * std::conj(eph);
                CD c = a_rest + b_rest * eph;
                if (std::abs(c) > 0) th[js] = std::atan2(-c.imag(), -c.real());

                eth = {std::cos(th[js]), std::sin(th[js])};
                CD a2 = obj.integral(ph) - obj.w * eph;
                CD b2 = obj.cross(th, ph) - obj.w * eth * std::conj(eph);
                CD zeta = std::conj(b2) * eth;
                CD c2 = a2 + zeta;
                if (std::abs(c2) > 0) ph[js] = std::atan2(-c2.imag(), -c2.real());
            }
            double next = obj.residual(th, ph);
            if (cur - next < 1e-18 && sweep > 8) {
                cur = next;
                break;
            }
            cur = next;
        }
        if (cur < best.residual) {
            best.residual = cur;
            best.angles = {th[0], th[1], th[2], ph[0], ph[1], ph[2]};
            best.best_restart = r;
        }
    }
    return best;
}

PhaseWindow phase_window_scan(double alpha, int grid) {
    if (!(alpha > 0.0 && alpha <= 0.5))
        throw std::invalid_argument("phase_window_scan: alpha must lie in (0, 1/2]");
    PhaseWindow out;
    out.alpha = alpha;
    const double s = std::sqrt(1.0 - alpha * alpha);
    out.beta = (alpha * alpha + alpha) / s;
    const double gamma_sq = 1.0 - alpha * alpha - out.beta * out.beta;
    if (gamma_sq < -1e-12)
        throw std::invalid_argument("phase_window_scan: derived gamma^2 < 0, inconsistent alpha");
    out.gamma = std::sqrt(std::max(0.0, gamma_sq));

    // lambda runs over the circle |-alpha + s lambda| = 1 of center alpha/s,
    // radius 1/s; the band constraint on |-alpha - beta lambda| selects arcs.
    const double center = alpha / s;
    const double radius = 1.0 / s;
    const double band = std::sqrt(3.0) * out.gamma;
    const double band_tol = 2.0 * out.beta * radius * (kTwoPi / grid) + 1e-12;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double t = kTwoPi * i / grid;
        const CD lambda{center + radius * std::cos(t), radius * std::sin(t)};
        const double d = std::abs(-alpha - out.beta * lambda);
        if (d < 1.0 - band - band_tol || d > 1.0 + band + band_tol) continue;
        const double im = std::abs(lambda.imag());
        lo = std::min(lo, im);
        hi = std::max(hi, im);
    }
    out.nonempty = hi > 0.0 || lo < std::numeric_limits<double>::infinity();
    if (!out.nonempty) {
        lo = 0.0;
        hi = 0.0;
    }
    out.lo = lo;
    out.hi = hi;
    return out;
}

double estimate_alpha0(int alpha_steps, int grid) {
    for (int i = alpha_steps; i >= 1; --i) {
        const double alpha = 0.5 * i / alpha_steps;
        PhaseWindow w = phase_window_scan(alpha, grid);
        if (!w.nonempty) continue;
        if (w.lo <= 2.0 / 3.0 || w.hi >= 4.0 / 3.0) return alpha;
    }
    return 0.0;
}

double half_atom_trace_infimum(int nodes, int restarts, std::uint64_t seed) {
    if (nodes < 2) throw std::invalid_argument("half_atom_trace_infimum: need at least 2 cells");
    if (restarts < 1) throw std::invalid_argument("half_atom_trace_infimum: restarts must be >= 1");
    const int m = nodes;

    // tau(u) = (1/2) u(0) + (1/2) int_0^1 u, with u = exp(i theta) and theta
    // piecewise linear on m cells. Cell integral via the sinc form.
    auto cell = [m](double a, double b) -> CD {
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        const double sinc = std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
        return CD{std::cos(mid), std::sin(mid)} * sinc / static_cast<double>(m);
    };
    auto trace_of = [&](const std::vector<double>& th) {
        CD acc = 0.5 * CD{std::cos(th[0]), std::sin(th[0])};
        CD integral{};
        for (int j = 0; j < m; ++j)
            integral += cell(th[static_cast<std::size_t>(j)], th[static_cast<std::size_t>(j) + 1]);
        return acc + 0.5 * integral;
    };

    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(r) * 0x9e3779b97f4a7c15ULL);
        std::uniform_real_distribution<double> unif(0.0, kTwoPi);
        std::vector<double> th(static_cast<std::size_t>(m) + 1);
        if (r == 0) {
            // deterministic ramp start: jump to the antipode within one cell
            th[0] = 0.0;
            for (int j = 1; j <= m; ++j) th[static_cast<std::size_t>(j)] = 3.14159265358979323846;
        } else {
            for (auto& a : th) a = unif(rng);
        }

        for (int sweep = 0; sweep < 6; ++sweep) {
            for (int j = 0; j <= m; ++j) {
                auto js = static_cast<std::size_t>(j);
                auto value = [&](double cand) {
                    double keep = th[js];
                    th[js] = cand;
                    double v = std::abs(trace_of(th));
                    th[js] = keep;
                    return v;
                };
                double bcand = th[js];
                double bval = value(bcand);
                const int coarse = 48;
                for (int c = 0; c < coarse; ++c) {
                    double cand = kTwoPi * c / coarse;
                    double v = value(cand);
                    if (v < bval) {
                        bval = v;
                        bcand = cand;
                    }
                }
                double gm = golden_min(value, bcand - kTwoPi / coarse, bcand + kTwoPi / coarse, 48);
                if (value(gm) <= bval) bcand = gm;
                th[js] = bcand;
            }
        }
        best = std::min(best, std::abs(trace_of(th)));
    }
    return best;
}

}  // namespace freeprod
