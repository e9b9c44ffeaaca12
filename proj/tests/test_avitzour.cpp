#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "freeprod/avitzour.hpp"

using namespace freeprod;
using CD = std::complex<double>;

namespace {

DiscreteTracialSpace lebesgue01() {
    DiscreteTracialSpace m;
    m.intervals = {{0.0, 1.0, {1.0}}};
    return m;
}

double random_mass(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    return u(rng);
}

}  // namespace

TEST_CASE("measure validation") {
    CHECK_NOTHROW(lebesgue01().validate());
    DiscreteTracialSpace short_mass;
    short_mass.intervals = {{0.0, 0.5, {1.0}}};
    CHECK_THROWS_AS(short_mass.validate(), std::invalid_argument);
    DiscreteTracialSpace negative;
    negative.intervals = {{0.0, 1.0, {2.0, -4.0}}};  // density 2 - 4x dips below 0
    CHECK_THROWS_AS(negative.validate(), std::invalid_argument);
}

TEST_CASE("haar phase for lebesgue measure") {
    PhaseFunction u = haar_unitary_from_measure(lebesgue01(), PiecewiseMonotoneFn::identity());
    CHECK(u.h(0.25) == doctest::Approx(0.25));
    for (int n = 1; n <= 8; ++n) {
        CHECK(std::abs(u.moment(n)) <= 1e-6);
        CHECK(std::abs(u.moment(-n)) <= 1e-6);
    }
    CHECK(std::abs(u.moment(0) - CD{1.0}) <= 1e-12);
}

TEST_CASE("haar phase for linear density: cdf is t^2") {
    DiscreteTracialSpace m;
    m.intervals = {{0.0, 1.0, {0.0, 2.0}}};
    PhaseFunction u = haar_unitary_from_measure(m, PiecewiseMonotoneFn::identity());
    CHECK(u.h(0.5) == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(u.h(1.0) == doctest::Approx(1.0).epsilon(1e-10));
    for (int n = 1; n <= 8; ++n) CHECK(std::abs(u.moment(n)) <= 1e-6);
}

TEST_CASE("haar phase for a two-band measure: piecewise cdf") {
    DiscreteTracialSpace m;
    m.intervals = {{0.0, 0.5, {1.0}}, {1.0, 1.5, {1.0}}};
    PhaseFunction u = haar_unitary_from_measure(m, PiecewiseMonotoneFn::identity());
    CHECK(u.h(0.5) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(u.h(1.25) == doctest::Approx(0.75).epsilon(1e-10));
    for (int n = 1; n <= 8; ++n) {
        CHECK(std::abs(u.moment(n)) <= 1e-6);
        CHECK(std::abs(u.moment(-n)) <= 1e-6);
    }
}

TEST_CASE("haar phase through a nontrivial monotone function") {
    // f(x) = x^2 pushes Lebesgue to cdf sqrt(t); the composition is x again
    PiecewiseMonotoneFn f;
    f.fn = [](double x) { return x * x; };
    PhaseFunction u = haar_unitary_from_measure(lebesgue01(), f);
    CHECK(u.h(0.5) == doctest::Approx(0.5).epsilon(1e-8));
    for (int n = 1; n <= 6; ++n) CHECK(std::abs(u.moment(n)) <= 1e-6);

    // decreasing branch
    PiecewiseMonotoneFn g;
    g.fn = [](double x) { return 1.0 - x; };
    PhaseFunction v = haar_unitary_from_measure(lebesgue01(), g);
    CHECK(v.h(0.25) == doctest::Approx(0.75).epsilon(1e-8));
    for (int n = 1; n <= 6; ++n) CHECK(std::abs(v.moment(n)) <= 1e-6);
}

TEST_CASE("haar phase rejections") {
    DiscreteTracialSpace atomic;
    atomic.atoms = {{0.0, 0.5}};
    atomic.intervals = {{0.0, 1.0, {0.5}}};
    CHECK_THROWS_WITH_AS(haar_unitary_from_measure(atomic, PiecewiseMonotoneFn::identity()),
                         doctest::Contains("atom"), std::invalid_argument);

    // constant on [0, 0.3]: pushforward gains an atom
    PiecewiseMonotoneFn clamped;
    clamped.fn = [](double x) { return std::max(x, 0.3); };
    clamped.breakpoints = {0.3};
    CHECK_THROWS_WITH_AS(haar_unitary_from_measure(lebesgue01(), clamped),
                         doctest::Contains("positive mass"), std::invalid_argument);

    // non-monotone without breakpoints is rejected
    PiecewiseMonotoneFn vee;
    vee.fn = [](double x) { return std::abs(x - 0.5); };
    CHECK_THROWS_WITH_AS(haar_unitary_from_measure(lebesgue01(), vee),
                         doctest::Contains("monotone"), std::invalid_argument);
    // with the breakpoint declared, both monotone halves work
    vee.breakpoints = {0.5};
    PhaseFunction u = haar_unitary_from_measure(lebesgue01(), vee);
    for (int n = 1; n <= 4; ++n) CHECK(std::abs(u.moment(n)) <= 1e-6);
}

TEST_CASE("shipped measures satisfy the moment bound") {
    auto shipped = shipped_measures();
    REQUIRE(shipped.size() == 3);
    for (const auto& m : shipped) {
        PhaseFunction u = haar_unitary_from_measure(m.measure, m.f);
        for (int n = -8; n <= 8; ++n) {
            if (n == 0) continue;
            CHECK(std::abs(u.moment(n)) <= 1e-6);
        }
    }
}

TEST_CASE("root of unity coefficients") {
    auto u2 = root_of_unity_unitary(2, {0.5, 0.5});
    CHECK(std::abs(u2[0] - CD{1.0}) <= 1e-15);
    CHECK(std::abs(u2[1] + CD{1.0}) <= 1e-15);

    auto u3 = root_of_unity_unitary(3, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    CD first = (u3[0] + u3[1] + u3[2]) / 3.0;
    CD second = (u3[0] * u3[0] + u3[1] * u3[1] + u3[2] * u3[2]) / 3.0;
    CHECK(std::abs(first) <= 1e-12);
    CHECK(std::abs(second) <= 1e-12);

    auto u4 = root_of_unity_unitary(4, std::vector<double>(4, 0.25));
    CD sq{};
    for (auto& c : u4) sq += c * c / 4.0;
    CHECK(std::abs(sq) <= 1e-12);  // (1 - 1 + 1 - 1)/4

    CHECK_THROWS_AS(root_of_unity_unitary(3, {0.5, 0.25, 0.25}), std::invalid_argument);
    CHECK_THROWS_AS(root_of_unity_unitary(1, {1.0}), std::invalid_argument);
}

TEST_CASE("zero trace unitary from merged projections") {
    auto half = zero_trace_unitary({0.5, 0.5});
    CHECK(half.trace_residual <= 1e-12);
    CHECK(std::abs(half.phases[1] + CD{1.0}) <= 1e-12);

    auto quarters = zero_trace_unitary({0.5, 0.25, 0.25});
    CHECK(quarters.trace_residual <= 1e-12);
    for (const auto& phase : quarters.phases) CHECK(std::abs(std::abs(phase) - 1.0) <= 1e-12);
    // the law-of-cosines equation |t1 + lambda t2| = t3 holds
    CD s = 0.5 + quarters.phases[1] * 0.25;
    CHECK(std::abs(s) == doctest::Approx(0.25).epsilon(1e-10));

    // reachable interval [t1 - t2, t1 + t2] = [0.05, 0.75] contains t3 = 0.25
    auto spread = zero_trace_unitary({0.4, 0.35, 0.25});
    CHECK(spread.trace_residual <= 1e-12);

    // many projections get merged into three blocks of trace <= 1/2
    auto merged = zero_trace_unitary({0.3, 0.25, 0.2, 0.15, 0.1});
    CHECK(merged.trace_residual <= 1e-12);
    for (double t : merged.merged_traces) CHECK(t <= 0.5 + 1e-12);

    CHECK_THROWS_WITH_AS(zero_trace_unitary({0.6, 0.4}), doctest::Contains("1/2"),
                         std::invalid_argument);
    CHECK_THROWS_AS(zero_trace_unitary({1.0}), std::invalid_argument);
    CHECK_THROWS_AS(zero_trace_unitary({0.4, 0.4}), std::invalid_argument);  // sum != 1
}

TEST_CASE("zero trace unitary on random admissible lists") {
    std::mt19937_64 rng(321);
    std::uniform_int_distribution<int> count(2, 6);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> masses;
        int k = count(rng);
        for (int i = 0; i < k; ++i) masses.push_back(random_mass(rng));
        double sum = 0.0;
        for (double m : masses) sum += m;
        bool ok = true;
        for (auto& m : masses) {
            m /= sum;
            ok = ok && m <= 0.5;
        }
        if (!ok) {
            --t;
            continue;
        }
        CHECK(zero_trace_unitary(masses).trace_residual <= 1e-12);
    }
}

TEST_CASE("matrix pair traces and orthonormality") {
    for (int n = 2; n <= 5; ++n) {
        MatrixPair mp = matrix_avitzour_pair(n);
        auto at = [n](const std::vector<CD>& m, int r, int c) {
            return m[static_cast<std::size_t>(r) * static_cast<std::size_t>(n) +
                     static_cast<std::size_t>(c)];
        };
        // normalized traces of u, v and v* u all vanish
        CD tru{}, trv{}, trvu{};
        for (int i = 0; i < n; ++i) {
            tru += at(mp.u, i, i);
            trv += at(mp.v, i, i);
        }
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) trvu += std::conj(at(mp.v, r, c)) * at(mp.u, r, c);
        CHECK(std::abs(tru) / n <= 1e-12);
        CHECK(std::abs(trv) / n <= 1e-12);
        CHECK(std::abs(trvu) / n <= 1e-12);

        // unitarity: u* u = v* v = 1
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                CD uu{}, vv{};
                for (int k = 0; k < n; ++k) {
                    uu += std::conj(at(mp.u, k, r)) * at(mp.u, k, c);
                    vv += std::conj(at(mp.v, k, r)) * at(mp.v, k, c);
                }
                CD expect = (r == c) ? CD{1.0} : CD{};
                CHECK(std::abs(uu - expect) <= 1e-12);
                CHECK(std::abs(vv - expect) <= 1e-12);
            }
    }
    // n = 2 uses the explicit symmetric pair
    MatrixPair m2 = matrix_avitzour_pair(2);
    CHECK(m2.u[0] == CD{1.0});
    CHECK(m2.u[3] == CD{-1.0});
    CHECK(m2.v[1] == CD{1.0});
    CHECK(m2.v[2] == CD{1.0});
}

TEST_CASE("atom obstruction verdicts") {
    auto v1 = atom_obstruction(2, 0.6);
    CHECK(!v1.feasible);
    CHECK(v1.alpha == doctest::Approx(1.5));
    CHECK(v1.min_eigenvalue == doctest::Approx(-0.5));

    auto v2 = atom_obstruction(3, 1.0 / 3.0);
    CHECK(std::abs(v2.min_eigenvalue) <= 1e-12);  // boundary

    auto v3 = atom_obstruction(4, 0.2);
    CHECK(v3.feasible);
    CHECK(v3.min_eigenvalue == doctest::Approx(0.25));

    CHECK_THROWS_AS(atom_obstruction(1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(atom_obstruction(3, 1.0), std::invalid_argument);
}

TEST_CASE("atom obstruction flips exactly at mass 1/n") {
    for (int n = 2; n <= 6; ++n) {
        double lo = 0.01, hi = 0.99;
        REQUIRE(atom_obstruction(n, lo).min_eigenvalue > 0);
        REQUIRE(atom_obstruction(n, hi).min_eigenvalue < 0);
        for (int iter = 0; iter < 60; ++iter) {
            double mid = 0.5 * (lo + hi);
            (atom_obstruction(n, mid).min_eigenvalue >= 0 ? lo : hi) = mid;
        }
        CHECK(std::abs(0.5 * (lo + hi) - 1.0 / n) <= 1e-10);
    }
}

TEST_CASE("four point space: solvable at beta 0, floor at beta 1/3") {
    FourPointResult solved = four_point_infeasibility(0.0, 200, 2026);
    CHECK(solved.residual <= 1e-10);

    FourPointResult floor = four_point_infeasibility(1.0 / 3.0, 200, 2026);
    CHECK(floor.residual >= 1e-2);
    CHECK(floor.residual / std::max(solved.residual, 1e-300) >= 1e6);

    CHECK_THROWS_AS(four_point_infeasibility(0.5, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(four_point_infeasibility(0.1, 0, 1), std::invalid_argument);
}

TEST_CASE("imaginary parts inside (2/3, 4/3) cannot sum to zero") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> mag(2.0 / 3.0 + 0.01, 4.0 / 3.0 - 0.01);
    std::bernoulli_distribution sign(0.5);
    for (int t = 0; t < 200; ++t) {
        double sum = 0.0;
        for (int j = 0; j < 3; ++j) sum += (sign(rng) ? 1.0 : -1.0) * mag(rng);
        CHECK(std::abs(sum) > 0.01);
    }
}

TEST_CASE("phase window scan") {
    PhaseWindow half = phase_window_scan(0.5);
    CHECK(half.gamma == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(half.lo == doctest::Approx(1.0).epsilon(0.02));
    CHECK(half.hi == doctest::Approx(1.0).epsilon(0.02));

    // slightly below 1/2 the window is still strictly inside (2/3, 4/3)
    PhaseWindow tight = phase_window_scan(0.495);
    CHECK(tight.lo > 2.0 / 3.0);
    CHECK(tight.hi < 4.0 / 3.0);

    // at 0.45 the feasible circle already reaches the real axis, so the
    // empirical threshold sits between 0.45 and 0.495
    PhaseWindow wide = phase_window_scan(0.45);
    CHECK(wide.lo <= 2.0 / 3.0);

    // small alpha: the band constraint is slack and the window reaches 0
    PhaseWindow loose = phase_window_scan(0.05);
    CHECK(loose.lo <= 1e-3);

    CHECK_THROWS_AS(phase_window_scan(0.0), std::invalid_argument);
    CHECK_THROWS_AS(phase_window_scan(0.6), std::invalid_argument);
}

TEST_CASE("empirical alpha0 lies below 1/2") {
    double alpha0 = estimate_alpha0(50, 20000);
    CHECK(alpha0 > 0.4);
    CHECK(alpha0 < 0.5);
}

TEST_CASE("half-atom trace infimum stays away from zero on a fixed grid") {
    // the bounded search cannot cross 0.01 with 16 cells, and tightens as the
    // grid refines, consistent with the trace range excluding 0
    double d16 = half_atom_trace_infimum(16, 30, 99);
    CHECK(d16 >= 0.01);
    CHECK(d16 <= 0.05);
    double d8 = half_atom_trace_infimum(8, 30, 99);
    double d64 = half_atom_trace_infimum(64, 30, 99);
    CHECK(d64 < d16);
    CHECK(d16 < d8);
    CHECK(d64 > 0.0);
}
