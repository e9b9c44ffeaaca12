#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace freeprod {

// ---------------------------------------------------------------------------
// Tracial measure spaces
// ---------------------------------------------------------------------------

struct MeasureAtom {
    double point = 0.0;
    double mass = 0.0;
};

struct DensityInterval {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<double> poly;  // density coefficients c0 + c1 x + c2 x^2 + ...

    double density(double x) const;
    double mass(double a, double b) const;  // exact polynomial integral
};

/// Probability space for a trace on an abelian algebra: finitely many atoms
/// plus finitely many intervals with polynomial densities. Total mass 1.
struct DiscreteTracialSpace {
    std::vector<MeasureAtom> atoms;
    std::vector<DensityInterval> intervals;

    double total_mass() const;
    bool diffuse() const { return atoms.empty(); }
    void validate(double tol = 1e-9) const;  // throws on mass != 1 or negative density
};

/// Continuous real function, monotone between consecutive breakpoints inside
/// each measure interval.
struct PiecewiseMonotoneFn {
    std::function<double(double)> fn;
    std::vector<double> breakpoints;

    static PiecewiseMonotoneFn identity();
};

/// Unitary-valued function u = exp(2 pi i h) with h = (pushforward cdf) o f;
/// the pushforward of the measure under u is the uniform measure on the
/// circle, so all nontrivial moments vanish.
class PhaseFunction {
public:
    double h(double x) const;
    std::complex<double> u(double x) const;

    /// tau(u^n) by adaptive quadrature over the measure (target tolerance per
    /// moment; the shipped measures reach 1e-6 comfortably).
    std::complex<double> moment(int n, double tol = 1e-8) const;

    struct Impl;
    explicit PhaseFunction(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

private:
    std::shared_ptr<const Impl> impl_;
};

/// Builds the Haar-distributed phase function for a diffuse measure and a
/// piecewise-monotone f whose pushforward is atomless. Rejects measures with
/// atoms and functions that are constant on a set of positive mass.
PhaseFunction haar_unitary_from_measure(const DiscreteTracialSpace& measure,
                                        const PiecewiseMonotoneFn& f);

struct ShippedMeasure {
    std::string name;
    DiscreteTracialSpace measure;
    PiecewiseMonotoneFn f;
};

/// The three measures exercised by the acceptance suite.
std::vector<ShippedMeasure> shipped_measures();

// ---------------------------------------------------------------------------
// Trace-orthonormal unitaries from projections
// ---------------------------------------------------------------------------

/// Coefficients (1, w, w^2, ..., w^{n-1}) on n projections of equal trace 1/n;
/// the resulting unitary satisfies u^n = 1 with vanishing moments 1..n-1.
std::vector<std::complex<double>> root_of_unity_unitary(int n, const std::vector<double>& traces,
                                                        double tol = 1e-9);

struct ZeroTraceUnitary {
    std::array<double, 3> merged_traces{};               // descending, third may be 0
    std::array<std::complex<double>, 3> phases{};        // (1, lambda, mu)
    std::vector<int> assignment;                         // input projection -> merged index
    double trace_residual = 0.0;                         // |tau(u)|
};

/// Merges projections with traces <= 1/2 into three blocks and solves for
/// unit-modulus coefficients with zero trace. Throws when some trace exceeds
/// 1/2 (infeasible for this construction).
ZeroTraceUnitary zero_trace_unitary(const std::vector<double>& traces, double tol = 1e-12);

struct MatrixPair {
    int n = 0;
    std::vector<std::complex<double>> u;  // row-major n x n
    std::vector<std::complex<double>> v;
};

/// Unitaries u, v in M_n with tr(u) = tr(v) = tr(v* u) = 0 under the
/// normalized trace: a diagonal root-of-unity paired with a cyclic shift
/// (n = 2: diag(1,-1) and the flip).
MatrixPair matrix_avitzour_pair(int n);

// ---------------------------------------------------------------------------
// Obstructions
// ---------------------------------------------------------------------------

struct AtomObstructionVerdict {
    int n = 0;
    double atom_mass = 0.0;
    double alpha = 0.0;           // a / (1 - a)
    double min_eigenvalue = 0.0;  // of the unit-diagonal Gram matrix with -alpha off-diagonal
    bool feasible = false;        // min eigenvalue >= 0, equivalently a <= 1/n
};

/// Feasibility of n orthonormal unit-modulus functions on a space carrying an
/// atom of the given mass; the Gram matrix eigenvalue is the witness.
AtomObstructionVerdict atom_obstruction(int n, double atom_mass);

struct FourPointResult {
    double beta = 0.0;
    double residual = 0.0;            // min of |int u|^2 + |int v|^2 + |int u conj(v)|^2
    std::array<double, 6> angles{};   // minimizing phases (u1..u3, v1..v3), gauge u4 = v4 = 1
    int best_restart = -1;
    int restarts = 0;
};

/// Multistart minimization of the orthogonality residual on the 4-point space
/// with masses ((1-beta)/3 x3, beta). Deterministic for a fixed seed; restarts
/// merge by minimum residual, ties broken by restart index.
FourPointResult four_point_infeasibility(double beta, int restarts, std::uint64_t seed);

struct PhaseWindow {
    double alpha = 0.0;
    double beta = 0.0;   // derived from alpha^2 - beta sqrt(1-alpha^2) = -alpha
    double gamma = 0.0;  // derived from alpha^2 + beta^2 + gamma^2 = 1
    double lo = 0.0;     // min |Im(lambda)| over the feasible circle arc
    double hi = 0.0;     // max |Im(lambda)|
    bool nonempty = false;
};

/// Scans the circle |-alpha + sqrt(1-alpha^2) lambda| = 1 for points that also
/// satisfy the band constraint on |-alpha - beta lambda| and reports the
/// reachable window of |Im(lambda)|. Throws when the derived gamma^2 < 0.
PhaseWindow phase_window_scan(double alpha, int grid = 200000);

/// Empirical threshold: the largest alpha on a descending grid from 1/2 whose
/// window escapes (2/3, 4/3). A grid estimate, not a certified constant.
double estimate_alpha0(int alpha_steps = 99, int grid = 20000);

/// Bounded search for inf |tau(u)| over continuous unitaries on [0,1] under
/// the half-atom-at-0 plus half-Lebesgue trace, with piecewise-linear phases
/// on the given number of cells. Reports the infimum approached; the floor
/// scales like 1/nodes, so the search never reaches 0.
double half_atom_trace_infimum(int nodes, int restarts, std::uint64_t seed);

}  // namespace freeprod
