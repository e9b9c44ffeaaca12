#pragma once

#include <complex>
#include <string>
#include <vector>

#include "freeprod/algebra.hpp"

namespace freeprod {

/// A finite-dimensional unital *-algebra described concretely on a spanning
/// set e_0..e_{d-1}: multiplication and star in coordinates, the trace of each
/// spanning vector, the coordinates of the unit, and an orthonormal seed set
/// containing the unit as its first vector.
struct FiniteDimSpec {
    int dim = 0;
    std::vector<std::vector<std::vector<std::complex<double>>>> mult;  // mult[i][j] = coords of e_i e_j
    std::vector<std::vector<std::complex<double>>> star;               // star[i]   = coords of e_i*
    std::vector<std::complex<double>> trace;                           // tau(e_i)
    std::vector<std::complex<double>> unit;                            // coords of 1
    std::vector<std::vector<std::complex<double>>> seed;               // seed[0] must be the unit
};

struct GramSchmidtOutput {
    Algebra<std::complex<double>> table;
    // Coordinates of the completed orthonormal basis in the spanning set;
    // basis[0] is the unit, basis[k] carries label k for k >= 1.
    std::vector<std::vector<std::complex<double>>> basis;
};

/// Completes the seed set to an orthonormal basis of the whole algebra and
/// tabulates structure constants, star expansions, letter norms and the
/// unitary letters. Throws if the trace is not faithful (singular Gram
/// matrix), the seed is not orthonormal, or the seed does not start with 1.
GramSchmidtOutput gram_schmidt_onb_full(std::string id, const FiniteDimSpec& spec,
                                        double tol = 1e-12);

inline Algebra<std::complex<double>> gram_schmidt_onb(std::string id, const FiniteDimSpec& spec,
                                                      double tol = 1e-12) {
    return gram_schmidt_onb_full(std::move(id), spec, tol).table;
}

/// M_n(C) with normalized trace on the matrix-unit spanning set. For n = 2 the
/// seed is {1, diag(1,-1), antidiag(1,1)}; for larger n the seed is {1}.
FiniteDimSpec matrix_algebra_spec(int n);

/// The two-point abelian algebra C^2 with trace weights (w1, w2), seed {1}.
FiniteDimSpec two_point_algebra_spec(double w1, double w2);

/// Residual of reconstructing every spanning vector from the completed ONB.
double spanning_reconstruction_residual(const FiniteDimSpec& spec, const GramSchmidtOutput& out);

}  // namespace freeprod
