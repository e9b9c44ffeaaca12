#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace freeprod {

using Rational = boost::multiprecision::cpp_rational;

/// Exact complex scalar with rational real and imaginary parts.
/// Closed under +, -, * and conjugation; the coefficient field for
/// exact-mode elements over group-algebra factors.
struct ExactComplex {
    Rational re{0};
    Rational im{0};

    ExactComplex() = default;
    ExactComplex(long v) : re(v) {}
    ExactComplex(Rational r) : re(std::move(r)) {}
    ExactComplex(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

    friend bool operator==(const ExactComplex&, const ExactComplex&) = default;

    ExactComplex& operator+=(const ExactComplex& o) {
        re += o.re;
        im += o.im;
        return *this;
    }
    ExactComplex& operator-=(const ExactComplex& o) {
        re -= o.re;
        im -= o.im;
        return *this;
    }
    friend ExactComplex operator+(ExactComplex a, const ExactComplex& b) { return a += b; }
    friend ExactComplex operator-(ExactComplex a, const ExactComplex& b) { return a -= b; }
    friend ExactComplex operator-(const ExactComplex& a) { return {-a.re, -a.im}; }
    friend ExactComplex operator*(const ExactComplex& a, const ExactComplex& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    ExactComplex& operator*=(const ExactComplex& o) { return *this = *this * o; }
};

inline ExactComplex conj(const ExactComplex& z) { return {z.re, -z.im}; }

/// Parses "p/q", an integer, or a plain decimal ("-0.25") into an exact rational.
Rational parse_rational(std::string_view text);

std::string rational_to_string(const Rational& r);

template <class S>
struct scalar_traits;

template <>
struct scalar_traits<ExactComplex> {
    using real_type = Rational;
    static constexpr bool exact = true;

    static ExactComplex zero() { return {}; }
    static ExactComplex one() { return ExactComplex(1); }
    static ExactComplex from_int(long v) { return ExactComplex(v); }
    static ExactComplex conjugate(const ExactComplex& z) { return conj(z); }
    static real_type abs_sq(const ExactComplex& z) { return z.re * z.re + z.im * z.im; }
    static bool is_zero(const ExactComplex& z, double /*prune_tol*/) {
        return z.re == 0 && z.im == 0;
    }
    static double to_double(const real_type& r) { return r.convert_to<double>(); }
    static std::complex<double> to_complex(const ExactComplex& z) {
        return {z.re.convert_to<double>(), z.im.convert_to<double>()};
    }
    // Exact: every double is a binary rational.
    static ExactComplex from_double(double x) { return ExactComplex(Rational(x)); }
    static ExactComplex parse(std::string_view re, std::string_view im) {
        return {parse_rational(re), parse_rational(im)};
    }
};

template <>
struct scalar_traits<std::complex<double>> {
    using real_type = double;
    static constexpr bool exact = false;

    static std::complex<double> zero() { return {}; }
    static std::complex<double> one() { return {1.0, 0.0}; }
    static std::complex<double> from_int(long v) { return {static_cast<double>(v), 0.0}; }
    static std::complex<double> conjugate(const std::complex<double>& z) { return std::conj(z); }
    static real_type abs_sq(const std::complex<double>& z) { return std::norm(z); }
    static bool is_zero(const std::complex<double>& z, double prune_tol) {
        return std::norm(z) <= prune_tol * prune_tol;
    }
    static double to_double(real_type r) { return r; }
    static std::complex<double> to_complex(const std::complex<double>& z) { return z; }
    static std::complex<double> from_double(double x) { return {x, 0.0}; }
    static std::complex<double> parse(std::string_view re, std::string_view im) {
        return {parse_rational(re).convert_to<double>(), parse_rational(im).convert_to<double>()};
    }
};

}  // namespace freeprod
