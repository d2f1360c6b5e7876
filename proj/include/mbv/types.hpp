#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <cmath>

namespace mbv {

using Cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
// default small contour offset used throughout the vertical-line machinery
inline constexpr double kEps = 0.01;
// a contour is refused when a numerator Gamma argument gets closer than this
// to a nonpositive integer anywhere on the line
inline constexpr double kPoleGuard = 1e-3;

// thrown when an operation is called outside its validity region;
// the CLI maps this to exit code 3 / empty scan cells
struct domain_error : std::invalid_argument {
    explicit domain_error(const std::string& what) : std::invalid_argument(what) {}
};

inline bool finite(Cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

inline Cplx cpow(Cplx base, Cplx expo) { return std::exp(expo * std::log(base)); }

// log(sinh(x)) for x > 0 without overflow
inline double log_sinh(double x) { return x + std::log1p(-std::exp(-2.0 * x)) - std::log(2.0); }

// log of 1/|Gamma(it)|^2 = t*sinh(pi t)/pi for real t (the spectral measure on Re mu = 0);
// vanishes (log -> -inf) at t = 0, handled by callers placing no node exactly there
inline double log_inv_gamma_sq(double t) {
    double a = std::abs(t);
    if (a < 1e-300) return -1e308;
    return std::log(a) + log_sinh(kPi * a) - std::log(kPi);
}

} // namespace mbv
