#pragma once

#include "mbv/special.hpp"
#include "mbv/types.hpp"

#include <functional>
#include <vector>

namespace mbv::kl {

// even test functions H on the critical line mu in iR, holomorphic on |Re mu| < 2 eta
struct TestFunctionSpec {
    enum class Kind { plain_gaussian, gaussian_pair, user };
    Kind kind = Kind::plain_gaussian;
    double scale = 3.0;    // plain: H(mu) = exp((mu/scale)^2)
    double m_center = 6.0; // pair: bump locations mu = +- iM
    double r_width = 2.0;  // pair: bump width R
    double eta = 8.0;      // strip parameter (pair: balancing gamma factors)
    special::GL3Params alpha{Cplx(0.0), Cplx(0.0)}; // pair: parameters in the gamma quotient
    std::function<Cplx(Cplx)> fn;                   // user: arbitrary even H
    double t_cap = 30.0;                            // user: spectral support height

    static TestFunctionSpec plain_gaussian(double scale);
    // (e^{((mu+iM)/R)^2} + e^{((mu-iM)/R)^2}) Gamma(2eta+mu) Gamma(2eta-mu)
    //   / [Gamma(2eta)^2 prod_i Gamma((1/2+mu-a_i)/2) Gamma((1/2-mu-a_i)/2)]
    // (normalized by Gamma(2eta)^-2 to keep double-precision magnitudes tame)
    static TestFunctionSpec gaussian_pair(double m, double r, double eta,
                                          const special::GL3Params& a);
    // caller-supplied H; must be even (sampled at construction) and negligible
    // against e^{pi t} growth above t_cap, which fixes the quadrature height
    static TestFunctionSpec user(std::function<Cplx(Cplx)> h, double eta, double t_cap = 30.0);

    Cplx operator()(Cplx mu) const;

    // height T with |H(iT)| e^{growth T} below e^{-want} relative to the bump peak
    double tail_height(double want, double growth) const;
};

// a spectral-side function y -> h(y) with its decay exponent towards y -> 0
// (|h(y)| << min{y, 1/y}^eta); the exponent gates forward-transform arguments
struct SpectralWeight {
    std::function<Cplx(double)> h;
    double eta = 1.0;
};

// integral over the critical line: int_(0) H(mu)/|Gamma(mu)|^2 f(mu) dmu/(2 pi i),
// for f even on the line; `growth` is the exponential rate of |f(it)| sinh(pi t)
// as t -> +inf (pi for bare sinh, pi/2 with one Whittaker/Gamma-pair factor, ...)
Cplx spectral_integral(const TestFunctionSpec& h_spec, const std::function<Cplx(Cplx)>& f,
                       double growth, double tol);

// H^flat sampled through a reusable quadrature grid: eval(y) sums the cached
// H(mu)/|Gamma(mu)|^2 weights against W_mu(y)
class KlInverseGrid {
  public:
    explicit KlInverseGrid(const TestFunctionSpec& h_spec, double tol = 1e-9);
    Cplx eval(double y) const;

  private:
    std::vector<double> t_;
    std::vector<Cplx> c_;
    double tol_;
};

// H^flat(y) = (1/(4 pi i)) int_(0) H(mu) W_mu(y) dmu/|Gamma(mu)|^2
Cplx kl_inverse(const TestFunctionSpec& h_spec, double y, double tol = 1e-9);

// h^sharp(mu) = int_0^inf h(y) W_mu(y) dy/y^2; requires eta > |Re mu| + 1/2
Cplx kl_forward(const SpectralWeight& h, Cplx mu, double tol = 1e-8);

// Mellin transform of H^flat on -1/2 < Re w < eta, computed on the mu-line:
// (pi^{-w-1/2}/4) int_(0) H(mu) Gamma((w+1/2+mu)/2) Gamma((w+1/2-mu)/2) /
// |Gamma(mu)|^2 dmu/(2 pi i)
Cplx mellin_tilde(const TestFunctionSpec& h_spec, Cplx w, double tol = 1e-9);

} // namespace mbv::kl
