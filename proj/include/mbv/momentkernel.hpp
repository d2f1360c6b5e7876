#pragma once

#include "mbv/kltransform.hpp"
#include "mbv/quad.hpp"
#include "mbv/special.hpp"
#include "mbv/types.hpp"

namespace mbv::momentkernel {

// Evaluation point of the moment transform: outer Mellin variable s0, moment
// variable s, twist angle phi, and the sign delta of the summand.
struct KernelPoint {
    Cplx s0{1.0, 0.0};
    Cplx s{0.6, 0.0};
    double phi = kPi / 2.0;
    int delta = +1;

    // Re s0 > eps, Re s < 4, 2 Re s - Re s0 > eps, 0 < phi <= pi/2
    bool in_domain() const;
    void require() const; // throws domain_error when outside
};

// imaginary ordinates (t0, t1, v) of the (s0, s1, u) lines at Im s = 0
struct PhaseTriple {
    double t0 = 0.0;
    double t1 = 0.0;
    double v = 0.0;
};

// exponent E of the kernel's Stirling envelope e^{-(pi/4) E}; nonnegative,
// and zero exactly on the ridge t1 = 0, v = t0
double phase_E(const PhaseTriple& p);

// Options shared by the transform representations.  tol is a relative target;
// the contour machinery scales its absolute budgets from integrand probes.
struct TransformOptions {
    double eta_test = 8.0;        // half-width of the test function's working strip
    bool strict_paper = false;    // outer line near 15 instead of the desk default
    double tol = 1e-8;
    double sigma1_override = 0.0; // explicit outer abscissa (0 = automatic)
    double height_scale = 1.0;    // scales truncation heights (soundness checks)

    // resolved outer abscissa for given Re s0, Re s: sits an odd integer above
    // Re s so the continued Mellin data keeps unit distance from its poles
    double sigma1(double sigma0, double sigma) const;
};

// integrand kernel of one summand at (s1, u): the double Mellin factor at
// (s0 - u, s1) times (2pi)^{-u} e^{i delta phi u} Gamma(u) and the two-to-one
// Gamma quotient in (s0, s1, u, s)
Cplx kernel_g_delta(const special::GL3Params& alpha, const KernelPoint& pt, Cplx s1, Cplx u);

// Mellin transform of the inverse-transform profile of H at w, continued
// left of the convergence strip by the crossed-pole corrections
Cplx h_tilde(const kl::TestFunctionSpec& h_spec, Cplx w, double tol = 1e-10);

// one summand of the moment transform: outer s1 line, inner u line
quad::QuadResult f_delta(const kl::TestFunctionSpec& h_spec, const special::GL3Params& alpha,
                         const KernelPoint& pt, const TransformOptions& opt = {});

// delta-summed transform at phi = pi/2, folded into a single real kernel
quad::QuadResult f_combined(const kl::TestFunctionSpec& h_spec, const special::GL3Params& alpha,
                            Cplx s0, Cplx s, const TransformOptions& opt = {});

// same value routed through the spectral kernel K against the measure of H
quad::QuadResult f_via_kernel(const kl::TestFunctionSpec& h_spec, const special::GL3Params& alpha,
                              Cplx s0, Cplx s, const TransformOptions& opt = {});

// same value with the inner line resolved into a difference of two
// Saalschuetzian 4F3 sums at unit argument
quad::QuadResult f_f43_route(const kl::TestFunctionSpec& h_spec, const special::GL3Params& alpha,
                             Cplx s0, Cplx s, const TransformOptions& opt = {});

// the transform on the residual line s0 = 2s - 1
enum class ResidualSide { mellin_barnes, gamma_product };
Cplx f_residual(const kl::TestFunctionSpec& h_spec, const special::GL3Params& alpha, Cplx s,
                ResidualSide side, const TransformOptions& opt = {});

// Gamma(-x) / Gamma(1/2 + x)
Cplx gamma_quot(Cplx x);

// spectral kernel K(mu; s0, s) of the transform, either as the double Mellin
// integral or through the recursive Whittaker pairing (needs Re s0 = Re s = 1/2
// and tempered data)
enum class KernelForm { barnes_double, ishii_stade };
Cplx kernel_K(const special::GL3Params& alpha, Cplx mu, Cplx s0, Cplx s,
              KernelForm form = KernelForm::barnes_double, double tol = 1e-8);

// diagonal pairing integral, as the unfolded double Whittaker integral or as
// the closed spectral-measure integral it equals
enum class DiagSide { whittaker_double, mu_integral };
Cplx diag_term(const kl::TestFunctionSpec& h_spec, const special::GL3Params& alpha, Cplx s,
               DiagSide side, double tol = 1e-8);

// int_0^infty y^v (1 + y^2)^A d^x y = Gamma(-A - v/2) Gamma(v/2) / (2 Gamma(-A))
// on 0 < Re v < -2 Re A
enum class EubeMode { closed_form, quadrature };
Cplx eube_integral(Cplx v, Cplx A, EubeMode mode = EubeMode::closed_form);

// unipotent-times-torus point moved back to Iwasawa coordinates:
// u = -a0 y0^2 / (1 + (a0 y0)^2), y0' = y0 / (1 + (a0 y0)^2),
// y1' = y1 sqrt(1 + (a0 y0)^2); cross-checked against a Gram-Schmidt
// decomposition of the matrix before returning
struct IwasawaPoint {
    double u = 0.0;
    double y0p = 0.0;
    double y1p = 0.0;
};
IwasawaPoint iwasawa_check(long a0, double y0, double y1);

} // namespace mbv::momentkernel
