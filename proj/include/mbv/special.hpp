#pragma once

#include "mbv/quad.hpp"
#include "mbv/types.hpp"

#include <array>
#include <vector>

namespace mbv::special {

// spectral parameter of the degree-2 factor; tempered means Re mu = 0
struct GL2SpectralParam {
    Cplx mu;
};

// degree-3 archimedean parameters, constrained to sum to zero
struct GL3Params {
    std::array<Cplx, 3> a;
    GL3Params(Cplx a1, Cplx a2) : a{a1, a2, -a1 - a2} {}
    GL3Params(Cplx a1, Cplx a2, Cplx a3);
    double max_re() const;
    GL3Params negated() const { return {-a[0], -a[1]}; }
};

// W_mu(y) = 2 sqrt(y) K_mu(2 pi y), evaluated through the real-axis
// cosh-integral representation of K (independent of any Mellin machinery here)
Cplx whittaker_gl2(const GL2SpectralParam& p, double y, double tol = 1e-12);

// Mellin transform of W_mu: (pi^{-w-1/2}/2) Gamma((w+1/2+mu)/2) Gamma((w+1/2-mu)/2),
// requires Re(w + 1/2 +- mu) > 0
Cplx mellin_whittaker_gl2(const GL2SpectralParam& p, Cplx w);

// double Mellin kernel of the degree-3 Whittaker function:
// prod_i GammaR(s0+a_i) GammaR(s1-a_i) / GammaR(s0+s1).
// A denominator pole gives an exact 0; a numerator pole is refused.
Cplx g_alpha(const GL3Params& a, Cplx s0, Cplx s1);

// fixed-contour product-rule table for W_{-alpha}; reusable across many (y0, y1)
class Gl3WhittakerTable {
  public:
    Gl3WhittakerTable(const GL3Params& a, double sigma0, double sigma1, double half_height,
                      double step);
    // W_{-alpha}(y0, y1) for this table's alpha
    Cplx eval(double y0, double y1) const;
    double sigma0() const { return s0_; }
    double sigma1() const { return s1_; }

  private:
    double s0_, s1_, h_;
    long J_, K_;
    std::vector<Cplx> g_; // row-major (2J+1) x (2K+1), trapezoid weights baked in
};

// W_{-alpha}(y0, y1) by the inverse double Mellin integral; contours are placed
// from (y0, y1) and the step is halved once to verify convergence
Cplx whittaker_gl3(const GL3Params& a, double y0, double y1, double tol = 1e-8);

enum class StadeRoute { barnes, direct };

// archimedean Rankin-Selberg integral of W_mu against W_{-alpha};
// barnes: (1/4) prod_{+-} prod_k GammaR(s +- mu - a_k);
// direct: the two-dimensional unfolded integral (requires Re s >= 1.5)
Cplx stade_rs(const GL3Params& a, const GL2SpectralParam& p, Cplx s, StadeRoute route,
              double tol = 1e-6);

} // namespace mbv::special
