#pragma once

#include "mbv/quad.hpp"
#include "mbv/types.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mbv::barneslab {

// affine Gamma argument: constant + sum_v coeffs[v] * v
struct GammaFactor {
    std::map<std::string, double> coeffs;
    Cplx constant{0.0, 0.0};

    GammaFactor() = default;
    explicit GammaFactor(Cplx c) : constant(c) {}
    GammaFactor(Cplx c, std::map<std::string, double> m) : coeffs(std::move(m)), constant(c) {}

    Cplx eval(const std::map<std::string, Cplx>& at) const;
    bool trivial() const; // no nonzero coefficient and zero constant
};

// product of Gamma factors over a ratio, optionally times z^{affine};
// the common carrier for the vertical-line lemmas and the kernel integrands
struct GammaRatioIntegrand {
    std::vector<GammaFactor> numerator;
    std::vector<GammaFactor> denominator;
    struct PowerBase {
        Cplx z{1.0, 0.0};
        GammaFactor exponent;
    };
    std::optional<PowerBase> power_base;
    std::vector<std::string> variables; // integration variables, outermost first

    Cplx eval(const std::map<std::string, Cplx>& at) const;

    // straight-line Barnes convention: every numerator factor that moves with
    // an integration variable must keep Re(argument) > 0 on the contour.
    // Returns a description of the first violated factor, or "" when fine.
    std::string admissibility_violation(const std::map<std::string, double>& sigma) const;

    // open interval of admissible positions for `var`, the other contours held
    // fixed; first >= second means no straight contour exists
    std::pair<double, double> admissible_interval(
        const std::string& var, const std::map<std::string, double>& other_sigma) const;

    // signed |t|-slopes (numerator +, denominator -) for quad::DecayHint
    std::vector<double> stirling_slopes(const std::string& var) const;
};

// one-variable vertical-line integral of the integrand at the given contour
// positions; checks the Barnes convention first and throws when it fails
quad::QuadResult integrate_barnes(const GammaRatioIntegrand& I,
                                  const std::map<std::string, double>& sigma, double tol);

// same, with every contour placed at the midpoint of its admissible interval
quad::QuadResult integrate_barnes_auto(const GammaRatioIntegrand& I, double tol);

enum class LemmaMode { closed_form, quadrature };

GammaRatioIntegrand first_barnes_integrand(Cplx alpha, Cplx mu, Cplx gamma, Cplx delta);
GammaRatioIntegrand second_barnes_integrand(Cplx a, Cplx b, Cplx c, Cplx d, Cplx e);

// int Gamma(w+alpha)Gamma(w+mu)Gamma(gamma-w)Gamma(delta-w) dw/2pi i
//   = Gamma(alpha+gamma)Gamma(alpha+delta)Gamma(mu+gamma)Gamma(mu+delta)
//     / Gamma(alpha+mu+gamma+delta)
Cplx first_barnes(Cplx alpha, Cplx mu, Cplx gamma, Cplx delta,
                  LemmaMode mode = LemmaMode::closed_form);

// with f = a+b+c+d+e:
// int Gamma(w+a)Gamma(w+b)Gamma(w+c)Gamma(d-w)Gamma(e-w)/Gamma(w+f) dw/2pi i
//   = Gamma(d+a)Gamma(d+b)Gamma(d+c)Gamma(e+a)Gamma(e+b)Gamma(e+c)
//     / [Gamma(f-a)Gamma(f-b)Gamma(f-c)]
Cplx second_barnes(Cplx a, Cplx b, Cplx c, Cplx d, Cplx e,
                   LemmaMode mode = LemmaMode::closed_form);

// both sides of the 3F2(1)-type Barnes transformation, each by quadrature:
// lhs  = int Gamma(a+u)Gamma(b+u)Gamma(c+u)Gamma(f-u)Gamma(-u)/Gamma(e+u) du/2pi i
// rhs  = Gamma(b)Gamma(c)Gamma(f+a)/[Gamma(f+a+b+c-e)Gamma(e-b)Gamma(e-c)]
//        * int Gamma(a+t)Gamma(e-c+t)Gamma(e-b+t)Gamma(f+b+c-e-t)Gamma(-t)
//              / Gamma(e+t) dt/2pi i
std::pair<Cplx, Cplx> hyp3f2_transform(Cplx a, Cplx b, Cplx c, Cplx f, Cplx e);

// 4F3-type series sum_{n>=0} prod Gamma(A_i+n) / prod Gamma(B_j+n) * z^n / n!
// (the hat form); plain divides out the n = 0 Gamma prefactor (Pochhammer form)
struct F43Value {
    Cplx value{0.0, 0.0};
    long terms = 0;
    double tail = 0.0;      // absolute truncation estimate
    bool saalschutz = false; // sum B - sum A == 1
};

F43Value f43_hat(const std::array<Cplx, 4>& A, const std::array<Cplx, 3>& B, Cplx z,
                 long max_terms = 200000);
F43Value f43_plain(const std::array<Cplx, 4>& A, const std::array<Cplx, 3>& B, Cplx z,
                   long max_terms = 200000);

enum class CahenMode { contour, closed_form };

// e(x; phi) = int_{(eps)} |2 pi x|^{-u} e^{i u phi sgn(x)} Gamma(u) du/2pi i
//           = exp(-2 pi |x| e^{-i phi sgn(x)}),   x real nonzero, phi in (0, pi/2].
// contour mode uses the straight line when phi is away from pi/2 and an
// indented path (rays bent into the left half-plane) near and at pi/2, where
// the straight integral converges only conditionally
Cplx cahen_e(double x, double phi, CahenMode mode = CahenMode::closed_form);

} // namespace mbv::barneslab
