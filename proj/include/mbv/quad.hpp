#pragma once

#include "mbv/types.hpp"

#include <functional>
#include <span>
#include <vector>

namespace mbv::quad {

// vertical line Re s = sigma, t in [-half_height, half_height], trapezoid step
struct ContourSpec {
    double sigma = 0.0;
    double half_height = 20.0;
    double step = 0.1;
};

struct QuadResult {
    Cplx value{0.0, 0.0};
    double err_estimate = 0.0;   // step-halving difference plus truncation tail
    long nodes_used = 0;
    double truncation_tail = 0.0;
};

// How the integrand decays along the contour; drives automatic truncation.
struct DecayHint {
    enum class Kind { exponential, gaussian, stirling };
    Kind kind = Kind::exponential;
    double rate = 1.0;            // exponential: ~e^{-rate|t|}; gaussian: ~e^{-rate t^2}
    // stirling: signed |t|-coefficients of each Gamma factor's argument
    // (numerator entries positive, denominator entries negative);
    // net exponential rate = (pi/2) * sum
    std::vector<double> slopes;
    // analyticity strip half-width around the contour; sets the step size
    double pole_distance = 0.5;

    static DecayHint exponential(double r, double d = 0.5);
    static DecayHint gaussian(double r, double d = 0.5);
    static DecayHint stirling(std::vector<double> s, double d = 0.5);
    double net_rate() const;
};

inline constexpr long kNodeBudget = 2'000'000; // per integration level

using Fn = std::function<Cplx(Cplx)>;

// number of worker threads (>=1); set from the CLI / WORKERS env
int workers();
void set_workers(int n);

// deterministic pairwise sum in fixed index order
Cplx pairwise_sum(std::span<const Cplx> v);

// plain trapezoid on the given contour; err from comparing against the
// double-step subsample plus an endpoint-decay tail estimate
QuadResult integrate_vertical(const Fn& f, const ContourSpec& spec);

// chooses half_height from the decay hint and step from pole_distance,
// then halves the step until the discretization estimate is below tol/2
QuadResult integrate_vertical_auto(const Fn& f, double sigma, double tol, const DecayHint& hint);

// trapezoid product rule on 2 or 3 vertical contours (args in listed order)
QuadResult integrate_nested(std::span<const ContourSpec> specs,
                            const std::function<Cplx(std::span<const Cplx>)>& f);

// integral over (0,inf) against d^x y via y = e^t; decay guesses are initial
// hints for the two ends (y->0 exponent, y->inf exponent), auto-extended;
// refuses when a tail fails to decay within budget.  noise_abs widens the
// accept window for integrands whose samples carry irreducible noise, which
// would otherwise hold the step-halving loop on a random-walk plateau
QuadResult integrate_multiplicative(const std::function<Cplx(double)>& f, double tol,
                                    double decay_zero = 1.0, double decay_inf = 1.0,
                                    double noise_abs = 0.0);

// tensor version over (0,inf)^2 against d^x y0 d^x y1
QuadResult integrate_multiplicative_2d(const std::function<Cplx(double, double)>& f, double tol,
                                       double decay_zero = 1.0, double decay_inf = 1.0);

// straight segment from za to zb against ds/(2 pi i), step-halved to tol
QuadResult integrate_segment(const Fn& f, Cplx za, Cplx zb, double tol);

// vertical ray from sigma + i*t_from towards t -> sign*inf against ds/(2 pi i)
QuadResult integrate_vertical_ray(const Fn& f, double sigma, double t_from, int sign, double tol,
                                  const DecayHint& hint);

} // namespace mbv::quad
