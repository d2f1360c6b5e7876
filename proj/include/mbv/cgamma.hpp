#pragma once

#include "mbv/types.hpp"

namespace mbv::cgamma {

// Magnitude estimate |Gamma(a+ib)| from the leading Stirling term.
struct StirlingEstimate {
    double log_magnitude = 0.0;
    double magnitude = 0.0;
};

// Principal-branch log Gamma. Binary64 in and out; throws domain_error at the
// poles z = 0, -1, -2, ... Real z < 0 is evaluated as the limit from Im z -> 0+,
// which keeps every horizontal line (poles excluded) continuous.
Cplx log_gamma(Cplx z);

// exp(log_gamma); may overflow to inf for large Re z, underflow to 0 near huge |Im z|
Cplx gamma(Cplx z);

// log of pi^{-s/2} Gamma(s/2) and its exponential
Cplx log_gamma_r(Cplx s);
Cplx gamma_r(Cplx s);

// |Gamma(a+ib)| estimated by exp(Re((z-1/2)log z - z) + log sqrt(2 pi)), z = a+i|b|.
// Usable whenever z is away from the nonpositive real axis.
StirlingEstimate stirling_magnitude(double a, double b);

// true when z lies within `guard` of a nonpositive integer
bool near_nonpositive_integer(Cplx z, double guard);

} // namespace mbv::cgamma
