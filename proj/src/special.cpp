#include "mbv/special.hpp"

#include "mbv/cgamma.hpp"

#include <algorithm>
#include <cmath>

namespace mbv::special {

namespace {

using cgamma::log_gamma;
using cgamma::log_gamma_r;

constexpr double kHalfPi = kPi / 2.0;

} // namespace

GL3Params::GL3Params(Cplx a1, Cplx a2, Cplx a3) : a{a1, a2, a3} {
    const double scale = 1.0 + std::abs(a1) + std::abs(a2) + std::abs(a3);
    if (std::abs(a1 + a2 + a3) > 1e-12 * scale)
        throw domain_error("GL3Params: parameters must sum to zero");
}

double GL3Params::max_re() const {
    double m = 0.0;
    for (const auto& ai : a) m = std::max(m, std::abs(ai.real()));
    return m;
}

Cplx whittaker_gl2(const GL2SpectralParam& p, double y, double tol) {
    if (!(y > 0.0)) throw domain_error("whittaker_gl2: y must be positive");
    const double x = 2.0 * kPi * y;
    if (x > 700.0) return 0.0; // below double underflow after the e^{-x} factor
    const Cplx mu = p.mu;
    const double abs_mu = std::abs(mu), re_mu = std::abs(mu.real());

    // truncation: e^{-x cosh T + |Re mu| T} <= e^{-x} * tol / 100
    const double need = std::log(100.0 / std::max(tol, 1e-15)) + x;
    double t_max = 3.0;
    for (int i = 0; i < 4; ++i) t_max = std::acosh(std::max(2.0, (need + re_mu * t_max) / x));

    double h = std::min(0.25, 1.6 / (1.0 + abs_mu));
    long n = std::lround(std::ceil(t_max / h));
    h = t_max / static_cast<double>(n);

    auto sweep = [&](double step, long count) {
        Cplx acc = 0.5 * (std::exp(Cplx(-x)) + std::exp(-x * std::cosh(t_max)) * std::cosh(mu * t_max));
        for (long i = 1; i < count; ++i) {
            const double t = step * static_cast<double>(i);
            acc += std::exp(Cplx(-x * std::cosh(t))) * std::cosh(mu * t);
        }
        return acc * step;
    };

    Cplx prev = sweep(h, n);
    for (int round = 0; round < 14; ++round) {
        h *= 0.5;
        n *= 2;
        const Cplx cur = sweep(h, n);
        if (std::abs(cur - prev) <= tol * std::max(std::abs(cur), std::exp(-x)))
            return 2.0 * std::sqrt(y) * cur;
        prev = cur;
    }
    throw domain_error("whittaker_gl2: quadrature did not settle");
}

Cplx mellin_whittaker_gl2(const GL2SpectralParam& p, Cplx w) {
    const Cplx half = Cplx(0.5);
    const Cplx lg = log_gamma((w + half + p.mu) * 0.5) + log_gamma((w + half - p.mu) * 0.5);
    return 0.5 * std::exp(lg - (w + half) * std::log(kPi));
}

Cplx g_alpha(const GL3Params& a, Cplx s0, Cplx s1) {
    // zero of 1/GammaR(s0+s1) beats everything else on the denominator's pole set
    if (cgamma::near_nonpositive_integer((s0 + s1) * 0.5, 1e-12)) return Cplx(0.0);
    Cplx lg = -log_gamma_r(s0 + s1);
    for (const auto& ai : a.a) {
        if (cgamma::near_nonpositive_integer((s0 + ai) * 0.5, kPoleGuard) ||
            cgamma::near_nonpositive_integer((s1 - ai) * 0.5, kPoleGuard))
            throw domain_error("g_alpha: evaluation point too close to a numerator pole");
        lg += log_gamma_r(s0 + ai) + log_gamma_r(s1 - ai);
    }
    return std::exp(lg);
}

Gl3WhittakerTable::Gl3WhittakerTable(const GL3Params& a, double sigma0, double sigma1,
                                     double half_height, double step)
    : s0_(sigma0), s1_(sigma1), h_(step) {
    for (const auto& ai : a.a) {
        if (sigma0 + ai.real() <= 0.05 || sigma1 - ai.real() <= 0.05)
            throw domain_error("Gl3WhittakerTable: contour too close to a gamma pole");
    }
    J_ = std::lround(std::ceil(half_height / step));
    K_ = J_;
    const long nj = 2 * J_ + 1, nk = 2 * K_ + 1;

    std::vector<Cplx> row(nj), col(nk), diag(nj + nk - 1);
    for (long j = -J_; j <= J_; ++j) {
        const Cplx s0(sigma0, h_ * static_cast<double>(j));
        Cplx lg = 0.0;
        for (const auto& ai : a.a) lg += log_gamma_r(s0 + ai);
        row[j + J_] = lg;
    }
    for (long k = -K_; k <= K_; ++k) {
        const Cplx s1(sigma1, h_ * static_cast<double>(k));
        Cplx lg = 0.0;
        for (const auto& ai : a.a) lg += log_gamma_r(s1 - ai);
        col[k + K_] = lg;
    }
    for (long m = -(J_ + K_); m <= J_ + K_; ++m)
        diag[m + J_ + K_] = log_gamma_r(Cplx(sigma0 + sigma1, h_ * static_cast<double>(m)));

    // trapezoid weights, the double (ds/2pi)^2 measure, and the 1/4 prefactor
    const double c = h_ * h_ / (16.0 * kPi * kPi);
    g_.resize(static_cast<size_t>(nj) * nk);
    for (long j = 0; j < nj; ++j) {
        const double wj = (j == 0 || j == nj - 1) ? 0.5 : 1.0;
        for (long k = 0; k < nk; ++k) {
            const double wk = (k == 0 || k == nk - 1) ? 0.5 : 1.0;
            g_[static_cast<size_t>(j) * nk + k] =
                std::exp(row[j] + col[k] - diag[j + k]) * (c * wj * wk);
        }
    }
}

Cplx Gl3WhittakerTable::eval(double y0, double y1) const {
    const double l0 = std::log(y0), l1 = std::log(y1);
    const long nk = 2 * K_ + 1;
    const double m0 = std::exp((1.0 - s0_) * l0), m1 = std::exp((1.0 - s1_) * l1);

    std::vector<Cplx> pow1(nk);
    for (long k = -K_; k <= K_; ++k)
        pow1[k + K_] = std::polar(m1, -h_ * static_cast<double>(k) * l1);

    Cplx total = 0.0;
    for (long j = -J_; j <= J_; ++j) {
        const Cplx* g = &g_[static_cast<size_t>(j + J_) * nk];
        Cplx inner = 0.0;
        for (long k = 0; k < nk; ++k) inner += g[k] * pow1[k];
        total += std::polar(m0, -h_ * static_cast<double>(j) * l0) * inner;
    }
    return total;
}

namespace {

// log magnitude of the shifted-contour integrand at (s0, s1); minimizing this at
// height zero over the contour pair keeps the oscillatory cancellation of the
// double integral close to the actual size of the value (a saddle-point placement)
double gl3_log_scale(const GL3Params& a, Cplx s0, Cplx s1, double l0, double l1) {
    Cplx lg = -log_gamma_r(s0 + s1);
    for (const auto& ai : a.a) lg += log_gamma_r(s0 + ai) + log_gamma_r(s1 - ai);
    return lg.real() + (1.0 - s0.real()) * l0 + (1.0 - s1.real()) * l1;
}

} // namespace

Cplx whittaker_gl3(const GL3Params& a, double y0, double y1, double tol) {
    if (!(y0 > 0.0) || !(y1 > 0.0)) throw domain_error("whittaker_gl3: y must be positive");
    const double l0 = std::log(y0), l1 = std::log(y1);

    double min_re = 0.0, max_re = 0.0;
    for (const auto& ai : a.a) {
        min_re = std::min(min_re, ai.real());
        max_re = std::max(max_re, ai.real());
    }

    static const double kGrid[] = {0.2, 0.35, 0.6, 1.0, 1.5, 2.2, 3.2, 4.5, 6.5, 9.0, 12.5, 16.0};
    double sg0 = 1.0 - min_re, sg1 = 1.0 + max_re, best = 1e308;
    for (double c0 : kGrid) {
        const double t0 = std::max(c0, 0.2 - min_re);
        for (double c1 : kGrid) {
            const double t1 = std::max(c1, 0.2 + max_re);
            const double f = gl3_log_scale(a, Cplx(t0), Cplx(t1), l0, l1);
            if (f < best) {
                best = f;
                sg0 = t0;
                sg1 = t1;
            }
        }
    }
    if (best < -640.0) return 0.0; // below the exponent range of double

    const double want = std::log(100.0 / tol);
    const double t_max = (want + 6.0) / kHalfPi + 0.5 * std::max(sg0, sg1);
    double d = 2.0;
    for (const auto& ai : a.a) d = std::min({d, sg0 + ai.real(), sg1 - ai.real()});
    d = std::max(d, 1e-3);
    double h = 2.0 * kPi / (std::max(18.0, want + 8.0) / d + std::abs(l0) + std::abs(l1));

    // resolution floor: rounding in the oscillatory double sum, plus the
    // magnitude still left at the truncation edge of either axis
    const double edge = std::max(
        gl3_log_scale(a, Cplx(sg0, t_max), Cplx(sg1), l0, l1),
        gl3_log_scale(a, Cplx(sg0), Cplx(sg1, t_max), l0, l1));
    const double floor_abs = std::max(std::exp(best) * 1e-13, 4.0 * std::exp(edge));

    Cplx cur = Gl3WhittakerTable(a, sg0, sg1, t_max, h).eval(y0, y1);
    for (int round = 0; round < 4; ++round) {
        h *= 0.5;
        const Cplx prev = cur;
        cur = Gl3WhittakerTable(a, sg0, sg1, t_max, h).eval(y0, y1);
        if (std::abs(cur - prev) <= tol * std::abs(cur) + 0.3 * floor_abs)
            return std::abs(cur) < 10.0 * floor_abs ? Cplx(0.0) : cur;
    }
    // hovering at the resolution floor: the true value is below what this
    // representation can resolve in double precision
    if (std::abs(cur) < 30.0 * floor_abs) return 0.0;
    throw domain_error("whittaker_gl3: step refinement stalled");
}

Cplx stade_rs(const GL3Params& a, const GL2SpectralParam& p, Cplx s, StadeRoute route,
              double tol) {
    if (route == StadeRoute::barnes) {
        Cplx lg = 0.0;
        for (int sign : {+1, -1})
            for (const auto& ak : a.a)
                lg += log_gamma_r(s + static_cast<double>(sign) * p.mu - ak);
        return 0.25 * std::exp(lg);
    }
    if (s.real() < 1.5)
        throw domain_error("stade_rs: direct route needs Re s >= 1.5");

    const double table_tol = tol * 0.03;
    const double want = std::log(100.0 / table_tol);
    const double t_max = (want + 6.0) / kHalfPi + 0.5;
    const double h = 2.0 * kPi / std::max(18.0, want + 8.0);
    const Gl3WhittakerTable tab(a, 1.0, 1.0, t_max, h);

    auto f = [&](double u0, double u1) -> Cplx {
        // past this point the exponential decay of both factors puts the true
        // integrand far below the table's aliasing floor
        if (u0 > 9.0 || u1 > 9.0) return 0.0;
        const Cplx w2 = whittaker_gl2(p, u1, 1e-10);
        const Cplx w3 = tab.eval(u0, u1);
        return w2 * w3 *
               std::exp((2.0 * s - 1.0) * std::log(u0) + (s - 1.5) * std::log(u1));
    };
    return quad::integrate_multiplicative_2d(f, tol).value;
}

} // namespace mbv::special
