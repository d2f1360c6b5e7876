#include "mbv/kltransform.hpp"

#include "mbv/cgamma.hpp"
#include "mbv/quad.hpp"

#include <algorithm>
#include <cmath>

namespace mbv::kl {

namespace {

using cgamma::log_gamma;

// 1/|Gamma(it)|^2 = t sinh(pi t)/pi on the critical line
double inv_gamma_sq(double t) {
    if (t == 0.0) return 0.0;
    const double at = std::abs(t);
    return at * std::sinh(kPi * at) / kPi;
}

} // namespace

TestFunctionSpec TestFunctionSpec::plain_gaussian(double scale) {
    if (!(scale > 0.0)) throw domain_error("TestFunctionSpec: scale must be positive");
    TestFunctionSpec s;
    s.kind = Kind::plain_gaussian;
    s.scale = scale;
    return s;
}

TestFunctionSpec TestFunctionSpec::gaussian_pair(double m, double r, double eta,
                                                 const special::GL3Params& a) {
    if (!(eta > 0.0) || !(r > 0.0) || m < 0.0)
        throw domain_error("TestFunctionSpec: need eta > 0, R > 0, M >= 0");
    TestFunctionSpec s;
    s.kind = Kind::gaussian_pair;
    s.m_center = m;
    s.r_width = r;
    s.eta = eta;
    s.alpha = a;
    return s;
}

TestFunctionSpec TestFunctionSpec::user(std::function<Cplx(Cplx)> h, double eta, double t_cap) {
    if (!(eta > 0.0) || !(t_cap > 1.0))
        throw domain_error("TestFunctionSpec: need eta > 0 and t_cap > 1");
    TestFunctionSpec s;
    s.kind = Kind::user;
    s.eta = eta;
    s.t_cap = t_cap;
    s.fn = std::move(h);
    for (double t : {0.7, 1.9, 3.7}) {
        if (t > t_cap) break;
        const Cplx a = s.fn(Cplx(0.0, t)), b = s.fn(Cplx(0.0, -t));
        if (std::abs(a - b) > 1e-10 * std::max(1.0, std::abs(a)))
            throw domain_error("TestFunctionSpec: user function is not even");
    }
    return s;
}

Cplx TestFunctionSpec::operator()(Cplx mu) const {
    if (kind == Kind::user) return fn(mu);
    if (kind == Kind::plain_gaussian) {
        const Cplx z = mu / scale;
        return std::exp(z * z);
    }
    const Cplx im(0.0, m_center);
    const Cplx zp = (mu + im) / r_width, zm = (mu - im) / r_width;
    const Cplx bumps = std::exp(zp * zp) + std::exp(zm * zm);
    if (bumps == Cplx(0.0)) return 0.0;

    const double two_eta = 2.0 * eta;
    Cplx lg = log_gamma(two_eta + mu) + log_gamma(two_eta - mu) -
              2.0 * log_gamma(Cplx(two_eta));
    for (const auto& ai : alpha.a)
        lg -= log_gamma((0.5 + mu - ai) * 0.5) + log_gamma((0.5 - mu - ai) * 0.5);
    return bumps * std::exp(lg);
}

double TestFunctionSpec::tail_height(double want, double growth) const {
    if (kind == Kind::user) return t_cap;
    if (kind == Kind::plain_gaussian) {
        double t = std::max(6.0, scale * 2.0);
        for (int i = 0; i < 6; ++i)
            t = scale * std::sqrt(std::max(4.0, want + growth * t));
        return t;
    }
    // the gamma quotient of the pair grows like e^{pi t / 2} times a power,
    // the power being worth a few extra units of `want` at these heights
    const double g = growth + kPi / 2.0;
    double t = m_center + 2.0 * r_width;
    for (int i = 0; i < 6; ++i)
        t = m_center + r_width * std::sqrt(std::max(4.0, 1.6 * want + g * t));
    return t;
}

Cplx spectral_integral(const TestFunctionSpec& h_spec, const std::function<Cplx(Cplx)>& f,
                       double growth, double tol) {
    auto g = [&](double t) -> Cplx {
        const double w = inv_gamma_sq(t);
        if (w == 0.0) return 0.0;
        const Cplx mu(0.0, t);
        const Cplx hv = h_spec(mu);
        if (hv == Cplx(0.0)) return 0.0;
        return hv * f(mu) * w;
    };

    // peak magnitude: probe near the origin and where the form concentrates
    double scale_probe = 0.0;
    std::vector<double> probes{0.5, 1.5, 3.0};
    switch (h_spec.kind) {
    case TestFunctionSpec::Kind::plain_gaussian:
        probes.insert(probes.end(), {h_spec.scale, 1.5 * h_spec.scale});
        break;
    case TestFunctionSpec::Kind::gaussian_pair:
        probes.insert(probes.end(), {h_spec.m_center - h_spec.r_width, h_spec.m_center,
                                     h_spec.m_center + h_spec.r_width});
        break;
    case TestFunctionSpec::Kind::user:
        probes.insert(probes.end(), {h_spec.t_cap / 3.0, 2.0 * h_spec.t_cap / 3.0});
        break;
    }
    for (double t : probes)
        if (t > 0.0) scale_probe = std::max(scale_probe, std::abs(g(t)));
    if (scale_probe == 0.0) return 0.0;

    const double want = std::log(100.0 / tol);
    const double t_max = h_spec.tail_height(want, growth);
    double h = 2.0 * kPi * 1.2 / std::max(18.0, want + 8.0);
    long n = std::lround(std::ceil(t_max / h));
    h = t_max / static_cast<double>(n);

    auto sweep = [&](double step, long count) {
        std::vector<Cplx> terms(static_cast<size_t>(count));
        for (long i = 1; i <= count; ++i) {
            Cplx v = g(step * static_cast<double>(i));
            if (i == count) v *= 0.5;
            terms[static_cast<size_t>(i - 1)] = v;
        }
        // (1/2pi) int_{-T}^{T} = (1/pi) int_0^T by evenness; g(0) = 0
        return quad::pairwise_sum(terms) * (step / kPi);
    };

    // the oscillatory sum cannot resolve below rounding on its largest terms
    const double floor_abs = scale_probe * 1e-13;
    Cplx prev = sweep(h, n);
    for (int round = 0; round < 12; ++round) {
        h *= 0.5;
        n *= 2;
        const Cplx cur = sweep(h, n);
        if (std::abs(cur - prev) <= tol * std::abs(cur) + floor_abs) return cur;
        prev = cur;
    }
    throw domain_error("spectral_integral: quadrature did not settle");
}

KlInverseGrid::KlInverseGrid(const TestFunctionSpec& h_spec, double tol) : tol_(tol) {
    const double want = std::log(100.0 / tol);
    const double t_max = h_spec.tail_height(want, kPi / 2.0);
    double h = 2.0 * kPi * 1.2 / std::max(18.0, want + 8.0);
    long n = std::lround(std::ceil(t_max / h));
    h = t_max / static_cast<double>(n);

    auto build = [&](double step, long count) {
        std::vector<double> ts;
        std::vector<Cplx> cs;
        ts.reserve(static_cast<size_t>(count));
        cs.reserve(static_cast<size_t>(count));
        for (long i = 1; i <= count; ++i) {
            const double t = step * static_cast<double>(i);
            const double w = inv_gamma_sq(t);
            Cplx c = h_spec(Cplx(0.0, t)) * w * (step / (2.0 * kPi));
            if (i == count) c *= 0.5;
            if (c != Cplx(0.0)) {
                ts.push_back(t);
                cs.push_back(c);
            }
        }
        t_ = std::move(ts);
        c_ = std::move(cs);
    };

    // validate the step at a middling argument, then keep the finer grid;
    // the kernel factors are computed to a small absolute floor each, so the
    // sum carries irreducible noise well above l1 * eps; allow for it
    double l1 = 0.0;
    auto probe = [&](double step, long count) {
        build(step, count);
        std::vector<Cplx> terms(t_.size());
        l1 = 0.0;
        for (size_t i = 0; i < t_.size(); ++i) {
            terms[i] = c_[i] * special::whittaker_gl2({Cplx(0.0, t_[i])}, 1.0, 0.03 * tol);
            l1 += std::abs(terms[i]);
        }
        return quad::pairwise_sum(terms);
    };
    Cplx prev = probe(h, n);
    for (int round = 0; round < 10; ++round) {
        h *= 0.5;
        n *= 2;
        const Cplx cur = probe(h, n);
        if (std::abs(cur - prev) <= 0.2 * tol * std::abs(cur) + l1 * 1e-9) return;
        prev = cur;
    }
    throw domain_error("KlInverseGrid: quadrature did not settle");
}

Cplx KlInverseGrid::eval(double y) const {
    // (1/(4 pi i)) int_(0) = (1/2) * (line measure); evenness folds to t > 0
    std::vector<Cplx> terms(t_.size());
    for (size_t i = 0; i < t_.size(); ++i)
        terms[i] = c_[i] * special::whittaker_gl2({Cplx(0.0, t_[i])}, y, 0.03 * tol_);
    return quad::pairwise_sum(terms);
}

Cplx kl_inverse(const TestFunctionSpec& h_spec, double y, double tol) {
    auto f = [&](Cplx mu) { return special::whittaker_gl2({mu}, y, 0.03 * tol); };
    return 0.5 * spectral_integral(h_spec, f, kPi / 2.0, tol);
}

Cplx kl_forward(const SpectralWeight& h, Cplx mu, double tol) {
    if (!(h.eta > std::abs(mu.real()) + 0.5))
        throw domain_error("kl_forward: decay exponent too small for this mu");
    // samples of h far below its peak are cancellation noise from the inverse
    // transform; they rise like y^{-1/2} against the measure and would stall
    // the quadrature.  Find where |h| genuinely drops below a floor while
    // walking y downward, then fade the integrand out smoothly below that
    // point so no jump is introduced where real mass still lives.
    double peak = 0.0;
    for (double y : {0.3, 0.5, 0.8, 1.0, 1.5, 2.5, 4.0}) peak = std::max(peak, std::abs(h.h(y)));
    if (peak == 0.0) return 0.0;
    // walk down while the samples keep decaying; once they are below a coarse
    // floor AND the decay stalls, the noise amplitude has been reached.  The
    // small-y weight of the measure is ~ y^{-1/2}, so mass cut this deep is
    // negligible while cutting at the coarse floor alone would not be
    const double h_floor = peak * 1e-7;
    auto sample = [&](double y) { return std::max(std::abs(h.h(y)), std::abs(h.h(1.3 * y))); };
    double y_lo = 0.5;
    double m_lo = sample(y_lo);
    while (y_lo > 1e-8) {
        const double y2 = 0.5 * y_lo, m2 = sample(y2);
        if (m_lo <= h_floor && m2 > 0.55 * m_lo) break;
        y_lo = y2;
        m_lo = m2;
    }
    // the smallest magnitude seen below the window estimates the noise
    double noise_est = m_lo;
    double ys = y_lo;
    for (int i = 0; i < 4 && ys > 1e-9; ++i) {
        ys *= 0.5;
        noise_est = std::min(noise_est, sample(ys));
    }
    auto f = [&](double y) -> Cplx {
        double w = 1.0;
        if (y <= y_lo / 2.718281828459045) return 0.0;
        if (y < y_lo) w = 0.5 * (1.0 - std::cos(kPi * (std::log(y / y_lo) + 1.0)));
        return w * h.h(y) * special::whittaker_gl2({mu}, y, 0.03 * tol) / y;
    };
    const double noise_abs =
        noise_est * std::abs(special::whittaker_gl2({mu}, y_lo, 1e-6)) / y_lo;
    return quad::integrate_multiplicative(f, tol, 1.0, 1.0, noise_abs).value;
}

Cplx mellin_tilde(const TestFunctionSpec& h_spec, Cplx w, double tol) {
    const double eta = h_spec.kind == TestFunctionSpec::Kind::plain_gaussian ? 40.0 : h_spec.eta;
    if (w.real() <= -0.5 + kPoleGuard || w.real() >= eta - kPoleGuard)
        throw domain_error("mellin_tilde: w outside the Mellin strip");
    auto f = [&](Cplx mu) {
        return std::exp(log_gamma((w + 0.5 + mu) * 0.5) + log_gamma((w + 0.5 - mu) * 0.5));
    };
    const Cplx pref = std::exp(-(w + 0.5) * std::log(kPi)) * 0.25;
    return pref * spectral_integral(h_spec, f, kPi / 2.0, tol);
}

} // namespace mbv::kl
