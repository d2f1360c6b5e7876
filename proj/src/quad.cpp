#include "mbv/quad.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

namespace mbv::quad {

namespace {

int g_workers = [] {
    if (const char* e = std::getenv("WORKERS")) {
        int n = std::atoi(e);
        if (n >= 1 && n <= 256) return n;
    }
    return 1;
}();

void eval_many(const Fn& f, const std::vector<Cplx>& pts, std::vector<Cplx>& out) {
    out.resize(pts.size());
    int nw = g_workers;
    if (nw <= 1 || pts.size() < 256) {
        for (size_t i = 0; i < pts.size(); ++i) out[i] = f(pts[i]);
        return;
    }
    std::atomic<size_t> next{0};
    const size_t chunk = 64;
    auto work = [&] {
        for (;;) {
            size_t b = next.fetch_add(chunk);
            if (b >= pts.size()) return;
            size_t e = std::min(b + chunk, pts.size());
            for (size_t i = b; i < e; ++i) out[i] = f(pts[i]);
        }
    };
    std::vector<std::thread> th;
    th.reserve(nw - 1);
    for (int i = 1; i < nw; ++i) th.emplace_back(work);
    work();
    for (auto& t : th) t.join();
}

double tail_ratio(double edge, double inner) {
    if (!(edge > 0.0) || !(inner > 0.0)) return 0.5;
    double r = edge / inner;
    return std::clamp(r, 1e-6, 0.95);
}

struct LineSums {
    Cplx fine;
    Cplx coarse;
    double tail;
    long nodes;
};

// trapezoid over t in [-T, T] with step h (N forced even), plus the 2h subsample
LineSums line_sums(const Fn& f, double sigma, double T, double h) {
    long N = 2 * static_cast<long>(std::ceil(T / (2.0 * h)));
    if (N < 4) N = 4;
    std::vector<Cplx> pts(2 * N + 1);
    for (long k = -N; k <= N; ++k) pts[k + N] = Cplx(sigma, k * h);
    std::vector<Cplx> vals;
    eval_many(f, pts, vals);
    std::vector<Cplx> fine(vals);
    fine.front() *= 0.5;
    fine.back() *= 0.5;
    std::vector<Cplx> coarse;
    coarse.reserve(N + 1);
    for (long k = 0; k <= 2 * N; k += 2) coarse.push_back(vals[k]);
    coarse.front() *= 0.5;
    coarse.back() *= 0.5;
    LineSums s;
    s.fine = pairwise_sum(fine) * (h / (2.0 * kPi));
    s.coarse = pairwise_sum(coarse) * (2.0 * h / (2.0 * kPi));
    double edge = std::max(std::abs(vals.front()), std::abs(vals.back()));
    double inner = std::max(std::abs(vals[N / 2]), std::abs(vals[2 * N - N / 2]));
    double rho = tail_ratio(edge, inner);
    s.tail = edge * h / (2.0 * kPi) / (1.0 - rho) * 2.0;
    s.nodes = 2 * N + 1;
    if (!finite(s.fine)) throw domain_error("integrate_vertical: integrand produced a nonfinite value");
    return s;
}

} // namespace

int workers() { return g_workers; }
void set_workers(int n) { g_workers = std::clamp(n, 1, 256); }

Cplx pairwise_sum(std::span<const Cplx> v) {
    if (v.size() <= 8) {
        Cplx s{0.0, 0.0};
        for (auto& x : v) s += x;
        return s;
    }
    size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

DecayHint DecayHint::exponential(double r, double d) {
    DecayHint h;
    h.kind = Kind::exponential;
    h.rate = r;
    h.pole_distance = d;
    return h;
}

DecayHint DecayHint::gaussian(double r, double d) {
    DecayHint h;
    h.kind = Kind::gaussian;
    h.rate = r;
    h.pole_distance = d;
    return h;
}

DecayHint DecayHint::stirling(std::vector<double> s, double d) {
    DecayHint h;
    h.kind = Kind::stirling;
    h.slopes = std::move(s);
    h.pole_distance = d;
    return h;
}

double DecayHint::net_rate() const {
    if (kind != Kind::stirling) return rate;
    double sum = 0.0;
    for (double s : slopes) sum += s;
    return 0.5 * kPi * sum;
}

QuadResult integrate_vertical(const Fn& f, const ContourSpec& spec) {
    LineSums s = line_sums(f, spec.sigma, spec.half_height, spec.step);
    QuadResult r;
    r.value = s.fine;
    r.truncation_tail = s.tail;
    r.err_estimate = std::abs(s.fine - s.coarse) + s.tail;
    r.nodes_used = s.nodes;
    return r;
}

QuadResult integrate_vertical_auto(const Fn& f, double sigma, double tol, const DecayHint& hint) {
    if (!(tol > 0.0)) throw domain_error("integrate_vertical_auto: tol must be positive");
    double scale = 0.0;
    for (double t : {0.0, 0.7, -0.7, 2.3, -2.3}) scale = std::max(scale, std::abs(f(Cplx(sigma, t))));
    if (scale == 0.0 || !std::isfinite(scale)) scale = 1.0;
    double tail_goal = 0.5 * tol;
    double need = std::log(std::max(scale / tail_goal, 10.0)) + 4.0;
    double T;
    double rate = hint.net_rate();
    if (hint.kind == DecayHint::Kind::gaussian) {
        T = std::sqrt(need / std::max(rate, 1e-9));
        T = std::clamp(T, 4.0, 1e4);
    } else if (rate > 0.05) {
        T = need / rate;
        T = std::clamp(T, 6.0, 1e5);
    } else {
        // no usable exponential decay: require an integrable power tail
        double p_best = 0.0;
        bool ok = false;
        for (int sgn : {1, -1}) {
            double f1 = std::abs(f(Cplx(sigma, sgn * 8.0)));
            double f2 = std::abs(f(Cplx(sigma, sgn * 32.0)));
            if (f1 == 0.0 && f2 == 0.0) continue;
            if (f1 == 0.0) f1 = 1e-300;
            if (f2 == 0.0) f2 = 1e-300;
            double p = (std::log(f2) - std::log(f1)) / std::log(4.0);
            p_best = std::max(p_best == 0.0 && !ok ? p : std::max(p_best, p), p);
            ok = true;
        }
        if (!ok) p_best = -4.0;
        if (p_best >= -2.0)
            throw domain_error("integrate_vertical_auto: contour tail exponent >= -2, refusing");
        double m = -(p_best + 1.0); // > 1
        T = std::pow(scale / (tail_goal * m), 1.0 / m) * 8.0;
        T = std::clamp(T, 32.0, 1e6);
    }
    double d = std::clamp(hint.pole_distance, 1.2e-3, 2.0);
    double h = 2.0 * kPi * d / std::max(18.0, std::log(scale / tol) + 8.0);
    QuadResult best;
    LineSums prev = line_sums(f, sigma, T, h);
    long used = prev.nodes;
    for (;;) {
        double disc = std::abs(prev.fine - prev.coarse);
        best.value = prev.fine;
        best.truncation_tail = prev.tail;
        best.err_estimate = disc + prev.tail;
        best.nodes_used = used;
        if (disc <= 0.5 * tol || 2 * prev.nodes > kNodeBudget) break;
        h *= 0.5;
        prev = line_sums(f, sigma, T, h);
        used += prev.nodes;
        best.nodes_used = used;
    }
    return best;
}

QuadResult integrate_nested(std::span<const ContourSpec> specs,
                            const std::function<Cplx(std::span<const Cplx>)>& f) {
    if (specs.size() < 2 || specs.size() > 3)
        throw domain_error("integrate_nested: supports 2 or 3 levels");
    struct Axis {
        double sigma, h;
        long N;
    };
    std::vector<Axis> ax;
    double measure = 1.0;
    for (auto& sp : specs) {
        Axis a;
        a.sigma = sp.sigma;
        a.h = sp.step;
        a.N = 2 * static_cast<long>(std::ceil(sp.half_height / (2.0 * sp.step)));
        if (a.N < 4) a.N = 4;
        if (2 * a.N + 1 > kNodeBudget) throw domain_error("integrate_nested: axis over budget");
        measure *= sp.step / (2.0 * kPi);
        ax.push_back(a);
    }
    auto node = [&](int axis, long k) { return Cplx(ax[axis].sigma, k * ax[axis].h); };
    auto wt = [&](int axis, long k) { return (k == -ax[axis].N || k == ax[axis].N) ? 0.5 : 1.0; };

    QuadResult r;
    if (specs.size() == 2) {
        long N0 = ax[0].N, N1 = ax[1].N;
        if ((2 * N0 + 1) * (2 * N1 + 1) > 400'000'000L)
            throw domain_error("integrate_nested: node product over budget");
        std::vector<Cplx> rows(2 * N0 + 1), rows_c(2 * N0 + 1);
        std::vector<Cplx> row(2 * N1 + 1), row_c(N1 + 1);
        double edge = 0.0, inner_max = 0.0;
        std::vector<Cplx> args(2);
        for (long j = -N0; j <= N0; ++j) {
            args[0] = node(0, j);
            for (long k = -N1; k <= N1; ++k) {
                args[1] = node(1, k);
                Cplx v = f(args);
                row[k + N1] = v * wt(1, k);
                double av = std::abs(v);
                if (std::abs(j) == N0 || std::abs(k) == N1) edge = std::max(edge, av);
                else inner_max = std::max(inner_max, av);
            }
            for (long k = 0; k <= 2 * N1; k += 2) row_c[k / 2] = row[k];
            row_c.front() = row.front();
            row_c.back() = row.back();
            rows[j + N0] = pairwise_sum(row) * wt(0, j);
            rows_c[j + N0] = pairwise_sum(row_c) * 2.0 * wt(0, j);
        }
        Cplx fine = pairwise_sum(rows);
        std::vector<Cplx> rc;
        for (long j = 0; j <= 2 * N0; j += 2) rc.push_back(rows_c[j] * 2.0);
        rc.front() = rows_c.front() * 2.0;
        rc.back() = rows_c.back() * 2.0;
        Cplx coarse = pairwise_sum(rc);
        r.value = fine * measure;
        double coarse_val = std::abs(fine - coarse) * measure;
        double rho = tail_ratio(edge, inner_max);
        r.truncation_tail = edge * (ax[0].h + ax[1].h) / (2.0 * kPi) / (1.0 - rho);
        r.err_estimate = coarse_val + r.truncation_tail;
        r.nodes_used = (2 * N0 + 1) * (2 * N1 + 1);
    } else {
        long N0 = ax[0].N, N1 = ax[1].N, N2 = ax[2].N;
        double total = double(2 * N0 + 1) * double(2 * N1 + 1) * double(2 * N2 + 1);
        if (total > 4e9) throw domain_error("integrate_nested: node product over budget");
        std::vector<Cplx> lvl0(2 * N0 + 1);
        std::vector<Cplx> args(3);
        double edge = 0.0, inner_max = 0.0;
        for (long j = -N0; j <= N0; ++j) {
            args[0] = node(0, j);
            std::vector<Cplx> lvl1(2 * N1 + 1);
            for (long k = -N1; k <= N1; ++k) {
                args[1] = node(1, k);
                std::vector<Cplx> lvl2(2 * N2 + 1);
                for (long m = -N2; m <= N2; ++m) {
                    args[2] = node(2, m);
                    Cplx v = f(args);
                    lvl2[m + N2] = v * wt(2, m);
                    double av = std::abs(v);
                    if (std::abs(j) == N0 || std::abs(k) == N1 || std::abs(m) == N2)
                        edge = std::max(edge, av);
                    else inner_max = std::max(inner_max, av);
                }
                lvl1[k + N1] = pairwise_sum(lvl2) * wt(1, k);
            }
            lvl0[j + N0] = pairwise_sum(lvl1) * wt(0, j);
        }
        r.value = pairwise_sum(lvl0) * measure;
        double rho = tail_ratio(edge, inner_max);
        r.truncation_tail = edge * (ax[0].h + ax[1].h + ax[2].h) / (2.0 * kPi) / (1.0 - rho);
        r.err_estimate = r.truncation_tail; // no cheap subsample at level 3
        r.nodes_used = static_cast<long>(total);
    }
    if (!finite(r.value)) throw domain_error("integrate_nested: integrand produced a nonfinite value");
    return r;
}

namespace {

struct Range {
    double a, b;
};

// expand [a,b] until |g| at both ends is below cut (relative to interior max)
Range expand_range(const std::function<Cplx(double)>& g, double a, double b, double cut) {
    double inner = 0.0;
    for (double t = a; t <= b; t += (b - a) / 16.0) inner = std::max(inner, std::abs(g(t)));
    if (inner == 0.0) inner = 1.0;
    int guard = 0;
    while (std::abs(g(a)) > cut * inner && guard++ < 40) a -= 2.0;
    if (guard >= 40) throw domain_error("integrate_multiplicative: no decay towards y -> 0");
    guard = 0;
    while (std::abs(g(b)) > cut * inner && guard++ < 40) b += 2.0;
    if (guard >= 40) throw domain_error("integrate_multiplicative: no decay towards y -> inf");
    return {a, b};
}

struct TrapOut {
    Cplx val;
    double l1; // sum of |samples| * h; rounding-floor scale for the sum
};

TrapOut trap_line(const std::function<Cplx(double)>& g, double a, double b, long n, long stride = 1) {
    std::vector<Cplx> v;
    v.reserve(n / stride + 2);
    double h = (b - a) / double(n);
    double l1 = 0.0;
    for (long k = 0; k <= n; k += stride) {
        Cplx x = g(a + k * h);
        if (k == 0 || k == n) x *= 0.5;
        l1 += std::abs(x);
        v.push_back(x);
    }
    double w = h * double(stride);
    return {pairwise_sum(v) * w, l1 * w};
}

} // namespace

QuadResult integrate_multiplicative(const std::function<Cplx(double)>& f, double tol,
                                    double decay_zero, double decay_inf, double noise_abs) {
    auto g = [&](double t) { return f(std::exp(t)); };
    double a = -8.0 / std::clamp(decay_zero, 0.25, 8.0);
    double b = 8.0 / std::clamp(decay_inf, 0.25, 8.0);
    Range r = expand_range(g, a, b, std::min(1e-3, tol * 1e-2));
    long n = static_cast<long>(std::ceil((r.b - r.a) / 0.25));
    n += n % 2;
    QuadResult out;
    Cplx prev = trap_line(g, r.a, r.b, n).val;
    long used = n + 1;
    double prev_disc = 0.0;
    int stall = 0;
    for (int round = 0;; ++round) {
        long n2 = 2 * n;
        auto [cur, l1] = trap_line(g, r.a, r.b, n2);
        used += n2 + 1;
        double disc = std::abs(cur - prev);
        out.value = cur;
        out.err_estimate = disc;
        out.nodes_used = used;
        double edge = std::max(std::abs(g(r.a)), std::abs(g(r.b)));
        out.truncation_tail = edge * 2.0;
        out.err_estimate += out.truncation_tail;
        // relative target, floored at the rounding capacity of the sample sum
        double floor_abs = std::max({l1 * 1e-14, noise_abs, 1e-300});
        if (disc <= 0.5 * tol * std::abs(cur) + floor_abs || n2 > kNodeBudget) break;
        // a discrepancy that refuses to shrink marks a noise floor; stopping
        // early keeps err_estimate honest about where it settled
        stall = (round > 0 && disc > 0.7 * prev_disc) ? stall + 1 : 0;
        if (stall >= 2) break;
        prev_disc = disc;
        prev = cur;
        n = n2;
    }
    if (!finite(out.value)) throw domain_error("integrate_multiplicative: nonfinite value");
    return out;
}

QuadResult integrate_multiplicative_2d(const std::function<Cplx(double, double)>& f, double tol,
                                       double decay_zero, double decay_inf) {
    // establish ranges on each axis with the other variable at y = 1
    auto g0 = [&](double t) { return f(std::exp(t), 1.0); };
    auto g1 = [&](double t) { return f(1.0, std::exp(t)); };
    double a0 = -8.0 / std::clamp(decay_zero, 0.25, 8.0);
    double b0 = 8.0 / std::clamp(decay_inf, 0.25, 8.0);
    Range r0 = expand_range(g0, a0, b0, std::min(1e-3, tol * 1e-2));
    Range r1 = expand_range(g1, a0, b0, std::min(1e-3, tol * 1e-2));
    // margin: joint support can be wider than the two axis slices
    r0.a -= 2.0; r0.b += 2.0; r1.a -= 2.0; r1.b += 2.0;
    double h = 0.25;
    struct Tensor {
        Cplx val;
        double l1;
        long nodes;
    };
    auto tensor = [&](double step) {
        long n0 = static_cast<long>(std::ceil((r0.b - r0.a) / step));
        long n1 = static_cast<long>(std::ceil((r1.b - r1.a) / step));
        std::vector<Cplx> rows(n0 + 1);
        std::vector<Cplx> row(n1 + 1);
        double l1 = 0.0;
        double w1 = (r1.b - r1.a) / double(n1);
        for (long j = 0; j <= n0; ++j) {
            double t0 = r0.a + j * (r0.b - r0.a) / double(n0);
            double rl1 = 0.0;
            for (long k = 0; k <= n1; ++k) {
                double t1 = r1.a + k * w1;
                Cplx v = f(std::exp(t0), std::exp(t1));
                if (k == 0 || k == n1) v *= 0.5;
                rl1 += std::abs(v);
                row[k] = v;
            }
            Cplx s = pairwise_sum(row) * w1;
            if (j == 0 || j == n0) { s *= 0.5; rl1 *= 0.5; }
            l1 += rl1 * w1;
            rows[j] = s;
        }
        double w0 = (r0.b - r0.a) / double(n0);
        return Tensor{pairwise_sum(rows) * w0, l1 * w0, (n0 + 1) * (n1 + 1)};
    };
    Tensor first = tensor(h);
    Cplx prev = first.val;
    long used = first.nodes;
    QuadResult out;
    double prev_disc = 0.0;
    int stall = 0;
    for (int round = 0;; ++round) {
        Tensor t = tensor(h * 0.5);
        used += t.nodes;
        double disc = std::abs(t.val - prev);
        out.value = t.val;
        out.err_estimate = disc;
        out.nodes_used = used;
        double floor_abs = std::max(t.l1 * 1e-14, 1e-300);
        if (disc <= 0.5 * tol * std::abs(t.val) + floor_abs || t.nodes > kNodeBudget) break;
        stall = (round > 0 && disc > 0.7 * prev_disc) ? stall + 1 : 0;
        if (stall >= 2) break;
        prev_disc = disc;
        prev = t.val;
        h *= 0.5;
    }
    if (!finite(out.value)) throw domain_error("integrate_multiplicative_2d: nonfinite value");
    return out;
}

QuadResult integrate_segment(const Fn& f, Cplx za, Cplx zb, double tol) {
    Cplx dir = (zb - za) / Cplx(0.0, 2.0 * kPi);
    long n = 32;
    auto line = [&](long m) {
        std::vector<Cplx> v(m + 1);
        for (long k = 0; k <= m; ++k) {
            Cplx z = za + (zb - za) * (double(k) / double(m));
            v[k] = f(z);
            if (k == 0 || k == m) v[k] *= 0.5;
        }
        return pairwise_sum(v) / double(m);
    };
    Cplx prev = line(n);
    QuadResult out;
    long used = n + 1;
    for (;;) {
        n *= 2;
        Cplx cur = line(n);
        used += n + 1;
        double disc = std::abs(cur - prev) * std::abs(zb - za) / (2.0 * kPi);
        out.value = cur * dir;
        out.err_estimate = disc;
        out.nodes_used = used;
        if (disc <= 0.5 * tol || n > kNodeBudget) break;
        prev = cur;
    }
    if (!finite(out.value)) throw domain_error("integrate_segment: nonfinite value");
    return out;
}

QuadResult integrate_vertical_ray(const Fn& f, double sigma, double t_from, int sign, double tol,
                                  const DecayHint& hint) {
    if (sign != 1 && sign != -1) throw domain_error("integrate_vertical_ray: sign must be +-1");
    double scale = std::abs(f(Cplx(sigma, t_from)));
    if (scale == 0.0 || !std::isfinite(scale)) scale = 1.0;
    double rate = std::max(hint.net_rate(), 1e-3);
    double L;
    if (hint.kind == DecayHint::Kind::gaussian)
        L = std::sqrt((std::log(scale / (0.5 * tol)) + 4.0) / rate);
    else
        L = (std::log(std::max(scale / (0.5 * tol), 10.0)) + 4.0) / rate;
    L = std::clamp(L, 4.0, 2e5);
    double d = std::clamp(hint.pole_distance, 1.2e-3, 2.0);
    double h = 2.0 * kPi * d / std::max(18.0, std::log(scale / tol) + 8.0);
    auto line = [&](double step) {
        long n = static_cast<long>(std::ceil(L / step));
        n += n % 2;
        std::vector<Cplx> v(n + 1);
        for (long k = 0; k <= n; ++k) {
            v[k] = f(Cplx(sigma, t_from + sign * k * step));
            if (k == 0 || k == n) v[k] *= 0.5;
        }
        return std::pair<Cplx, long>(pairwise_sum(v) * (sign * step / (2.0 * kPi)), n + 1);
    };
    auto [prev, u0] = line(h);
    long used = u0;
    QuadResult out;
    for (;;) {
        auto [cur, u] = line(h * 0.5);
        used += u;
        double disc = std::abs(cur - prev);
        out.value = cur;
        out.err_estimate = disc + std::abs(f(Cplx(sigma, t_from + sign * L))) * h;
        out.nodes_used = used;
        if (disc <= 0.5 * tol || u > kNodeBudget) break;
        prev = cur;
        h *= 0.5;
    }
    if (!finite(out.value)) throw domain_error("integrate_vertical_ray: nonfinite value");
    return out;
}

} // namespace mbv::quad
