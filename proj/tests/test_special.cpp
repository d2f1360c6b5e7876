#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mbv/quad.hpp"
#include "mbv/special.hpp"

#include <cmath>
#include <complex>

using mbv::Cplx;
using mbv::kPi;
using namespace mbv::special;

namespace {

double rel_err(Cplx got, Cplx want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

const GL3Params kGeneric{Cplx(0.0, 0.3), Cplx(0.0, -0.1)};  // third is -0.2i
const GL3Params kSymmetric{Cplx(0.0, 0.4), Cplx(0.0, -0.4)};

} // namespace

TEST_CASE("gl2 whittaker matches high-precision references") {
    // 2 sqrt(y) K_mu(2 pi y), 40-digit values computed externally
    struct Ref {
        double mu_re, mu_im, y, w_re, w_im;
    };
    static const Ref refs[] = {
        {+0.00, +0.40, 0.05, 0.519420399495996451856, 0.0},
        {+0.00, +0.40, 0.3, 0.138863995192881230611, 0.0},
        {+0.00, +0.40, 1.0, 0.00181155084095090467971, 0.0},
        {+0.00, +0.40, 2.5, 1.48805720658884290891e-7, 0.0},
        {+0.00, +2.00, 0.3, 0.0577442155656077684829, 0.0},
        {+0.00, +2.00, 1.0, 0.00136031127438190362774, 0.0},
        {+0.25, +0.00, 0.7, 0.0120637428210647352552, 0.0},
        {+0.00, +0.00, 1.0, 0.00183316872180874062379, 0.0},
        {+0.00, +7.00, 0.8, 0.0000319741585217074218144, 0.0},
    };
    for (const auto& r : refs) {
        const Cplx got = whittaker_gl2({Cplx(r.mu_re, r.mu_im)}, r.y);
        CHECK(rel_err(got, Cplx(r.w_re, r.w_im)) < 1e-10);
    }
}

TEST_CASE("gl2 whittaker agrees with its inverse Mellin integral") {
    const GL2SpectralParam p{Cplx(0.0, 0.4)};
    for (double y : {0.3, 1.0}) {
        auto f = [&](Cplx w) { return mellin_whittaker_gl2(p, w) * std::pow(Cplx(y), -w); };
        auto hint = mbv::quad::DecayHint::stirling({0.5, 0.5}, 1.4);
        const Cplx via_mellin = mbv::quad::integrate_vertical_auto(f, 1.0, 1e-12, hint).value;
        const Cplx direct = whittaker_gl2(p, y);
        CHECK(rel_err(via_mellin, direct) < 1e-8);
    }
}

TEST_CASE("gl2 forward Mellin integral matches the closed form") {
    const GL2SpectralParam p{Cplx(0.0, 0.4)};
    for (Cplx w : {Cplx(0.6, 0.0), Cplx(1.0, 0.7)}) {
        auto f = [&](double y) {
            return whittaker_gl2(p, y, 1e-12) * std::exp(w * std::log(y));
        };
        const Cplx got = mbv::quad::integrate_multiplicative(f, 1e-10).value;
        CHECK(rel_err(got, mellin_whittaker_gl2(p, w)) < 1e-8);
    }
}

TEST_CASE("g_alpha pole semantics") {
    // denominator pole: s0 + s1 a nonpositive even integer -> exact zero
    CHECK(g_alpha(kGeneric, Cplx(1.0, 2.0), Cplx(-1.0, -2.0)) == Cplx(0.0));
    CHECK(g_alpha(kGeneric, Cplx(0.5, 0.0), Cplx(-2.5, 0.0)) == Cplx(0.0));
    // numerator pole: refuse
    CHECK_THROWS_AS((void)g_alpha(kGeneric, -kGeneric.a[0], Cplx(1.0)), mbv::domain_error);
    CHECK_THROWS_AS((void)g_alpha(kGeneric, Cplx(1.0), kGeneric.a[1]), mbv::domain_error);
    // a regular point evaluates finite and nonzero
    const Cplx v = g_alpha(kGeneric, Cplx(1.2, 0.4), Cplx(0.9, -0.2));
    CHECK(std::isfinite(std::abs(v)));
    CHECK(std::abs(v) > 0.0);
}

TEST_CASE("gl3 whittaker double Mellin transform recovers g_alpha") {
    const double want = std::log(100.0 / 1e-9);
    const double t_max = (want + 6.0) / (kPi / 2.0) + 0.5;
    const double h = 2.0 * kPi / std::max(18.0, want + 8.0);
    const Gl3WhittakerTable tab(kGeneric, 1.0, 1.0, t_max, h);

    const Cplx s0(1.3, 0.0), s1(1.1, 0.0);
    auto f = [&](double y0, double y1) -> Cplx {
        if (y0 > 9.0 || y1 > 9.0) return 0.0; // true decay is far below table noise here
        return 4.0 * tab.eval(y0, y1) *
               std::exp((s0 - 1.0) * std::log(y0) + (s1 - 1.0) * std::log(y1));
    };
    const Cplx got = mbv::quad::integrate_multiplicative_2d(f, 1e-7).value;
    CHECK(rel_err(got, g_alpha(kGeneric, s0, s1)) < 1e-6);
}

TEST_CASE("gl3 whittaker symmetry under negating parameters and swapping arguments") {
    for (auto [y0, y1] : {std::pair{0.9, 1.7}, std::pair{0.35, 2.2}}) {
        const Cplx lhs = whittaker_gl3(kGeneric, y0, y1, 1e-9);
        const Cplx rhs = whittaker_gl3(kGeneric.negated(), y1, y0, 1e-9);
        CHECK(rel_err(lhs, rhs) < 1e-8);
    }
}

TEST_CASE("gl3 whittaker is real for a conjugation-symmetric parameter set") {
    for (auto [y0, y1] : {std::pair{0.8, 1.3}, std::pair{2.0, 0.6}}) {
        const Cplx w = whittaker_gl3(kSymmetric, y0, y1, 1e-9);
        CHECK(std::abs(w.imag()) < 1e-8 * std::abs(w));
    }
}

TEST_CASE("gl3 whittaker obeys a power growth bound on a wide log grid") {
    // |W(y0, y1)| <= C y0^0.9 y1^0.9 across [1e-2, 1e2]^2
    double max_ratio = 0.0;
    for (int i = 0; i < 7; ++i) {
        for (int j = 0; j < 7; ++j) {
            const double y0 = std::pow(10.0, -2.0 + 4.0 * i / 6.0);
            const double y1 = std::pow(10.0, -2.0 + 4.0 * j / 6.0);
            const double w = std::abs(whittaker_gl3(kGeneric, y0, y1, 1e-6));
            max_ratio = std::max(max_ratio, w / std::pow(y0 * y1, 0.9));
        }
    }
    CHECK(max_ratio > 0.0);
    // the constant is genuinely sizable for closely spaced parameters
    // (inverse spectral gaps enter the small-y residue terms)
    CHECK(max_ratio < 500.0);
}

TEST_CASE("stade integral matches its gamma product") {
    const GL2SpectralParam p{Cplx(0.0, 0.4)};
    const Cplx s(2.0, 0.0);
    const Cplx direct = stade_rs(kGeneric, p, s, StadeRoute::direct, 1e-4);
    const Cplx closed = stade_rs(kGeneric, p, s, StadeRoute::barnes);
    CHECK(rel_err(direct, closed) < 1e-3);
}
