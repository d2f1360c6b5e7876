#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mbv/barneslab.hpp"
#include "mbv/cgamma.hpp"

#include <cmath>
#include <complex>
#include <random>

using namespace mbv;
using namespace mbv::barneslab;

namespace {

double rel_err(Cplx got, Cplx want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

} // namespace

TEST_CASE("first vertical-line lemma: closed form vs quadrature") {
    const Cplx half{0.5, 0.0};
    const Cplx closed = first_barnes(half, half, half, half, LemmaMode::closed_form);
    CHECK(rel_err(closed, Cplx{1.0, 0.0}) < 1e-14); // Gamma(1)^4 / Gamma(2)
    const Cplx quad = first_barnes(half, half, half, half, LemmaMode::quadrature);
    CHECK(rel_err(quad, closed) < 1e-9);

    std::mt19937 rng(20240817);
    std::uniform_real_distribution<double> re(0.2, 1.0), im(-0.6, 0.6);
    for (int trial = 0; trial < 3; ++trial) {
        const Cplx a{re(rng), im(rng)}, m{re(rng), im(rng)};
        const Cplx g{re(rng), im(rng)}, d{re(rng), im(rng)};
        const Cplx cf = first_barnes(a, m, g, d, LemmaMode::closed_form);
        const Cplx qd = first_barnes(a, m, g, d, LemmaMode::quadrature);
        CHECK(rel_err(qd, cf) < 1e-9);
    }
}

TEST_CASE("first vertical-line lemma: pole and contour refusals") {
    // alpha + gamma = 0 puts a Gamma(0) in the closed form and pinches the contour
    CHECK_THROWS_AS(first_barnes({0.3, 0.0}, {0.5, 0.0}, {-0.3, 0.0}, {0.8, 0.0},
                                 LemmaMode::closed_form),
                    domain_error);
    CHECK_THROWS_AS(first_barnes({0.3, 0.0}, {0.5, 0.0}, {-0.3, 0.0}, {0.8, 0.0},
                                 LemmaMode::quadrature),
                    domain_error);
}

TEST_CASE("second vertical-line lemma: closed form vs quadrature") {
    const Cplx z0{0.0, 0.0}, one{1.0, 0.0};
    const Cplx closed = second_barnes(z0, z0, z0, one, one, LemmaMode::closed_form);
    CHECK(rel_err(closed, Cplx{1.0, 0.0}) < 1e-14); // Gamma(1)^6 / Gamma(2)^3
    CHECK(rel_err(second_barnes(z0, z0, z0, one, one, LemmaMode::quadrature), closed) < 1e-9);

    const Cplx a{0.1, 0.0}, b{0.2, 0.0}, c{0.3, 0.0}, d{0.7, 0.0}, e{0.9, 0.0};
    CHECK(rel_err(second_barnes(a, b, c, d, e, LemmaMode::quadrature),
                  second_barnes(a, b, c, d, e, LemmaMode::closed_form)) < 1e-9);
}

TEST_CASE("second vertical-line lemma: closed form is exactly permutation invariant") {
    const Cplx a{0.13, 0.21}, b{0.34, -0.11}, c{0.05, 0.4}, d{0.71, 0.06}, e{0.93, -0.2};
    const Cplx base = second_barnes(a, b, c, d, e);
    CHECK(second_barnes(b, c, a, d, e) == base);
    CHECK(second_barnes(c, a, b, e, d) == base);
    CHECK(second_barnes(a, c, b, e, d) == base);
}

TEST_CASE("vertical-line quadrature is stable under admissible contour shifts") {
    const Cplx a{0.4, 0.1}, m{0.6, -0.2}, g{0.7, 0.0}, d{0.9, 0.15};
    auto I = first_barnes_integrand(a, m, g, d);
    auto [lo, hi] = I.admissible_interval("w", {});
    CHECK(lo == doctest::Approx(-0.4).epsilon(1e-12));
    CHECK(hi == doctest::Approx(0.7).epsilon(1e-12));
    const double mid = 0.5 * (lo + hi);
    const Cplx v0 = integrate_barnes(I, {{"w", mid}}, 1e-11).value;
    const Cplx vp = integrate_barnes(I, {{"w", mid + 0.05}}, 1e-11).value;
    const Cplx vm = integrate_barnes(I, {{"w", mid - 0.05}}, 1e-11).value;
    CHECK(std::abs(vp - v0) < 1e-9 * std::abs(v0));
    CHECK(std::abs(vm - v0) < 1e-9 * std::abs(v0));

    auto J = second_barnes_integrand({0.1, 0.0}, {0.2, 0.0}, {0.3, 0.0}, {0.7, 0.0}, {0.9, 0.0});
    auto [lo2, hi2] = J.admissible_interval("w", {});
    const double mid2 = 0.5 * (lo2 + hi2);
    const Cplx w0 = integrate_barnes(J, {{"w", mid2}}, 1e-11).value;
    const Cplx wp = integrate_barnes(J, {{"w", mid2 + 0.05}}, 1e-11).value;
    CHECK(std::abs(wp - w0) < 1e-9 * std::abs(w0));

    // out-of-interval placement violates the convention and is refused
    CHECK_THROWS_AS(integrate_barnes(I, {{"w", hi + 0.1}}, 1e-11), domain_error);
}

TEST_CASE("Gamma-ratio integrand carrier") {
    GammaRatioIntegrand I;
    I.variables = {"u"};
    I.numerator = {GammaFactor({0.5, 0.0}, {{"u", 1.0}})};
    I.power_base = GammaRatioIntegrand::PowerBase{Cplx{2.0, 0.0},
                                                  GammaFactor({0.0, 0.0}, {{"u", -1.0}})};
    const Cplx u{0.3, 0.4};
    const Cplx got = I.eval({{"u", u}});
    const Cplx want = cgamma::gamma(u + 0.5) * std::exp(-u * std::log(2.0));
    CHECK(rel_err(got, want) < 1e-14);

    GammaFactor f;
    CHECK(f.trivial());
    f.coeffs["u"] = 0.5;
    CHECK(!f.trivial());
    CHECK_THROWS_AS(f.eval({}), domain_error);
}

TEST_CASE("3F2-type transformation identity") {
    const Cplx a{0.6, 0.0}, b{0.7, 0.0}, c{0.8, 0.0}, f{0.9, 0.0}, e{1.5, 0.0};
    auto [lhs, rhs] = hyp3f2_transform(a, b, c, f, e);
    CHECK(std::abs(lhs - rhs) / std::abs(lhs) < 1e-8);

    // degenerate b = e: Gamma(e-b) pole in the prefactor
    CHECK_THROWS_AS(hyp3f2_transform(a, e, c, f, e), domain_error);

    // conjugate parameters give conjugate values
    const Cplx ai{0.6, 0.12}, bi{0.7, -0.2}, ci{0.8, 0.07}, fi{0.9, 0.18}, ei{1.5, -0.1};
    auto [l1, r1] = hyp3f2_transform(ai, bi, ci, fi, ei);
    auto [l2, r2] = hyp3f2_transform(std::conj(ai), std::conj(bi), std::conj(ci), std::conj(fi),
                                     std::conj(ei));
    CHECK(rel_err(l2, std::conj(l1)) < 1e-11);
    CHECK(rel_err(r2, std::conj(r1)) < 1e-11);
}

TEST_CASE("4F3 series: terminating, interior z, hat prefactor") {
    const std::array<Cplx, 4> At{Cplx{-1.0, 0.0}, Cplx{1.0, 0.0}, Cplx{1.0, 0.0}, Cplx{1.0, 0.0}};
    const std::array<Cplx, 3> Bt{Cplx{1.0, 0.0}, Cplx{1.0, 0.0}, Cplx{1.0, 0.0}};
    const auto term = f43_plain(At, Bt, {1.0, 0.0});
    CHECK(std::abs(term.value) < 1e-15); // 1 - 1
    CHECK(term.tail == 0.0);
    CHECK_THROWS_AS(f43_hat(At, Bt, {1.0, 0.0}), domain_error); // Gamma(-1) prefactor

    const std::array<Cplx, 4> A{Cplx{0.9, 0.0}, Cplx{1.1, 0.0}, Cplx{1.2, 0.0}, Cplx{1.3, 0.0}};
    const std::array<Cplx, 3> B{Cplx{1.4, 0.0}, Cplx{1.5, 0.0}, Cplx{1.6, 0.0}};
    const Cplx z{0.5, 0.0};
    // long-sum oracle: same recurrence, fixed 10^4 terms
    Cplx t{1.0, 0.0}, oracle = t;
    for (long n = 0; n < 10000; ++n) {
        t *= z * (A[0] + double(n)) * (A[1] + double(n)) * (A[2] + double(n)) *
             (A[3] + double(n)) /
             ((B[0] + double(n)) * (B[1] + double(n)) * (B[2] + double(n)) * double(n + 1));
        oracle += t;
    }
    const auto got = f43_plain(A, B, z);
    CHECK(rel_err(got.value, oracle) < 1e-12);

    const Cplx pref = std::exp(cgamma::log_gamma(A[0]) + cgamma::log_gamma(A[1]) +
                               cgamma::log_gamma(A[2]) + cgamma::log_gamma(A[3]) -
                               cgamma::log_gamma(B[0]) - cgamma::log_gamma(B[1]) -
                               cgamma::log_gamma(B[2]));
    CHECK(f43_hat(A, B, z).value == pref * got.value); // hat = prefactor * plain
}

TEST_CASE("4F3 series at z = 1: Saalschutz margin and completed tail") {
    // unit upper/lower pairs cancel, leaving a Gauss-summable 2F1 at 1 as the
    // oracle for the completed algebraic tail
    const std::array<Cplx, 4> A{Cplx{0.3, 0.0}, Cplx{0.5, 0.0}, Cplx{1.0, 0.0}, Cplx{1.0, 0.0}};
    const std::array<Cplx, 3> B{Cplx{1.0, 0.0}, Cplx{1.0, 0.0}, Cplx{1.8, 0.0}};
    const auto r = f43_plain(A, B, {1.0, 0.0});
    CHECK(r.saalschutz); // 3.8 - 2.8 = 1
    // with the two unit pairs cancelled this is 2F1(0.3, 0.5; 1.8; 1)
    //   = Gamma(1.8)Gamma(1.0)/(Gamma(1.5)Gamma(1.3))
    const Cplx gauss = std::exp(cgamma::log_gamma({1.8, 0.0}) + cgamma::log_gamma({1.0, 0.0}) -
                                cgamma::log_gamma({1.5, 0.0}) - cgamma::log_gamma({1.3, 0.0}));
    CHECK(rel_err(r.value, gauss) < 1e-11);

    const std::array<Cplx, 3> Boff{Cplx{1.0, 0.0}, Cplx{1.0, 0.0}, Cplx{1.85, 0.0}};
    CHECK(!f43_plain(A, Boff, {1.0, 0.0}).saalschutz);

    // nonpositive margin at |z| = 1 diverges
    const std::array<Cplx, 4> Abad{Cplx{1.0, 0.0}, Cplx{1.0, 0.0}, Cplx{1.0, 0.0},
                                   Cplx{1.0, 0.0}};
    const std::array<Cplx, 3> Bbad{Cplx{1.0, 0.0}, Cplx{1.0, 0.0}, Cplx{1.0, 0.0}};
    CHECK_THROWS_AS(f43_plain(Abad, Bbad, {1.0, 0.0}), domain_error);
    // |z| > 1 diverges outright
    CHECK_THROWS_AS(f43_plain(A, B, {1.2, 0.0}), domain_error);
}

TEST_CASE("perturbed exponential: closed form vs residue oracle and contour") {
    const double phi = kPi / 3.0;
    // residue-summation oracle: sum (-z)^n / n! with z = 2 pi e^{-i phi}
    const Cplx zr = 2.0 * kPi * std::exp(Cplx(0.0, -phi));
    Cplx oracle{0.0, 0.0}, pw{1.0, 0.0};
    for (int n = 0; n < 80; ++n) {
        oracle += pw;
        pw *= -zr / double(n + 1);
    }
    const Cplx closed = cahen_e(1.0, phi, CahenMode::closed_form);
    // oracle conditioning: terms peak near e^{2 pi} against a value of e^{-pi}
    CHECK(rel_err(closed, oracle) < 1e-12);
    CHECK(rel_err(closed, std::exp(Cplx(-kPi, kPi * std::sqrt(3.0)))) < 1e-13);

    CHECK(rel_err(cahen_e(1.0, phi, CahenMode::contour), closed) < 1e-8);

    // conjugation symmetry across x -> -x
    for (double x : {0.7, 2.3}) {
        CHECK(cahen_e(-x, phi) == std::conj(cahen_e(x, phi)));
        CHECK(rel_err(cahen_e(-x, phi, CahenMode::contour),
                      std::conj(cahen_e(x, phi, CahenMode::contour))) < 1e-9);
    }
}

TEST_CASE("perturbed exponential at phi = pi/2: indented contour meets e(x)") {
    for (double x : {1.0, -0.3}) {
        const Cplx want = std::exp(Cplx(0.0, 2.0 * kPi * x));
        CHECK(rel_err(cahen_e(x, kPi / 2.0, CahenMode::closed_form), want) < 1e-13);
        CHECK(rel_err(cahen_e(x, kPi / 2.0, CahenMode::contour), want) < 1e-8);
    }
    CHECK_THROWS_AS(cahen_e(0.0, kPi / 3.0), domain_error);
    CHECK_THROWS_AS(cahen_e(1.0, 0.0), domain_error);
    CHECK_THROWS_AS(cahen_e(1.0, 2.0), domain_error);
}
