#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"
#include "toricwk/calabi.hpp"
#include "toricwk/errors.hpp"
#include "toricwk/stability.hpp"

#include <cmath>
#include <random>

using namespace toricwk;
using namespace testing_support;

namespace {

const double E = std::exp(1.0);

Polynomial X() { return Polynomial::variable(1, 0); }
Polynomial C(long long c) { return Polynomial::constant(1, Rational(c)); }

struct Flat {
    Weight v = Weight::exponential(rv({1}));
    Weight w = soliton_weight(v, 1);
};

// vTheta = (1 - x^2) e^{-x}: the profile turns negative at x = 1.
struct Failing {
    Weight v = Weight::exponential(rv({1}));
    Weight vtheta = Weight::exponential(rv({1})) * (C(1) - X() * X());
    Weight w = vtheta.differentiate(0).differentiate(0) * Rational(-1);
};

}  // namespace

TEST_CASE("antiderivatives differentiate back") {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> coef(-4, 4), lam(-2, 3), deg(0, 3);
    for (int trial = 0; trial < 30; ++trial) {
        Polynomial p(1);
        for (int e = 0; e <= deg(rng); ++e) p.add_term({e}, Rational(coef(rng)));
        Weight w = Weight::exponential(rv({lam(rng)}), Rational(coef(rng), 3)) * p;
        Weight back = antiderivative_1d(w).differentiate(0);
        CHECK((back - w).is_zero());
    }
    CHECK_THROWS_AS(antiderivative_1d(Weight::power(X() + C(2), -1)), InvalidInput);
}

TEST_CASE("profile examples") {
    SUBCASE("flat model") {
        Flat f;
        auto s = profile_solve(f.v, f.w);
        CHECK(s.exact);
        CHECK(s.boundary_exact);
        REQUIRE(s.theta_exact);
        CHECK(*s.theta_exact == Weight::from_polynomial(X() * Rational(2) + C(2)));
        CHECK(s.vtheta == Weight::exponential(rv({1})) * (X() * Rational(2) + C(2)));
        CHECK(std::abs(s.theta_at_minus_one) < 1e-10);
        CHECK(std::abs(s.theta_slope_residual) < 1e-10);
        CHECK_FALSE(s.first_nonpositive);
    }
    SUBCASE("zero w and constant v") {
        auto s = profile_solve(Weight::constant(1, 1), Weight(1));
        CHECK(s.vtheta == Weight::from_polynomial(X() * Rational(2) + C(2)));
    }
    SUBCASE("quadratic profile") {
        auto s = profile_solve(Weight::from_polynomial(X() + C(2)), Weight::constant(1, 2));
        auto expected = Weight::from_polynomial(C(1) - X() * X());
        CHECK(s.vtheta == expected);
        REQUIRE(s.first_nonpositive);
        CHECK(*s.first_nonpositive == doctest::Approx(1.0).epsilon(0.011));
        CHECK(s.theta(0.5) == doctest::Approx(1.5 * 0.5 / 2.5));
    }
    SUBCASE("v vanishing on the domain") {
        CHECK_THROWS_AS(profile_solve(Weight::from_polynomial(X()), Weight(1)), PoleOnDomain);
    }
}

TEST_CASE("profile ODE holds symbolically") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> coef(-3, 3), lam(0, 2), deg(0, 2);
    for (int trial = 0; trial < 25; ++trial) {
        Polynomial p(1);
        for (int e = 0; e <= deg(rng); ++e) p.add_term({e}, Rational(coef(rng)));
        Weight w = Weight::exponential(rv({lam(rng)}), Rational(coef(rng))) * p;
        Weight v = Weight::exponential(rv({1})) * (X() * X() + C(1));
        auto s = profile_solve(v, w);
        CHECK((s.vtheta.differentiate(0).differentiate(0) + w).is_zero());
        CHECK(s.boundary_exact);
    }
}

TEST_CASE("numeric fallback for weights with negative factors") {
    Weight v = Weight::exponential(rv({1}));
    Weight w = Weight::power(X() + C(2), -2) * Rational(-1);
    auto s = profile_solve(v, w);
    CHECK_FALSE(s.exact);
    // int_{-1}^x (x - t)/(t + 2)^2 dt = (x + 1) - log(x + 2)
    for (double x : {-0.5, 0.0, 2.0, 7.0}) {
        double expect = 2.0 * E * (1.0 + x) + (x + 1.0) - std::log(x + 2.0);
        CHECK(s.vtheta_at(x) == doctest::Approx(expect).epsilon(1e-10));
    }
    CHECK(std::abs(s.theta_at_minus_one) < 1e-12);
    CHECK(std::abs(s.theta_slope_residual) < 1e-10);
    auto verdict = existence_verdict(s);
    CHECK(verdict.method == "scan");
    CHECK(verdict.exists);
}

TEST_CASE("decaying profile") {
    Flat f;
    auto s = profile_solve_decaying(f.v, f.w);
    CHECK(s.vtheta == profile_solve(f.v, f.w).vtheta);
    CHECK(s.boundary_exact);
    CHECK_THROWS_AS(profile_solve_decaying(f.v, f.w * Rational(2)), AffineFutakiNonzero);

    Failing g;
    auto t = profile_solve_decaying(g.v, g.w);
    CHECK(t.vtheta == g.vtheta);

    // w <= 0 on the tail gives a nonnegative profile there
    Weight neg = Weight::exponential(rv({2})) * (X() * X() * Rational(-1) + X() * Rational(4) - C(1));
    Weight v = Weight::exponential(rv({1}));
    auto n = profile_solve(v, neg);
    for (double x : {5.0, 10.0, 20.0}) CHECK(n.vtheta_at(x) >= 0.0);
}

TEST_CASE("existence verdicts") {
    Flat f;
    auto ok = existence_verdict(profile_solve(f.v, f.w));
    CHECK(ok.exists);
    CHECK(ok.method == "sturm-exact");

    auto quad = existence_verdict(profile_solve(Weight::from_polynomial(X() + C(2)), Weight::constant(1, 2)));
    CHECK_FALSE(quad.exists);
    REQUIRE(quad.fails_at);
    CHECK(*quad.fails_at == doctest::Approx(1.0).epsilon(1e-12));

    Failing g;
    auto bad = existence_verdict(profile_solve(g.v, g.w));
    CHECK_FALSE(bad.exists);
    CHECK(*bad.fails_at == doctest::Approx(1.0).epsilon(1e-12));

    // nonpositive w with v(-1) > 0
    auto neg = existence_verdict(profile_solve(Weight::exponential(rv({1})), Weight::exponential(rv({2})) * Rational(-3)));
    CHECK(neg.exists);

    // mixed decays fall back to the scan
    Weight v = Weight::exponential(rv({1}));
    Weight w = Weight::exponential(rv({1}), Rational(1, 2)) * (X() * Rational(-2) + C(2)) +
               Weight::exponential(rv({1}), Rational(-1, 3)) * C(1);
    auto s = profile_solve(v, w);
    auto mixed = existence_verdict(s);
    CHECK(mixed.method == "scan");
    CHECK(mixed.exists == !s.first_nonpositive.has_value());

    // one decay, two shifts: 2(1 + x) - e^{-1/2}(1 + x)^2 vanishes at 2 sqrt(e) - 1
    auto shifted = profile_solve(Weight::constant(1, 1), Weight::exponential(rv({0}), Rational(1, 2)) * Rational(2));
    auto fl = existence_verdict(shifted);
    CHECK(fl.method == "sturm-float");
    CHECK_FALSE(fl.exists);
    REQUIRE(fl.fails_at);
    CHECK(*fl.fails_at == doctest::Approx(2.0 * std::sqrt(E) - 1.0).epsilon(1e-12));
}

TEST_CASE("sturm counts") {
    // (x - 1)(x - 2)(x + 3)
    std::vector<Rational> p{6, -7, 0, 1};
    CHECK(sturm_count(p, Rational(-10), std::nullopt) == 3);
    CHECK(sturm_count(p, Rational(0), std::nullopt) == 2);
    CHECK(sturm_count(p, Rational(1), Rational(2)) == 1);
    CHECK(sturm_count(p, Rational(3, 2), Rational(5, 2)) == 1);
    CHECK(sturm_count({1, 0, 1}, Rational(-100), std::nullopt) == 0);
    // repeated root counted once
    CHECK(sturm_count({1, -2, 1}, Rational(0), Rational(2)) == 1);

    std::mt19937 rng(3);
    std::uniform_int_distribution<int> root(-6, 6);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<int> roots{root(rng), root(rng), root(rng)};
        std::vector<Rational> c{1};
        for (int r : roots) {
            std::vector<Rational> next(c.size() + 1, Rational(0));
            for (size_t i = 0; i < c.size(); ++i) {
                next[i + 1] += c[i];
                next[i] -= c[i] * r;
            }
            c = next;
        }
        std::sort(roots.begin(), roots.end());
        roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
        Rational a(-1, 2);
        int expect = 0;
        for (int r : roots) expect += r > a ? 1 : 0;
        CHECK(sturm_count(c, a, std::nullopt) == expect);
    }
}

TEST_CASE("crease profile identity") {
    Flat f;
    auto s = profile_solve(f.v, f.w);
    auto r = crease_profile_identity(s, {Rational(0), Rational(1), Rational(2)});
    CHECK(r.max_residual < 1e-10);
    CHECK(r.futaki[0] == doctest::Approx(2.0));
    CHECK(r.futaki[1] == doctest::Approx(4.0 / E));
    CHECK(r.futaki[2] == doctest::Approx(6.0 / (E * E)));

    auto flat = profile_solve(Weight::constant(1, 1), Weight(1));
    auto z = crease_profile_identity(flat, {Rational(0), Rational(3)});
    CHECK(z.max_residual < 1e-12);
    CHECK(z.futaki[1] == doctest::Approx(8.0));

    auto near = crease_profile_identity(s, {Rational(-999, 1000)});
    CHECK(std::abs(near.futaki[0]) < 1e-2);
    CHECK(near.max_residual < 1e-12);

    Weight v = Weight::exponential(rv({1}));
    auto numeric = profile_solve(v, Weight::power(X() + C(2), -2) * Rational(-1) * Weight::exponential(rv({1})));
    auto nr = crease_profile_identity(numeric, {Rational(0), Rational(3, 2)}, 1e-10);
    CHECK(nr.max_residual < 1e-7);
}

TEST_CASE("line bundle weights") {
    Flat f;
    auto none = line_bundle_weights(f.v, f.w, {});
    CHECK(none.v == f.v);
    CHECK(none.w == f.w);

    auto one = line_bundle_weights(f.v, f.w, {FibrationFactor{rv({1}), Rational(2), 1, Rational(3)}});
    auto direct = fibration_transform(f.v, f.w, {FibrationFactor{rv({1}), Rational(2), 1, Rational(3)}},
                                      poly(1, {{{1}, 1}}));
    CHECK(one.v == direct.first);
    CHECK(one.w == direct.second);
    CHECK(one.base_curvatures == std::vector<Rational>{3});
    CHECK(one.v == f.v * (X() + C(2)));

    auto two = line_bundle_weights(f.v, f.w,
                                   {FibrationFactor{rv({1}), Rational(2), 1, Rational(0)},
                                    FibrationFactor{rv({1}), Rational(3), 2, Rational(1)}});
    CHECK(two.v == f.v * (X() + C(2)) * (X() + C(3)).pow(2));
    CHECK_THROWS_AS(line_bundle_weights(f.v, f.w, {FibrationFactor{rv({1}), Rational(0), 1, Rational(0)}}),
                    FactorNotPositive);
}

TEST_CASE("li profile expansion") {
    auto prof = li_profile(1, 1, Rational(3), Rational(1));
    CHECK(prof.p == 2);
    CHECK(prof.h == X() * X() * Rational(2) + X() - C(1));
    CHECK(prof.h.eval(RatVec{Rational(0)}) == -1);
    CHECK(prof.numerator == X() * X() * Rational(2) + X() * Rational(5) + C(4));
    CHECK(prof.denominator == X() + C(1));
    CHECK(prof.numerator.eval(RatVec{Rational(1)}) / prof.denominator.eval(RatVec{Rational(1)}) == Rational(11, 2));
    CHECK(prof.F(1.0) == 5.5);
    CHECK(prof.slope == 2);
    CHECK(prof.offset == 3);
    CHECK(prof.flags.empty());
    CHECK(std::abs(prof.F(1e4) / 1e4 - 2.0) < 0.02);

    auto flagged = li_profile(2, 2, Rational(5), Rational(1, 2), Rational(2));
    CHECK(flagged.slope == flagged.p / 2);
    CHECK(flagged.flags.size() == 2);
}

TEST_CASE("li leading-term audit") {
    std::mt19937 rng(17);
    std::uniform_int_distribution<int> small(1, 3), num(1, 9);
    for (int trial = 0; trial < 20; ++trial) {
        int d = small(rng), k = small(rng);
        Rational tau(num(rng), small(rng)), kappa(num(rng), small(rng)), mu(num(rng), small(rng));
        auto prof = li_profile(d, k, tau, kappa, mu);
        Polynomial scaled = prof.numerator * prof.denominator.pow(0);
        Rational mpow = 1;
        for (int i = 0; i < d + k + 1; ++i) mpow *= mu;
        scaled *= mpow;
        CHECK(scaled.degree() == d + k);
        Rational kd = 1;
        for (int i = 0; i < d; ++i) kd *= kappa;
        Rational expect = (tau - k * kappa) * kd * mpow / mu;
        Rational lead = 0;
        for (const auto& [m, c] : scaled.coeffs())
            if (m[0] == d + k) lead = c;
        CHECK(lead == expect);
    }
}

TEST_CASE("li G and its tail") {
    auto prof = li_profile(1, 1, Rational(3), Rational(1));
    CHECK(li_G(prof, 1.0, 1.0) == 0.0);
    // integrand = -(F - 2u) / (2u F) with F - 2u = 3 + 1/(1 + u)
    auto g = [](double u) {
        double f = (2 * u * u + 5 * u + 4) / (1 + u);
        return (2 * u - f) / (2 * u * f);
    };
    double simpson = 0, a = 1, b = 5;
    int n = 2000;
    for (int i = 0; i <= n; ++i) {
        double x = a + (b - a) * i / n;
        simpson += g(x) * (i == 0 || i == n ? 1 : i % 2 ? 4 : 2);
    }
    simpson *= (b - a) / (3 * n);
    CHECK(li_G(prof, 1.0, 5.0) == doctest::Approx(simpson).epsilon(1e-10));
    for (double phi : {1e2, 1e3, 1e4}) {
        double step = std::abs(li_G(prof, 1.0, 2 * phi) - li_G(prof, 1.0, phi));
        CHECK(step <= li_envelope(prof, phi));
        CHECK(static_cast<double>(li_tail(prof, phi)) <= li_envelope(prof, phi));
        CHECK(static_cast<double>(-li_tail(prof, phi)) == doctest::Approx(3.0 / (4.0 * phi)).epsilon(2.0 / phi));
    }
    auto c0 = li_C0(prof, 1.0);
    CHECK(c0.c0 == doctest::Approx(li_G(prof, 1.0, 1e6)).epsilon(1e-5));
    CHECK(c0.tail_bound > 0.0);
    CHECK(c0.offset == doctest::Approx(3.0).epsilon(1e-3));

    auto dead = li_profile(1, 1, Rational(1, 2), Rational(1));
    CHECK_THROWS(li_G(dead, 1.0, 2.0));
}

TEST_CASE("li decay fit") {
    auto prof = li_profile(1, 1, Rational(3), Rational(1));
    auto rep = li_decay_check(prof);
    CHECK(rep.slope >= -2.2);
    CHECK(rep.slope <= -1.8);
    CHECK(rep.monotone);
    CHECK(rep.max_residual < 1e-12);
    CHECK(rep.s.size() == 41);
    for (size_t i = 0; i < rep.s.size(); ++i) {
        // phi solves phi = phi0 s0^{-p} s^p e^{-G(phi)}
        double rhs = std::pow(rep.s[i], 2.0) * std::exp(-(rep.c0 - static_cast<double>(li_tail(prof, rep.phi[i]))));
        CHECK(rep.phi[i] == doctest::Approx(rhs).epsilon(1e-9));
    }
    auto low = li_profile(1, 1, Rational(5, 4), Rational(1));
    CHECK_THROWS_AS(li_decay_check(low), InvalidInput);
}

TEST_CASE("existence agrees with the crease scan") {
    auto half = poly(1, {{{1}, 1}});
    Flat f;
    ScanOptions opts;
    opts.rays = false;
    auto ok = existence_verdict(profile_solve(f.v, f.w));
    auto scan = semistability_scan(half, f.v, f.w, opts);
    CHECK(ok.exists);
    CHECK(scan.kind == VerdictKind::NoDestabilizerFound);

    Failing g;
    auto bad = existence_verdict(profile_solve(g.v, g.w));
    auto scan_bad = semistability_scan(half, g.v, g.w, opts);
    CHECK_FALSE(bad.exists);
    CHECK(scan_bad.kind == VerdictKind::Destabilizer);
    REQUIRE(scan_bad.destabilizer);
    // the destabilizing crease sits past the root of the profile
    CHECK(scan_bad.value < 0.0);
    for (const auto& piece : scan_bad.destabilizer->pieces())
        if (piece.b[0] != 0) CHECK(to_double(-piece.c / piece.b[0]) > 1.0);
}

TEST_CASE("profile metric lies in the H class") {
    Flat f;
    auto s = profile_solve(f.v, f.w);
    auto m = profile_metric(s);
    auto rep = h_class_check(m, nullptr, f.v, poly(1, {{{1}, 1}}), 0.1, 0.5);
    CHECK(rep.pass);

    double jet[3];
    s.theta_jet(0.7, jet);
    CHECK(jet[0] == doctest::Approx(3.4));
    CHECK(jet[1] == doctest::Approx(2.0));
    CHECK(std::abs(jet[2]) < 1e-12);

    Failing g;
    auto t = profile_solve(g.v, g.w);
    t.theta_jet(0.5, jet);
    CHECK(jet[0] == doctest::Approx(0.75));
    CHECK(jet[1] == doctest::Approx(-1.0));
    CHECK(jet[2] == doctest::Approx(-2.0));
}
