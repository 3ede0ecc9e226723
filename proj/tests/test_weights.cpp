#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"
#include "toricwk/errors.hpp"
#include "toricwk/weights.hpp"

#include <cmath>

using namespace toricwk;
using namespace testing_support;

namespace {

Polynomial x_(int n, int i) { return Polynomial::variable(n, i); }
Polynomial cst(int n, long long c) { return Polynomial::constant(n, Rational(c)); }

double central_diff(const Weight& w, std::vector<double> x, int i, double h = 1e-5) {
    auto xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    return (w.eval(xp.data()) - w.eval(xm.data())) / (2 * h);
}

Weight random_weight(std::mt19937& rng, int n) {
    std::uniform_int_distribution<int> coef(-3, 3), expo(0, 2), pos(1, 3);
    std::vector<WeightTerm> terms;
    for (int t = 0; t < 2; ++t) {
        WeightTerm wt;
        wt.poly = Polynomial(n);
        for (int k = 0; k < 3; ++k) {
            Polynomial::Monomial m(n);
            for (auto& e : m) e = expo(rng);
            wt.poly.add_term(m, Rational(coef(rng)));
        }
        if (wt.poly.is_zero()) wt.poly = cst(n, 1);
        wt.decay.resize(n);
        for (auto& d : wt.decay) d = Rational(pos(rng), 2);
        if (t == 1) {
            RatVec b(n, Rational(1));
            wt.factors.push_back(Factor{Polynomial::affine(b, Rational(n + 2)), -pos(rng)});
        }
        terms.push_back(wt);
    }
    return Weight(n, terms);
}

}  // namespace

TEST_CASE("evaluation examples") {
    Weight e = Weight::exponential(rv({1}));
    double zero = 0.0;
    CHECK(e.eval(&zero) == doctest::Approx(1.0));
    CHECK(e.grad(std::span<const double>(&zero, 1))[0] == doctest::Approx(-1.0));

    Polynomial q1 = x_(2, 0) * x_(2, 0) * x_(2, 1) * x_(2, 1) + cst(2, 1);
    Weight v = Weight::from_polynomial(q1) * Weight::exponential(rv({1, 1}));
    double origin[2] = {0, 0};
    CHECK(v.eval(origin) == doctest::Approx(1.0));

    Weight r = Weight::power(x_(1, 0) + cst(1, 2), -1) * Weight::exponential(rv({1}));
    CHECK(r.eval(&zero) == doctest::Approx(0.5));
    CHECK(r.differentiate(0).eval(&zero) == doctest::Approx(-0.75));
    double pole = -2.0;
    CHECK_THROWS_AS(r.eval(&pole), PoleOnDomain);
}

TEST_CASE("differentiation examples") {
    Weight e = Weight::exponential(rv({1}));
    CHECK(e.differentiate(0) == e * Rational(-1));

    Weight xe = Weight::from_polynomial(x_(1, 0)) * e;
    Weight expected = Weight::from_polynomial(cst(1, 1) - x_(1, 0)) * e;
    CHECK(xe.differentiate(0) == expected);

    Weight inv = Weight::power(x_(1, 0) + cst(1, 2), -1);
    CHECK(inv.differentiate(0) == Weight::power(x_(1, 0) + cst(1, 2), -2) * Rational(-1));
}

TEST_CASE("canonical form merges like terms and normalizes factor bases") {
    Weight a = Weight::power(x_(1, 0) * Rational(2) + cst(1, 4), -1);
    Weight b = Weight::power(x_(1, 0) + cst(1, 2), -1) * Rational(1, 2);
    CHECK(a == b);
    Weight sum = Weight::exponential(rv({1})) + Weight::exponential(rv({1}));
    REQUIRE(sum.terms().size() == 1);
    CHECK(sum.terms()[0].poly == cst(1, 2));
    CHECK((sum - sum).is_zero());
    Weight pos = Weight::power(x_(1, 0) + cst(1, 1), 2);
    CHECK_FALSE(pos.has_negative_factors());
    CHECK(pos == Weight::from_polynomial(x_(1, 0) * x_(1, 0) + x_(1, 0) * Rational(2) + cst(1, 1)));
}

TEST_CASE("derivatives agree with finite differences") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-0.5, 2.0);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 1 + trial % 3;
        Weight w = random_weight(rng, n);
        std::vector<double> x(n);
        for (auto& c : x) c = u(rng);
        for (int i = 0; i < n; ++i) {
            double exact = w.differentiate(i).eval(x.data());
            double fd = central_diff(w, x, i);
            CHECK(std::abs(exact - fd) <= 1e-6 * std::max(1.0, std::abs(exact)));
        }
        WeightJet jet(w);
        double val;
        std::vector<double> g(n), h(n * n);
        jet.eval(x.data(), val, g.data(), h.data());
        CHECK(val == doctest::Approx(w.eval(x.data())));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double fd = central_diff(w.differentiate(i), x, j);
                CHECK(std::abs(h[i * n + j] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
            }
    }
}

TEST_CASE("exact evaluation matches floating point") {
    std::mt19937 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        Weight w = random_weight(rng, 2);
        RatVec x = {Rational(1, 3), Rational(-1, 4)};
        auto xd = to_double(x);
        CHECK(w.eval_exact(x).to_double() == doctest::Approx(w.eval(xd.data())).epsilon(1e-12));
    }
    ExpLinear e = Weight::exponential(rv({1})).eval_exact(rv({-1}));
    CHECK(e == ExpLinear::term(Rational(1), Rational(1)));
}

TEST_CASE("substitution composes with an affine map") {
    Weight w = Weight::from_polynomial(x_(2, 0) * x_(2, 1) + cst(2, 1)) * Weight::exponential(rv({1, 2}));
    RatVec x0 = {Rational(1), Rational(-1)};
    std::vector<RatVec> cols = {{Rational(2), Rational(1)}};
    Weight s = w.substitute(x0, cols);
    CHECK(s.dim() == 1);
    for (double t : {-0.5, 0.0, 0.7}) {
        double x[2] = {1 + 2 * t, -1 + t};
        CHECK(s.eval(&t) == doctest::Approx(w.eval(x)));
    }
}

TEST_CASE("soliton weights") {
    Weight v = Weight::exponential(rv({1}));
    CHECK(soliton_weight(v, 1) == Weight::from_polynomial((cst(1, 1) - x_(1, 0)) * Rational(2)) * v);
    Weight v2 = Weight::exponential(rv({1, 1}));
    Polynomial lin = cst(2, 2) - x_(2, 0) - x_(2, 1);
    CHECK(soliton_weight(v2, 2) == Weight::from_polynomial(lin * Rational(2)) * v2);
    CHECK(soliton_weight(Weight::constant(1, Rational(1)), 1) == Weight::constant(1, Rational(2)));
}

TEST_CASE("soliton weight is linear in v") {
    std::mt19937 rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        Weight v = random_weight(rng, 2);
        Rational alpha(static_cast<long>(trial + 1), 3);
        CHECK(soliton_weight(v * alpha, 2) == soliton_weight(v, 2) * alpha);
    }
}

TEST_CASE("fibration transforms") {
    auto half_line = poly(1, {{{1}, 1}});
    Rational c(7, 2);
    auto [vt, wt] = fibration_transform(Weight::constant(1, Rational(1)), Weight::constant(1, c),
                                        {{rv({1}), Rational(2), 1, Rational(2)}}, half_line);
    CHECK(vt == Weight::from_polynomial(x_(1, 0) + cst(1, 2)));
    CHECK(wt == Weight::from_polynomial((x_(1, 0) + cst(1, 2)) * c - cst(1, 2)));

    Weight v = Weight::exponential(rv({1}));
    Weight w = soliton_weight(v, 1);
    Rational s1(5);
    auto [v2, w2] = fibration_transform(v, w, {{rv({1}), Rational(2), 1, s1}}, half_line);
    CHECK(v2 == Weight::from_polynomial(x_(1, 0) + cst(1, 2)) * v);
    CHECK(w2 == Weight::from_polynomial(x_(1, 0) + cst(1, 2)) * w - v * s1);

    CHECK_THROWS_AS(fibration_transform(v, w, {{rv({1}), Rational(1), 1, s1}}, half_line), FactorNotPositive);
    try {
        fibration_transform(v, w, {{rv({-1}), Rational(3), 1, s1}}, half_line);
        FAIL("expected FactorNotPositive");
    } catch (const FactorNotPositive& e) {
        REQUIRE(e.witness().size() == 1);
        CHECK(-e.witness()[0] + 3 <= 0);
    }
}

TEST_CASE("fibration with zero s multiplies w") {
    auto orth = shifted_orthant(2);
    std::mt19937 rng(4);
    for (int trial = 0; trial < 5; ++trial) {
        Weight v = random_weight(rng, 2), w = random_weight(rng, 2);
        std::vector<FibrationFactor> data = {{rv({1, 0}), Rational(2), 2, Rational(0)}, {rv({1, 1}), Rational(3), 1, Rational(0)}};
        auto [vt, wt] = fibration_transform(v, w, data, orth);
        Weight p = Weight::from_polynomial(Polynomial::affine(rv({1, 0}), Rational(2)).pow(2) *
                                           Polynomial::affine(rv({1, 1}), Rational(3)));
        CHECK(vt == p * v);
        CHECK(wt == p * w);
    }
}

TEST_CASE("KRS fibration weights") {
    auto orth = shifted_orthant(2);
    CHECK(krs_fibration_weight({}, rv({1, 1}), orth) == Weight::exponential(rv({1, 1})));
    auto half_line = poly(1, {{{1}, 1}});
    CHECK(krs_fibration_weight({{rv({1}), Rational(2), 1}}, rv({1}), half_line) ==
          Weight::from_polynomial(x_(1, 0) + cst(1, 2)) * Weight::exponential(rv({1})));
    Weight two = krs_fibration_weight({{rv({1, 0}), Rational(2), 1}, {rv({0, 1}), Rational(3), 2}}, rv({1, 1}), orth);
    double x[2] = {0.5, 1.5};
    CHECK(two.eval(x) == doctest::Approx(2.5 * 4.5 * 4.5 * std::exp(-2.0)));
}

TEST_CASE("class W checks") {
    auto half_line = poly(1, {{{1}, 1}});
    Weight v = Weight::exponential(rv({1}));
    auto good = check_class_W(v, soliton_weight(v, 1), half_line, 0.9);
    CHECK(good.pass);
    CHECK(good.decay_rate == doctest::Approx(1.0).epsilon(0.01));

    Weight slow = Weight::exponential({Rational(1, 2)});
    auto bad = check_class_W(v, slow, half_line, 0.9);
    CHECK_FALSE(bad.pass);
    CHECK_FALSE(bad.w_bounded);

    auto flat = check_class_W(Weight::constant(1, Rational(1)), Weight::constant(1, Rational(1)), half_line, 0.5);
    CHECK_FALSE(flat.decay_ok);
    CHECK_FALSE(flat.pass);
}

TEST_CASE("decay fit recovers the rate of pure exponentials") {
    auto orth = shifted_orthant(2);
    ClassOptions opts;
    opts.grid_points = 30;
    for (auto b : {rv({1, 1}), rv({2, 1}), rv({1, 3})}) {
        Weight v = Weight::exponential(b);
        auto rep = check_class_W(v, v, orth, 0.5, opts);
        double expected = std::min(to_double(b[0]), to_double(b[1]));
        CHECK(std::abs(rep.decay_rate - expected) <= 0.1 * expected);
    }
}

TEST_CASE("sampled positivity") {
    auto half_line = poly(1, {{{1}, 1}});
    CHECK(check_positive(Weight::exponential(rv({1})), half_line).positive);
    auto neg = check_positive(Weight::from_polynomial(x_(1, 0)), half_line);
    CHECK_FALSE(neg.positive);
    REQUIRE(neg.witness.size() == 1);
    CHECK(neg.witness[0] <= 0);
}
