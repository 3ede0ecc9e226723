#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"
#include "toricwk/errors.hpp"
#include "toricwk/quadrature.hpp"

#include <cmath>

using namespace toricwk;
using namespace testing_support;

namespace {

Polynomial x_(int n, int i) { return Polynomial::variable(n, i); }
Polynomial cst(int n, long long c) { return Polynomial::constant(n, Rational(c)); }

double fact(int k) { return k <= 1 ? 1.0 : k * fact(k - 1); }

// Dirichlet formula for monomials over the standard simplex.
double simplex_moment(const std::vector<int>& a) {
    int s = 0;
    double num = 1.0;
    for (int e : a) {
        s += e;
        num *= fact(e);
    }
    return num / fact(s + static_cast<int>(a.size()));
}

Polyhedron unit_box(int n) {
    std::vector<HalfSpace> hs;
    for (int i = 0; i < n; ++i) {
        IntVec e(n, 0);
        e[i] = 1;
        hs.emplace_back(e, Rational(0));
        e[i] = -1;
        hs.emplace_back(e, Rational(1));
    }
    return Polyhedron(n, hs);
}

// Independent reference: exact tail of p(x) e^{-lam x} on [d, inf) by repeated integration by parts in doubles.
double tail_1d(const std::vector<double>& coeffs, double lam, double d) {
    double s = 0.0;
    std::vector<double> c = coeffs;
    double lp = lam;
    while (!c.empty()) {
        double val = 0.0;
        for (size_t k = c.size(); k-- > 0;) val = val * d + c[k];
        s += val / lp;
        std::vector<double> dc;
        for (size_t k = 1; k < c.size(); ++k) dc.push_back(c[k] * static_cast<double>(k));
        c = dc;
        lp *= lam;
    }
    return s * std::exp(-lam * d);
}

}  // namespace

TEST_CASE("Grundmann-Moeller rules integrate polynomials of their degree exactly") {
    for (int dim = 1; dim <= 4; ++dim) {
        for (int s : {2, 3}) {
            auto rule = grundmann_moeller(dim, s);
            double wsum = 0.0;
            for (double w : rule.weights) wsum += w;
            CHECK(wsum == doctest::Approx(1.0));
            std::vector<int> a(dim, 0);
            std::function<void(int, int)> rec = [&](int i, int left) {
                if (i == dim) {
                    double q = 0.0;
                    for (size_t p = 0; p < rule.weights.size(); ++p) {
                        double v = 1.0;
                        for (int k = 0; k < dim; ++k) v *= std::pow(rule.bary[p * (dim + 1) + k], a[k]);
                        q += rule.weights[p] * v;
                    }
                    CHECK(q / fact(dim) == doctest::Approx(simplex_moment(a)).epsilon(1e-11));
                    return;
                }
                for (int e = 0; e <= left; ++e) {
                    a[i] = e;
                    rec(i + 1, left - e);
                }
                a[i] = 0;
            };
            rec(0, 2 * s + 1);
        }
    }
}

TEST_CASE("triangulations cover the polytope") {
    for (int n = 1; n <= 4; ++n) {
        auto simplices = triangulate(unit_box(n));
        CHECK(simplices.size() == static_cast<size_t>(fact(n)));
    }
    auto tri = truncate(shifted_orthant(2), rv({1, 1}), Rational(6));
    auto r = integrate_polytope(tri, [](const double*) { return 1.0; }, {});
    CHECK(r.value == doctest::Approx(32.0));
    auto pent = poly(2, {{{1, 0}, 1}, {{0, 1}, 1}, {{1, 1}, 1}, {{-1, 0}, 3}, {{0, -1}, 3}});
    auto area = integrate_polytope(pent, [](const double*) { return 1.0; }, {});
    CHECK(area.value == doctest::Approx(16.0 - 0.5));
}

TEST_CASE("exact one-dimensional integrals") {
    Weight e = Weight::exponential(rv({1}));
    Polynomial p = (x_(1, 0) * x_(1, 0) + cst(1, 1)) * (x_(1, 0) - cst(1, 1));
    CHECK(exact_1d(Weight::from_polynomial(p) * e, Rational(-1), std::nullopt).is_zero());
    CHECK(exact_1d(Weight::from_polynomial(x_(1, 0)) * e, Rational(-1), std::nullopt).is_zero());
    auto one = exact_1d(e, Rational(-1), std::nullopt);
    CHECK(one == ExpLinear::term(Rational(1), Rational(1)));
    CHECK(one.to_double() == doctest::Approx(2.718281828459045));
    auto square = exact_1d(Weight::from_polynomial(x_(1, 0) * x_(1, 0)), Rational(0), Rational(3));
    CHECK(square == ExpLinear::rational(Rational(9)));
    CHECK_THROWS_AS(exact_1d(Weight::constant(1, Rational(1)), Rational(0), std::nullopt), DivergentIntegral);
    CHECK_THROWS_AS(exact_1d(Weight::exponential({Rational(-1)}), Rational(0), std::nullopt), DivergentIntegral);
}

TEST_CASE("interior integration examples") {
    auto orth = shifted_orthant(2);
    auto r = integrate_interior(orth, Weight::exponential(rv({1, 1})));
    CHECK(r.converged);
    CHECK(std::abs(r.value - std::exp(2.0)) <= r.total_error() + 1e-12);
    CHECK(std::abs(r.value - std::exp(2.0)) <= 1e-8 * std::exp(2.0));

    auto box = integrate_interior(unit_box(2), Weight::constant(2, Rational(1)));
    CHECK(box.value == doctest::Approx(1.0));
    CHECK(box.tail_bound == 0.0);

    auto zero = integrate_interior(orth, Weight::from_polynomial(x_(2, 0)) * Weight::exponential(rv({1, 1})));
    CHECK(std::abs(zero.value) <= zero.total_error() + 1e-12);

    CHECK_THROWS_AS(integrate_interior(orth, Weight::exponential(rv({1, 0}))), DivergentIntegral);
}

TEST_CASE("boundary and crease integration") {
    auto half_line = poly(1, {{{1}, 1}});
    auto b1 = integrate_boundary(half_line, Weight::exponential(rv({1})));
    CHECK(b1.value == doctest::Approx(std::exp(1.0)));

    auto orth = shifted_orthant(2);
    Polynomial q1 = x_(2, 0) * x_(2, 0) * x_(2, 1) * x_(2, 1) + cst(2, 1);
    auto b2 = integrate_boundary(orth, Weight::from_polynomial(q1) * Weight::exponential(rv({1, 1})));
    CHECK(std::abs(b2.value - 4 * std::exp(2.0)) <= 1e-7 * 4 * std::exp(2.0));

    auto unit = poly(1, {{{1}, 0}, {{-1}, 1}});
    CHECK(integrate_boundary(unit, Weight::constant(1, Rational(1))).value == doctest::Approx(2.0));

    auto crease_1d = hyperplane_section(rv({-1}), Rational(3), half_line.halfspaces(), -1);
    REQUIRE(crease_1d);
    CHECK(integrate_section(*crease_1d, Weight::constant(1, Rational(1))).value == doctest::Approx(1.0));

    for (long long R : {2, 5}) {
        auto crease = hyperplane_section(rv({1, 1}), Rational(-R), orth.halfspaces(), -1);
        REQUIRE(crease);
        CHECK(integrate_section(*crease, Weight::constant(2, Rational(1))).value == doctest::Approx(R + 2.0));
        auto scaled = hyperplane_section(rv({2, 2}), Rational(-2 * R), orth.halfspaces(), -1);
        CHECK(integrate_section(*scaled, Weight::constant(2, Rational(1))).value == doctest::Approx((R + 2.0) / 2));
    }
}

TEST_CASE("tail bounds") {
    auto half_line = poly(1, {{{1}, 1}});
    Weight e = Weight::exponential(rv({1}));
    CHECK(tail_bound(half_line, Weight(1), rv({1}), 10.0) == 0.0);
    double t10 = tail_bound(half_line, e, rv({1}), 10.0);
    CHECK(t10 >= std::exp(-10.0));
    CHECK(t10 <= 10 * std::exp(-10.0));
    CHECK(tail_bound(half_line, e, rv({1}), 20.0) < t10);
    CHECK_THROWS_AS(tail_bound(half_line, Weight::constant(1, Rational(1)), rv({1}), 10.0), DivergentIntegral);
}

TEST_CASE("tail bounds dominate exact separable tails") {
    auto half_line = poly(1, {{{1}, 1}});
    std::mt19937 rng(21);
    std::uniform_int_distribution<int> coef(-4, 4), lamd(1, 4);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> c(3);
        Polynomial p(1);
        for (int k = 0; k < 3; ++k) {
            c[k] = coef(rng);
            p.add_term({k}, Rational(static_cast<long>(c[k])));
        }
        if (p.is_zero()) continue;
        int lnum = lamd(rng);
        Rational lam(lnum, 2);
        Weight g = Weight::from_polynomial(p) * Weight::exponential({lam});
        Weight absg = Weight::from_polynomial(p * p) * Weight::exponential({lam});
        for (double d : {10.0, 20.0, 40.0}) {
            std::vector<double> cabs = {std::abs(c[0]), std::abs(c[1]), std::abs(c[2])};
            double exact_abs_env = tail_1d(cabs, lnum / 2.0, d);
            CHECK(tail_bound(half_line, g, rv({1}), d) >= exact_abs_env * (1 - 1e-12));
        }
        (void)absg;
    }

    auto orth = shifted_orthant(2);
    Weight g = Weight::from_polynomial(x_(2, 0) * x_(2, 0) + cst(2, 1)) * Weight::exponential(rv({1, 1}));
    for (double d : {10.0, 20.0}) {
        // Exact tail over {x1 + x2 > d}: integrate (x1^2 + 1) e^{-s} over the slice, s = x1 + x2.
        // Slice length in x1 from -1 to s + 1: int (x^2 + 1) dx = ((s+1)^3 + 1)/3 + (s + 2).
        auto exact = [&](double lo) {
            double h = 1e-3, s = 0.0;
            for (double t = lo; t < lo + 80; t += h) {
                double m = t + 0.5 * h;
                s += (((m + 1) * (m + 1) * (m + 1) + 1) / 3 + (m + 2)) * std::exp(-m) * h;
            }
            return s;
        };
        CHECK(tail_bound(orth, g, rv({1, 1}), d) >= exact(d));
    }
}

TEST_CASE("numeric integrals agree with exact ones") {
    auto half_line = poly(1, {{{1}, 1}});
    std::mt19937 rng(17);
    std::uniform_int_distribution<int> coef(-5, 5), deg(0, 3), lamd(1, 6);
    for (int trial = 0; trial < 20; ++trial) {
        Polynomial p(1);
        int d = deg(rng);
        for (int k = 0; k <= d; ++k) p.add_term({k}, Rational(coef(rng)));
        if (p.is_zero()) p = cst(1, 1);
        Weight g = Weight::from_polynomial(p) * Weight::exponential({Rational(lamd(rng), 3)});
        double exact = exact_1d(g, Rational(-1), std::nullopt).to_double();
        auto r = integrate_interior(half_line, g);
        CHECK(std::abs(r.value - exact) <= r.total_error() + 1e-14);
    }
}

TEST_CASE("results do not depend on the worker count") {
    auto orth = shifted_orthant(2);
    Weight g = Weight::from_polynomial(x_(2, 0) * x_(2, 1) + cst(2, 3)) * Weight::exponential(rv({1, 2}));
    QuadOptions one, four;
    one.threads = 1;
    four.threads = 4;
    auto a = integrate_interior(orth, g, one);
    auto b = integrate_interior(orth, g, four);
    CHECK(a.value == b.value);
    CHECK(a.abs_error_bound == b.abs_error_bound);
    CHECK(a.cells_used == b.cells_used);
}

TEST_CASE("integrals are additive over a split") {
    auto orth = shifted_orthant(2);
    Weight g = Weight::from_polynomial(x_(2, 0) + cst(2, 2)) * Weight::exponential(rv({1, 1}));
    auto whole = integrate_interior(orth, g);
    auto lower = integrate_interior(poly(2, {{{1, 0}, 1}, {{0, 1}, 1}, {{-1, -1}, 3}}), g);
    auto upper = integrate_interior(poly(2, {{{1, 0}, 1}, {{0, 1}, 1}, {{1, 1}, -3}}), g);
    CHECK(std::abs(whole.value - lower.value - upper.value) <=
          whole.total_error() + lower.total_error() + upper.total_error() + 1e-13);
}

TEST_CASE("rational integrands and extra factors") {
    auto half_line = poly(1, {{{1}, 1}});
    Weight g = Weight::power(x_(1, 0) + cst(1, 2), -1) * Weight::exponential(rv({1}));
    auto r = integrate_interior(half_line, g);
    // e^2 E1(1) with E1(1) = 0.21938393439552...
    CHECK(r.value == doctest::Approx(std::exp(2.0) * 0.21938393439552029).epsilon(1e-9));
    CHECK(r.tail_certified);

    ExtraFactor sq{[](const double* x) { return x[0] * x[0]; }, 1.0, 2.0};
    auto m = integrate_interior(half_line, Weight::exponential(rv({1})), {}, &sq);
    // antiderivative -(x^2+2x+2)e^{-x} gives e at x = -1
    CHECK(m.value == doctest::Approx(std::exp(1.0)).epsilon(1e-9));

    QuadOptions strict;
    strict.strict = true;
    strict.max_cells = 2;
    strict.rel_tol = 1e-14;
    CHECK_THROWS_AS(integrate_interior(half_line, g, strict), ToleranceNotMet);
}

TEST_CASE("error bounds hold on coarse cells with an absolute target") {
    // Slab 60 <= x + y <= 120 of the shifted quadrant, where e^{-(x+y)/3} varies by e^{20}.
    auto slab = poly(2, {{{1, 0}, 1}, {{0, 1}, 1}, {{1, 1}, -60}, {{-1, -1}, 120}});
    Polynomial p = (x_(2, 0) * cst(2, 2) + x_(2, 0) * x_(2, 0)) * (cst(2, 2) + x_(2, 1) * x_(2, 1) * Rational(-1));
    Weight g = Weight::from_polynomial(p) * Weight::exponential({Rational(1, 3), Rational(1, 3)});
    Integrand f = [&](const double* x) { return g.eval(x); };
    QuadOptions fine;
    fine.rel_tol = 1e-13;
    double ref = integrate_polytope(slab, f, fine).value;
    for (double target : {1e-4, 4.6e-6, 1e-7}) {
        auto r = integrate_polytope(slab, f, QuadOptions{}, target);
        CHECK(std::abs(r.value - ref) <= r.abs_error_bound);
    }
}
