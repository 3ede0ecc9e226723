#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"
#include "toricwk/errors.hpp"
#include "toricwk/pl.hpp"
#include "toricwk/quadrature.hpp"

#include <cmath>

using namespace toricwk;
using namespace testing_support;

namespace {

Polyhedron intersect(const Polyhedron& a, const Polyhedron& b) {
    auto hs = a.halfspaces();
    hs.insert(hs.end(), b.halfspaces().begin(), b.halfspaces().end());
    return Polyhedron(a.dim(), hs);
}

double volume(const Polyhedron& p) {
    if (!has_interior(p)) return 0.0;
    return integrate_polytope(p, [](const double*) { return 1.0; }, {}).value;
}

PiecewiseLinear random_pl(std::mt19937& rng, int n) {
    std::uniform_int_distribution<int> coef(-3, 3);
    std::vector<AffineForm> ps;
    for (int k = 0; k < 4; ++k) {
        RatVec b(n);
        for (auto& v : b) v = coef(rng);
        ps.push_back(AffineForm{b, Rational(coef(rng))});
    }
    return PiecewiseLinear(n, ps);
}

}  // namespace

TEST_CASE("regions and creases") {
    auto half_line = poly(1, {{{1}, 1}});
    auto d = regions_and_creases(PiecewiseLinear::f_x0(Rational(2)), half_line);
    REQUIRE(d.regions.size() == 2);
    CHECK(vertices(d.regions[0].domain) == std::vector<RatVec>{rv({-1}), rv({2})});
    CHECK(vertices(d.regions[1].domain) == std::vector<RatVec>{rv({2})});
    REQUIRE(d.creases.size() == 1);
    CHECK(d.creases[0].section.origin == rv({2}));
    CHECK(d.creases[0].section.measure_scale == 1);

    auto aff = regions_and_creases(PiecewiseLinear::affine(rv({1}), Rational(0)), half_line);
    CHECK(aff.regions.size() == 1);
    CHECK(aff.creases.empty());

    auto orth = shifted_orthant(2);
    auto fr = regions_and_creases(PiecewiseLinear::f_r(rv({1, 1}), Rational(3)), orth);
    REQUIRE(fr.creases.size() == 1);
    CHECK(vertices(fr.creases[0].section.domain).size() == 2);
    CHECK(fr.creases[0].section.measure_scale == 1);
    double len = integrate_section(fr.creases[0].section, Weight::constant(2, Rational(1))).value;
    CHECK(len == doctest::Approx(5.0));
}

TEST_CASE("pieces without a region are dropped with a log entry") {
    auto half_line = poly(1, {{{1}, 1}});
    PiecewiseLinear f(1, {AffineForm{rv({0}), Rational(0)}, AffineForm{rv({1}), Rational(-5)}, AffineForm{rv({0}), Rational(-1)}});
    auto d = regions_and_creases(f, half_line);
    CHECK(d.reduced.size() == 2);
    CHECK(d.log.size() == 1);
}

TEST_CASE("regions partition the polyhedron") {
    std::mt19937 rng(8);
    auto orth = shifted_orthant(2);
    for (int trial = 0; trial < 10; ++trial) {
        auto f = random_pl(rng, 2);
        auto d = regions_and_creases(f, orth);
        auto box = poly(2, {{{-1, 0}, 4}, {{0, -1}, 3}});
        double total = 0.0;
        for (const auto& r : d.regions) total += volume(intersect(r.domain, box));
        CHECK(total == doctest::Approx(volume(intersect(orth, box))));
    }
}

TEST_CASE("crease measures scale inversely with f") {
    auto orth = shifted_orthant(2);
    for (long long k : {2, 3, 7}) {
        auto f = PiecewiseLinear(2, {AffineForm{rv({1, 2}), Rational(-3)}, AffineForm{rv({0, 0}), Rational(0)},
                                      AffineForm{rv({-1, 0}), Rational(-2)}});
        auto d1 = regions_and_creases(f, orth);
        auto dk = regions_and_creases(f.scaled(Rational(k)), orth);
        REQUIRE(d1.creases.size() == dk.creases.size());
        for (size_t i = 0; i < d1.creases.size(); ++i)
            CHECK(dk.creases[i].section.measure_scale == d1.creases[i].section.measure_scale / k);
    }
}

TEST_CASE("admissibility") {
    auto half_line = poly(1, {{{1}, 1}});
    CHECK(is_admissible(PiecewiseLinear::simple_crease(rv({-1}), Rational(1)), half_line));
    CHECK_FALSE(is_admissible(PiecewiseLinear::simple_crease(rv({1}), Rational(0)), half_line));
    CHECK_FALSE(is_admissible(PiecewiseLinear::f_r(rv({1, 1}), Rational(4)), shifted_orthant(2)));
}

TEST_CASE("admissibility matches boundedness on growing truncations") {
    std::mt19937 rng(12);
    auto orth = shifted_orthant(2);
    for (int trial = 0; trial < 15; ++trial) {
        auto f = random_pl(rng, 2);
        auto s10 = sup_on(f, truncate(orth, rv({1, 1}), Rational(10)));
        auto s40 = sup_on(f, truncate(orth, rv({1, 1}), Rational(40)));
        bool stabilizes = *s10 == *s40;
        CHECK(stabilizes == is_admissible(f, orth));
    }
}

TEST_CASE("D-admissibility") {
    auto half_line = poly(1, {{{1}, 1}});
    for (long long x0 : {-1, 0, 1, 3}) {
        auto r = is_D_admissible(PiecewiseLinear::f_x0(Rational(x0)), half_line, 1.0);
        CHECK(r.admissible);
    }
    CHECK_FALSE(is_D_admissible(PiecewiseLinear::simple_crease(rv({-10}), Rational(1)), half_line, 1.0).admissible);
    auto aff = is_D_admissible(PiecewiseLinear::affine(rv({-1}), Rational(0)), half_line, 2.0);
    CHECK(aff.admissible);
    CHECK(aff.piece == 0);
    CHECK(*aff.sup == -1);
}

TEST_CASE("normalizations") {
    auto f = PiecewiseLinear::f_x0(Rational(2));
    CHECK(normalize_plus(f, 1) == f);
    auto np = normalize_plus(f, 0);
    CHECK(np == PiecewiseLinear(1, {AffineForm{rv({0}), Rational(0)}, AffineForm{rv({1}), Rational(-2)}}));
    auto aff = PiecewiseLinear::affine(rv({2}), Rational(1));
    CHECK(normalize_plus(aff, 0) == PiecewiseLinear::affine(rv({0}), Rational(0)));

    CHECK(normalize_star(PiecewiseLinear::affine(rv({1}), Rational(0))) == PiecewiseLinear::affine(rv({0}), Rational(0)));
    auto kink = PiecewiseLinear::simple_crease(rv({-1}), Rational(0));
    CHECK(normalize_star(kink) == kink);

    ConvexFunction sq{[](const double* x) { return x[0] * x[0]; }, [](const double* x, double* g) { g[0] = 2 * x[0]; }, 1};
    auto ns = normalize_star(sq);
    for (double x : {-1.0, 0.0, 2.5}) CHECK(ns.value(&x) == doctest::Approx(x * x));
}

TEST_CASE("star normalization is nonnegative and vanishes at the origin") {
    std::mt19937 rng(19);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int trial = 0; trial < 20; ++trial) {
        auto f = normalize_star(random_pl(rng, 2));
        double zero[2] = {0, 0};
        CHECK(f.eval(zero) == 0.0);
        for (int k = 0; k < 50; ++k) {
            double x[2] = {u(rng), u(rng)};
            CHECK(f.eval(x) >= -1e-12);
        }
    }
}

TEST_CASE("test configuration polytopes") {
    auto unit = poly(1, {{{1}, 0}, {{-1}, 1}});
    auto sq = test_config_polytope(PiecewiseLinear::affine(rv({0}), Rational(0)), unit, Rational(1));
    CHECK(vertices(sq).size() == 4);
    CHECK(recession_cone(sq).is_zero());

    auto half_line = poly(1, {{{1}, 1}});
    auto f = PiecewiseLinear::simple_crease(rv({-1}), Rational(1));
    auto q = test_config_polytope(f, half_line, Rational(2));
    auto vs = vertices(q);
    CHECK(std::find(vs.begin(), vs.end(), rv({-1, 0})) != vs.end());
    CHECK(std::find(vs.begin(), vs.end(), rv({1, 2})) != vs.end());
    CHECK(recession_cone(q).generators == std::vector<IntVec>{{1, 0}});

    auto orth = shifted_orthant(2);
    auto g = PiecewiseLinear(2, {AffineForm{rv({-1, 0}), Rational(0)}, AffineForm{rv({0, -1}), Rational(0)}});
    auto q3 = test_config_polytope(g, orth, Rational(2));
    CHECK(q3.dim() == 3);
    auto c = recession_cone(q3);
    CHECK(c.generators == std::vector<IntVec>{{0, 1, 0}, {1, 0, 0}, {1, 1, 1}});

    CHECK_THROWS_AS(test_config_polytope(PiecewiseLinear::simple_crease(rv({1}), Rational(0)), half_line, Rational(5)),
                    NotAdmissible);
    CHECK_THROWS_AS(test_config_polytope(f, half_line, Rational(1)), RTooSmall);
}
