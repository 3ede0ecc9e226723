#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"
#include "toricwk/errors.hpp"
#include "toricwk/potentials.hpp"

#include <cmath>
#include <random>

using namespace toricwk;
using namespace testing_support;

namespace {

Weight exp_sum(int n) { return Weight::exponential(RatVec(n, Rational(1))); }

std::vector<double> random_point(std::mt19937& rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> x(n);
    for (auto& xi : x) xi = u(rng);
    return x;
}

// Independent evaluation of -sum_ij d_i d_j (v H_ij) with H from a numerically inverted Hessian.
double abreu_fd(const SymplecticPotential& u, const Weight& v, std::vector<double> x, double h) {
    int n = u.dim();
    auto vh = [&](const std::vector<double>& y, int i, int j) {
        Eigen::MatrixXd g = u.hessian(y.data());
        return v.eval(y.data()) * g.inverse()(i, j);
    };
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) {
                auto p = x, m = x;
                p[i] += h;
                m[i] -= h;
                s += (vh(p, i, i) - 2.0 * vh(x, i, i) + vh(m, i, i)) / (h * h);
            } else {
                double acc = 0.0;
                for (int si : {1, -1})
                    for (int sj : {1, -1}) {
                        auto y = x;
                        y[i] += si * h;
                        y[j] += sj * h;
                        acc += si * sj * vh(y, i, j);
                    }
                s += acc / (4.0 * h * h);
            }
        }
    return -s;
}

Expr random_expr(std::mt19937& rng, int n, int depth) {
    std::uniform_int_distribution<int> kind(0, depth <= 0 ? 1 : 6);
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    switch (kind(rng)) {
        case 0: return Expr::constant(c(rng));
        case 1: return Expr::var(static_cast<int>(rng() % n));
        case 2: return random_expr(rng, n, depth - 1) + random_expr(rng, n, depth - 1);
        case 3: return random_expr(rng, n, depth - 1) * random_expr(rng, n, depth - 1);
        case 4: return Expr::pow(random_expr(rng, n, depth - 1), static_cast<int>(rng() % 3) + 2);
        case 5: return Expr::exp(Expr::constant(0.3) * random_expr(rng, n, depth - 1));
        default:
            return Expr::log(Expr::constant(3.0) + Expr::pow(random_expr(rng, n, depth - 1), 2));
    }
}

}  // namespace

TEST_CASE("expression derivatives agree with finite differences") {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 60; ++trial) {
        auto e = random_expr(rng, 2, 4);
        auto x = random_point(rng, 2, -1.0, 1.0);
        for (int i = 0; i < 2; ++i) {
            double h = 1e-5;
            auto p = x, m = x;
            p[i] += h;
            m[i] -= h;
            double fd = (e.eval(p.data()) - e.eval(m.data())) / (2 * h);
            CHECK(e.diff(i).eval(x.data()) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("expression simplification") {
    auto x = Expr::var(0);
    CHECK((x * Expr::constant(0.0)).is_zero());
    CHECK(Expr::pow(x, 1) == x);
    CHECK(Expr::log(Expr::exp(x)) == x);
    CHECK((Expr::constant(2.0) + Expr::constant(3.0)).value() == 5.0);
    CHECK(Expr::pow(Expr::pow(x, 2), 3).exponent() == 6);
    CHECK(Expr::var(2).arity() == 3);
}

TEST_CASE("guillemin and hessian data") {
    auto u1 = guillemin_potential(poly(1, {{{1}, 1}}));
    REQUIRE(u1.log_terms().size() == 1);
    double x0 = 0.0;
    auto d = hessian_data(u1, &x0);
    CHECK(d.G(0, 0) == doctest::Approx(0.5));
    CHECK(d.H(0, 0) == doctest::Approx(2.0));
    CHECK(d.dH[0](0, 0) == doctest::Approx(2.0));
    CHECK(d.d2H[0](0, 0) == doctest::Approx(0.0));
    CHECK(u1.value(&x0) == 0.0);

    auto u2 = guillemin_potential(shifted_orthant(2));
    double z[2] = {0, 0};
    auto d2 = hessian_data(u2, z);
    CHECK(d2.H.isApprox(2.0 * Eigen::MatrixXd::Identity(2, 2), 1e-14));
    CHECK((d2.G * d2.H - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-10);

    SymplecticPotential half_sq(2, {}, Expr::constant(0.5) * (Expr::pow(Expr::var(0), 2) + Expr::pow(Expr::var(1), 2)));
    double p[2] = {0.3, -2};
    CHECK(hessian_data(half_sq, p).H.isApprox(Eigen::MatrixXd::Identity(2, 2)));

    SymplecticPotential concave(1, {}, Expr::constant(-0.5) * Expr::pow(Expr::var(0), 2));
    CHECK_THROWS_AS(hessian_data(concave, &x0), NotConvexHere);
}

TEST_CASE("potential derivatives agree with finite differences") {
    auto x = Expr::var(0), y = Expr::var(1);
    Expr smooth = Expr::constant(0.1) * (Expr::pow(x, 2) + x * y) + Expr::constant(0.05) * Expr::exp(Expr::constant(0.3) * y);
    SymplecticPotential u(2, {{AffineForm{rv({1, 0}), Rational(1)}, Rational(1, 2)}, {AffineForm{rv({0, 1}), Rational(1)}, Rational(1, 2)},
                              {AffineForm{rv({1, 1}), Rational(3)}, Rational(1, 3)}},
                          smooth);
    std::mt19937 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        auto p = random_point(rng, 2, -0.5, 2.0);
        double h = 1e-4;
        auto t = u.third(p.data());
        auto f = u.fourth(p.data());
        for (int k = 0; k < 2; ++k) {
            auto a = p, b = p;
            a[k] += h;
            b[k] -= h;
            Eigen::MatrixXd fd = (u.hessian(a.data()) - u.hessian(b.data())) / (2 * h);
            CHECK((fd - t[k]).norm() < 1e-6);
            for (int l = 0; l < 2; ++l) {
                auto ta = u.third(a.data()), tb = u.third(b.data());
                Eigen::MatrixXd fd4 = (ta[l] - tb[l]) / (2 * h);
                CHECK((fd4 - f[k * 2 + l]).norm() < 1e-5);
            }
        }
        double g[2];
        u.gradient(p.data(), g);
        for (int k = 0; k < 2; ++k) {
            auto a = p, b = p;
            a[k] += h;
            b[k] -= h;
            CHECK(g[k] == doctest::Approx((u.value(a.data()) - u.value(b.data())) / (2 * h)).epsilon(1e-7));
        }
    }
}

TEST_CASE("abreu operator on the flat soliton") {
    std::mt19937 rng(17);
    for (int n = 1; n <= 3; ++n) {
        auto u = guillemin_potential(shifted_orthant(n));
        auto v = exp_sum(n);
        for (int trial = 0; trial < 30; ++trial) {
            auto x = random_point(rng, n, -0.9, 4.0);
            double s = 0.0;
            for (double xi : x) s += xi;
            double expect = 2.0 * (n - s) * std::exp(-s);
            CHECK(abreu_scal_v(u, v, x.data()) == doctest::Approx(expect).epsilon(1e-9).scale(1e-12));
        }
    }
    double z2[2] = {0, 0};
    CHECK(abreu_scal_v(guillemin_potential(shifted_orthant(2)), exp_sum(2), z2) == doctest::Approx(4.0));
    double one = 1.0;
    CHECK(std::abs(abreu_scal_v(guillemin_potential(shifted_orthant(1)), exp_sum(1), &one)) < 1e-15);
}

TEST_CASE("orthant potentials are scalar flat") {
    std::mt19937 rng(23);
    for (int n = 1; n <= 3; ++n) {
        std::vector<HalfSpace> hs;
        for (int i = 0; i < n; ++i) {
            IntVec e(n, 0);
            e[i] = 1;
            hs.emplace_back(e, Rational(0));
        }
        auto u = guillemin_potential(Polyhedron(n, hs));
        for (int trial = 0; trial < 20; ++trial) {
            auto x = random_point(rng, n, 0.1, 5.0);
            CHECK(std::abs(abreu_scal_v(u, Weight::constant(n, Rational(1)), x.data())) < 1e-12);
        }
    }
}

TEST_CASE("abreu operator agrees with nested finite differences") {
    auto x = Expr::var(0), y = Expr::var(1);
    Expr smooth = Expr::constant(0.2) * Expr::pow(x + Expr::constant(-0.5) * y, 2) + Expr::constant(0.1) * Expr::exp(Expr::constant(0.5) * x);
    SymplecticPotential u(2, {{AffineForm{rv({1, 0}), Rational(1)}, Rational(1, 2)}, {AffineForm{rv({0, 1}), Rational(1)}, Rational(1, 2)}},
                          smooth);
    Polynomial q = Polynomial::variable(2, 0) * Polynomial::variable(2, 0) + Polynomial::constant(2, Rational(1));
    Weight v = Weight::exponential(rv({1, 1})) * q;
    std::mt19937 rng(29);
    for (int trial = 0; trial < 50; ++trial) {
        auto p = random_point(rng, 2, -0.7, 3.0);
        double exact = abreu_scal_v(u, v, p.data());
        double fd = abreu_fd(u, v, p, 1e-3);
        CHECK(exact == doctest::Approx(fd).epsilon(1e-4).scale(1e-8));
    }
}

TEST_CASE("cone potentials") {
    auto orth = Cone::from_normals(2, {{1, 0}, {0, 1}});
    auto uc = cone_potential(orth);
    auto ub = cone_potential(orth, rv({1, 1}));
    CHECK(uc.log_terms() == ub.log_terms());
    CHECK_THROWS_AS(cone_potential(orth, rv({1, -1})), NotInteriorDirection);
    CHECK_THROWS_AS(cone_potential(orth, rv({0, 1})), NotInteriorDirection);

    auto wedge = Cone::from_normals(2, {{1, 0}, {-1, 2}});
    auto u = cone_potential(wedge, rv({1, 3}));
    std::mt19937 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        auto p = random_point(rng, 2, 0.2, 3.0);
        if (-p[0] + 2 * p[1] <= 0.1) continue;
        auto h = hessian_data(u, p.data(), 0).H;
        for (double t : {2.0, 5.0}) {
            std::vector<double> q{t * p[0], t * p[1]};
            auto ht = hessian_data(u, q.data(), 0).H;
            CHECK((ht - t * h).norm() <= 1e-10 * (1.0 + t * h.norm()));
        }
    }
}

TEST_CASE("soliton residual") {
    for (int n = 1; n <= 3; ++n) {
        auto u = guillemin_potential(shifted_orthant(n));
        std::mt19937 rng(37 + n);
        std::vector<std::vector<double>> s;
        for (int k = 0; k < 40; ++k) s.push_back(random_point(rng, n, -0.9, 5.0));
        auto fit = soliton_residual(u, exp_sum(n), s);
        CHECK(fit.deviation < 1e-10);
        CHECK(fit.alpha == doctest::Approx(n * std::log(2.0)));
        for (double b : fit.beta) CHECK(std::abs(b) < 1e-10);

        auto shifted = u.plus_affine(RatVec(n, Rational(3, 2)), Rational(-2));
        CHECK(std::abs(soliton_residual(shifted, exp_sum(n), s).deviation - fit.deviation) < 1e-12);
    }
    auto u1 = guillemin_potential(shifted_orthant(1));
    std::vector<std::vector<double>> s;
    for (int k = 0; k < 20; ++k) s.push_back({-0.9 + 0.3 * k});
    Weight v = Weight::exponential(rv({1})) * Polynomial::affine(rv({1}), Rational(2));
    double dev = soliton_residual(u1, v, s).deviation;
    CHECK(dev > 1e-3);
    CHECK(std::abs(soliton_residual(u1.plus_affine(rv({-5}), Rational(7)), v, s).deviation - dev) < 1e-12);
    CHECK(soliton_residual(u1, Weight::exponential(rv({2})), s).deviation < 1e-10);
}

TEST_CASE("legendre transform") {
    SUBCASE("quadratics are self dual") {
        Grid g{{-2.0, -2.0}, {2.0, 2.0}, {41, 41}};
        auto phi = sample_grid([](const double* x) { return 0.5 * (x[0] * x[0] + x[1] * x[1]); }, g);
        auto u = legendre(phi);
        for (size_t k = 0; k < u.points.size(); ++k) {
            const auto& p = u.points[k];
            CHECK(std::abs(u.values[k] - 0.5 * (p[0] * p[0] + p[1] * p[1])) < 1e-10);
        }
        for (size_t k = 0; k < g.size(); ++k) {
            auto idx = g.multi_index(k);
            if (idx[0] == 0 || idx[1] == 0 || idx[0] == 40 || idx[1] == 40) continue;
            auto xi = g.point(k);
            CHECK(std::abs(conjugate_at(u, xi.data()) - phi.values[k]) < 1e-10);
        }
    }
    SUBCASE("exponential") {
        Grid g{{-2.0}, {2.0}, {801}};
        auto phi = sample_grid([](const double* x) { return std::exp(x[0]); }, g);
        auto u = legendre(phi);
        for (size_t k = 0; k < u.points.size(); k += 40) {
            double p = u.points[k][0];
            CHECK(u.values[k] == doctest::Approx(p * std::log(p) - p).epsilon(1e-4));
        }
    }
    SUBCASE("round trip converges under refinement") {
        auto f = [](const double* x) { return std::exp(x[0]) + 0.5 * x[0] * x[0]; };
        std::vector<double> errs;
        for (int m : {20, 40, 80, 160}) {
            Grid g{{-2.0}, {2.0}, {m + 1}};
            auto u = legendre(sample_grid(f, g));
            double err = 0.0;
            for (double xi = -1.0; xi <= 1.0; xi += 0.0731) err = std::max(err, std::abs(conjugate_at(u, &xi) - f(&xi)));
            errs.push_back(err);
        }
        for (size_t k = 1; k < errs.size(); ++k) CHECK(errs[k] <= 0.6 * errs[k - 1]);
    }
    SUBCASE("concave grids are rejected") {
        Grid g{{-1.0}, {1.0}, {11}};
        CHECK_THROWS_AS(legendre(sample_grid([](const double* x) { return -x[0] * x[0]; }, g)), NotConvexGrid);
    }
}

TEST_CASE("boundary behaviour") {
    auto half_line = poly(1, {{{1}, 1}});
    auto rep1 = boundary_checks(PotentialMetric(guillemin_potential(half_line)), half_line);
    REQUIRE(rep1.approaches.size() == 1);
    CHECK(rep1.pass);
    CHECK(rep1.approaches[0].limit[0] == doctest::Approx(2.0));
    CHECK(rep1.approaches[0].rate == doctest::Approx(1.0).epsilon(1e-6));

    auto orth = shifted_orthant(2);
    auto rep2 = boundary_checks(PotentialMetric(guillemin_potential(orth)), orth);
    REQUIRE(rep2.approaches.size() == 2);
    CHECK(rep2.pass);
    for (const auto& a : rep2.approaches) {
        for (int k = 0; k < 2; ++k) CHECK(a.limit[k] == doctest::Approx(2.0 * a.normal[k]).scale(1.0));
    }

    SymplecticPotential wrong(1, {{AffineForm{rv({1}), Rational(1)}, Rational(1)}});
    auto rep3 = boundary_checks(PotentialMetric(wrong), half_line);
    CHECK_FALSE(rep3.pass);
    CHECK(rep3.approaches[0].limit[0] == doctest::Approx(1.0));
}

TEST_CASE("asymptotic class checks") {
    auto orth = shifted_orthant(2);
    auto u = guillemin_potential(orth);
    PotentialMetric m(u);
    for (double eps : {0.1, 0.3}) {
        auto rep = h_class_check(m, &u, exp_sum(2), orth, eps, 0.5);
        CHECK(rep.pass);
    }
    auto line = poly(1, {{{1}, 1}});
    auto u1 = guillemin_potential(line);
    auto flat_line = h_class_check(PotentialMetric(u1), &u1, exp_sum(1), line, 0.1, 0.5);
    CHECK(flat_line.pass);
    CHECK(flat_line.conditions[3].growth == 0.0);

    auto control = h_class_check(m, &u, Weight::constant(2, Rational(1)), orth, 0.1, 0.5);
    CHECK_FALSE(control.pass);
    CHECK_FALSE(control.conditions[0].finite);
    CHECK(control.conditions[0].growth == doctest::Approx(2.0).epsilon(0.1));

    auto half_line = poly(1, {{{1}, 1}});
    ProfileMetric profile([](double x, double* h) {
        h[0] = 2.0 * (x + 1.0);
        h[1] = 2.0;
        h[2] = 0.0;
    });
    auto rep = h_class_check(profile, nullptr, exp_sum(1), half_line, 0.1, 0.5);
    CHECK(rep.pass);
    CHECK_FALSE(rep.conditions[2].evaluated);
}

TEST_CASE("mabuchi energy on the flat line") {
    auto half_line = poly(1, {{{1}, 1}});
    auto v = exp_sum(1);
    auto w = soliton_weight(v, 1);
    auto u0 = guillemin_potential(half_line);
    auto m = mabuchi_energy(half_line, v, w, u0, u0);
    CHECK(m.value == doctest::Approx(std::exp(1.0)).epsilon(1e-7));
    CHECK(m.total_error() < 1e-5);
    auto shifted = mabuchi_energy(half_line, v, w, u0.plus_affine(rv({3}), Rational(-1)), u0);
    CHECK(shifted.value == doctest::Approx(std::exp(1.0)).epsilon(1e-7));
}
