#pragma once

#include "toricwk/geometry.hpp"
#include "toricwk/polynomial.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace toricwk {

// <b, x> + c
struct AffineForm {
    RatVec b;
    Rational c;

    Rational eval(const RatVec& x) const { return dot(b, x) + c; }
    double eval(const double* x) const;
    Polynomial polynomial() const { return Polynomial::affine(b, c); }
    bool operator==(const AffineForm&) const = default;
    bool operator<(const AffineForm& o) const { return b == o.b ? c < o.c : b < o.b; }
};

// Maximum of finitely many affine functions.
class PiecewiseLinear {
public:
    PiecewiseLinear() = default;
    PiecewiseLinear(int dim, std::vector<AffineForm> pieces);

    static PiecewiseLinear affine(const RatVec& b, const Rational& c);
    // max{<b,x> + a, 0}
    static PiecewiseLinear simple_crease(const RatVec& b, const Rational& a);
    // max{<d,x> - R, 0}
    static PiecewiseLinear f_r(const RatVec& direction, const Rational& r);
    // max{x0 - x, 0} on the line
    static PiecewiseLinear f_x0(const Rational& x0);

    int dim() const { return dim_; }
    const std::vector<AffineForm>& pieces() const { return pieces_; }
    size_t size() const { return pieces_.size(); }
    double eval(const double* x) const;
    Rational eval(const RatVec& x) const;
    PiecewiseLinear scaled(const Rational& k) const;
    bool operator==(const PiecewiseLinear&) const = default;

private:
    int dim_ = 0;
    std::vector<AffineForm> pieces_;
};

struct Region {
    int piece = -1;
    Polyhedron domain;
};

struct Crease {
    int a = -1, b = -1;
    AffineForm difference;  // piece a minus piece b
    Facet section;          // measure normalized by |b_a - b_b|
};

struct Decomposition {
    PiecewiseLinear reduced;  // pieces with a full-dimensional region, in input order
    std::vector<Region> regions;
    std::vector<Crease> creases;
    std::vector<std::string> log;
};

// Drops pieces whose region in P has empty interior and decomposes P.
Decomposition regions_and_creases(const PiecewiseLinear& f, const Polyhedron& p);

bool is_admissible(const PiecewiseLinear& f, const Polyhedron& p);

struct DAdmissibility {
    bool admissible = false;
    int piece = -1;
    std::optional<Rational> sup;  // sup of f - a_j over the test region; nullopt when unbounded or empty
};

DAdmissibility is_D_admissible(const PiecewiseLinear& f, const Polyhedron& p, double d);

PiecewiseLinear normalize_plus(const PiecewiseLinear& f, int j);

// Minimal Euclidean norm vertex of the active slopes at the origin; ties broken lexicographically.
RatVec star_subgradient(const PiecewiseLinear& f);
PiecewiseLinear normalize_star(const PiecewiseLinear& f);

struct ConvexFunction {
    std::function<double(const double*)> value;
    std::function<void(const double*, double*)> subgradient;
    int dim = 0;
};
ConvexFunction normalize_star(const ConvexFunction& f);

// sup over P of f, exact, or nullopt when unbounded.
std::optional<Rational> sup_on(const PiecewiseLinear& f, const Polyhedron& p);

// {(x, y) : x in P, 0 <= y <= R - f(x)}
Polyhedron test_config_polytope(const PiecewiseLinear& f, const Polyhedron& p, const Rational& r);

}  // namespace toricwk
