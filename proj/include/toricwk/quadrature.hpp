#pragma once

#include "toricwk/geometry.hpp"
#include "toricwk/weights.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace toricwk {

struct QuadOptions {
    double rel_tol = 1e-8;
    double abs_tol = 0.0;
    long max_cells = 400000;
    int threads = 1;
    // Throw ToleranceNotMet instead of returning a flagged partial result.
    bool strict = false;
    std::optional<RatVec> b_plus;
    double max_delta = 200.0;
};

struct IntegralResult {
    double value = 0.0;
    double abs_error_bound = 0.0;
    double tail_bound = 0.0;
    long cells_used = 0;
    bool converged = true;
    // False when some factor bound inside the tail estimate was sampled rather than proved.
    bool tail_certified = true;
    double delta_star = 0.0;
    double magnitude = 0.0;  // integral of |integrand| over the truncated domain, estimated

    IntegralResult& operator+=(const IntegralResult& o);
    IntegralResult scaled(double s) const;
    double total_error() const { return abs_error_bound + tail_bound; }
};

using Integrand = std::function<double(const double*)>;

// Optional extra multiplicative factor with a growth bound |f(x)| <= c (1 + |x|)^degree.
struct ExtraFactor {
    Integrand f;
    double growth_c = 1.0;
    double growth_degree = 0.0;
};

// Symmetric simplex rule in barycentric coordinates; weights sum to 1.
struct SimplexRule {
    int dim = 0;
    std::vector<double> bary;  // (dim+1) per point
    std::vector<double> weights;
};

// Grundmann-Moeller rule of degree 2s+1.
SimplexRule grundmann_moeller(int dim, int s);

// Pulling triangulation of a bounded full-dimensional polyhedron; each simplex is dim+1 vertices.
std::vector<std::vector<RatVec>> triangulate(const Polyhedron& bounded);

// Adaptive integration of f over the given simplices (coordinates flattened per simplex).
IntegralResult integrate_simplices(int dim, const std::vector<std::vector<double>>& simplices, const Integrand& f,
                                   double abs_target, const QuadOptions& opts);
IntegralResult integrate_polytope(const Polyhedron& bounded, const Integrand& f, const QuadOptions& opts,
                                  double abs_target = 0.0);

// Exact integral of a one-variable weight without negative factors over [a, b] or [a, inf).
ExpLinear exact_1d(const Weight& w, const Rational& a, const std::optional<Rational>& b);

// Rigorous envelope for the integral of |g * extra| over P minus its truncation at delta_star.
double tail_bound(const Polyhedron& p, const Weight& g, const RatVec& b_plus, double delta_star,
                  const ExtraFactor* extra = nullptr, bool* certified = nullptr);

// Direction used to truncate P for the integrand g.
RatVec truncation_direction(const Polyhedron& p, const Weight& g, const QuadOptions& opts);

IntegralResult integrate_interior(const Polyhedron& p, const Weight& g, const QuadOptions& opts = {},
                                  const ExtraFactor* extra = nullptr);
IntegralResult integrate_boundary(const Polyhedron& p, const Weight& g, const QuadOptions& opts = {},
                                  const ExtraFactor* extra = nullptr);
// Integral over a facet or crease with its own measure normalization.
IntegralResult integrate_section(const Facet& f, const Weight& g, const QuadOptions& opts = {},
                                 const ExtraFactor* extra = nullptr);

// Compensated pairwise sum with a fixed reduction tree.
double stable_sum(const std::vector<double>& xs);

}  // namespace toricwk
