#pragma once

#include "toricwk/expr.hpp"
#include "toricwk/geometry.hpp"
#include "toricwk/pl.hpp"
#include "toricwk/quadrature.hpp"
#include "toricwk/weights.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace toricwk {

// coeff * L log L
struct LogTerm {
    AffineForm form;
    Rational coeff;
    bool operator==(const LogTerm&) const = default;
};

// u = sum of log terms + a smooth closed-form part.
class SymplecticPotential {
public:
    SymplecticPotential() = default;
    SymplecticPotential(int dim, std::vector<LogTerm> log_terms, Expr smooth = Expr(),
                        std::optional<Polyhedron> domain = std::nullopt);

    int dim() const { return dim_; }
    const std::vector<LogTerm>& log_terms() const { return log_terms_; }
    const Expr& smooth() const { return smooth_; }
    const std::optional<Polyhedron>& domain() const { return domain_; }

    SymplecticPotential plus_affine(const RatVec& b, const Rational& c) const;

    double value(const double* x) const;
    void gradient(const double* x, double* g) const;
    Eigen::MatrixXd hessian(const double* x) const;
    // third[k](i, j) = u_{ijk}
    std::vector<Eigen::MatrixXd> third(const double* x) const;
    // fourth[k * n + l](i, j) = u_{ijkl}
    std::vector<Eigen::MatrixXd> fourth(const double* x) const;

    // c with |u(x)| <= c (1 + |x|)^2; the smooth part is bounded by sampling.
    double growth_constant() const;

private:
    // Derivatives of the smooth part of each order, stored once per sorted multi-index.
    struct Table {
        std::vector<Expr> unique;
        std::vector<int> index;  // full flattened multi-index -> unique
    };
    void build_tables();
    std::vector<double> eval_table(int order, const double* x) const;

    int dim_ = 0;
    std::vector<LogTerm> log_terms_;
    Expr smooth_;
    std::optional<Polyhedron> domain_;
    std::vector<Table> tables_;  // orders 1..4
};

SymplecticPotential guillemin_potential(const Polyhedron& p);
// Throws NotInteriorDirection unless b pairs positively with every generator of C.
SymplecticPotential cone_potential(const Cone& c, const std::optional<RatVec>& b = std::nullopt);

struct HessianData {
    Eigen::MatrixXd G;  // Hess u
    Eigen::MatrixXd H;  // inverse of G
    std::vector<Eigen::MatrixXd> dG, dH;    // by k
    std::vector<Eigen::MatrixXd> d2G, d2H;  // by k * n + l
};

// order 0: G, H; 1: adds first derivatives; 2: adds second derivatives.
// Throws NotConvexHere when G is not positive definite.
HessianData hessian_data(const SymplecticPotential& u, const double* x, int order = 2);

class MetricProvider {
public:
    virtual ~MetricProvider() = default;
    virtual int dim() const = 0;
    // H and its derivatives; G-side fields may be left empty.
    virtual HessianData metric(const double* x, int order) const = 0;
};

class PotentialMetric : public MetricProvider {
public:
    explicit PotentialMetric(SymplecticPotential u) : u_(std::move(u)) {}
    int dim() const override { return u_.dim(); }
    HessianData metric(const double* x, int order) const override { return hessian_data(u_, x, order); }
    const SymplecticPotential& potential() const { return u_; }

private:
    SymplecticPotential u_;
};

// One-dimensional metric given directly by H(x), H'(x), H''(x).
class ProfileMetric : public MetricProvider {
public:
    using Jet = std::function<void(double x, double* h)>;  // h[0..2]
    explicit ProfileMetric(Jet jet) : jet_(std::move(jet)) {}
    int dim() const override { return 1; }
    HessianData metric(const double* x, int order) const override;

private:
    Jet jet_;
};

// -sum_ij d_i d_j (v H_ij)
double abreu_scal_v(const MetricProvider& m, const WeightJet& v, const double* x);
double abreu_scal_v(const SymplecticPotential& u, const Weight& v, const double* x);

struct SolitonFit {
    double deviation = 0.0;
    double alpha = 0.0;          // constant part of the fit
    std::vector<double> beta;    // linear part
};

// Least-squares affine fit of rho_u + log v, rho_u = 2(<grad u, x> - u) - log det Hess u.
SolitonFit soliton_residual(const SymplecticPotential& u, const Weight& v,
                            const std::vector<std::vector<double>>& samples);

// Regular grid over a box, row-major with the last axis fastest.
struct Grid {
    std::vector<double> lo, hi;
    std::vector<int> counts;

    int dim() const { return static_cast<int>(counts.size()); }
    size_t size() const;
    double spacing(int axis) const { return (hi[axis] - lo[axis]) / (counts[axis] - 1); }
    std::vector<int> multi_index(size_t flat) const;
    size_t flat_index(const std::vector<int>& idx) const;
    std::vector<double> point(size_t flat) const;
};

struct GridFunction {
    Grid grid;
    std::vector<double> values;
};

struct ScatteredFunction {
    int dim = 0;
    std::vector<std::vector<double>> points;
    std::vector<double> values;
};

GridFunction sample_grid(const std::function<double(const double*)>& f, const Grid& grid);

// Discrete conjugate on the image of the central-difference gradient at interior nodes.
// Throws NotConvexGrid if a second difference along an axis is negative.
ScatteredFunction legendre(const GridFunction& phi);
// max_j <y, p_j> - f_j
double conjugate_at(const ScatteredFunction& f, const double* y);
double conjugate_at(const GridFunction& f, const double* y);

struct BoundaryApproach {
    int facet = -1;
    std::vector<double> y;
    std::vector<double> normal;
    std::vector<double> ts;
    std::vector<double> h_normal;                // |H nu| along the approach
    std::vector<std::vector<double>> dh_normal;  // (dH_k(nu, nu))_k along the approach
    std::vector<double> limit;                   // last dH(nu, nu)
    double rate = 0.0;                           // log-log slope of |H nu| in t
    bool vanishes = false;
    bool derivative_ok = false;
};

struct BoundaryReport {
    std::vector<BoundaryApproach> approaches;
    bool pass = true;
};

// Approaches y + t nu/|nu| for each sample; an empty sample list picks one relative-interior point per facet.
BoundaryReport boundary_checks(const MetricProvider& m, const Polyhedron& p,
                               std::vector<std::pair<int, std::vector<double>>> samples = {},
                               std::vector<double> ts = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}, double tol = 1e-3);

struct HClassOptions {
    std::vector<double> deltas{10.0, 20.0, 40.0};
    double growth_tol = 0.5;
    // Suprema at or below this are rounding noise of an identically zero quantity.
    double noise_floor = 1e-10;
    int grid_points = 0;  // per axis; 0 picks a default by dimension
};

struct HCondition {
    std::string name;
    std::vector<double> sups;  // per truncation
    double growth = 0.0;
    bool evaluated = true;
    bool finite = true;
};

struct HClassReport {
    std::vector<HCondition> conditions;
    bool pass = true;
    std::string qualifier = "numerical evidence, not proof";
};

// Conditions: v^eps |H|^2, v^eps |dH|^2, the potential norms (needs u), and |d^2 H| near the boundary.
HClassReport h_class_check(const MetricProvider& m, const SymplecticPotential* u, const Weight& v, const Polyhedron& p,
                           double eps, double delta_bar, const HClassOptions& opts = {});

// F_{v,w}(u) - int_P log det(Hess(u0)^{-1} Hess(u)) v dx
IntegralResult mabuchi_energy(const Polyhedron& p, const Weight& v, const Weight& w, const SymplecticPotential& u,
                              const SymplecticPotential& u0, const QuadOptions& opts = {});

// The potential as a multiplicative quadrature factor.
ExtraFactor potential_factor(const SymplecticPotential& u);

}  // namespace toricwk
