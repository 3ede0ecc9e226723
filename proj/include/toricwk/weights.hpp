#pragma once

#include "toricwk/geometry.hpp"
#include "toricwk/polynomial.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace toricwk {

struct Factor {
    Polynomial base;
    int exp = 0;
    bool operator==(const Factor&) const = default;
    bool operator<(const Factor& o) const {
        if (base == o.base) return exp < o.exp;
        return base < o.base;
    }
};

// poly(x) * prod base_k(x)^exp_k * exp(-(<decay, x> + shift)).
// In canonical form every factor has a negative exponent and a normalized base.
struct WeightTerm {
    Polynomial poly;
    std::vector<Factor> factors;
    RatVec decay;
    Rational shift = 0;
    bool operator==(const WeightTerm&) const = default;
};

class Weight {
public:
    Weight() = default;
    explicit Weight(int dim);
    Weight(int dim, std::vector<WeightTerm> terms);

    static Weight constant(int dim, const Rational& c);
    static Weight from_polynomial(const Polynomial& p);
    // exp(-(<lambda, x> + shift))
    static Weight exponential(const RatVec& lambda, const Rational& shift = 0);
    static Weight power(const Polynomial& base, int exp);

    int dim() const { return dim_; }
    const std::vector<WeightTerm>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool has_negative_factors() const;
    // The decay vector shared by all terms, if there is one.
    std::optional<RatVec> common_decay() const;

    double eval(const double* x) const;
    double eval(std::span<const double> x) const { return eval(x.data()); }
    std::vector<double> grad(std::span<const double> x) const;
    // Row-major n x n.
    std::vector<double> hess(std::span<const double> x) const;
    ExpLinear eval_exact(const RatVec& x) const;

    Weight differentiate(int i) const;
    Weight derivative(const std::vector<int>& alpha) const;
    // Composition with x = x0 + sum_k t_k cols[k].
    Weight substitute(const RatVec& x0, const std::vector<RatVec>& cols) const;

    Weight& operator+=(const Weight& o);
    Weight& operator-=(const Weight& o);
    Weight& operator*=(const Rational& c);
    friend Weight operator+(Weight a, const Weight& b) { return a += b; }
    friend Weight operator-(Weight a, const Weight& b) { return a -= b; }
    friend Weight operator*(Weight a, const Rational& c) { return a *= c; }
    friend Weight operator*(const Weight& a, const Weight& b);
    friend Weight operator*(const Weight& a, const Polynomial& p) { return a * from_polynomial(p); }
    bool operator==(const Weight& o) const { return dim_ == o.dim_ && terms_ == o.terms_; }

    std::string to_string() const;

private:
    struct Compiled;
    void rebuild();

    int dim_ = 0;
    std::vector<WeightTerm> terms_;
    std::shared_ptr<const Compiled> compiled_;
};

// Value, gradient and Hessian evaluation with precomputed symbolic derivatives.
class WeightJet {
public:
    WeightJet() = default;
    explicit WeightJet(const Weight& v);
    int dim() const { return v_.dim(); }
    const Weight& weight() const { return v_; }
    double value(const double* x) const { return v_.eval(x); }
    void eval(const double* x, double& value, double* grad, double* hess) const;

private:
    Weight v_;
    std::vector<Weight> d1_;
    std::vector<Weight> d2_;
};

// w = 2 (n v + <grad v, x>)
Weight soliton_weight(const Weight& v, int n);

struct FibrationFactor {
    RatVec p;
    Rational c;
    int n = 1;
    Rational s = 0;
};

// Throws FactorNotPositive unless <b,x> + c > 0 on P.
void require_positive_affine(const Polyhedron& poly, const RatVec& b, const Rational& c);

std::pair<Weight, Weight> fibration_transform(const Weight& v, const Weight& w, const std::vector<FibrationFactor>& data,
                                              const Polyhedron& poly);

struct KrsFactor {
    RatVec p;
    Rational k;
    int n = 1;
};

Weight krs_fibration_weight(const std::vector<KrsFactor>& data, const RatVec& b_w, const Polyhedron& poly);

struct PositivityReport {
    bool positive = true;
    std::vector<double> witness;
    double min_value = 0.0;
    int samples = 0;
};

// Sampled positivity of v on P: vertices, points along recession rays and a grid on a truncation.
PositivityReport check_positive(const Weight& v, const Polyhedron& poly);

struct ClassOptions {
    int k_max = 2;
    std::vector<double> deltas{10.0, 20.0, 40.0};
    double min_rate = 1e-3;
    // Suprema whose log-log growth exponent stays below this are treated as finite.
    double growth_tol = 0.5;
    int grid_points = 0;  // per axis; 0 picks a default by dimension
};

struct ClassReport {
    double decay_rate = 0.0;
    bool decay_ok = false;
    std::vector<double> sup_v;  // sup v^{-1}|d^a v| per truncation
    std::vector<double> sup_w;  // sup v^{-beta}|d^a w| per truncation
    double growth_v = 0.0;
    double growth_w = 0.0;
    bool v_bounded = false;
    bool w_bounded = false;
    bool pass = false;
    std::string qualifier = "numerical evidence, not proof";
};

ClassReport check_class_W(const Weight& v, const Weight& w, const Polyhedron& poly, double beta_star,
                          const ClassOptions& opts = {});

// Grid points strictly inside a bounded polyhedron.
std::vector<std::vector<double>> interior_grid(const Polyhedron& bounded, int per_axis);

}  // namespace toricwk
