#pragma once

#include "toricwk/geometry.hpp"
#include "toricwk/pl.hpp"
#include "toricwk/potentials.hpp"
#include "toricwk/quadrature.hpp"
#include "toricwk/weights.hpp"

#include <optional>
#include <string>
#include <vector>

namespace toricwk {

// 2 int_{dP} f v dsigma - int_P f w dx, region by region for piecewise-linear f.
IntegralResult futaki(const Polyhedron& p, const Weight& v, const Weight& w, const PiecewiseLinear& f,
                      const QuadOptions& opts = {});
// Same pairing for a general continuous function with a growth bound.
IntegralResult futaki(const Polyhedron& p, const Weight& v, const Weight& w, const ExtraFactor& f,
                      const QuadOptions& opts = {});
// Exact value on a half-line or interval; w must have no negative-exponent factors.
ExpLinear futaki_exact_1d(const Polyhedron& p, const Weight& v, const Weight& w, const PiecewiseLinear& f);

struct AffineFutaki {
    std::vector<IntegralResult> values;  // F(1), F(x^1), ..., F(x^n)
    double scale = 0.0;
    double tol = 0.0;
    bool vanishes = true;
};

// Vanishing means |F| <= rel_tol * scale + error for every component.
AffineFutaki futaki_affine(const Polyhedron& p, const Weight& v, const Weight& w, const QuadOptions& opts = {},
                           double rel_tol = 1e-8);

// (int_P x_i v dx)_i
std::vector<IntegralResult> futaki_v_vector(const Polyhedron& p, const Weight& v, const QuadOptions& opts = {});

struct SolitonIdentityReport {
    std::vector<double> lhs;  // int_P l w
    std::vector<double> rhs;  // 2 int_{dP} l v - 2 int_P l_lin v
    std::vector<double> error;
    bool holds = true;
    bool anticanonical = false;
    bool consistent = true;  // holds == anticanonical
};

SolitonIdentityReport soliton_futaki_identity_check(const Polyhedron& p, const Weight& v, const QuadOptions& opts = {},
                                                    double rel_tol = 1e-7);

// a with F_{v, a w}(1) = 0. Throws ZeroDenominator when int_P w vanishes.
double normalize_w_scale(const Polyhedron& p, const Weight& v, const Weight& w, const QuadOptions& opts = {});

// int_{-1}^inf x / (c + x^4) e^{-lambda x} dx
double c_lambda_integral(double lambda, double c);

struct CLambda {
    double c = 0.0;
    double residual = 0.0;
    double bracket_lo = 0.0, bracket_hi = 0.0;
    int iterations = 0;
    bool found = false;
};

CLambda find_c_lambda(double lambda, double tol = 1e-8);

// The two-variable example: v = (x1^2 x2^2 + 1) e^{-(x1+x2)} and
// w = [(c + x1^4)(c + x2^4)]^{-1} e^{-lambda (x1 + x2)} on the shifted orthant, before scaling.
struct QuarticExample {
    Polyhedron p;
    Weight v, w;
    Rational c;
    Rational lambda;
};
QuarticExample quartic_example(const Rational& lambda, double c);

enum class VerdictKind { NoDestabilizerFound, Destabilizer, AffineObstruction };
std::string to_string(VerdictKind k);

struct ScanEntry {
    std::string family;
    std::vector<double> params;
    double value = 0.0;
    double error = 0.0;
    bool certified = false;
};

struct StabilityVerdict {
    VerdictKind kind = VerdictKind::NoDestabilizerFound;
    std::optional<PiecewiseLinear> destabilizer;
    std::string family;
    double value = 0.0;
    double error = 0.0;
    std::vector<double> affine;
    std::vector<ScanEntry> log;
    // For the ray family: the last radius with F >= 0 and the first certified negative one.
    std::optional<std::pair<double, double>> sign_flip;
};

struct ScanOptions {
    QuadOptions quad;
    double affine_rel_tol = 1e-8;
    bool creases = true;
    bool rays = true;
    bool multi_crease = true;
    double r0 = 5.0;
    int offsets = 11;
    int directions = 8;    // per quarter turn in two dimensions; ignored in one
    int golden_steps = 12;
    std::vector<double> radii;  // empty picks 2, 4, ..., 160
    int descent_rounds = 3;
};

StabilityVerdict semistability_scan(const Polyhedron& p, const Weight& v, const Weight& w, const ScanOptions& opts = {});

struct LambdaSample {
    PiecewiseLinear f;
    double futaki = 0.0;
    double denominator = 0.0;
    double ratio = 0.0;
    double k_constant = 0.0;  // worst delta* int_{P \ H} f v^beta over the delta* grid
    bool member = false;
};

struct LambdaEstimate {
    double estimate = 0.0;
    std::vector<LambdaSample> samples;
    int excluded = 0;
};

// Minimum of F(f) / int_P f v^gamma over star-normalized members of the family.
// Throws EmptyFamily when nothing survives normalization and the membership test.
LambdaEstimate uniform_lambda_estimate(const Polyhedron& p, const Weight& v, const Weight& w, double beta, double gamma,
                                       double k, const std::vector<PiecewiseLinear>& family,
                                       const QuadOptions& opts = {},
                                       const std::vector<double>& delta_grid = {10.0, 20.0, 40.0});

struct CreaseIdentity {
    double futaki = 0.0;
    double crease_sum = 0.0;
    double residual = 0.0;
    double abreu_residual = 0.0;
    std::vector<double> crease_terms;
};

// Throws NotASolution when Scal_v(u) differs from w at the sample points by more than abreu_tol (relative).
CreaseIdentity crease_identity_check(const Polyhedron& p, const Weight& v, const Weight& w,
                                     const SymplecticPotential& u, const PiecewiseLinear& f,
                                     const QuadOptions& opts = {}, double abreu_tol = 1e-6);

}  // namespace toricwk
