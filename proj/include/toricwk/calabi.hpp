#pragma once

#include "toricwk/polynomial.hpp"
#include "toricwk/potentials.hpp"
#include "toricwk/weights.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace toricwk {

// Antiderivative of a one-variable weight without negative factors, as a weight.
Weight antiderivative_1d(const Weight& w);
// The constant sum c_k e^{q_k} as a one-variable weight.
Weight constant_weight(const ExpLinear& c);

struct ProfileSolution {
    Weight v;
    Weight w;
    bool exact = false;
    Weight vtheta;                       // set when exact
    std::optional<Weight> theta_exact;   // when v is a constant times an exponential
    std::function<double(double)> vtheta_fn;
    std::function<double(double)> vtheta_d1, vtheta_d2;
    bool boundary_exact = false;         // vtheta(-1) = 0 and (vtheta)'(-1) = 2 v(-1) as exact identities
    double theta_at_minus_one = 0.0;
    double theta_slope_residual = 0.0;   // Theta'(-1) - 2
    std::optional<double> first_nonpositive;  // from a sign scan on (-1, 50]

    double theta(double x) const;
    double vtheta_at(double x) const { return vtheta_fn(x); }
    // Theta, Theta', Theta''
    void theta_jet(double x, double* out) const;
};

// vTheta(x) = 2 v(-1)(1 + x) - x int_{-1}^x w + int_{-1}^x t w(t) dt on [-1, inf).
ProfileSolution profile_solve(const Weight& v, const Weight& w);
// vTheta(x) = -int_x^inf (t - x) w(t) dt. Throws AffineFutakiNonzero unless F(1) and F(x) vanish.
ProfileSolution profile_solve_decaying(const Weight& v, const Weight& w, double tol = 1e-10);

ProfileMetric profile_metric(const ProfileSolution& sol);

struct ExistenceVerdict {
    bool exists = false;
    std::optional<double> fails_at;
    std::string method;  // "sturm-exact", "sturm-float" or "scan"
};

ExistenceVerdict existence_verdict(const ProfileSolution& sol, double x_max = 50.0);

// Distinct real roots of p in (a, b]; coefficients low to high.
int sturm_count(const std::vector<Rational>& p, const Rational& a, const std::optional<Rational>& b);

struct CreaseProfileResidual {
    double max_residual = 0.0;
    std::vector<double> futaki;
    std::vector<double> profile;
};

CreaseProfileResidual crease_profile_identity(const ProfileSolution& sol, const std::vector<Rational>& x0s,
                                              double rel_tol = 1e-10);

struct LineBundleWeights {
    Weight v, w;
    std::vector<Rational> base_curvatures;
};

LineBundleWeights line_bundle_weights(const Weight& v, const Weight& w, const std::vector<FibrationFactor>& data);

struct LiProfile {
    int d = 1, k = 1;
    Rational tau, kappa, mu;
    Rational p;                 // tau - k kappa
    Polynomial h;               // in phi
    Polynomial numerator;       // sum_j h^(j) / mu^(j+1)
    Polynomial denominator;     // (1 + kappa phi)^d phi^(k-1)
    Rational slope;             // p / mu, the linear growth of F
    Rational offset;            // constant term of the asymptotic expansion of F
    std::vector<std::string> flags;

    double F(double phi) const;
    long double F_ld(long double phi) const;
};

LiProfile li_profile(int d, int k, const Rational& tau, const Rational& kappa, const Rational& mu = Rational(1));

// int_{phi0}^{phi} (p u - F(u)) / (p u F(u)) du
double li_G(const LiProfile& prof, double phi0, double phi);
// int_{phi}^{inf} of the same integrand
long double li_tail(const LiProfile& prof, long double phi);

struct LiC0 {
    double c0 = 0.0;
    double tail_bound = 0.0;  // envelope at the cutoff
    double cutoff = 0.0;
    double offset = 0.0;      // constant C in F = p phi + C + o(1)
};

LiC0 li_C0(const LiProfile& prof, double phi0);
// (1/p) |log(1 - |C| / (p Phi))|, bounds |G(inf) - G(Phi)|
double li_envelope(const LiProfile& prof, double big_phi);

struct LiDecayReport {
    std::vector<double> s, phi, e, residual;
    double d0 = 0.0;
    double c0 = 0.0;
    double slope = 0.0;
    double max_residual = 0.0;
    bool monotone = true;
    std::vector<std::string> flags;
};

LiDecayReport li_decay_check(const LiProfile& prof, double phi0 = 1.0, double s0 = 1.0, double s_lo = 1e2,
                             double s_hi = 1e6, int points = 41);

}  // namespace toricwk
