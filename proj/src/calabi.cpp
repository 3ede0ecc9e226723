#include "toricwk/calabi.hpp"

#include "toricwk/errors.hpp"
#include "toricwk/quadrature.hpp"
#include "toricwk/stability.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <memory>

namespace toricwk {

namespace {

using boost::math::quadrature::gauss_kronrod;
using Float50 = boost::multiprecision::cpp_bin_float_50;

Polynomial x_poly() { return Polynomial::variable(1, 0); }
RatVec at(const Rational& x) { return RatVec{x}; }
Polyhedron half_line() { return Polyhedron(1, {HalfSpace({1}, Rational(1))}); }

// Coefficients of a one-variable polynomial, low to high.
std::vector<Rational> coefficients(const Polynomial& p) {
    std::vector<Rational> c(std::max(p.degree(), 0) + 1, Rational(0));
    for (const auto& [m, v] : p.coeffs()) c[m.empty() ? 0 : m[0]] = v;
    return c;
}

Float50 to_float50(const Rational& q) {
    return Float50(numerator(q).str()) / Float50(denominator(q).str());
}

template <class T>
bool negligible(const T& x, const T& eps) {
    return (x < 0 ? T(-x) : x) <= eps;
}

template <class T>
void trim(std::vector<T>& p, const T& eps) {
    while (p.size() > 1 && negligible(p.back(), eps)) p.pop_back();
}

template <class T>
T horner(const std::vector<T>& p, const T& x) {
    T s = 0;
    for (size_t i = p.size(); i-- > 0;) s = s * x + p[i];
    return s;
}

template <class T>
std::vector<T> poly_derivative(const std::vector<T>& p) {
    if (p.size() <= 1) return {T(0)};
    std::vector<T> d(p.size() - 1);
    for (size_t i = 1; i < p.size(); ++i) d[i - 1] = p[i] * T(static_cast<long>(i));
    return d;
}

template <class T>
std::vector<T> poly_remainder(std::vector<T> a, const std::vector<T>& b, const T& eps) {
    while (a.size() >= b.size() && !(a.size() == 1 && negligible(a[0], eps))) {
        T q = a.back() / b.back();
        size_t shift = a.size() - b.size();
        for (size_t i = 0; i < b.size(); ++i) a[shift + i] -= q * b[i];
        a.pop_back();
        if (a.empty()) {
            a.push_back(T(0));
            break;
        }
        trim(a, eps);
    }
    return a;
}

template <class T>
std::vector<std::vector<T>> sturm_chain(const std::vector<T>& p, const T& eps) {
    std::vector<std::vector<T>> chain{p};
    if (p.size() <= 1) return chain;
    chain.push_back(poly_derivative(p));
    trim(chain.back(), eps);
    while (chain.back().size() > 1) {
        auto r = poly_remainder(chain[chain.size() - 2], chain.back(), eps);
        if (r.size() == 1 && negligible(r[0], eps)) break;
        for (auto& c : r) c = -c;
        chain.push_back(std::move(r));
    }
    return chain;
}

int sign_changes(const std::vector<int>& signs) {
    int changes = 0, last = 0;
    for (int s : signs) {
        if (s == 0) continue;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return changes;
}

// Sign variations of the chain at x, or at +inf when x is empty.
template <class T>
int variations(const std::vector<std::vector<T>>& chain, const std::optional<T>& x) {
    std::vector<int> signs;
    for (const auto& q : chain) {
        T v = x ? horner(q, *x) : q.back();
        signs.push_back(v > 0 ? 1 : v < 0 ? -1 : 0);
    }
    return sign_changes(signs);
}

template <class T>
int count_roots(const std::vector<std::vector<T>>& chain, const T& a, const std::optional<T>& b) {
    return variations<T>(chain, a) - variations<T>(chain, b);
}

// Quotient of p by (x + 1), coefficients low to high.
template <class T>
std::vector<T> divide_by_x_plus_one(const std::vector<T>& p) {
    std::vector<T> q(p.size() - 1);
    T acc = 0;
    for (size_t i = p.size(); i-- > 1;) {
        acc = p[i] - acc;
        q[i - 1] = acc;
    }
    return q;
}

template <class T>
T cauchy_bound(const std::vector<T>& q) {
    T bound = 1;
    for (size_t i = 0; i + 1 < q.size(); ++i) {
        T r = q[i] / q.back();
        if (r < 0) r = -r;
        if (r + 1 > bound) bound = r + 1;
    }
    return bound;
}

// Smallest root in (lo, hi], located by bisection on Sturm counts.
template <class T, class Make>
double smallest_root(const std::vector<std::vector<T>>& chain, T lo, T hi, Make make) {
    for (int it = 0; it < 200; ++it) {
        double dl = static_cast<double>(lo), dh = static_cast<double>(hi);
        double mid = 0.5 * (dl + dh);
        if (!(mid > dl && mid < dh)) break;
        T m = make(mid);
        if (count_roots<T>(chain, lo, m) > 0)
            hi = m;
        else
            lo = m;
    }
    return static_cast<double>(hi);
}

std::optional<double> first_nonpositive_on(const std::function<double(double)>& f, double x_max) {
    const double h = 0.01;
    for (int i = 1; -1.0 + i * h <= x_max + 1e-12; ++i) {
        double x = -1.0 + i * h;
        if (!(f(x) > 0.0)) return x;
    }
    return std::nullopt;
}

template <class F>
double gk(F f, double a, double b) {
    return gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

void set_exact_parts(ProfileSolution& s) {
    auto n0 = std::make_shared<Weight>(s.vtheta);
    auto n1 = std::make_shared<Weight>(n0->differentiate(0));
    auto n2 = std::make_shared<Weight>(n1->differentiate(0));
    s.vtheta_fn = [n0](double x) { return n0->eval(&x); };
    s.vtheta_d1 = [n1](double x) { return n1->eval(&x); };
    s.vtheta_d2 = [n2](double x) { return n2->eval(&x); };
}

void set_boundary(ProfileSolution& s) {
    double m1 = -1.0;
    double vm = s.v.eval(&m1);
    s.theta_at_minus_one = s.vtheta_fn(-1.0) / vm;
    s.theta_slope_residual = s.vtheta_d1(-1.0) / vm - 2.0;
    s.first_nonpositive = first_nonpositive_on(s.vtheta_fn, 50.0);
}

std::optional<Weight> theta_closed_form(const Weight& v, const Weight& vtheta) {
    if (v.terms().size() != 1 || !v.terms()[0].poly.is_constant() || !v.terms()[0].factors.empty()) return std::nullopt;
    const auto& t = v.terms()[0];
    return vtheta * Weight::exponential(RatVec{-t.decay[0]}, -t.shift) * (1 / t.poly.constant_term());
}

bool boundary_identities(const ProfileSolution& s) {
    ExpLinear vm1 = s.v.eval_exact(at(-1));
    return s.vtheta.eval_exact(at(-1)).is_zero() &&
           (s.vtheta.differentiate(0).eval_exact(at(-1)) - vm1 * Rational(2)).is_zero();
}

}  // namespace

Weight antiderivative_1d(const Weight& w) {
    if (w.dim() != 1) throw InvalidInput("antiderivative needs a one-variable weight");
    std::vector<WeightTerm> out;
    for (const auto& t : w.terms()) {
        if (!t.factors.empty()) throw InvalidInput("antiderivative needs a weight without negative factors");
        const Rational& lam = t.decay[0];
        Polynomial a(1);
        if (lam == 0) {
            for (const auto& [m, c] : t.poly.coeffs()) {
                int e = m.empty() ? 0 : m[0];
                a.add_term({e + 1}, c / (e + 1));
            }
        } else {
            // d/dx [q e^{-lam x}] = (q' - lam q) e^{-lam x}; q = -sum_j p^(j) / lam^(j+1)
            Polynomial d = t.poly;
            Rational scale = -1 / lam;
            while (!d.is_zero()) {
                a += d * scale;
                scale /= lam;
                d = d.derivative(0);
            }
        }
        out.push_back(WeightTerm{a, {}, t.decay, t.shift});
    }
    return Weight(1, std::move(out));
}

Weight constant_weight(const ExpLinear& c) {
    std::vector<WeightTerm> out;
    for (const auto& [q, coef] : c.terms())
        out.push_back(WeightTerm{Polynomial::constant(1, coef), {}, RatVec{Rational(0)}, Rational(-q)});
    return Weight(1, std::move(out));
}

double ProfileSolution::theta(double x) const { return vtheta_fn(x) / v.eval(&x); }

void ProfileSolution::theta_jet(double x, double* out) const {
    double n0 = vtheta_fn(x), n1 = vtheta_d1(x), n2 = vtheta_d2(x);
    WeightJet jet(v);
    double vv, g, h;
    jet.eval(&x, vv, &g, &h);
    double q1 = (n1 * vv - n0 * g) / (vv * vv);
    out[0] = n0 / vv;
    out[1] = q1;
    out[2] = (n2 - 2.0 * g * q1 - out[0] * h) / vv;
}

ProfileSolution profile_solve(const Weight& v, const Weight& w) {
    if (v.dim() != 1 || w.dim() != 1) throw InvalidInput("profile weights must be one-variable");
    auto pos = check_positive(v, half_line());
    if (!pos.positive)
        throw PoleOnDomain("v is not positive on [-1, inf), min " + std::to_string(pos.min_value));
    ProfileSolution s;
    s.v = v;
    s.w = w;
    if (!w.has_negative_factors() && !v.has_negative_factors()) {
        s.exact = true;
        Polynomial x = x_poly();
        Weight aw = antiderivative_1d(w);
        Weight atw = antiderivative_1d(w * x);
        Weight iw = aw - constant_weight(aw.eval_exact(at(-1)));
        Weight itw = atw - constant_weight(atw.eval_exact(at(-1)));
        Weight lin = constant_weight(v.eval_exact(at(-1))) * (x + Polynomial::constant(1, 1)) * Rational(2);
        s.vtheta = lin - iw * x + itw;
        s.boundary_exact = boundary_identities(s);
        s.theta_exact = theta_closed_form(v, s.vtheta);
        set_exact_parts(s);
        set_boundary(s);
        return s;
    }
    auto wp = std::make_shared<Weight>(w);
    double m1 = -1.0;
    double vm1 = v.eval(&m1);
    s.vtheta_fn = [wp, vm1](double x) {
        if (x <= -1.0) return 0.0;
        return 2.0 * vm1 * (1.0 + x) - gk([&](double t) { return (x - t) * wp->eval(&t); }, -1.0, x);
    };
    s.vtheta_d1 = [wp, vm1](double x) {
        if (x <= -1.0) return 2.0 * vm1;
        return 2.0 * vm1 - gk([&](double t) { return wp->eval(&t); }, -1.0, x);
    };
    s.vtheta_d2 = [wp](double x) { return -wp->eval(&x); };
    set_boundary(s);
    return s;
}

ProfileSolution profile_solve_decaying(const Weight& v, const Weight& w, double tol) {
    if (w.has_negative_factors()) throw InvalidInput("tail antiderivatives need a weight without negative factors");
    for (const auto& t : w.terms())
        if (!(t.decay[0] > 0)) throw InvalidInput("w must decay exponentially");
    ExpLinear vm1 = v.eval_exact(at(-1));
    // F(1) and F(x) on [-1, inf)
    ExpLinear f1 = vm1 * Rational(2) - exact_1d(w, Rational(-1), std::nullopt);
    ExpLinear fx = vm1 * Rational(-2) - exact_1d(w * x_poly(), Rational(-1), std::nullopt);
    double scale = std::abs(vm1.to_double()) + 1.0;
    if (std::abs(f1.to_double()) > tol * scale || std::abs(fx.to_double()) > tol * scale)
        throw AffineFutakiNonzero("F(1) = " + std::to_string(f1.to_double()) +
                                  ", F(x) = " + std::to_string(fx.to_double()));

    ProfileSolution forward = profile_solve(v, w);
    ProfileSolution s = forward;
    s.vtheta = antiderivative_1d(w * x_poly()) - antiderivative_1d(w) * x_poly();
    s.boundary_exact = boundary_identities(s);
    s.theta_exact = theta_closed_form(v, s.vtheta);
    set_exact_parts(s);
    set_boundary(s);
    for (int i = 0; i <= 84; ++i) {
        double x = -1.0 + 0.25 * i;
        double a = s.vtheta_fn(x), b = forward.vtheta_fn(x);
        if (std::abs(a - b) > 1e-10 * (1.0 + std::abs(b)))
            throw ToleranceNotMet("tail and forward profiles disagree at x = " + std::to_string(x));
    }
    return s;
}

ProfileMetric profile_metric(const ProfileSolution& sol) {
    auto shared = std::make_shared<ProfileSolution>(sol);
    return ProfileMetric([shared](double x, double* h) { shared->theta_jet(x, h); });
}

int sturm_count(const std::vector<Rational>& p, const Rational& a, const std::optional<Rational>& b) {
    auto q = p;
    trim(q, Rational(0));
    if (q.size() == 1) return 0;
    return count_roots<Rational>(sturm_chain(q, Rational(0)), a, b);
}

ExistenceVerdict existence_verdict(const ProfileSolution& sol, double x_max) {
    ExistenceVerdict out;
    bool same_decay = sol.exact && !sol.vtheta.is_zero();
    bool same_shift = same_decay;
    if (same_decay) {
        const auto& t0 = sol.vtheta.terms()[0];
        for (const auto& t : sol.vtheta.terms()) {
            same_decay = same_decay && t.decay == t0.decay && t.factors.empty();
            same_shift = same_shift && t.shift == t0.shift;
        }
    }
    // The exponential factor is positive, so the sign is that of the polynomial part,
    // which vanishes at -1 and is divided by (x + 1) before counting.
    if (same_decay && same_shift) {
        out.method = "sturm-exact";
        Polynomial sum(1);
        for (const auto& t : sol.vtheta.terms()) sum += t.poly;
        auto c = coefficients(sum);
        trim(c, Rational(0));
        auto q = divide_by_x_plus_one(c);
        trim(q, Rational(0));
        auto chain = sturm_chain(q, Rational(0));
        out.exists = q.size() == 1 ? q[0] > 0 : count_roots<Rational>(chain, Rational(-1), std::nullopt) == 0;
        if (!out.exists && q.size() > 1)
            out.fails_at = smallest_root<Rational>(chain, Rational(-1), cauchy_bound(q),
                                                   [](double x) { return from_double(x); });
        return out;
    }
    if (same_decay) {
        out.method = "sturm-float";
        std::vector<Float50> c;
        for (const auto& t : sol.vtheta.terms()) {
            Float50 scale = exp(-to_float50(t.shift));
            auto pc = coefficients(t.poly);
            if (c.size() < pc.size()) c.resize(pc.size(), Float50(0));
            for (size_t i = 0; i < pc.size(); ++i) c[i] += to_float50(pc[i]) * scale;
        }
        Float50 mx = 0;
        for (const auto& x : c) mx = std::max(mx, Float50(abs(x)));
        Float50 eps = mx * Float50(1e-40);
        trim(c, eps);
        auto q = divide_by_x_plus_one(c);
        trim(q, eps);
        auto chain = sturm_chain(q, eps);
        out.exists = q.size() == 1 ? q[0] > 0 : count_roots<Float50>(chain, Float50(-1), std::nullopt) == 0;
        if (!out.exists && q.size() > 1)
            out.fails_at = smallest_root<Float50>(chain, Float50(-1), cauchy_bound(q),
                                                  [](double x) { return Float50(x); });
        return out;
    }
    out.method = "scan";
    out.fails_at = first_nonpositive_on(sol.vtheta_fn, x_max);
    out.exists = !out.fails_at;
    return out;
}

CreaseProfileResidual crease_profile_identity(const ProfileSolution& sol, const std::vector<Rational>& x0s,
                                              double rel_tol) {
    CreaseProfileResidual out;
    auto p = half_line();
    QuadOptions q;
    q.rel_tol = rel_tol;
    for (const auto& x0 : x0s) {
        auto f = PiecewiseLinear::f_x0(x0);
        double fut, prof;
        if (sol.exact) {
            ExpLinear fe = futaki_exact_1d(p, sol.v, sol.w, f);
            ExpLinear pe = x0 > -1 ? sol.vtheta.eval_exact(at(x0)) : ExpLinear();
            fut = fe.to_double();
            prof = pe.to_double();
            out.max_residual = std::max(out.max_residual, std::abs((fe - pe).to_double()));
        } else {
            fut = futaki(p, sol.v, sol.w, f, q).value;
            prof = x0 > -1 ? sol.vtheta_fn(to_double(x0)) : 0.0;
            out.max_residual = std::max(out.max_residual, std::abs(fut - prof));
        }
        out.futaki.push_back(fut);
        out.profile.push_back(prof);
    }
    return out;
}

LineBundleWeights line_bundle_weights(const Weight& v, const Weight& w, const std::vector<FibrationFactor>& data) {
    LineBundleWeights out;
    std::tie(out.v, out.w) = fibration_transform(v, w, data, half_line());
    for (const auto& f : data) out.base_curvatures.push_back(f.s);
    return out;
}

// ---------------------------------------------------------------------------
// Soliton profile on L^{+k}

namespace {

long double eval_ld(const std::vector<long double>& c, long double x) {
    long double s = 0;
    for (size_t i = c.size(); i-- > 0;) s = s * x + c[i];
    return s;
}

std::vector<long double> to_ld(const Polynomial& p) {
    std::vector<long double> out;
    for (const auto& c : coefficients(p)) out.push_back(static_cast<long double>(to_double(c)));
    return out;
}

struct LiIntegrand {
    std::vector<long double> r, num;
    long double slope;

    // (P u - F) / (P u F) = R / (P u num) with R = P u den - num
    explicit LiIntegrand(const LiProfile& prof) {
        Polynomial rp = Polynomial::variable(1, 0) * prof.denominator * prof.slope - prof.numerator;
        r = to_ld(rp);
        num = to_ld(prof.numerator);
        slope = static_cast<long double>(to_double(prof.slope));
        // deg R < deg num, so with u = 1/t the integrand times u^2 is R~(t) / (P num~(t))
        size_t m = num.size() - 1;
        r.resize(m, 0.0L);
        r_rev.assign(r.rbegin(), r.rend());
        num_rev.assign(num.rbegin(), num.rend());
    }
    long double operator()(long double u) const { return eval_ld(r, u) / (slope * u * eval_ld(num, u)); }
    long double reversed(long double t) const { return eval_ld(r_rev, t) / (slope * eval_ld(num_rev, t)); }

    std::vector<long double> r_rev, num_rev;
};

template <class F>
long double gk_ld(F f, long double a, long double b, unsigned depth = 10) {
    return gauss_kronrod<long double, 61>::integrate(f, a, b, depth, 1e-14L);
}

// The reversed integrand is a ratio of polynomials without cancellation; a few levels suffice
// and the relative tolerance is unreachable for small tails.
long double tail_of(const LiIntegrand& g, long double phi) {
    return gk_ld([&](long double t) { return g.reversed(t); }, 0.0L, 1.0L / phi, 3);
}

void require_positive_numerator(const LiProfile& prof, double a, double b) {
    auto c = coefficients(prof.numerator);
    Rational lo = from_double(std::min(a, b)), hi = from_double(std::max(a, b));
    bool bad = sturm_count(c, lo, hi) > 0 || prof.numerator.eval(RatVec{lo}) <= 0;
    if (bad) throw PoleOnDomain("F vanishes on [" + std::to_string(a) + ", " + std::to_string(b) + "]");
}

}  // namespace

double LiProfile::F(double phi) const { return numerator.eval(&phi) / denominator.eval(&phi); }

long double LiProfile::F_ld(long double phi) const { return eval_ld(to_ld(numerator), phi) / eval_ld(to_ld(denominator), phi); }

LiProfile li_profile(int d, int k, const Rational& tau, const Rational& kappa, const Rational& mu) {
    if (d < 1 || k < 1) throw InvalidInput("need d >= 1 and k >= 1");
    if (!(tau > 0) || !(kappa > 0) || !(mu > 0)) throw InvalidInput("need tau, kappa, mu > 0");
    LiProfile out;
    out.d = d;
    out.k = k;
    out.tau = tau;
    out.kappa = kappa;
    out.mu = mu;
    out.p = tau - k * kappa;
    Polynomial phi = Polynomial::variable(1, 0);
    Polynomial one = Polynomial::constant(1, 1);
    Polynomial base = one + phi * kappa;
    out.h = base.pow(d) * phi.pow(k) * tau - base.pow(d + 1) * phi.pow(k - 1) * Rational(k);
    Polynomial num(1), hj = out.h;
    Rational mpow = mu;
    for (int j = 0; j <= d + k; ++j) {
        num += hj * (1 / mpow);
        hj = hj.derivative(0);
        mpow *= mu;
    }
    out.numerator = num;
    out.denominator = base.pow(d) * phi.pow(k - 1);

    // num = (slope phi + offset) den + remainder
    auto a = coefficients(out.numerator);
    auto b = coefficients(out.denominator);
    std::vector<Rational> quotient(a.size() >= b.size() ? a.size() - b.size() + 1 : 1, Rational(0));
    while (a.size() >= b.size() && !(a.size() == 1 && a[0] == 0)) {
        Rational q = a.back() / b.back();
        size_t shift = a.size() - b.size();
        quotient[shift] = q;
        for (size_t i = 0; i < b.size(); ++i) a[shift + i] -= q * b[i];
        a.pop_back();
        if (a.empty()) break;
    }
    out.slope = quotient.size() > 1 ? quotient[1] : Rational(0);
    out.offset = quotient[0];

    if (mu != 1) out.flags.push_back("mu != 1: literal formula, slope p/mu differs from p");
    if (k >= 2) out.flags.push_back("k >= 2: asymptotics unproven");
    if (out.p <= 0) out.flags.push_back("p <= 0: outside the shrinker regime");
    return out;
}

double li_G(const LiProfile& prof, double phi0, double phi) {
    if (phi == phi0) return 0.0;
    if (!(prof.slope > 0)) throw InvalidInput("li_G needs p > 0");
    require_positive_numerator(prof, phi0, phi);
    LiIntegrand g(prof);
    if (phi0 <= 0 || phi <= 0) return static_cast<double>(gk_ld(g, phi0, phi));
    // u = e^y spreads the long range evenly
    auto f = [&](long double y) {
        long double u = std::exp(y);
        return g(u) * u;
    };
    return static_cast<double>(gk_ld(f, std::log(static_cast<long double>(phi0)), std::log(static_cast<long double>(phi))));
}

long double li_tail(const LiProfile& prof, long double phi) {
    if (!(prof.slope > 0)) throw InvalidInput("li_tail needs p > 0");
    return tail_of(LiIntegrand(prof), phi);
}

double li_envelope(const LiProfile& prof, double big_phi) {
    double p = to_double(prof.slope), c = std::abs(to_double(prof.offset));
    if (!(p * big_phi > c)) return std::numeric_limits<double>::infinity();
    return std::abs(std::log1p(-c / (p * big_phi))) / p;
}

LiC0 li_C0(const LiProfile& prof, double phi0) {
    LiC0 out;
    out.cutoff = std::max(1e4, 100.0 * phi0);
    double p = to_double(prof.slope);
    out.offset = prof.F(out.cutoff) - p * out.cutoff;
    require_positive_numerator(prof, phi0, 1e12);
    out.c0 = static_cast<double>(static_cast<long double>(li_G(prof, phi0, out.cutoff)) + li_tail(prof, out.cutoff));
    out.tail_bound = li_envelope(prof, out.cutoff);
    return out;
}

LiDecayReport li_decay_check(const LiProfile& prof, double phi0, double s0, double s_lo, double s_hi, int points) {
    LiDecayReport out;
    out.flags = prof.flags;
    if (prof.k != 1) out.flags.push_back("k != 1: decay rate not established");
    const long double P = static_cast<long double>(to_double(prof.slope));
    if (!(P > 0.5L)) throw InvalidInput("li_decay_check needs p > 1/2");
    if (points < 2 || !(s_hi > s_lo) || !(s_lo > 0)) throw InvalidInput("bad s range");

    LiC0 c0 = li_C0(prof, phi0);
    const long double C0 = static_cast<long double>(li_G(prof, phi0, c0.cutoff)) + li_tail(prof, c0.cutoff);
    out.c0 = static_cast<double>(C0);
    const long double A = phi0 * std::pow(static_cast<long double>(s0), -P);
    const long double D0 = P / (2 * P - 1) * A * std::exp(-C0);
    out.d0 = static_cast<double>(D0);

    LiIntegrand integrand(prof);
    auto G = [&](long double phi) -> long double {
        if (phi >= c0.cutoff) return C0 - tail_of(integrand, phi);
        return static_cast<long double>(li_G(prof, phi0, static_cast<double>(phi)));
    };

    std::vector<double> log_rho, log_e;
    for (int i = 0; i < points; ++i) {
        long double s = std::exp(std::log(static_cast<long double>(s_lo)) +
                                 (std::log(static_cast<long double>(s_hi)) - std::log(static_cast<long double>(s_lo))) *
                                     i / (points - 1));
        long double target = A * std::pow(s, P);
        long double phi = target * std::exp(-C0);
        long double res = 0;
        int it = 0;
        for (; it < 500; ++it) {
            long double next = target * std::exp(-G(phi));
            res = std::abs(next - phi) / phi;
            phi = 0.5L * phi + 0.5L * next;
            if (res < 1e-15L) break;
        }
        res = std::abs(target * std::exp(-G(phi)) - phi) / phi;
        if (res > 1e-12L)
            throw FixedPointDiverged("phi(s) residual " + std::to_string(static_cast<double>(res)) + " at s = " +
                                     std::to_string(static_cast<double>(s)));
        long double cone = (2 * P - 1) * D0 * std::pow(s, P - 1);
        long double e = std::abs(prof.F_ld(phi) / s - cone) / cone;
        out.s.push_back(static_cast<double>(s));
        out.phi.push_back(static_cast<double>(phi));
        out.e.push_back(static_cast<double>(e));
        out.residual.push_back(static_cast<double>(res));
        out.max_residual = std::max(out.max_residual, static_cast<double>(res));
        if (i > 0 && !(out.e[i] < out.e[i - 1])) out.monotone = false;
        log_rho.push_back(static_cast<double>(P / 2 * std::log(s)));
        log_e.push_back(std::log(static_cast<double>(e)));
    }
    double mx = 0, my = 0;
    for (size_t i = 0; i < log_rho.size(); ++i) {
        mx += log_rho[i];
        my += log_e[i];
    }
    mx /= log_rho.size();
    my /= log_e.size();
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < log_rho.size(); ++i) {
        sxy += (log_rho[i] - mx) * (log_e[i] - my);
        sxx += (log_rho[i] - mx) * (log_rho[i] - mx);
    }
    out.slope = sxy / sxx;
    return out;
}

}  // namespace toricwk
