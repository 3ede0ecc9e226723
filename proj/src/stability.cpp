#include "toricwk/stability.hpp"

#include "toricwk/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

namespace toricwk {

namespace {

bool is_zero_poly(const Polynomial& p) { return p.is_constant() && p.constant_term() == 0; }

Polynomial coordinate(int n, int i) {
    RatVec b(n, Rational(0));
    b[i] = 1;
    return Polynomial::affine(b, Rational(0));
}

// Sum over regions of int (region) g * l_k, optionally cut by an extra half-space.
IntegralResult integrate_pieces(const Decomposition& d, const Weight& g, const QuadOptions& opts,
                                const std::optional<HalfSpace>& cut = std::nullopt, const ExtraFactor* extra = nullptr) {
    IntegralResult total;
    for (const auto& r : d.regions) {
        Polynomial l = d.reduced.pieces()[r.piece].polynomial();
        if (is_zero_poly(l)) continue;
        Polyhedron dom = r.domain;
        if (cut) {
            auto hs = dom.halfspaces();
            hs.push_back(*cut);
            dom = Polyhedron(dom.dim(), hs);
            if (!has_interior(dom)) continue;
        }
        Weight gl = g * l;
        if (gl.is_zero()) continue;
        total += integrate_interior(dom, gl, opts, extra);
    }
    return total;
}

RatVec rationalize(const std::vector<double>& x, long den) {
    RatVec out;
    for (double v : x) out.emplace_back(static_cast<long>(std::lround(v * den)), den);
    return out;
}

Rational rationalize(double x, long den = 1024) { return Rational(static_cast<long>(std::lround(x * den)), den); }

std::vector<RatVec> crease_directions(const Polyhedron& p, int per_quarter) {
    int n = p.dim();
    std::vector<RatVec> cand;
    if (n == 1) {
        cand = {RatVec{Rational(-1)}, RatVec{Rational(1)}};
    } else if (n == 2) {
        int total = 4 * std::max(1, per_quarter);
        for (int k = 0; k < total; ++k) {
            double t = 2.0 * std::numbers::pi * k / total;
            cand.push_back(rationalize({std::cos(t), std::sin(t)}, 64));
        }
    } else {
        int count = 1;
        for (int i = 0; i < n; ++i) count *= 3;
        for (int m = 0; m < count; ++m) {
            RatVec b(n);
            int r = m;
            bool any = false;
            for (int i = 0; i < n; ++i) {
                b[i] = r % 3 - 1;
                r /= 3;
                any = any || b[i] != 0;
            }
            if (any) cand.push_back(b);
        }
    }
    std::vector<RatVec> out;
    for (auto& b : cand)
        if (!is_zero(b) && is_admissible(PiecewiseLinear::simple_crease(b, Rational(0)), p)) out.push_back(b);
    return out;
}

double sampled_growth(const Polyhedron& p, const Weight& hint, const std::function<double(const double*)>& f,
                      double degree) {
    auto t = truncate(p, truncation_direction(p, hint, {}), Rational(20));
    int per = p.dim() == 1 ? 200 : p.dim() == 2 ? 25 : 8;
    double c = 0.0;
    for (const auto& x : interior_grid(t, per)) {
        double r = 0.0;
        for (double xi : x) r += xi * xi;
        c = std::max(c, std::abs(f(x.data())) / std::pow(1.0 + std::sqrt(r), degree));
    }
    return 2.0 * c + 1e-12;
}

}  // namespace

IntegralResult futaki(const Polyhedron& p, const Weight& v, const Weight& w, const PiecewiseLinear& f,
                      const QuadOptions& opts) {
    auto d = regions_and_creases(f, p);
    const int m = static_cast<int>(p.halfspaces().size());
    IntegralResult total = integrate_pieces(d, w, opts).scaled(-1.0);
    for (const auto& r : d.regions) {
        Polynomial l = d.reduced.pieces()[r.piece].polynomial();
        if (is_zero_poly(l)) continue;
        Weight vl = v * l;
        for (const auto& facet : facet_atlas(r.domain))
            if (facet.parent_index < m) total += integrate_section(facet, vl, opts).scaled(2.0);
    }
    return total;
}

IntegralResult futaki(const Polyhedron& p, const Weight& v, const Weight& w, const ExtraFactor& f,
                      const QuadOptions& opts) {
    IntegralResult total = integrate_boundary(p, v, opts, &f).scaled(2.0);
    total += integrate_interior(p, w, opts, &f).scaled(-1.0);
    return total;
}

ExpLinear futaki_exact_1d(const Polyhedron& p, const Weight& v, const Weight& w, const PiecewiseLinear& f) {
    if (p.dim() != 1) throw InvalidInput("exact Futaki invariant needs a one-dimensional polyhedron");
    auto d = regions_and_creases(f, p);
    const int m = static_cast<int>(p.halfspaces().size());
    ExpLinear total;
    for (const auto& r : d.regions) {
        const auto& piece = d.reduced.pieces()[r.piece];
        Polynomial l = piece.polynomial();
        if (is_zero_poly(l)) continue;
        auto verts = vertices(r.domain);
        Cone rc = recession_cone(r.domain);
        Weight wl = w * l;
        if (rc.is_zero()) {
            total -= exact_1d(wl, verts.front()[0], verts.back()[0]);
        } else if (rc.generators.size() == 1 && rc.generators[0][0] > 0) {
            total -= exact_1d(wl, verts.front()[0], std::nullopt);
        } else if (rc.generators.size() == 1) {
            Weight flipped = wl.substitute(RatVec{Rational(0)}, {RatVec{Rational(-1)}});
            total -= exact_1d(flipped, -verts.front()[0], std::nullopt);
        } else {
            throw DivergentIntegral("region is the whole line");
        }
        for (const auto& facet : facet_atlas(r.domain)) {
            if (facet.parent_index >= m) continue;
            total += v.eval_exact(facet.origin) * (piece.eval(facet.origin) * facet.measure_scale * 2);
        }
    }
    return total;
}

AffineFutaki futaki_affine(const Polyhedron& p, const Weight& v, const Weight& w, const QuadOptions& opts,
                           double rel_tol) {
    int n = p.dim();
    AffineFutaki out;
    out.values.push_back(futaki(p, v, w, PiecewiseLinear::affine(RatVec(n, Rational(0)), Rational(1)), opts));
    for (int i = 0; i < n; ++i) {
        RatVec b(n, Rational(0));
        b[i] = 1;
        out.values.push_back(futaki(p, v, w, PiecewiseLinear::affine(b, Rational(0)), opts));
    }
    for (const auto& r : out.values) out.scale = std::max(out.scale, r.magnitude);
    out.tol = rel_tol * out.scale;
    for (const auto& r : out.values)
        if (std::abs(r.value) > out.tol + r.total_error()) out.vanishes = false;
    return out;
}

std::vector<IntegralResult> futaki_v_vector(const Polyhedron& p, const Weight& v, const QuadOptions& opts) {
    std::vector<IntegralResult> out;
    for (int i = 0; i < p.dim(); ++i) out.push_back(integrate_interior(p, v * coordinate(p.dim(), i), opts));
    return out;
}

SolitonIdentityReport soliton_futaki_identity_check(const Polyhedron& p, const Weight& v, const QuadOptions& opts,
                                                    double rel_tol) {
    int n = p.dim();
    Weight w = soliton_weight(v, n);
    SolitonIdentityReport rep;
    for (int i = -1; i < n; ++i) {
        Polynomial l = i < 0 ? Polynomial::constant(n, Rational(1)) : coordinate(n, i);
        auto lhs = integrate_interior(p, w * l, opts);
        auto rhs = integrate_boundary(p, v * l, opts).scaled(2.0);
        if (i >= 0) rhs += integrate_interior(p, v * l, opts).scaled(-2.0);
        double err = std::abs(lhs.value - rhs.value);
        double allow = rel_tol * (lhs.magnitude + rhs.magnitude) + lhs.total_error() + rhs.total_error();
        rep.lhs.push_back(lhs.value);
        rep.rhs.push_back(rhs.value);
        rep.error.push_back(err);
        if (err > allow) rep.holds = false;
    }
    rep.anticanonical = is_anticanonical(p);
    rep.consistent = rep.holds == rep.anticanonical;
    return rep;
}

double normalize_w_scale(const Polyhedron& p, const Weight& v, const Weight& w, const QuadOptions& opts) {
    auto b = integrate_boundary(p, v, opts);
    auto i = integrate_interior(p, w, opts);
    if (i.value == 0.0 || std::abs(i.value) <= i.total_error())
        throw ZeroDenominator("the interior integral of w vanishes within its error bound");
    return 2.0 * b.value / i.value;
}

double c_lambda_integral(double lambda, double c) {
    using boost::math::quadrature::gauss_kronrod;
    auto f = [lambda, c](double x) {
        double x2 = x * x;
        return x / (c + x2 * x2) * std::exp(-lambda * x);
    };
    double s = std::min(1.0, std::pow(c, 0.25));
    std::vector<double> cuts{-1.0};
    for (double t : {-4 * s, -s, 0.0, s, 4 * s})
        if (t > cuts.back() && t < 50.0) cuts.push_back(t);
    double total = 0.0;
    for (size_t k = 0; k + 1 < cuts.size(); ++k)
        total += gauss_kronrod<double, 61>::integrate(f, cuts[k], cuts[k + 1], 15, 1e-14);
    total += gauss_kronrod<double, 61>::integrate(f, cuts.back(), std::numeric_limits<double>::infinity(), 15, 1e-14);
    return total;
}

CLambda find_c_lambda(double lambda, double tol) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidInput("lambda must lie in (0, 1)");
    CLambda out;
    double prev_c = 1e-6, prev = c_lambda_integral(lambda, prev_c);
    for (int k = 1; k <= 48; ++k) {
        double c = std::pow(10.0, -6.0 + 0.25 * k);
        double val = c_lambda_integral(lambda, c);
        if ((prev < 0) != (val < 0)) {
            out.found = true;
            out.bracket_lo = prev_c;
            out.bracket_hi = c;
            double lo = std::log(prev_c), hi = std::log(c), flo = prev;
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (lo + hi);
                double fm = c_lambda_integral(lambda, std::exp(mid));
                out.iterations = it + 1;
                out.c = std::exp(mid);
                out.residual = fm;
                if (std::abs(fm) < tol && hi - lo < 1e-14) break;
                if ((fm < 0) == (flo < 0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
                if (hi - lo < 1e-15) break;
            }
            return out;
        }
        prev_c = c;
        prev = val;
    }
    return out;
}

QuarticExample quartic_example(const Rational& lambda, double c) {
    QuarticExample ex;
    ex.p = Polyhedron(2, {HalfSpace({1, 0}, Rational(1)), HalfSpace({0, 1}, Rational(1))});
    ex.lambda = lambda;
    ex.c = from_double(c);
    auto x1 = Polynomial::variable(2, 0), x2 = Polynomial::variable(2, 1);
    auto one = Polynomial::constant(2, Rational(1));
    ex.v = Weight::exponential(RatVec{Rational(1), Rational(1)}) * (x1 * x1 * x2 * x2 + one);
    auto cc = Polynomial::constant(2, ex.c);
    ex.w = Weight::power(cc + x1.pow(4), -1) * Weight::power(cc + x2.pow(4), -1) *
           Weight::exponential(RatVec{lambda, lambda});
    return ex;
}

std::string to_string(VerdictKind k) {
    switch (k) {
        case VerdictKind::NoDestabilizerFound: return "NoDestabilizerFound";
        case VerdictKind::Destabilizer: return "Destabilizer";
        case VerdictKind::AffineObstruction: return "AffineObstruction";
    }
    return "";
}

StabilityVerdict semistability_scan(const Polyhedron& p, const Weight& v, const Weight& w, const ScanOptions& opts) {
    const int n = p.dim();
    StabilityVerdict verdict;
    auto aff = futaki_affine(p, v, w, opts.quad, opts.affine_rel_tol);
    for (const auto& r : aff.values) verdict.affine.push_back(r.value);
    if (!aff.vanishes) {
        verdict.kind = VerdictKind::AffineObstruction;
        return verdict;
    }

    auto evaluate = [&](const std::string& family, std::vector<double> params, const PiecewiseLinear& f) {
        auto r = futaki(p, v, w, f, opts.quad);
        ScanEntry e{family, std::move(params), r.value, r.total_error(), false};
        e.certified = r.value + r.total_error() < 0.0 && r.converged && r.tail_certified;
        verdict.log.push_back(e);
        if (e.certified && verdict.kind != VerdictKind::Destabilizer) {
            verdict.kind = VerdictKind::Destabilizer;
            verdict.destabilizer = f;
            verdict.family = family;
            verdict.value = r.value;
            verdict.error = r.total_error();
        }
        return e;
    };
    auto done = [&] { return verdict.kind == VerdictKind::Destabilizer; };

    struct Best {
        RatVec b;
        double a = 0.0;
        double value = std::numeric_limits<double>::infinity();
    };
    std::vector<Best> best_per_direction;
    double step = opts.offsets > 1 ? 2.0 * opts.r0 / (opts.offsets - 1) : opts.r0;

    if (opts.creases) {
        for (const auto& b : crease_directions(p, opts.directions)) {
            double bn = norm(b);
            Best best{b};
            auto crease_at = [&](double a) {
                Rational ar = rationalize(a * bn);
                std::vector<double> params = to_double(b);
                params.push_back(to_double(ar));
                auto e = evaluate("crease", params, PiecewiseLinear::simple_crease(b, ar));
                if (e.value < best.value) {
                    best.value = e.value;
                    best.a = a;
                }
                return e.value;
            };
            for (int k = 0; k < opts.offsets && !done(); ++k) crease_at(-opts.r0 + k * step);
            // Golden-section refinement around the best offset.
            double lo = best.a - step, hi = best.a + step;
            const double g = (std::sqrt(5.0) - 1.0) / 2.0;
            double c1 = hi - g * (hi - lo), c2 = lo + g * (hi - lo);
            double f1 = done() ? 0 : crease_at(c1), f2 = done() ? 0 : crease_at(c2);
            for (int it = 0; it < opts.golden_steps && !done(); ++it) {
                if (f1 < f2) {
                    hi = c2;
                    c2 = c1;
                    f2 = f1;
                    c1 = hi - g * (hi - lo);
                    f1 = crease_at(c1);
                } else {
                    lo = c1;
                    c1 = c2;
                    f1 = f2;
                    c2 = lo + g * (hi - lo);
                    f2 = crease_at(c2);
                }
            }
            best_per_direction.push_back(best);
            if (done()) return verdict;
        }
    }

    if (opts.rays) {
        Cone rc = recession_cone(p);
        std::vector<RatVec> dirs;
        for (const auto& g : rc.generators) dirs.push_back(to_rat(g));
        if (dirs.size() > 1) {
            RatVec s(n, Rational(0));
            for (const auto& d : dirs)
                for (int i = 0; i < n; ++i) s[i] += d[i];
            dirs.push_back(s);
        }
        std::vector<double> radii = opts.radii;
        if (radii.empty())
            for (int r = 2; r <= 160; r += 2) radii.push_back(r);
        for (const auto& d : dirs) {
            std::optional<double> last_nonneg;
            for (double r : radii) {
                std::vector<double> params = to_double(d);
                params.push_back(r);
                auto e = evaluate("ray", params, PiecewiseLinear::f_r(d, rationalize(r)));
                if (e.certified) {
                    verdict.sign_flip = std::make_pair(last_nonneg.value_or(r), r);
                    return verdict;
                }
                if (e.value >= 0.0) last_nonneg = r;
            }
        }
    }

    if (opts.multi_crease && best_per_direction.size() >= 2) {
        std::sort(best_per_direction.begin(), best_per_direction.end(),
                  [](const Best& x, const Best& y) { return x.value < y.value; });
        Best c1 = best_per_direction[0], c2 = best_per_direction[1];
        auto build = [&](double a1, double a2) {
            return PiecewiseLinear(n, {AffineForm{RatVec(n, Rational(0)), Rational(0)},
                                       AffineForm{c1.b, rationalize(a1 * norm(c1.b))},
                                       AffineForm{c2.b, rationalize(a2 * norm(c2.b))}});
        };
        double a1 = c1.a, a2 = c2.a;
        auto eval2 = [&](double x, double y) {
            std::vector<double> params = to_double(c1.b);
            auto b2 = to_double(c2.b);
            params.insert(params.end(), b2.begin(), b2.end());
            params.push_back(x);
            params.push_back(y);
            return evaluate("two-crease", params, build(x, y)).value;
        };
        double cur = eval2(a1, a2);
        double h = step;
        for (int round = 0; round < opts.descent_rounds && !done(); ++round) {
            for (int coord = 0; coord < 2 && !done(); ++coord) {
                for (double s : {-h, h}) {
                    double x = a1 + (coord == 0 ? s : 0.0), y = a2 + (coord == 1 ? s : 0.0);
                    double val = eval2(x, y);
                    if (done()) break;
                    if (val < cur) {
                        cur = val;
                        a1 = x;
                        a2 = y;
                    }
                }
            }
            h *= 0.5;
        }
    }
    return verdict;
}

LambdaEstimate uniform_lambda_estimate(const Polyhedron& p, const Weight& v, const Weight& w, double beta, double gamma,
                                       double k, const std::vector<PiecewiseLinear>& family, const QuadOptions& opts,
                                       const std::vector<double>& delta_grid) {
    if (gamma < beta) throw InvalidInput("gamma must be at least beta");
    auto decay = v.common_decay();
    auto shared_v = std::make_shared<Weight>(v);

    // int over the pieces of f v^e, optionally beyond <b,x> >= delta.
    auto power_integral = [&](const Decomposition& d, double e, const std::optional<HalfSpace>& cut) {
        if (e == 1.0) return integrate_pieces(d, v, opts, cut);
        if (!decay) throw InvalidInput("fractional powers of v need a common exponential decay");
        RatVec lam = *decay;
        for (auto& x : lam) x *= rationalize(e, 1 << 20);
        Weight base = Weight::exponential(lam);
        ExtraFactor ex;
        ex.f = [shared_v, base, e](const double* x) { return std::pow(std::abs(shared_v->eval(x)), e) / base.eval(x); };
        ex.growth_degree = 1.0 + std::ceil(e * 4.0);
        ex.growth_c = sampled_growth(p, v, ex.f, ex.growth_degree);
        auto r = integrate_pieces(d, base, opts, cut, &ex);
        r.tail_certified = false;
        return r;
    };

    RatVec b = truncation_direction(p, v, opts);
    LambdaEstimate out;
    out.estimate = std::numeric_limits<double>::infinity();
    for (const auto& f : family) {
        PiecewiseLinear g = normalize_star(f);
        bool trivial = std::all_of(g.pieces().begin(), g.pieces().end(),
                                   [](const AffineForm& a) { return is_zero(a.b) && a.c == 0; });
        if (trivial) {
            ++out.excluded;
            continue;
        }
        auto d = regions_and_creases(g, p);
        LambdaSample s{g};
        s.futaki = futaki(p, v, w, g, opts).value;
        s.denominator = power_integral(d, gamma, std::nullopt).value;
        if (!(s.denominator > 0.0)) {
            ++out.excluded;
            continue;
        }
        s.ratio = s.futaki / s.denominator;
        for (double delta : delta_grid) {
            RatVec nb = b;
            auto cut = HalfSpace::from_form(nb, -rationalize(delta));
            s.k_constant = std::max(s.k_constant, delta * power_integral(d, beta, cut).value);
        }
        s.member = s.k_constant <= k;
        if (s.member) out.estimate = std::min(out.estimate, s.ratio);
        out.samples.push_back(std::move(s));
    }
    if (!std::isfinite(out.estimate)) throw EmptyFamily("no sample of the family lies in the normalized class");
    return out;
}

CreaseIdentity crease_identity_check(const Polyhedron& p, const Weight& v, const Weight& w,
                                     const SymplecticPotential& u, const PiecewiseLinear& f, const QuadOptions& opts,
                                     double abreu_tol) {
    CreaseIdentity out;
    PotentialMetric metric(u);
    WeightJet jet(v);
    auto t = truncate(p, truncation_direction(p, v, opts), Rational(5));
    double worst = 0.0, scale = 0.0;
    for (const auto& x : interior_grid(t, p.dim() == 1 ? 9 : 5)) {
        double target = w.eval(x.data());
        worst = std::max(worst, std::abs(abreu_scal_v(metric, jet, x.data()) - target));
        scale = std::max(scale, std::abs(target));
    }
    out.abreu_residual = worst / std::max(scale, 1e-300);
    if (out.abreu_residual > abreu_tol) throw NotASolution("potential does not solve the Abreu equation for (v, w)");

    out.futaki = futaki(p, v, w, f, opts).value;
    auto d = regions_and_creases(f, p);
    auto shared_u = std::make_shared<SymplecticPotential>(u);
    for (const auto& c : d.creases) {
        auto db = to_double(c.difference.b);
        ExtraFactor ex;
        ex.f = [shared_u, db](const double* x) {
            Eigen::Map<const Eigen::VectorXd> e(db.data(), static_cast<Eigen::Index>(db.size()));
            return e.dot(hessian_data(*shared_u, x, 0).H * e);
        };
        ex.growth_degree = 1.0;
        ex.growth_c = sampled_growth(p, v, ex.f, 1.0);
        double term = integrate_section(c.section, v, opts, &ex).value;
        out.crease_terms.push_back(term);
        out.crease_sum += term;
    }
    out.residual = std::abs(out.futaki - out.crease_sum);
    return out;
}

}  // namespace toricwk
