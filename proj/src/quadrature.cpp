#include "toricwk/quadrature.hpp"

#include "toricwk/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <thread>

namespace toricwk {

IntegralResult& IntegralResult::operator+=(const IntegralResult& o) {
    value += o.value;
    abs_error_bound += o.abs_error_bound;
    tail_bound += o.tail_bound;
    cells_used += o.cells_used;
    converged = converged && o.converged;
    tail_certified = tail_certified && o.tail_certified;
    delta_star = std::max(delta_star, o.delta_star);
    magnitude += o.magnitude;
    return *this;
}

IntegralResult IntegralResult::scaled(double s) const {
    IntegralResult r = *this;
    r.value *= s;
    r.abs_error_bound *= std::abs(s);
    r.tail_bound *= std::abs(s);
    r.magnitude *= std::abs(s);
    return r;
}

namespace {

std::pair<double, double> two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

std::pair<double, double> pairwise(const double* x, size_t n) {
    if (n == 0) return {0.0, 0.0};
    if (n == 1) return {x[0], 0.0};
    size_t h = n / 2;
    auto [sa, ca] = pairwise(x, h);
    auto [sb, cb] = pairwise(x + h, n - h);
    auto [s, e] = two_sum(sa, sb);
    return {s, ca + cb + e};
}

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn) {
    int t = threads <= 0 ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency())) : threads;
    if (t <= 1 || n < 64) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    t = static_cast<int>(std::min<size_t>(t, n));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(t);
    size_t chunk = (n + t - 1) / t;
    for (int k = 0; k < t; ++k) {
        pool.emplace_back([&, k] {
            try {
                size_t lo = k * chunk, hi = std::min(n, lo + chunk);
                for (size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

int affine_dim(const std::vector<RatVec>& pts, const std::vector<int>& idx) {
    if (idx.empty()) return -1;
    RatMat diffs;
    for (size_t k = 1; k < idx.size(); ++k) {
        RatVec d = pts[idx[k]];
        for (size_t i = 0; i < d.size(); ++i) d[i] -= pts[idx[0]][i];
        diffs.push_back(std::move(d));
    }
    return diffs.empty() ? 0 : rank(diffs);
}

void pull(const std::vector<RatVec>& pts, const std::vector<int>& face, int k, const Polyhedron& p,
          std::vector<RatVec>& prefix, std::vector<std::vector<RatVec>>& out) {
    if (k == 0) {
        auto s = prefix;
        s.push_back(pts[face[0]]);
        out.push_back(std::move(s));
        return;
    }
    int apex = face[0];
    for (int i : face)
        if (pts[i] < pts[apex]) apex = i;
    std::set<std::vector<int>> seen;
    prefix.push_back(pts[apex]);
    for (const auto& h : p.halfspaces()) {
        if (h.value(pts[apex]) == 0) continue;
        std::vector<int> sub;
        for (int i : face)
            if (h.value(pts[i]) == 0) sub.push_back(i);
        if (static_cast<int>(sub.size()) < k || seen.count(sub)) continue;
        if (affine_dim(pts, sub) != k - 1) continue;
        seen.insert(sub);
        pull(pts, sub, k - 1, p, prefix, out);
    }
    prefix.pop_back();
}

struct Cell {
    std::vector<double> v;
    double value = 0.0;
    double err = 0.0;
    double parent = 0.0;  // rule value of the cell this one was split from
};

double simplex_volume(int dim, const std::vector<double>& v) {
    if (dim == 0) return 1.0;
    Eigen::MatrixXd m(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) m(r, c) = v[(r + 1) * dim + c] - v[c];
    return std::abs(m.determinant()) / factorial(dim);
}

double ball_volume(int k) { return std::pow(M_PI, k / 2.0) / std::tgamma(k / 2.0 + 1.0); }

void finalize(IntegralResult& r, const QuadOptions& opts) {
    if (opts.strict && !r.converged)
        throw ToleranceNotMet("integral did not reach the requested tolerance (value " + std::to_string(r.value) +
                              ", error " + std::to_string(r.total_error()) + ")");
}

}  // namespace

double stable_sum(const std::vector<double>& xs) {
    auto [s, c] = pairwise(xs.data(), xs.size());
    return s + c;
}

SimplexRule grundmann_moeller(int dim, int s) {
    SimplexRule rule;
    rule.dim = dim;
    const int d = 2 * s + 1;
    for (int i = 0; i <= s; ++i) {
        double w = (i % 2 ? -1.0 : 1.0) * std::pow(2.0, -2 * s) * std::pow(d + dim - 2 * i, d) /
                   (factorial(i) * factorial(d + dim - i)) * factorial(dim);
        const int total = s - i;
        std::vector<int> beta(dim + 1, 0);
        std::function<void(int, int)> rec = [&](int k, int left) {
            if (k == dim) {
                beta[k] = left;
                for (int j = 0; j <= dim; ++j)
                    rule.bary.push_back((2.0 * beta[j] + 1.0) / (d + dim - 2 * i));
                rule.weights.push_back(w);
                return;
            }
            for (int e = 0; e <= left; ++e) {
                beta[k] = e;
                rec(k + 1, left - e);
            }
        };
        rec(0, total);
    }
    return rule;
}

std::vector<std::vector<RatVec>> triangulate(const Polyhedron& bounded) {
    const int n = bounded.dim();
    auto pts = vertices(bounded);
    std::vector<std::vector<RatVec>> out;
    if (pts.empty()) return out;
    std::vector<int> all(pts.size());
    std::iota(all.begin(), all.end(), 0);
    if (affine_dim(pts, all) != n) return out;
    std::vector<RatVec> prefix;
    pull(pts, all, n, bounded, prefix, out);
    return out;
}

IntegralResult integrate_simplices(int dim, const std::vector<std::vector<double>>& simplices, const Integrand& f,
                                   double abs_target, const QuadOptions& opts) {
    static thread_local std::vector<std::pair<int, std::pair<SimplexRule, SimplexRule>>> cache;
    const SimplexRule* hi = nullptr;
    const SimplexRule* lo = nullptr;
    for (const auto& [d, rules] : cache)
        if (d == dim) {
            hi = &rules.first;
            lo = &rules.second;
        }
    if (!hi) {
        cache.emplace_back(dim, std::make_pair(grundmann_moeller(dim, 3), grundmann_moeller(dim, 2)));
        hi = &cache.back().second.first;
        lo = &cache.back().second.second;
    }
    const SimplexRule rule7 = *hi, rule5 = *lo;

    auto apply = [&](const SimplexRule& rule, const std::vector<double>& v) {
        std::vector<double> x(dim);
        double s = 0.0;
        for (size_t q = 0; q < rule.weights.size(); ++q) {
            std::fill(x.begin(), x.end(), 0.0);
            for (int k = 0; k <= dim; ++k) {
                double b = rule.bary[q * (dim + 1) + k];
                for (int i = 0; i < dim; ++i) x[i] += b * v[k * dim + i];
            }
            s += rule.weights[q] * f(x.data());
        }
        return s;
    };
    auto evaluate = [&](Cell& c) {
        double vol = simplex_volume(dim, c.v);
        double q7 = vol * apply(rule7, c.v);
        double q5 = vol * apply(rule5, c.v);
        c.value = q7;
        c.err = std::abs(q7 - q5);
    };

    std::vector<Cell> cells;
    std::vector<size_t> pending;
    // Bisects the longest edge; both halves go to the end of pending as a pair.
    auto split = [&](size_t i) {
        const auto& v = cells[i].v;
        int bi = 0, bj = 1;
        double best = -1.0;
        for (int a = 0; a <= dim; ++a)
            for (int b = a + 1; b <= dim; ++b) {
                double len = 0.0;
                for (int k = 0; k < dim; ++k) {
                    double d = v[a * dim + k] - v[b * dim + k];
                    len += d * d;
                }
                if (len > best) {
                    best = len;
                    bi = a;
                    bj = b;
                }
            }
        Cell a{v, 0.0, 0.0, cells[i].value}, b{v, 0.0, 0.0, cells[i].value};
        for (int k = 0; k < dim; ++k) {
            double mid = 0.5 * (v[bi * dim + k] + v[bj * dim + k]);
            a.v[bj * dim + k] = mid;
            b.v[bi * dim + k] = mid;
        }
        cells[i] = std::move(a);
        cells.push_back(std::move(b));
        pending.push_back(i);
        pending.push_back(cells.size() - 1);
    };

    for (const auto& s : simplices) cells.push_back(Cell{s, 0.0, 0.0, 0.0});
    parallel_for(cells.size(), opts.threads, [&](size_t k) { evaluate(cells[k]); });
    for (size_t i = 0, m = cells.size(); i < m; ++i) split(i);
    IntegralResult r;
    for (;;) {
        parallel_for(pending.size(), opts.threads, [&](size_t k) { evaluate(cells[pending[k]]); });
        // The rule pair can agree on a cell far too coarse for either; the change under
        // bisection exposes that, so it floors the estimate of both halves.
        for (size_t k = 0; k + 1 < pending.size(); k += 2) {
            Cell& a = cells[pending[k]];
            Cell& b = cells[pending[k + 1]];
            double gap = 0.5 * std::abs(a.value + b.value - a.parent);
            a.err = std::max(a.err, gap);
            b.err = std::max(b.err, gap);
        }
        std::vector<double> vals(cells.size()), errs(cells.size()), mags(cells.size());
        for (size_t i = 0; i < cells.size(); ++i) {
            vals[i] = cells[i].value;
            errs[i] = cells[i].err;
            mags[i] = std::abs(cells[i].value);
        }
        r.value = stable_sum(vals);
        r.abs_error_bound = stable_sum(errs) + 4e-16 * stable_sum(mags);
        r.magnitude = stable_sum(mags);
        r.cells_used = static_cast<long>(cells.size());
        double target = std::max({abs_target, opts.abs_tol, opts.rel_tol * std::max(std::abs(r.value), r.magnitude) / 2});
        if (r.abs_error_bound <= target) {
            r.converged = true;
            break;
        }
        if (static_cast<long>(cells.size()) >= opts.max_cells) {
            r.converged = false;
            break;
        }
        std::vector<size_t> order(cells.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return cells[a].err > cells[b].err; });
        double total = stable_sum(errs), acc = 0.0;
        std::vector<size_t> marked;
        long room = opts.max_cells - static_cast<long>(cells.size());
        for (size_t i : order) {
            if (acc >= 0.5 * total || static_cast<long>(marked.size()) >= room) break;
            marked.push_back(i);
            acc += cells[i].err;
        }
        std::sort(marked.begin(), marked.end());
        pending.clear();
        for (size_t i : marked) split(i);
    }
    return r;
}

IntegralResult integrate_polytope(const Polyhedron& bounded, const Integrand& f, const QuadOptions& opts,
                                  double abs_target) {
    const int n = bounded.dim();
    std::vector<std::vector<double>> simplices;
    for (const auto& s : triangulate(bounded)) {
        std::vector<double> flat;
        for (const auto& v : s)
            for (const auto& c : v) flat.push_back(to_double(c));
        simplices.push_back(std::move(flat));
    }
    if (simplices.empty()) return IntegralResult{};
    return integrate_simplices(n, simplices, f, abs_target, opts);
}

ExpLinear exact_1d(const Weight& w, const Rational& a, const std::optional<Rational>& b) {
    if (w.dim() != 1) throw InvalidInput("exact_1d needs a one-variable weight");
    if (w.has_negative_factors()) throw InvalidInput("exact_1d does not handle negative factor exponents");
    ExpLinear out;
    for (const auto& t : w.terms()) {
        const Rational& lam = t.decay[0];
        if (lam == 0) {
            if (!b) throw DivergentIntegral("non-decaying polynomial on an infinite interval");
            Polynomial anti(1);
            for (const auto& [m, c] : t.poly.coeffs()) anti.add_term({m[0] + 1}, c / (m[0] + 1));
            out += ExpLinear::term(anti.eval({*b}) - anti.eval({a}), -t.shift);
            continue;
        }
        if (!b && lam < 0) throw DivergentIntegral("exponential growth on an infinite interval");
        // F(x) = -sum_j p^(j)(x) / lam^(j+1) e^{-lam x - shift}
        auto antiderivative = [&](const Rational& x) {
            ExpLinear f;
            Polynomial d = t.poly;
            Rational lp = lam;
            while (!d.is_zero()) {
                f += ExpLinear::term(-d.eval({x}) / lp, -(lam * x + t.shift));
                d = d.derivative(0);
                lp *= lam;
            }
            return f;
        };
        if (b) out += antiderivative(*b);
        out -= antiderivative(a);
    }
    return out;
}

namespace {

// Lower bound of a factor base over P; sets certified=false if only sampled.
double factor_lower_bound(const Polyhedron& p, const Polynomial& base, bool& certified) {
    if (base.degree() == 1) {
        RatVec b(p.dim(), Rational(0));
        for (const auto& [m, c] : base.coeffs())
            for (int i = 0; i < p.dim(); ++i)
                if (m[i] == 1) b[i] = c;
        auto mn = minimize_affine(p, b, base.constant_term());
        if (!mn || *mn <= 0) throw PoleOnDomain("factor base is not positive on the domain");
        return to_double(*mn);
    }
    if (base.is_even_positive() && base.constant_term() > 0) return to_double(base.constant_term());
    certified = false;
    Weight bw = Weight::from_polynomial(base);
    auto rep = check_positive(bw, p);
    if (!rep.positive) throw PoleOnDomain("factor base is not positive on the domain");
    return rep.min_value;
}

}  // namespace

double tail_bound(const Polyhedron& p, const Weight& g, const RatVec& b_plus, double delta_star,
                  const ExtraFactor* extra, bool* certified) {
    bool cert = true;
    Cone c = recession_cone(p);
    if (certified) *certified = true;
    if (c.is_zero() || g.is_zero()) return 0.0;
    for (const auto& gen : c.generators)
        if (dot(gen, b_plus) <= 0) throw NotInteriorDirection("truncation direction not positive on the recession cone");

    std::vector<Rational> kappas;
    for (const auto& t : g.terms()) {
        std::optional<Rational> kappa;
        for (const auto& gen : c.generators) {
            Rational k = dot(gen, t.decay) / dot(gen, b_plus);
            if (!kappa || k < *kappa) kappa = k;
        }
        if (*kappa <= 0) throw DivergentIntegral("integrand does not decay along a recession direction");
        kappas.push_back(*kappa);
    }

    const int n = p.dim();
    auto verts = vertices(p);
    double rv = 0.0, hv = 0.0, beta = std::numeric_limits<double>::infinity();
    for (const auto& v : verts) {
        rv = std::max(rv, norm(v));
        hv = std::max(hv, -to_double(dot(b_plus, v)));
    }
    for (const auto& gen : c.generators) beta = std::min(beta, to_double(dot(gen, b_plus)) / norm(gen));
    const double a0 = rv + hv / beta, b0 = 1.0 / beta;
    const double slice = ball_volume(n - 1) / norm(b_plus);

    double extra_c = 1.0;
    int extra_d = 0;
    if (extra) {
        extra_c = extra->growth_c;
        extra_d = static_cast<int>(std::ceil(extra->growth_degree));
    }

    auto poly_mul = [](const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<double> out(a.size() + b.size() - 1, 0.0);
        for (size_t i = 0; i < a.size(); ++i)
            for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
        return out;
    };

    double total = 0.0;
    for (size_t k = 0; k < g.terms().size(); ++k) {
        const auto& t = g.terms()[k];
        const double kappa = to_double(kappas[k]);
        double k0 = -std::numeric_limits<double>::infinity();
        for (const auto& v : verts) k0 = std::max(k0, to_double(kappas[k] * dot(b_plus, v) - dot(t.decay, v)));

        std::vector<double> pr(t.poly.degree() + 1, 0.0);
        for (const auto& [m, coef] : t.poly.coeffs()) {
            int deg = 0;
            for (int e : m) deg += e;
            pr[deg] += std::abs(to_double(coef));
        }
        double fb = 1.0;
        for (const auto& f : t.factors) fb *= std::pow(factor_lower_bound(p, f.base, cert), f.exp);
        // Q(r) = pr(r) (1 + r)^d r^(n-1)
        std::vector<double> q = pr;
        for (int i = 0; i < extra_d; ++i) q = poly_mul(q, {1.0, 1.0});
        for (int i = 0; i < n - 1; ++i) q = poly_mul(q, {0.0, 1.0});
        // Substitute r = a0 + b0 t.
        std::vector<double> qt(1, 0.0), rpow(1, 1.0);
        for (size_t i = 0; i < q.size(); ++i) {
            if (qt.size() < rpow.size()) qt.resize(rpow.size(), 0.0);
            for (size_t j = 0; j < rpow.size(); ++j) qt[j] += q[i] * rpow[j];
            rpow = poly_mul(rpow, {a0, b0});
        }
        // int_delta^inf t^j e^{-kappa t} dt = e^{-kappa delta} sum_i j!/(j-i)! delta^(j-i) / kappa^(i+1)
        double s = 0.0;
        for (size_t j = 0; j < qt.size(); ++j) {
            double ij = 0.0, fall = 1.0;
            for (size_t i = 0; i <= j; ++i) {
                ij += fall * std::pow(delta_star, static_cast<double>(j - i)) / std::pow(kappa, static_cast<double>(i + 1));
                fall *= static_cast<double>(j - i);
            }
            s += qt[j] * ij;
        }
        total += s * fb * extra_c * slice * std::exp(k0 - to_double(t.shift) - kappa * delta_star);
    }
    if (certified) *certified = cert;
    return total * (1.0 + 1e-12);
}

RatVec truncation_direction(const Polyhedron& p, const Weight& g, const QuadOptions& opts) {
    if (opts.b_plus && static_cast<int>(opts.b_plus->size()) == p.dim()) return *opts.b_plus;
    Cone c = recession_cone(p);
    if (auto lam = g.common_decay()) {
        bool interior = !c.is_zero();
        for (const auto& gen : c.generators)
            if (dot(gen, *lam) <= 0) interior = false;
        if (interior) return *lam;
    }
    return auto_direction(p);
}

IntegralResult integrate_interior(const Polyhedron& p, const Weight& g, const QuadOptions& opts,
                                  const ExtraFactor* extra) {
    if (g.is_zero()) return IntegralResult{};
    Integrand f = [&](const double* x) {
        double v = g.eval(x);
        if (extra && v != 0.0) v *= extra->f(x);
        return v;
    };
    Cone c = recession_cone(p);
    if (c.is_zero()) {
        auto r = integrate_polytope(p, f, opts);
        finalize(r, opts);
        return r;
    }
    RatVec b = truncation_direction(p, g, opts);
    bool cert = true;
    double delta = 10.0;
    tail_bound(p, g, b, delta, extra, &cert);
    for (const auto& v : vertices(p)) delta = std::max(delta, std::ceil(to_double(dot(b, v))) + 2.0);

    IntegralResult r = integrate_polytope(truncate(p, b, from_double(delta)), f, opts);
    const double target = std::max(opts.abs_tol, opts.rel_tol * std::max(std::abs(r.value), r.magnitude)) / 2;
    double tail = tail_bound(p, g, b, delta, extra, &cert);
    while (tail > target && delta < opts.max_delta) {
        double next = std::min(2 * delta, opts.max_delta);
        auto hs = p.halfspaces();
        hs.push_back(HalfSpace::from_form(b, -from_double(delta)));
        RatVec nb = b;
        for (auto& x : nb) x = -x;
        hs.push_back(HalfSpace::from_form(nb, from_double(next)));
        Polyhedron slab(p.dim(), std::move(hs));
        r += integrate_polytope(slab, f, opts, target / 4);
        delta = next;
        tail = tail_bound(p, g, b, delta, extra, &cert);
    }
    r.tail_bound = tail;
    r.tail_certified = cert;
    r.delta_star = delta;
    r.converged = r.converged && tail <= target;
    finalize(r, opts);
    return r;
}

IntegralResult integrate_section(const Facet& f, const Weight& g, const QuadOptions& opts, const ExtraFactor* extra) {
    const double scale = to_double(f.measure_scale);
    const int m = static_cast<int>(f.basis.size());
    if (m == 0) {
        auto x = to_double(f.origin);
        IntegralResult r;
        r.value = g.eval(x.data());
        if (extra && r.value != 0.0) r.value *= extra->f(x.data());
        r.magnitude = std::abs(r.value);
        r.cells_used = 1;
        return r.scaled(scale);
    }
    std::vector<RatVec> cols;
    for (const auto& bvec : f.basis) cols.push_back(to_rat(bvec));
    Weight gs = g.substitute(f.origin, cols);
    QuadOptions sub = opts;
    sub.b_plus.reset();
    if (!extra) return integrate_interior(f.domain, gs, sub).scaled(scale);

    double bnorm = 0.0;
    for (const auto& bvec : f.basis)
        for (long long c : bvec) bnorm += static_cast<double>(c) * static_cast<double>(c);
    bnorm = std::sqrt(bnorm);
    const double onorm = norm(f.origin);
    ExtraFactor composed;
    const int n = static_cast<int>(f.origin.size());
    composed.f = [&f, extra, n, m](const double* t) {
        std::vector<double> x(n);
        f.to_ambient(t, x.data());
        (void)m;
        return extra->f(x.data());
    };
    composed.growth_degree = extra->growth_degree;
    composed.growth_c = extra->growth_c * std::pow(1.0 + onorm, extra->growth_degree) *
                        std::pow(std::max(1.0, bnorm), extra->growth_degree);
    return integrate_interior(f.domain, gs, sub, &composed).scaled(scale);
}

IntegralResult integrate_boundary(const Polyhedron& p, const Weight& g, const QuadOptions& opts,
                                  const ExtraFactor* extra) {
    IntegralResult total;
    for (const auto& f : facet_atlas(p)) total += integrate_section(f, g, opts, extra);
    return total;
}

}  // namespace toricwk
