#include "toricwk/potentials.hpp"

#include "toricwk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

namespace toricwk {

namespace {

int ipow(int n, int k) {
    int r = 1;
    for (int i = 0; i < k; ++i) r *= n;
    return r;
}

std::vector<int> digits(int flat, int n, int k) {
    std::vector<int> d(k);
    for (int i = k - 1; i >= 0; --i) {
        d[i] = flat % n;
        flat /= n;
    }
    return d;
}

double l_log_l(double l) { return l == 0.0 ? 0.0 : l * std::log(l); }

struct LogForm {
    std::vector<double> b;
    double c = 0.0;
    double coeff = 0.0;
};

std::vector<LogForm> log_forms(const SymplecticPotential& u) {
    std::vector<LogForm> out;
    for (const auto& t : u.log_terms()) out.push_back({to_double(t.form.b), to_double(t.form.c), to_double(t.coeff)});
    return out;
}

double form_value(const LogForm& f, const double* x) {
    double s = f.c;
    for (size_t i = 0; i < f.b.size(); ++i) s += f.b[i] * x[i];
    return s;
}

double log_det(const Eigen::MatrixXd& g) {
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) throw NotConvexHere("Hessian is not positive definite");
    double s = 0.0;
    for (int i = 0; i < g.rows(); ++i) s += 2.0 * std::log(llt.matrixL()(i, i));
    return s;
}

int default_grid(int n) { return n == 1 ? 400 : n == 2 ? 60 : 16; }

}  // namespace

SymplecticPotential::SymplecticPotential(int dim, std::vector<LogTerm> log_terms, Expr smooth,
                                         std::optional<Polyhedron> domain)
    : dim_(dim), smooth_(std::move(smooth)), domain_(std::move(domain)) {
    if (dim < 1) throw InvalidInput("potential dimension must be positive");
    if (smooth_.arity() > dim) throw InvalidInput("smooth part uses a variable outside the dimension");
    std::map<AffineForm, Rational> merged;
    for (auto& t : log_terms) {
        if (static_cast<int>(t.form.b.size()) != dim) throw InvalidInput("log term has the wrong dimension");
        merged[t.form] += t.coeff;
    }
    for (auto& [form, c] : merged)
        if (c != 0) log_terms_.push_back({form, c});
    build_tables();
}

void SymplecticPotential::build_tables() {
    tables_.assign(4, {});
    std::vector<std::map<std::vector<int>, int>> keys(5);
    for (int k = 1; k <= 4; ++k) {
        Table& t = tables_[k - 1];
        int total = ipow(dim_, k);
        t.index.resize(total);
        for (int flat = 0; flat < total; ++flat) {
            auto d = digits(flat, dim_, k);
            std::sort(d.begin(), d.end());
            auto it = keys[k].find(d);
            if (it == keys[k].end()) {
                Expr e;
                if (k == 1) {
                    e = smooth_.diff(d[0]);
                } else {
                    std::vector<int> head(d.begin(), d.end() - 1);
                    e = tables_[k - 2].unique[keys[k - 1].at(head)].diff(d.back());
                }
                it = keys[k].emplace(d, static_cast<int>(t.unique.size())).first;
                t.unique.push_back(std::move(e));
            }
            t.index[flat] = it->second;
        }
    }
}

std::vector<double> SymplecticPotential::eval_table(int order, const double* x) const {
    const Table& t = tables_[order - 1];
    std::vector<double> u(t.unique.size());
    for (size_t i = 0; i < u.size(); ++i) u[i] = t.unique[i].eval(x);
    std::vector<double> out(t.index.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = u[t.index[i]];
    return out;
}

SymplecticPotential SymplecticPotential::plus_affine(const RatVec& b, const Rational& c) const {
    std::vector<Expr> terms{smooth_, Expr::constant(to_double(c))};
    for (int i = 0; i < dim_; ++i)
        if (b[i] != 0) terms.push_back(Expr::constant(to_double(b[i])) * Expr::var(i));
    return SymplecticPotential(dim_, log_terms_, Expr::add(terms), domain_);
}

double SymplecticPotential::value(const double* x) const {
    double s = smooth_.eval(x);
    for (const auto& t : log_terms_) s += to_double(t.coeff) * l_log_l(t.form.eval(x));
    return s;
}

void SymplecticPotential::gradient(const double* x, double* g) const {
    auto d = eval_table(1, x);
    for (int i = 0; i < dim_; ++i) g[i] = d[i];
    for (const auto& f : log_forms(*this)) {
        double l = form_value(f, x);
        for (int i = 0; i < dim_; ++i) g[i] += f.coeff * f.b[i] * (std::log(l) + 1.0);
    }
}

Eigen::MatrixXd SymplecticPotential::hessian(const double* x) const {
    auto d = eval_table(2, x);
    Eigen::MatrixXd h(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) h(i, j) = d[i * dim_ + j];
    for (const auto& f : log_forms(*this)) {
        double s = f.coeff / form_value(f, x);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) h(i, j) += s * f.b[i] * f.b[j];
    }
    return h;
}

std::vector<Eigen::MatrixXd> SymplecticPotential::third(const double* x) const {
    int n = dim_;
    auto d = eval_table(3, x);
    std::vector<Eigen::MatrixXd> out(n, Eigen::MatrixXd(n, n));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out[k](i, j) = d[(i * n + j) * n + k];
    for (const auto& f : log_forms(*this)) {
        double l = form_value(f, x);
        double s = -f.coeff / (l * l);
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) out[k](i, j) += s * f.b[i] * f.b[j] * f.b[k];
    }
    return out;
}

std::vector<Eigen::MatrixXd> SymplecticPotential::fourth(const double* x) const {
    int n = dim_;
    auto d = eval_table(4, x);
    std::vector<Eigen::MatrixXd> out(n * n, Eigen::MatrixXd(n, n));
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) out[k * n + l](i, j) = d[((i * n + j) * n + k) * n + l];
    for (const auto& f : log_forms(*this)) {
        double v = form_value(f, x);
        double s = 2.0 * f.coeff / (v * v * v);
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) out[k * n + l](i, j) += s * f.b[i] * f.b[j] * f.b[k] * f.b[l];
    }
    return out;
}

double SymplecticPotential::growth_constant() const {
    double c = 0.0;
    for (const auto& f : log_forms(*this)) {
        double m = std::abs(f.c);
        double bn = 0.0;
        for (double b : f.b) bn += b * b;
        m = std::max(m, std::sqrt(bn));
        c += std::abs(f.coeff) * (m * m + 1.0);
    }
    if (smooth_.is_constant()) return c + std::abs(smooth_.value());
    // Sampled bound for the smooth part on a cube.
    double sc = 0.0;
    int per = dim_ == 1 ? 201 : dim_ == 2 ? 41 : 11;
    Grid g{std::vector<double>(dim_, -50.0), std::vector<double>(dim_, 50.0), std::vector<int>(dim_, per)};
    for (size_t k = 0; k < g.size(); ++k) {
        auto x = g.point(k);
        if (domain_ && !domain_->contains(std::span<const double>(x))) continue;
        double r = 0.0;
        for (double xi : x) r += xi * xi;
        double s = std::abs(smooth_.eval(x.data())) / std::pow(1.0 + std::sqrt(r), 2);
        if (std::isfinite(s)) sc = std::max(sc, s);
    }
    return c + 2.0 * sc + 1e-12;
}

SymplecticPotential guillemin_potential(const Polyhedron& p) {
    auto rep = validate(p);
    std::vector<LogTerm> terms;
    for (const auto& h : rep.reduced.halfspaces()) terms.push_back({AffineForm{to_rat(h.normal), h.offset}, Rational(1, 2)});
    return SymplecticPotential(p.dim(), std::move(terms), Expr(), p);
}

SymplecticPotential cone_potential(const Cone& c, const std::optional<RatVec>& b) {
    std::vector<LogTerm> terms;
    std::vector<HalfSpace> hs;
    RatVec sum(c.dim, Rational(0));
    for (const auto& nu : c.normals) {
        RatVec r = to_rat(nu);
        terms.push_back({AffineForm{r, Rational(0)}, Rational(1, 2)});
        hs.emplace_back(nu, Rational(0));
        for (int i = 0; i < c.dim; ++i) sum[i] += r[i];
    }
    if (b) {
        if (static_cast<int>(b->size()) != c.dim) throw InvalidInput("direction has the wrong dimension");
        for (const auto& g : c.generators)
            if (dot(*b, to_rat(g)) <= 0) throw NotInteriorDirection("direction is not in the interior of the dual cone");
        terms.push_back({AffineForm{*b, Rational(0)}, Rational(1, 2)});
        terms.push_back({AffineForm{sum, Rational(0)}, Rational(-1, 2)});
    }
    return SymplecticPotential(c.dim, std::move(terms), Expr(), Polyhedron(c.dim, hs));
}

HessianData hessian_data(const SymplecticPotential& u, const double* x, int order) {
    int n = u.dim();
    HessianData d;
    d.G = u.hessian(x);
    if (!d.G.allFinite()) throw NotConvexHere("Hessian is not finite");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d.G, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0) throw NotConvexHere("Hessian has a nonpositive eigenvalue");
    d.H = d.G.ldlt().solve(Eigen::MatrixXd::Identity(n, n));
    if (order < 1) return d;
    d.dG = u.third(x);
    d.dH.resize(n);
    std::vector<Eigen::MatrixXd> hdg(n);  // H dG_k
    for (int k = 0; k < n; ++k) {
        hdg[k] = d.H * d.dG[k];
        d.dH[k] = -hdg[k] * d.H;
    }
    if (order < 2) return d;
    d.d2G = u.fourth(x);
    d.d2H.resize(n * n);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
            d.d2H[k * n + l] = hdg[l] * hdg[k] * d.H + hdg[k] * hdg[l] * d.H - d.H * d.d2G[k * n + l] * d.H;
    return d;
}

HessianData ProfileMetric::metric(const double* x, int order) const {
    double h[3];
    jet_(x[0], h);
    if (!(h[0] > 0.0)) throw NotConvexHere("profile is not positive");
    HessianData d;
    d.H = Eigen::MatrixXd::Constant(1, 1, h[0]);
    d.G = Eigen::MatrixXd::Constant(1, 1, 1.0 / h[0]);
    if (order >= 1) {
        d.dH = {Eigen::MatrixXd::Constant(1, 1, h[1])};
        d.dG = {Eigen::MatrixXd::Constant(1, 1, -h[1] / (h[0] * h[0]))};
    }
    if (order >= 2) {
        d.d2H = {Eigen::MatrixXd::Constant(1, 1, h[2])};
        d.d2G = {Eigen::MatrixXd::Constant(1, 1, 2.0 * h[1] * h[1] / (h[0] * h[0] * h[0]) - h[2] / (h[0] * h[0]))};
    }
    return d;
}

double abreu_scal_v(const MetricProvider& m, const WeightJet& v, const double* x) {
    int n = m.dim();
    auto d = m.metric(x, 2);
    double val = 0.0;
    std::vector<double> g(n), h(n * n);
    v.eval(x, val, g.data(), h.data());
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            s += h[i * n + j] * d.H(i, j) + 2.0 * g[i] * d.dH[j](i, j) + val * d.d2H[i * n + j](i, j);
    return -s;
}

double abreu_scal_v(const SymplecticPotential& u, const Weight& v, const double* x) {
    return abreu_scal_v(PotentialMetric(u), WeightJet(v), x);
}

SolitonFit soliton_residual(const SymplecticPotential& u, const Weight& v,
                            const std::vector<std::vector<double>>& samples) {
    int n = u.dim();
    int m = static_cast<int>(samples.size());
    SolitonFit fit;
    fit.beta.assign(n, 0.0);
    if (m == 0) return fit;
    Eigen::MatrixXd a(m, n + 1);
    Eigen::VectorXd r(m);
    std::vector<double> g(n);
    for (int s = 0; s < m; ++s) {
        const double* x = samples[s].data();
        u.gradient(x, g.data());
        double gx = 0.0;
        for (int i = 0; i < n; ++i) gx += g[i] * x[i];
        double vv = v.eval(x);
        if (!(vv > 0.0)) throw InvalidInput("weight is not positive at a sample");
        r(s) = 2.0 * (gx - u.value(x)) - log_det(u.hessian(x)) + std::log(vv);
        a(s, 0) = 1.0;
        for (int i = 0; i < n; ++i) a(s, i + 1) = x[i];
    }
    Eigen::VectorXd c = a.colPivHouseholderQr().solve(r);
    fit.alpha = c(0);
    for (int i = 0; i < n; ++i) fit.beta[i] = c(i + 1);
    fit.deviation = (r - a * c).cwiseAbs().maxCoeff();
    return fit;
}

size_t Grid::size() const {
    size_t s = 1;
    for (int c : counts) s *= static_cast<size_t>(c);
    return s;
}

std::vector<int> Grid::multi_index(size_t flat) const {
    std::vector<int> idx(dim());
    for (int a = dim() - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(flat % counts[a]);
        flat /= counts[a];
    }
    return idx;
}

size_t Grid::flat_index(const std::vector<int>& idx) const {
    size_t f = 0;
    for (int a = 0; a < dim(); ++a) f = f * counts[a] + idx[a];
    return f;
}

std::vector<double> Grid::point(size_t flat) const {
    auto idx = multi_index(flat);
    std::vector<double> x(dim());
    for (int a = 0; a < dim(); ++a) x[a] = counts[a] == 1 ? lo[a] : lo[a] + idx[a] * spacing(a);
    return x;
}

GridFunction sample_grid(const std::function<double(const double*)>& f, const Grid& grid) {
    GridFunction g{grid, std::vector<double>(grid.size())};
    for (size_t k = 0; k < grid.size(); ++k) g.values[k] = f(grid.point(k).data());
    return g;
}

ScatteredFunction legendre(const GridFunction& phi) {
    const Grid& g = phi.grid;
    int n = g.dim();
    ScatteredFunction out;
    out.dim = n;
    for (size_t k = 0; k < g.size(); ++k) {
        auto idx = g.multi_index(k);
        bool interior = true;
        std::vector<double> p(n);
        for (int a = 0; a < n; ++a) {
            if (idx[a] == 0 || idx[a] == g.counts[a] - 1) {
                interior = false;
                continue;
            }
            auto lo = idx, hi = idx;
            --lo[a];
            ++hi[a];
            double fl = phi.values[g.flat_index(lo)], fh = phi.values[g.flat_index(hi)];
            if (!(fh - 2.0 * phi.values[k] + fl > 0.0))
                throw NotConvexGrid("second difference is not positive at grid node " + std::to_string(k));
            p[a] = (fh - fl) / (2.0 * g.spacing(a));
        }
        if (!interior) continue;
        out.values.push_back(conjugate_at(phi, p.data()));
        out.points.push_back(std::move(p));
    }
    return out;
}

double conjugate_at(const ScatteredFunction& f, const double* y) {
    double best = -std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < f.points.size(); ++j) {
        double s = -f.values[j];
        for (int a = 0; a < f.dim; ++a) s += y[a] * f.points[j][a];
        best = std::max(best, s);
    }
    return best;
}

double conjugate_at(const GridFunction& f, const double* y) {
    int n = f.grid.dim();
    double best = -std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < f.grid.size(); ++k) {
        auto xi = f.grid.point(k);
        double v = -f.values[k];
        for (int a = 0; a < n; ++a) v += y[a] * xi[a];
        best = std::max(best, v);
    }
    return best;
}

BoundaryReport boundary_checks(const MetricProvider& m, const Polyhedron& p,
                               std::vector<std::pair<int, std::vector<double>>> samples, std::vector<double> ts,
                               double tol) {
    int n = p.dim();
    if (samples.empty()) {
        for (const auto& f : facet_atlas(p)) {
            std::vector<double> y(n);
            int k = f.domain.dim();
            if (k == 0 || f.basis.empty()) {
                y = to_double(f.origin);
            } else {
                auto t = interior_point(f.domain);
                if (!t) continue;
                y = to_double(f.to_ambient(*t));
            }
            samples.emplace_back(f.parent_index, y);
        }
    }
    BoundaryReport rep;
    for (const auto& [facet, y] : samples) {
        BoundaryApproach a;
        a.facet = facet;
        a.y = y;
        const auto& nu = p.halfspaces().at(facet).normal;
        double len = norm(nu);
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v(i) = static_cast<double>(nu[i]);
        a.normal.assign(v.data(), v.data() + n);
        a.ts = ts;
        for (double t : ts) {
            std::vector<double> x(n);
            for (int i = 0; i < n; ++i) x[i] = y[i] + t * v(i) / len;
            auto d = m.metric(x.data(), 1);
            a.h_normal.push_back((d.H * v).norm());
            std::vector<double> dh(n);
            for (int k = 0; k < n; ++k) dh[k] = v.dot(d.dH[k] * v);
            a.dh_normal.push_back(dh);
        }
        a.limit = a.dh_normal.back();
        size_t last = ts.size() - 1;
        if (last > 0 && a.h_normal[last] > 0.0 && a.h_normal[last - 1] > 0.0)
            a.rate = std::log(a.h_normal[last] / a.h_normal[last - 1]) / std::log(ts[last] / ts[last - 1]);
        a.vanishes = a.h_normal.back() < tol;
        double err = 0.0, scale = 1.0;
        for (int k = 0; k < n; ++k) {
            err = std::max(err, std::abs(a.limit[k] - 2.0 * v(k)));
            scale = std::max(scale, std::abs(2.0 * v(k)));
        }
        a.derivative_ok = err < tol * scale;
        rep.pass = rep.pass && a.vanishes && a.derivative_ok;
        rep.approaches.push_back(std::move(a));
    }
    return rep;
}

HClassReport h_class_check(const MetricProvider& m, const SymplecticPotential* u, const Weight& v, const Polyhedron& p,
                           double eps, double delta_bar, const HClassOptions& opts) {
    int n = p.dim();
    if (eps < 0.0 || eps >= 0.5) throw InvalidInput("exponent must lie in [0, 1/2)");
    if (!(delta_bar > 0.0)) throw InvalidInput("strip width must be positive");
    if (opts.deltas.size() < 2) throw InvalidInput("need at least two truncations");
    RatVec b = truncation_direction(p, v, {});
    Polyhedron inner = interior_polyhedron(p, delta_bar);
    int per = opts.grid_points > 0 ? opts.grid_points : default_grid(n);

    HClassReport rep;
    for (const char* name : {"H", "dH", "potential", "boundary"}) {
        HCondition c;
        c.name = name;
        rep.conditions.push_back(c);
    }
    if (!u) rep.conditions[2].evaluated = false;
    std::vector<double> g(n);
    for (double delta : opts.deltas) {
        auto t = truncate(p, b, from_double(delta));
        double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
        for (const auto& x : interior_grid(t, per)) {
            double ve = std::pow(std::abs(v.eval(x.data())), eps);
            auto d = m.metric(x.data(), 2);
            s1 = std::max(s1, ve * d.H.squaredNorm());
            double dh = 0.0;
            for (const auto& mk : d.dH) dh += mk.squaredNorm();
            s2 = std::max(s2, ve * dh);
            bool in_strip = !inner.contains(std::span<const double>(x));
            if (in_strip)
                for (const auto& mk : d.d2H) s4 = std::max(s4, mk.cwiseAbs().maxCoeff());
            if (u) {
                double c = std::abs(u->value(x.data()));
                if (!in_strip) {
                    u->gradient(x.data(), g.data());
                    for (double gi : g) c = std::max(c, std::abs(gi));
                    c = std::max(c, u->hessian(x.data()).cwiseAbs().maxCoeff());
                }
                s3 = std::max(s3, ve * c);
            }
        }
        rep.conditions[0].sups.push_back(s1);
        rep.conditions[1].sups.push_back(s2);
        rep.conditions[2].sups.push_back(u ? s3 : 0.0);
        rep.conditions[3].sups.push_back(s4);
    }
    size_t k = opts.deltas.size() - 1;
    double span = std::log(opts.deltas[k] / opts.deltas[k - 1]);
    for (auto& c : rep.conditions) {
        if (!c.evaluated) continue;
        double a = c.sups[k - 1], z = c.sups[k];
        bool finite = std::all_of(c.sups.begin(), c.sups.end(), [](double s) { return std::isfinite(s); });
        if (std::max(a, z) <= opts.noise_floor)
            c.growth = 0.0;
        else if (a == 0.0)
            c.growth = std::numeric_limits<double>::infinity();
        else
            c.growth = std::log(z / a) / span;
        c.finite = finite && c.growth < opts.growth_tol;
        rep.pass = rep.pass && c.finite;
    }
    return rep;
}

ExtraFactor potential_factor(const SymplecticPotential& u) {
    auto shared = std::make_shared<SymplecticPotential>(u);
    ExtraFactor f;
    f.f = [shared](const double* x) { return shared->value(x); };
    f.growth_c = u.growth_constant();
    f.growth_degree = 2.0;
    return f;
}

IntegralResult mabuchi_energy(const Polyhedron& p, const Weight& v, const Weight& w, const SymplecticPotential& u,
                              const SymplecticPotential& u0, const QuadOptions& opts) {
    auto fu = potential_factor(u);
    IntegralResult total = integrate_boundary(p, v, opts, &fu).scaled(2.0);
    total += integrate_interior(p, w, opts, &fu).scaled(-1.0);

    auto pu = std::make_shared<SymplecticPotential>(u);
    auto pu0 = std::make_shared<SymplecticPotential>(u0);
    ExtraFactor ld;
    ld.f = [pu, pu0](const double* x) { return log_det(pu->hessian(x)) - log_det(pu0->hessian(x)); };
    ld.growth_degree = 1.0;
    // Sampled growth constant on a moderate truncation.
    double c = 0.0;
    auto t = truncate(p, truncation_direction(p, v, opts), Rational(20));
    for (const auto& x : interior_grid(t, default_grid(p.dim()) / 4 + 4)) {
        double r = 0.0;
        for (double xi : x) r += xi * xi;
        c = std::max(c, std::abs(ld.f(x.data())) / (1.0 + std::sqrt(r)));
    }
    ld.growth_c = 2.0 * c + 1e-12;
    auto li = integrate_interior(p, v, opts, &ld);
    li.tail_certified = false;
    total += li.scaled(-1.0);
    return total;
}

}  // namespace toricwk
