#include "toricwk/weights.hpp"

#include "toricwk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

namespace toricwk {

struct Weight::Compiled {
    struct Term {
        CompiledPolynomial poly;
        std::vector<std::pair<CompiledPolynomial, int>> factors;
        std::vector<double> decay;
        double shift = 0.0;
    };
    std::vector<Term> terms;
};

namespace {

std::optional<WeightTerm> canonical_term(int dim, WeightTerm t) {
    if (t.decay.empty()) t.decay.assign(dim, Rational(0));
    if (static_cast<int>(t.decay.size()) != dim) throw InvalidInput("decay vector has wrong dimension");
    if (t.poly.nvars() != dim && !t.poly.is_zero()) throw InvalidInput("polynomial has wrong number of variables");
    if (t.poly.is_zero()) return std::nullopt;
    std::vector<Factor> neg;
    for (auto& f : t.factors) {
        if (f.exp == 0) continue;
        if (f.base.is_constant()) {
            Rational c = f.base.constant_term();
            if (c == 0) {
                if (f.exp > 0) return std::nullopt;
                throw PoleOnDomain("factor is identically zero");
            }
            Rational p = 1;
            for (int k = 0; k < std::abs(f.exp); ++k) p *= c;
            t.poly *= f.exp > 0 ? p : 1 / p;
            continue;
        }
        if (f.base.nvars() != dim) throw InvalidInput("factor has wrong number of variables");
        if (f.exp > 0) {
            t.poly = t.poly * f.base.pow(f.exp);
            continue;
        }
        Rational lc = f.base.leading_coefficient();
        f.base *= 1 / lc;
        Rational p = 1;
        for (int k = 0; k < -f.exp; ++k) p *= lc;
        t.poly *= 1 / p;
        neg.push_back(std::move(f));
    }
    if (t.poly.is_zero()) return std::nullopt;
    std::sort(neg.begin(), neg.end());
    std::vector<Factor> merged;
    for (auto& f : neg) {
        if (!merged.empty() && merged.back().base == f.base)
            merged.back().exp += f.exp;
        else
            merged.push_back(std::move(f));
    }
    t.factors = std::move(merged);
    return t;
}

struct TermKey {
    RatVec decay;
    std::vector<Factor> factors;
    Rational shift;
    bool operator<(const TermKey& o) const {
        return std::tie(decay, factors, shift) < std::tie(o.decay, o.factors, o.shift);
    }
};

}  // namespace

Weight::Weight(int dim) : dim_(dim) { rebuild(); }

Weight::Weight(int dim, std::vector<WeightTerm> terms) : dim_(dim) {
    std::map<TermKey, Polynomial> groups;
    for (auto& t : terms) {
        auto c = canonical_term(dim, std::move(t));
        if (!c) continue;
        TermKey key{c->decay, c->factors, c->shift};
        auto it = groups.find(key);
        if (it == groups.end())
            groups.emplace(std::move(key), std::move(c->poly));
        else
            it->second += c->poly;
    }
    for (auto& [key, poly] : groups) {
        if (poly.is_zero()) continue;
        terms_.push_back(WeightTerm{std::move(poly), key.factors, key.decay, key.shift});
    }
    rebuild();
}

void Weight::rebuild() {
    auto c = std::make_shared<Compiled>();
    for (const auto& t : terms_) {
        Compiled::Term ct;
        ct.poly = CompiledPolynomial(t.poly);
        for (const auto& f : t.factors) ct.factors.emplace_back(CompiledPolynomial(f.base), f.exp);
        ct.decay = to_double(t.decay);
        ct.shift = to_double(t.shift);
        c->terms.push_back(std::move(ct));
    }
    compiled_ = std::move(c);
}

Weight Weight::constant(int dim, const Rational& c) {
    return Weight(dim, {WeightTerm{Polynomial::constant(dim, c), {}, {}, 0}});
}

Weight Weight::from_polynomial(const Polynomial& p) { return Weight(p.nvars(), {WeightTerm{p, {}, {}, 0}}); }

Weight Weight::exponential(const RatVec& lambda, const Rational& shift) {
    const int n = static_cast<int>(lambda.size());
    return Weight(n, {WeightTerm{Polynomial::constant(n, Rational(1)), {}, lambda, shift}});
}

Weight Weight::power(const Polynomial& base, int exp) {
    const int n = base.nvars();
    return Weight(n, {WeightTerm{Polynomial::constant(n, Rational(1)), {Factor{base, exp}}, {}, 0}});
}

bool Weight::has_negative_factors() const {
    for (const auto& t : terms_)
        if (!t.factors.empty()) return true;
    return false;
}

std::optional<RatVec> Weight::common_decay() const {
    if (terms_.empty()) return std::nullopt;
    for (const auto& t : terms_)
        if (t.decay != terms_[0].decay) return std::nullopt;
    return terms_[0].decay;
}

double Weight::eval(const double* x) const {
    double s = 0.0;
    if (!compiled_) return s;
    for (const auto& t : compiled_->terms) {
        double v = t.poly.eval(x);
        if (v == 0.0) continue;
        for (const auto& [base, e] : t.factors) {
            double b = base.eval(x);
            if (b == 0.0) throw PoleOnDomain("factor with negative exponent vanishes");
            v *= std::pow(b, e);
        }
        double arg = t.shift;
        for (int i = 0; i < dim_; ++i) arg += t.decay[i] * x[i];
        s += v * std::exp(-arg);
    }
    return s;
}

std::vector<double> Weight::grad(std::span<const double> x) const {
    std::vector<double> g(dim_);
    for (int i = 0; i < dim_; ++i) g[i] = differentiate(i).eval(x);
    return g;
}

std::vector<double> Weight::hess(std::span<const double> x) const {
    std::vector<double> h(dim_ * dim_);
    for (int i = 0; i < dim_; ++i) {
        Weight di = differentiate(i);
        for (int j = i; j < dim_; ++j) h[i * dim_ + j] = h[j * dim_ + i] = di.differentiate(j).eval(x);
    }
    return h;
}

ExpLinear Weight::eval_exact(const RatVec& x) const {
    ExpLinear out;
    for (const auto& t : terms_) {
        Rational v = t.poly.eval(x);
        for (const auto& f : t.factors) {
            Rational b = f.base.eval(x);
            if (b == 0) throw PoleOnDomain("factor with negative exponent vanishes");
            for (int k = 0; k < -f.exp; ++k) v /= b;
        }
        out += ExpLinear::term(v, -(dot(t.decay, x) + t.shift));
    }
    return out;
}

Weight Weight::differentiate(int i) const {
    std::vector<WeightTerm> out;
    for (const auto& t : terms_) {
        out.push_back(WeightTerm{t.poly.derivative(i), t.factors, t.decay, t.shift});
        for (size_t k = 0; k < t.factors.size(); ++k) {
            Polynomial db = t.factors[k].base.derivative(i);
            if (db.is_zero()) continue;
            WeightTerm d{t.poly * db * Rational(t.factors[k].exp), t.factors, t.decay, t.shift};
            d.factors[k].exp -= 1;
            out.push_back(std::move(d));
        }
        if (t.decay[i] != 0) out.push_back(WeightTerm{t.poly * (-t.decay[i]), t.factors, t.decay, t.shift});
    }
    return Weight(dim_, std::move(out));
}

Weight Weight::derivative(const std::vector<int>& alpha) const {
    Weight out = *this;
    for (int i = 0; i < dim_; ++i)
        for (int k = 0; k < alpha[i]; ++k) out = out.differentiate(i);
    return out;
}

Weight Weight::substitute(const RatVec& x0, const std::vector<RatVec>& cols) const {
    const int m = static_cast<int>(cols.size());
    std::vector<WeightTerm> out;
    for (const auto& t : terms_) {
        WeightTerm s;
        s.poly = t.poly.substitute(x0, cols);
        if (s.poly.nvars() != m) s.poly = Polynomial(m) + s.poly;
        for (const auto& f : t.factors) s.factors.push_back(Factor{f.base.substitute(x0, cols), f.exp});
        s.decay.resize(m);
        for (int k = 0; k < m; ++k) s.decay[k] = dot(t.decay, cols[k]);
        s.shift = t.shift + dot(t.decay, x0);
        out.push_back(std::move(s));
    }
    return Weight(m, std::move(out));
}

Weight& Weight::operator+=(const Weight& o) {
    if (terms_.empty() && dim_ == 0) dim_ = o.dim_;
    auto all = terms_;
    all.insert(all.end(), o.terms_.begin(), o.terms_.end());
    *this = Weight(dim_, std::move(all));
    return *this;
}

Weight& Weight::operator-=(const Weight& o) { return *this += o * Rational(-1); }

Weight& Weight::operator*=(const Rational& c) {
    auto all = terms_;
    for (auto& t : all) t.poly *= c;
    *this = Weight(dim_, std::move(all));
    return *this;
}

Weight operator*(const Weight& a, const Weight& b) {
    const int n = std::max(a.dim_, b.dim_);
    std::vector<WeightTerm> out;
    for (const auto& s : a.terms_)
        for (const auto& t : b.terms_) {
            WeightTerm p;
            p.poly = s.poly * t.poly;
            p.factors = s.factors;
            p.factors.insert(p.factors.end(), t.factors.begin(), t.factors.end());
            p.decay = s.decay;
            for (int i = 0; i < n; ++i) p.decay[i] += t.decay[i];
            p.shift = s.shift + t.shift;
            out.push_back(std::move(p));
        }
    return Weight(n, std::move(out));
}

std::string Weight::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    for (size_t k = 0; k < terms_.size(); ++k) {
        const auto& t = terms_[k];
        if (k) os << " + ";
        os << "[";
        bool first = true;
        for (const auto& [m, c] : t.poly.coeffs()) {
            if (!first) os << " + ";
            first = false;
            os << toricwk::to_string(c);
            for (int i = 0; i < dim_; ++i)
                if (m[i]) os << "*x" << i + 1 << (m[i] > 1 ? "^" + std::to_string(m[i]) : "");
        }
        os << "]";
        for (const auto& f : t.factors) {
            os << "*(";
            bool fb = true;
            for (const auto& [m, c] : f.base.coeffs()) {
                if (!fb) os << " + ";
                fb = false;
                os << toricwk::to_string(c);
                for (int i = 0; i < dim_; ++i)
                    if (m[i]) os << "*x" << i + 1 << (m[i] > 1 ? "^" + std::to_string(m[i]) : "");
            }
            os << ")^" << f.exp;
        }
        if (!toricwk::is_zero(t.decay) || t.shift != 0) {
            os << "*exp(-(";
            bool fe = true;
            for (int i = 0; i < dim_; ++i) {
                if (t.decay[i] == 0) continue;
                if (!fe) os << " + ";
                fe = false;
                os << toricwk::to_string(t.decay[i]) << "*x" << i + 1;
            }
            if (t.shift != 0) os << (fe ? "" : " + ") << toricwk::to_string(t.shift);
            os << "))";
        }
    }
    return os.str();
}

WeightJet::WeightJet(const Weight& v) : v_(v) {
    const int n = v.dim();
    for (int i = 0; i < n; ++i) d1_.push_back(v.differentiate(i));
    d2_.resize(n * n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) d2_[i * n + j] = d1_[i].differentiate(j);
}

void WeightJet::eval(const double* x, double& value, double* grad, double* hess) const {
    const int n = dim();
    value = v_.eval(x);
    if (grad)
        for (int i = 0; i < n; ++i) grad[i] = d1_[i].eval(x);
    if (hess)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) hess[i * n + j] = hess[j * n + i] = d2_[i * n + j].eval(x);
}

Weight soliton_weight(const Weight& v, int n) {
    if (n < 1) throw InvalidInput("dimension must be positive");
    const int d = v.dim();
    Weight w = v * Rational(n);
    for (int i = 0; i < d; ++i) w += v.differentiate(i) * Polynomial::variable(d, i);
    return w * Rational(2);
}

void require_positive_affine(const Polyhedron& poly, const RatVec& b, const Rational& c) {
    RatVec arg;
    auto m = minimize_affine(poly, b, c, &arg);
    if (m && *m > 0) return;
    std::vector<double> witness;
    if (m) {
        witness = to_double(arg);
    } else {
        auto rep = validate(poly);
        for (const auto& g : recession_cone(poly).generators) {
            Rational slope = dot(g, b);
            if (slope >= 0) continue;
            Rational val = dot(b, rep.witness) + c;
            Rational t = (val > 0 ? val / -slope : Rational(0)) + 1;
            RatVec x = rep.witness;
            for (size_t i = 0; i < x.size(); ++i) x[i] += t * g[i];
            witness = to_double(x);
            break;
        }
    }
    throw FactorNotPositive("affine factor is not strictly positive on the polyhedron", witness);
}

std::pair<Weight, Weight> fibration_transform(const Weight& v, const Weight& w, const std::vector<FibrationFactor>& data,
                                              const Polyhedron& poly) {
    const int n = poly.dim();
    std::vector<Polynomial> ls;
    for (const auto& f : data) {
        if (static_cast<int>(f.p.size()) != n) throw InvalidInput("factor dimension mismatch");
        require_positive_affine(poly, f.p, f.c);
        ls.push_back(Polynomial::affine(f.p, f.c));
    }
    auto product_except = [&](int skip, int lower) {
        std::vector<WeightTerm> t{WeightTerm{Polynomial::constant(n, Rational(1)), {}, {}, 0}};
        for (int a = 0; a < static_cast<int>(data.size()); ++a) {
            int e = data[a].n - (a == skip ? lower : 0);
            t[0].factors.push_back(Factor{ls[a], e});
        }
        return Weight(n, std::move(t));
    };
    Weight p = product_except(-1, 0);
    Weight vt = p * v;
    Weight correction(n);
    for (int a = 0; a < static_cast<int>(data.size()); ++a) {
        if (data[a].s == 0) continue;
        correction += product_except(a, 1) * data[a].s;
    }
    Weight wt = p * w - v * correction;
    return {vt, wt};
}

Weight krs_fibration_weight(const std::vector<KrsFactor>& data, const RatVec& b_w, const Polyhedron& poly) {
    const int n = poly.dim();
    WeightTerm t{Polynomial::constant(n, Rational(1)), {}, b_w, 0};
    for (const auto& f : data) {
        if (static_cast<int>(f.p.size()) != n) throw InvalidInput("factor dimension mismatch");
        require_positive_affine(poly, f.p, f.k);
        t.factors.push_back(Factor{Polynomial::affine(f.p, f.k), f.n});
    }
    return Weight(n, {t});
}

std::vector<std::vector<double>> interior_grid(const Polyhedron& bounded, int per_axis) {
    const int n = bounded.dim();
    auto vs = vertices(bounded);
    std::vector<std::vector<double>> out;
    if (vs.empty()) return out;
    std::vector<double> lo(n, std::numeric_limits<double>::infinity()), hi(n, -lo[0]);
    for (const auto& v : vs)
        for (int i = 0; i < n; ++i) {
            lo[i] = std::min(lo[i], to_double(v[i]));
            hi[i] = std::max(hi[i], to_double(v[i]));
        }
    std::vector<int> idx(n, 0);
    std::vector<double> x(n);
    for (;;) {
        for (int i = 0; i < n; ++i) x[i] = lo[i] + (hi[i] - lo[i]) * (idx[i] + 0.5) / per_axis;
        bool inside = true;
        for (const auto& h : bounded.halfspaces())
            if (h.value(std::span<const double>(x)) <= 1e-12) inside = false;
        if (inside) out.push_back(x);
        int k = 0;
        while (k < n && ++idx[k] == per_axis) idx[k++] = 0;
        if (k == n) break;
    }
    return out;
}

namespace {

int default_grid(int n) {
    switch (n) {
        case 1: return 2000;
        case 2: return 120;
        case 3: return 30;
        default: return 12;
    }
}

Polyhedron sample_region(const Polyhedron& poly, double delta) {
    if (recession_cone(poly).is_zero()) return poly;
    return truncate(poly, std::nullopt, from_double(delta));
}

std::vector<std::vector<int>> multi_indices(int n, int kmin, int kmax) {
    std::vector<std::vector<int>> out;
    std::vector<int> a(n, 0);
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == n) {
            int s = 0;
            for (int e : a) s += e;
            if (s >= kmin) out.push_back(a);
            return;
        }
        for (int e = 0; e <= left; ++e) {
            a[i] = e;
            rec(i + 1, left - e);
        }
        a[i] = 0;
    };
    rec(0, kmax);
    return out;
}

double growth_exponent(double prev, double last, double d_prev, double d_last) {
    if (!std::isfinite(last)) return std::numeric_limits<double>::infinity();
    if (prev <= 0.0) return last <= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::log(last / prev) / std::log(d_last / d_prev);
}

}  // namespace

PositivityReport check_positive(const Weight& v, const Polyhedron& poly) {
    PositivityReport rep;
    rep.min_value = std::numeric_limits<double>::infinity();
    auto consider = [&](const std::vector<double>& x) {
        ++rep.samples;
        double val = v.eval(x.data());
        if (val < rep.min_value) rep.min_value = val;
        if (!(val > 0) && rep.positive) {
            rep.positive = false;
            rep.witness = x;
        }
    };
    for (const auto& vert : vertices(poly)) consider(to_double(vert));
    auto witness = to_double(validate(poly).witness);
    for (const auto& g : recession_cone(poly).generators) {
        double len = norm(g);
        for (double t : {1.0, 2.0, 5.0, 10.0, 20.0}) {
            auto x = witness;
            for (size_t i = 0; i < x.size(); ++i) x[i] += t * static_cast<double>(g[i]) / len;
            consider(x);
        }
    }
    int per_axis = std::min(default_grid(poly.dim()), 60);
    for (const auto& x : interior_grid(sample_region(poly, 20.0), per_axis)) consider(x);
    return rep;
}

ClassReport check_class_W(const Weight& v, const Weight& w, const Polyhedron& poly, double beta_star,
                          const ClassOptions& opts) {
    const int n = poly.dim();
    ClassReport rep;
    Cone c = recession_cone(poly);
    if (c.is_zero()) {
        rep.decay_rate = std::numeric_limits<double>::infinity();
        rep.decay_ok = true;
    } else {
        auto x0 = to_double(validate(poly).witness);
        double rate = std::numeric_limits<double>::infinity();
        for (const auto& g : c.generators) {
            double len = norm(g);
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            int m = 0;
            for (double t = 10.0; t <= 40.0 + 1e-9; t += 2.5) {
                std::vector<double> x = x0;
                for (int i = 0; i < n; ++i) x[i] += t * static_cast<double>(g[i]) / len;
                double y = std::log(std::abs(v.eval(x.data())));
                sx += t;
                sy += y;
                sxx += t * t;
                sxy += t * y;
                ++m;
            }
            double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
            if (!std::isfinite(slope)) slope = 0.0;
            rate = std::min(rate, -slope);
        }
        rep.decay_rate = rate;
        rep.decay_ok = rate > opts.min_rate;
    }

    std::vector<Weight> dv, dw;
    for (const auto& a : multi_indices(n, 1, opts.k_max)) dv.push_back(v.derivative(a));
    for (const auto& a : multi_indices(n, 0, opts.k_max)) dw.push_back(w.derivative(a));
    const int per_axis = opts.grid_points > 0 ? opts.grid_points : default_grid(n);
    for (double delta : opts.deltas) {
        double sv = 0.0, sw = 0.0;
        for (const auto& x : interior_grid(sample_region(poly, delta), per_axis)) {
            double val = v.eval(x.data());
            if (!(val > 0)) {
                sv = sw = std::numeric_limits<double>::infinity();
                break;
            }
            for (const auto& d : dv) sv = std::max(sv, std::abs(d.eval(x.data())) / val);
            double vb = std::pow(val, beta_star);
            for (const auto& d : dw) sw = std::max(sw, std::abs(d.eval(x.data())) / vb);
        }
        rep.sup_v.push_back(sv);
        rep.sup_w.push_back(sw);
    }
    const size_t k = opts.deltas.size();
    if (k >= 2) {
        rep.growth_v = growth_exponent(rep.sup_v[k - 2], rep.sup_v[k - 1], opts.deltas[k - 2], opts.deltas[k - 1]);
        rep.growth_w = growth_exponent(rep.sup_w[k - 2], rep.sup_w[k - 1], opts.deltas[k - 2], opts.deltas[k - 1]);
    }
    rep.v_bounded = std::isfinite(rep.sup_v.back()) && rep.growth_v < opts.growth_tol;
    rep.w_bounded = std::isfinite(rep.sup_w.back()) && rep.growth_w < opts.growth_tol;
    rep.pass = rep.decay_ok && rep.v_bounded && rep.w_bounded;
    return rep;
}

}  // namespace toricwk
