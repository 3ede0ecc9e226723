#include "toricwk/pl.hpp"

#include "toricwk/errors.hpp"

#include <algorithm>
#include <cmath>

namespace toricwk {

double AffineForm::eval(const double* x) const {
    double s = to_double(c);
    for (size_t i = 0; i < b.size(); ++i) s += to_double(b[i]) * x[i];
    return s;
}

PiecewiseLinear::PiecewiseLinear(int dim, std::vector<AffineForm> pieces) : dim_(dim) {
    if (pieces.empty()) throw InvalidInput("a piecewise linear function needs at least one piece");
    for (auto& p : pieces) {
        if (static_cast<int>(p.b.size()) != dim) throw InvalidInput("piece has wrong dimension");
        if (std::find(pieces_.begin(), pieces_.end(), p) == pieces_.end()) pieces_.push_back(std::move(p));
    }
}

PiecewiseLinear PiecewiseLinear::affine(const RatVec& b, const Rational& c) {
    return PiecewiseLinear(static_cast<int>(b.size()), {AffineForm{b, c}});
}

PiecewiseLinear PiecewiseLinear::simple_crease(const RatVec& b, const Rational& a) {
    const int n = static_cast<int>(b.size());
    return PiecewiseLinear(n, {AffineForm{b, a}, AffineForm{RatVec(n, Rational(0)), Rational(0)}});
}

PiecewiseLinear PiecewiseLinear::f_r(const RatVec& direction, const Rational& r) {
    return simple_crease(direction, -r);
}

PiecewiseLinear PiecewiseLinear::f_x0(const Rational& x0) { return simple_crease({Rational(-1)}, x0); }

double PiecewiseLinear::eval(const double* x) const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& p : pieces_) m = std::max(m, p.eval(x));
    return m;
}

Rational PiecewiseLinear::eval(const RatVec& x) const {
    Rational m = pieces_[0].eval(x);
    for (const auto& p : pieces_) m = std::max(m, p.eval(x));
    return m;
}

PiecewiseLinear PiecewiseLinear::scaled(const Rational& k) const {
    auto ps = pieces_;
    for (auto& p : ps) {
        for (auto& v : p.b) v *= k;
        p.c *= k;
    }
    return PiecewiseLinear(dim_, ps);
}

namespace {

RatVec diff(const RatVec& a, const RatVec& b) {
    RatVec d = a;
    for (size_t i = 0; i < d.size(); ++i) d[i] -= b[i];
    return d;
}

// Region of piece a among `pieces`; nullopt when some constant constraint fails.
std::optional<Polyhedron> region_of(const std::vector<AffineForm>& pieces, int a, const Polyhedron& p,
                                    std::vector<int>* owner) {
    auto hs = p.halfspaces();
    if (owner) owner->assign(hs.size(), -1);
    for (int k = 0; k < static_cast<int>(pieces.size()); ++k) {
        if (k == a) continue;
        RatVec db = diff(pieces[a].b, pieces[k].b);
        Rational dc = pieces[a].c - pieces[k].c;
        if (is_zero(db)) {
            if (dc < 0) return std::nullopt;
            continue;
        }
        hs.push_back(HalfSpace::from_form(db, dc));
        if (owner) owner->push_back(k);
    }
    return Polyhedron(p.dim(), std::move(hs));
}

}  // namespace

Decomposition regions_and_creases(const PiecewiseLinear& f, const Polyhedron& p) {
    Decomposition out;
    const auto& pieces = f.pieces();
    std::vector<AffineForm> kept;
    for (int a = 0; a < static_cast<int>(pieces.size()); ++a) {
        auto r = region_of(pieces, a, p, nullptr);
        if (r && has_interior(*r)) {
            kept.push_back(pieces[a]);
        } else {
            out.log.push_back("dropped piece " + std::to_string(a) + ": region has empty interior");
        }
    }
    if (kept.empty()) throw InvalidInput("no piece has a full-dimensional region");
    out.reduced = PiecewiseLinear(f.dim(), kept);
    const auto& rp = out.reduced.pieces();
    for (int a = 0; a < static_cast<int>(rp.size()); ++a) {
        std::vector<int> owner;
        auto r = region_of(rp, a, p, &owner);
        out.regions.push_back(Region{a, *r});
        for (int idx = 0; idx < static_cast<int>(owner.size()); ++idx) {
            int b = owner[idx];
            if (b <= a) continue;
            AffineForm d{diff(rp[a].b, rp[b].b), rp[a].c - rp[b].c};
            auto sec = hyperplane_section(d.b, d.c, r->halfspaces(), idx);
            if (!sec) continue;
            out.creases.push_back(Crease{a, b, d, *sec});
        }
    }
    return out;
}

bool is_admissible(const PiecewiseLinear& f, const Polyhedron& p) {
    Cone c = recession_cone(p);
    for (const auto& piece : f.pieces())
        for (const auto& g : c.generators)
            if (dot(g, piece.b) > 0) return false;
    return true;
}

std::optional<Rational> sup_on(const PiecewiseLinear& f, const Polyhedron& p) {
    std::optional<Rational> best;
    for (const auto& piece : f.pieces()) {
        RatVec nb = piece.b;
        for (auto& v : nb) v = -v;
        auto m = minimize_affine(p, nb, -piece.c);
        if (!m) return std::nullopt;
        if (!best || -*m > *best) best = -*m;
    }
    return best;
}

DAdmissibility is_D_admissible(const PiecewiseLinear& f, const Polyhedron& p, double d) {
    DAdmissibility out;
    if (!p.origin_interior()) throw InvalidInput("D-admissibility needs the origin in the interior");
    const auto& pieces = f.pieces();
    Rational top = pieces[0].c;
    for (const auto& piece : pieces) top = std::max(top, piece.c);
    for (int j = 0; j < static_cast<int>(pieces.size()); ++j) {
        const auto& pj = pieces[j];
        if (pj.c != top || norm(pj.b) > d) continue;
        std::optional<Rational> sup;
        bool bounded = true;
        if (!is_zero(pj.b)) {
            auto hs = p.halfspaces();
            RatVec nb = pj.b;
            for (auto& v : nb) v = -v;
            hs.push_back(HalfSpace::from_form(nb, Rational(-1)));
            Polyhedron region(p.dim(), hs);
            std::vector<AffineForm> ps = pieces;
            for (auto& q : ps) q.c -= pj.c;
            try {
                sup = sup_on(PiecewiseLinear(f.dim(), ps), region);
                bounded = sup.has_value();
            } catch (const EmptyInterior&) {
                sup.reset();
            }
        }
        if (!bounded) continue;
        if (sup && to_double(*sup) > d) continue;
        out.admissible = true;
        out.piece = j;
        out.sup = sup;
        return out;
    }
    return out;
}

PiecewiseLinear normalize_plus(const PiecewiseLinear& f, int j) {
    if (j < 0 || j >= static_cast<int>(f.size())) throw InvalidInput("piece index out of range");
    const auto lj = f.pieces()[j];
    auto ps = f.pieces();
    for (auto& q : ps) {
        q.b = diff(q.b, lj.b);
        q.c -= lj.c;
    }
    return PiecewiseLinear(f.dim(), ps);
}

RatVec star_subgradient(const PiecewiseLinear& f) {
    const auto& pieces = f.pieces();
    Rational top = pieces[0].c;
    for (const auto& piece : pieces) top = std::max(top, piece.c);
    std::optional<RatVec> best;
    Rational best_norm;
    for (const auto& piece : pieces) {
        if (piece.c != top) continue;
        Rational n2 = dot(piece.b, piece.b);
        if (!best || n2 < best_norm || (n2 == best_norm && piece.b < *best)) {
            best = piece.b;
            best_norm = n2;
        }
    }
    return *best;
}

PiecewiseLinear normalize_star(const PiecewiseLinear& f) {
    RatVec g = star_subgradient(f);
    Rational f0 = f.eval(RatVec(f.dim(), Rational(0)));
    auto ps = f.pieces();
    for (auto& q : ps) {
        q.b = diff(q.b, g);
        q.c -= f0;
    }
    return PiecewiseLinear(f.dim(), ps);
}

ConvexFunction normalize_star(const ConvexFunction& f) {
    const int n = f.dim;
    std::vector<double> zero(n, 0.0), g(n, 0.0);
    const double f0 = f.value(zero.data());
    f.subgradient(zero.data(), g.data());
    ConvexFunction out;
    out.dim = n;
    auto value = f.value;
    auto sub = f.subgradient;
    out.value = [value, g, f0, n](const double* x) {
        double s = value(x) - f0;
        for (int i = 0; i < n; ++i) s -= g[i] * x[i];
        return s;
    };
    out.subgradient = [sub, g, n](const double* x, double* out_g) {
        sub(x, out_g);
        for (int i = 0; i < n; ++i) out_g[i] -= g[i];
    };
    return out;
}

Polyhedron test_config_polytope(const PiecewiseLinear& f, const Polyhedron& p, const Rational& r) {
    if (!is_admissible(f, p)) throw NotAdmissible("a slope is not in the negative dual cone");
    auto s = sup_on(f, p);
    if (!s) throw NotAdmissible("f is unbounded above on P");
    if (r < *s) throw RTooSmall("R = " + to_string(r) + " is below sup f = " + to_string(*s));
    const int n = p.dim();
    std::vector<HalfSpace> hs;
    for (const auto& h : p.halfspaces()) {
        IntVec nu = h.normal;
        nu.push_back(0);
        hs.emplace_back(nu, h.offset);
    }
    IntVec ey(n + 1, 0);
    ey[n] = 1;
    hs.emplace_back(ey, Rational(0));
    for (const auto& piece : f.pieces()) {
        RatVec b(n + 1);
        for (int i = 0; i < n; ++i) b[i] = -piece.b[i];
        b[n] = -1;
        hs.push_back(HalfSpace::from_form(b, r - piece.c));
    }
    return Polyhedron(n + 1, hs);
}

}  // namespace toricwk
