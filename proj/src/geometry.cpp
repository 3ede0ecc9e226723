#include "toricwk/geometry.hpp"

#include "toricwk/errors.hpp"
#include "toricwk/lp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace toricwk {

namespace {

void for_each_subset(int m, int k, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> idx(k);
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == k) {
            fn(idx);
            return;
        }
        for (int i = start; i <= m - (k - depth); ++i) {
            idx[depth] = i;
            rec(i + 1, depth + 1);
        }
    };
    if (k >= 0 && k <= m) rec(0, 0);
}

void sort_unique(std::vector<IntVec>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::vector<IntVec> cone_generators(int n, const std::vector<IntVec>& normals) {
    RatMat rows;
    for (const auto& nu : normals) rows.push_back(to_rat(nu));
    std::vector<RatVec> lineality = nullspace(rows, n);
    std::vector<IntVec> gens;
    for (const auto& l : lineality) {
        IntVec p = primitive_of(l);
        gens.push_back(p);
        IntVec q = p;
        for (auto& c : q) c = -c;
        gens.push_back(q);
    }
    const int k = n - 1 - static_cast<int>(lineality.size());
    if (k < 0) {
        sort_unique(gens);
        return gens;
    }
    const int m = static_cast<int>(normals.size());
    std::vector<IntVec> rays;
    for_each_subset(m, k, [&](const std::vector<int>& subset) {
        RatMat mat;
        for (int i : subset) mat.push_back(rows[i]);
        for (const auto& l : lineality) mat.push_back(l);
        if (rank(mat) != n - 1) return;
        auto ns = nullspace(mat, n);
        if (ns.size() != 1) return;
        const RatVec& r = ns[0];
        bool nonneg = true, nonpos = true;
        for (const auto& row : rows) {
            Rational d = dot(row, r);
            if (d < 0) nonneg = false;
            if (d > 0) nonpos = false;
        }
        if (nonneg) {
            rays.push_back(primitive_of(r));
        } else if (nonpos) {
            RatVec neg = r;
            for (auto& c : neg) c = -c;
            rays.push_back(primitive_of(neg));
        }
    });
    sort_unique(rays);
    sort_unique(gens);
    gens.insert(gens.end(), rays.begin(), rays.end());
    return gens;
}

// Unimodular matrix U with nu * U = e_1; returns (first column, remaining columns).
std::pair<IntVec, std::vector<IntVec>> unimodular_completion(const IntVec& nu) {
    const int n = static_cast<int>(nu.size());
    std::vector<IntVec> cols(n, IntVec(n, 0));
    for (int i = 0; i < n; ++i) cols[i][i] = 1;
    IntVec r = nu;
    for (;;) {
        int p = -1, nonzero = 0;
        for (int j = 0; j < n; ++j) {
            if (r[j] == 0) continue;
            ++nonzero;
            if (p < 0 || std::llabs(r[j]) < std::llabs(r[p])) p = j;
        }
        if (nonzero <= 1) {
            if (p < 0 || std::llabs(r[p]) != 1) throw NonPrimitiveNormal("normal is not primitive");
            if (r[p] < 0) {
                for (auto& c : cols[p]) c = -c;
                r[p] = 1;
            }
            std::vector<IntVec> rest;
            for (int j = 0; j < n; ++j)
                if (j != p) rest.push_back(cols[j]);
            return {cols[p], rest};
        }
        for (int k = 0; k < n; ++k) {
            if (k == p || r[k] == 0) continue;
            long long q = r[k] / r[p];
            r[k] -= q * r[p];
            for (int i = 0; i < n; ++i) cols[k][i] -= q * cols[p][i];
        }
    }
}

void lp_rows(const Polyhedron& p, RatMat& a, RatVec& b) {
    for (const auto& h : p.halfspaces()) {
        RatVec row;
        for (long long c : h.normal) row.emplace_back(-c);
        a.push_back(std::move(row));
        b.push_back(h.offset);
    }
}

RatVec neg(RatVec v) {
    for (auto& c : v) c = -c;
    return v;
}

}  // namespace

HalfSpace::HalfSpace(IntVec normal_in, Rational offset_in) : normal(std::move(normal_in)), offset(std::move(offset_in)) {
    long long g = gcd_of(normal);
    if (g == 0) throw InvalidInput("half-space normal must be nonzero");
    if (g != 1) throw NonPrimitiveNormal("half-space normal has gcd " + std::to_string(g));
}

HalfSpace HalfSpace::from_form(const RatVec& b, const Rational& c) {
    Rational q;
    IntVec nu = primitive_of(b, &q);
    return HalfSpace(std::move(nu), c / q);
}

Rational HalfSpace::value(const RatVec& x) const { return dot(normal, x) + offset; }

double HalfSpace::value(std::span<const double> x) const {
    double s = to_double(offset);
    for (size_t i = 0; i < normal.size(); ++i) s += static_cast<double>(normal[i]) * x[i];
    return s;
}

Polyhedron::Polyhedron(int dim, std::vector<HalfSpace> halfspaces) : dim_(dim), halfspaces_(std::move(halfspaces)) {
    if (dim < 0) throw InvalidInput("negative dimension");
    for (const auto& h : halfspaces_)
        if (static_cast<int>(h.normal.size()) != dim) throw InvalidInput("half-space dimension mismatch");
}

bool Polyhedron::origin_interior() const {
    for (const auto& h : halfspaces_)
        if (h.offset <= 0) return false;
    return true;
}

bool Polyhedron::contains(const RatVec& x) const {
    for (const auto& h : halfspaces_)
        if (h.value(x) < 0) return false;
    return true;
}

bool Polyhedron::contains(std::span<const double> x, double slack) const {
    for (const auto& h : halfspaces_)
        if (h.value(x) < -slack) return false;
    return true;
}

Cone Cone::from_normals(int dim, std::vector<IntVec> normals) {
    Cone c;
    c.dim = dim;
    c.normals = std::move(normals);
    c.generators = cone_generators(dim, c.normals);
    return c;
}

bool Cone::is_pointed() const {
    RatMat rows;
    for (const auto& nu : normals) rows.push_back(to_rat(nu));
    return nullspace(rows, dim).empty();
}

bool Cone::contains(const RatVec& x) const {
    for (const auto& nu : normals)
        if (dot(nu, x) < 0) return false;
    return true;
}

std::optional<RatVec> interior_point(const Polyhedron& p) {
    const int n = p.dim();
    if (p.origin_interior()) return RatVec(n, Rational(0));
    // maximize t subject to <nu_i,x> + a_i >= t, t <= 1
    RatMat a;
    RatVec b;
    for (const auto& h : p.halfspaces()) {
        RatVec row;
        for (long long c : h.normal) row.emplace_back(-c);
        row.emplace_back(1);
        a.push_back(std::move(row));
        b.push_back(h.offset);
    }
    RatVec cap(n + 1, Rational(0));
    cap[n] = 1;
    a.push_back(cap);
    b.emplace_back(1);
    RatVec obj(n + 1, Rational(0));
    obj[n] = 1;
    LpResult r = lp_maximize(a, b, obj);
    if (r.status != LpStatus::Optimal || r.value <= 0) return std::nullopt;
    r.x.pop_back();
    return r.x;
}

bool has_interior(const Polyhedron& p) { return interior_point(p).has_value(); }

std::optional<Rational> minimize_affine(const Polyhedron& p, const RatVec& b, const Rational& c, RatVec* argmin) {
    RatMat a;
    RatVec rhs;
    lp_rows(p, a, rhs);
    LpResult r = lp_maximize(a, rhs, neg(b));
    if (r.status == LpStatus::Infeasible) throw EmptyInterior("polyhedron is empty");
    if (r.status == LpStatus::Unbounded) return std::nullopt;
    if (argmin) *argmin = r.x;
    return -r.value + c;
}

ValidationReport validate(const Polyhedron& p) {
    if (p.dim() < 1) throw InvalidInput("dimension must be at least 1");
    if (p.halfspaces().empty()) throw InvalidInput("at least one half-space is required");
    ValidationReport rep;
    auto w = interior_point(p);
    if (!w) throw EmptyInterior("no strictly feasible point");
    rep.witness = *w;
    const auto& hs = p.halfspaces();
    std::vector<bool> kept(hs.size(), true);
    for (size_t i = 0; i < hs.size(); ++i) {
        std::vector<HalfSpace> others;
        for (size_t j = 0; j < hs.size(); ++j)
            if (j != i && kept[j]) others.push_back(hs[j]);
        Polyhedron rest(p.dim(), others);
        auto m = minimize_affine(rest, to_rat(hs[i].normal), hs[i].offset);
        if (m && *m >= 0) kept[i] = false;
    }
    std::vector<HalfSpace> red;
    for (size_t i = 0; i < hs.size(); ++i) {
        if (!kept[i]) continue;
        rep.irredundant.push_back(static_cast<int>(i));
        red.push_back(hs[i]);
    }
    rep.reduced = Polyhedron(p.dim(), red);
    rep.bounded = recession_cone(rep.reduced).is_zero();
    return rep;
}

std::vector<RatVec> vertices(const Polyhedron& p) {
    const int n = p.dim();
    const auto& hs = p.halfspaces();
    std::vector<RatVec> out;
    if (n == 0) {
        out.emplace_back();
        return out;
    }
    for_each_subset(static_cast<int>(hs.size()), n, [&](const std::vector<int>& s) {
        RatMat a;
        RatVec b;
        for (int i : s) {
            a.push_back(to_rat(hs[i].normal));
            b.push_back(-hs[i].offset);
        }
        auto x = solve_square(a, b);
        if (x && p.contains(*x)) out.push_back(*x);
    });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

DelzantReport is_delzant(const Polyhedron& p) {
    const int n = p.dim();
    DelzantReport rep;
    for (const auto& v : vertices(p)) {
        RatMat active;
        for (const auto& h : p.halfspaces())
            if (h.value(v) == 0) active.push_back(to_rat(h.normal));
        if (static_cast<int>(active.size()) != n)
            throw NotSimple(std::to_string(active.size()) + " facets meet at a vertex in dimension " + std::to_string(n));
        VertexCertificate cert;
        cert.vertex = v;
        RatMat edge_matrix(n, RatVec(n));
        for (int j = 0; j < n; ++j) {
            RatVec e(n, Rational(0));
            e[j] = 1;
            auto col = solve_square(active, e);
            if (!col) throw NotSimple("active normals are linearly dependent");
            IntVec dir = primitive_of(*col);
            for (int i = 0; i < n; ++i) edge_matrix[i][j] = dir[i];
            cert.edges.push_back(std::move(dir));
        }
        cert.det = determinant(edge_matrix);
        if (abs(cert.det) != 1) rep.delzant = false;
        rep.vertices.push_back(std::move(cert));
    }
    return rep;
}

Cone recession_cone(const Polyhedron& p) {
    std::vector<IntVec> normals;
    for (const auto& h : p.halfspaces()) normals.push_back(h.normal);
    return Cone::from_normals(p.dim(), std::move(normals));
}

Cone dual_cone(const Cone& c) { return Cone::from_normals(c.dim, c.generators); }

Polyhedron interior_polyhedron(const Polyhedron& p, double delta) {
    if (!(delta > 0)) throw InvalidInput("delta must be positive");
    std::vector<HalfSpace> hs;
    for (const auto& h : p.halfspaces())
        hs.emplace_back(h.normal, h.offset - from_double(delta * norm(h.normal)));
    Polyhedron out(p.dim(), std::move(hs));
    if (!has_interior(out)) throw EmptyInterior("shrunken polyhedron has empty interior");
    return out;
}

RatVec auto_direction(const Polyhedron& p) {
    Cone c = recession_cone(p);
    RatVec b(p.dim(), Rational(0));
    if (c.is_zero()) return b;
    for (const auto& g : dual_cone(c).generators)
        for (int i = 0; i < p.dim(); ++i) b[i] += g[i];
    return b;
}

Polyhedron truncate(const Polyhedron& p, const std::optional<RatVec>& b_plus, const Rational& delta_star) {
    Cone c = recession_cone(p);
    RatVec b = b_plus ? *b_plus : auto_direction(p);
    if (static_cast<int>(b.size()) != p.dim()) throw InvalidInput("truncation direction has wrong dimension");
    for (const auto& g : c.generators)
        if (dot(g, b) <= 0) throw NotInteriorDirection("direction is not strictly positive on the recession cone");
    if (is_zero(b)) return p;
    auto hs = p.halfspaces();
    hs.push_back(HalfSpace::from_form(neg(b), delta_star));
    return Polyhedron(p.dim(), std::move(hs));
}

bool is_anticanonical(const Polyhedron& p) {
    for (const auto& h : p.halfspaces())
        if (h.offset != 1 || !is_primitive(h.normal)) return false;
    return true;
}

RatVec Facet::to_ambient(const RatVec& t) const {
    RatVec x = origin;
    for (size_t k = 0; k < basis.size(); ++k)
        for (size_t i = 0; i < x.size(); ++i) x[i] += basis[k][i] * t[k];
    return x;
}

void Facet::to_ambient(const double* t, double* x) const {
    const size_t n = origin.size();
    for (size_t i = 0; i < n; ++i) x[i] = to_double(origin[i]);
    for (size_t k = 0; k < basis.size(); ++k)
        for (size_t i = 0; i < n; ++i) x[i] += static_cast<double>(basis[k][i]) * t[k];
}

std::optional<Facet> hyperplane_section(const RatVec& b, const Rational& c, const std::vector<HalfSpace>& constraints,
                                        int skip) {
    Rational q;
    IntVec nu = primitive_of(b, &q);
    auto [u0, basis] = unimodular_completion(nu);
    Facet f;
    f.origin = to_rat(u0);
    for (auto& v : f.origin) v *= -c / q;
    f.basis = basis;
    f.measure_scale = 1 / q;
    const int m = static_cast<int>(basis.size());
    std::vector<HalfSpace> dom;
    for (int j = 0; j < static_cast<int>(constraints.size()); ++j) {
        if (j == skip) continue;
        const auto& h = constraints[j];
        RatVec nb(m);
        for (int k = 0; k < m; ++k) {
            long long s = 0;
            for (size_t i = 0; i < nu.size(); ++i) s += h.normal[i] * basis[k][i];
            nb[k] = s;
        }
        Rational off = h.value(f.origin);
        if (is_zero(nb)) {
            if (off < 0) return std::nullopt;
            continue;
        }
        HalfSpace hs = HalfSpace::from_form(nb, off);
        if (std::find(dom.begin(), dom.end(), hs) == dom.end()) dom.push_back(std::move(hs));
    }
    f.domain = Polyhedron(m, std::move(dom));
    if (m > 0 && !has_interior(f.domain)) return std::nullopt;
    return f;
}

std::vector<Facet> facet_atlas(const Polyhedron& p) {
    std::vector<Facet> out;
    const auto& hs = p.halfspaces();
    for (int i = 0; i < static_cast<int>(hs.size()); ++i) {
        auto f = hyperplane_section(to_rat(hs[i].normal), hs[i].offset, hs, i);
        if (!f) continue;
        f->parent_index = i;
        out.push_back(std::move(*f));
    }
    return out;
}

Polyhedron translate(const Polyhedron& p, const RatVec& t) {
    std::vector<HalfSpace> hs;
    for (const auto& h : p.halfspaces()) hs.emplace_back(h.normal, h.offset - dot(h.normal, t));
    return Polyhedron(p.dim(), std::move(hs));
}

Polyhedron apply_unimodular(const Polyhedron& p, const std::vector<IntVec>& u) {
    const int n = p.dim();
    RatMat ut(n, RatVec(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) ut[i][j] = u[j][i];
    Rational det = determinant(ut);
    if (abs(det) != 1) throw InvalidInput("matrix is not unimodular");
    // y = U x, so <nu, x> = <U^{-T} nu, y>.
    std::vector<HalfSpace> hs;
    for (const auto& h : p.halfspaces()) {
        auto m = solve_square(ut, to_rat(h.normal));
        hs.push_back(HalfSpace::from_form(*m, h.offset));
    }
    return Polyhedron(n, std::move(hs));
}

ProductDecomposition product_cylindrical_check(const Polyhedron& p) {
    const int n = p.dim();
    ProductDecomposition out;
    out.recession = recession_cone(p);
    const auto& gens = out.recession.generators;
    const bool pointed = out.recession.is_pointed();
    const auto& hs = p.halfspaces();
    for (int i = 0; i < static_cast<int>(hs.size()); ++i) {
        bool all_zero = true, all_pos = true;
        for (const auto& g : gens) {
            Rational d = dot(to_rat(hs[i].normal), to_rat(g));
            if (d != 0) all_zero = false;
            if (d <= 0) all_pos = false;
        }
        if (all_zero)
            out.i1.push_back(i);
        else if (pointed && all_pos)
            out.i2.push_back(i);
        else
            out.i3.push_back(i);
    }
    RatMat w_rows;
    for (const auto& g : gens) w_rows.push_back(to_rat(g));
    RatMat w_basis = w_rows.empty() ? RatMat{} : rref(w_rows);
    const int dim_w = static_cast<int>(w_basis.size());
    out.pv_dim = n - dim_w;

    std::vector<IntVec> pv_normals;
    for (int i : out.i1) pv_normals.push_back(hs[i].normal);
    for (const auto& w : w_basis) {
        pv_normals.push_back(primitive_of(w));
        pv_normals.push_back(primitive_of(neg(w)));
    }
    if (!cone_generators(n, pv_normals).empty()) {
        out.reason = "half-spaces vanishing on the recession cone do not bound P_V";
        return out;
    }

    // Facet normals of C inside its span W.
    std::vector<IntVec> etas;
    if (dim_w > 0) {
        RatMat wwt(dim_w, RatVec(dim_w));
        for (int a = 0; a < dim_w; ++a)
            for (int b = 0; b < dim_w; ++b) wwt[a][b] = dot(w_basis[a], w_basis[b]);
        for (const auto& g : dual_cone(out.recession).generators) {
            RatVec wg(dim_w);
            for (int a = 0; a < dim_w; ++a) wg[a] = dot(w_basis[a], to_rat(g));
            auto coef = solve_square(wwt, wg);
            RatVec proj(n, Rational(0));
            for (int a = 0; a < dim_w; ++a)
                for (int i = 0; i < n; ++i) proj[i] += (*coef)[a] * w_basis[a][i];
            if (is_zero(proj)) continue;
            IntVec eta = primitive_of(proj);
            RatMat zero_set;
            for (const auto& c : gens)
                if (dot(eta, to_rat(c)) == 0) zero_set.push_back(to_rat(c));
            int r = zero_set.empty() ? 0 : rank(zero_set);
            if (r == dim_w - 1) etas.push_back(eta);
        }
        sort_unique(etas);
    }

    std::vector<HalfSpace> q_hs;
    for (int i : out.i1) q_hs.push_back(hs[i]);
    RatVec t_vals;
    for (const auto& eta : etas) {
        auto t = minimize_affine(p, to_rat(eta), 0);
        if (!t) {
            out.reason = "cone facet functional unbounded below on P";
            return out;
        }
        t_vals.push_back(*t);
        q_hs.emplace_back(eta, -*t);
    }
    Polyhedron q(n, q_hs);

    // Translation inside W solving <eta_k, tau> = t_k.
    out.translation.assign(n, Rational(0));
    if (dim_w > 0 && !etas.empty()) {
        const int k = static_cast<int>(etas.size());
        RatMat a(k, RatVec(dim_w));
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < dim_w; ++c) a[r][c] = dot(etas[r], w_basis[c]);
        RatMat ata(dim_w, RatVec(dim_w, Rational(0)));
        RatVec atb(dim_w, Rational(0));
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < dim_w; ++c) {
                atb[c] += a[r][c] * t_vals[r];
                for (int d = 0; d < dim_w; ++d) ata[c][d] += a[r][c] * a[r][d];
            }
        auto coef = solve_square(ata, atb);
        if (!coef) {
            out.reason = "cone facets do not determine an apex";
            return out;
        }
        for (int r = 0; r < k; ++r) {
            Rational s = 0;
            for (int c = 0; c < dim_w; ++c) s += a[r][c] * (*coef)[c];
            if (s != t_vals[r]) {
                out.reason = "cone facets of P have no common apex";
                return out;
            }
        }
        for (int c = 0; c < dim_w; ++c)
            for (int i = 0; i < n; ++i) out.translation[i] += (*coef)[c] * w_basis[c][i];
    }

    double radius = 0.0;
    for (int j : out.i3) {
        auto m = minimize_affine(q, to_rat(hs[j].normal), hs[j].offset);
        if (!m || *m < 0) {
            out.reason = "half-space " + std::to_string(j) + " cuts the product along an unbounded set";
            return out;
        }
    }
    for (int j : out.i2) {
        auto cut_hs = q_hs;
        cut_hs.emplace_back(primitive_of(neg(to_rat(hs[j].normal))), -hs[j].offset);
        Polyhedron cut(n, cut_hs);
        std::vector<IntVec> cut_normals;
        for (const auto& h : cut_hs) cut_normals.push_back(h.normal);
        if (!cone_generators(n, cut_normals).empty()) {
            out.reason = "half-space " + std::to_string(j) + " cuts an unbounded region";
            return out;
        }
        for (const auto& v : vertices(cut)) radius = std::max(radius, norm(v));
    }
    out.compact_radius = radius;

    auto slice_hs = q_hs;
    for (const auto& w : w_basis) {
        Rational c = dot(w, out.translation);
        slice_hs.push_back(HalfSpace::from_form(w, -c));
        slice_hs.push_back(HalfSpace::from_form(neg(w), c));
    }
    out.pv_vertices = vertices(Polyhedron(n, slice_hs));
    out.product_polyhedron = q;
    out.product = true;
    return out;
}

}  // namespace toricwk
