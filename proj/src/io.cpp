#include "toricwk/io.hpp"

#include "toricwk/errors.hpp"

#include <charconv>
#include <cmath>
#include <limits>

namespace toricwk::io {

namespace {

[[noreturn]] void schema(const std::string& what) { throw SchemaError(what); }

const json& field(const json& j, const char* key) {
    if (!j.is_object()) schema(std::string("expected an object with '") + key + "'");
    auto it = j.find(key);
    if (it == j.end()) schema(std::string("missing field '") + key + "'");
    return *it;
}

int int_from_json(const json& j, const char* what) {
    if (!j.is_number_integer()) schema(std::string(what) + " must be an integer");
    return j.get<int>();
}

json number(double x) {
    if (std::isfinite(x)) return x;
    return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

double number_from_json(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        return to_double(parse_rational(s));
    }
    schema("expected a number");
}

json doubles(const std::vector<double>& xs) {
    json out = json::array();
    for (double x : xs) out.push_back(number(x));
    return out;
}

std::vector<double> doubles_from_json(const json& j) {
    if (!j.is_array()) schema("expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : j) out.push_back(number_from_json(x));
    return out;
}

}  // namespace

std::string format_double(double x) {
    if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

json to_json(const Rational& q) { return to_string(q); }

Rational rational_from_json(const json& j) {
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_number_float()) return from_double(j.get<double>());
    if (j.is_string()) return parse_rational(j.get_ref<const std::string&>());
    schema("expected a rational");
}

json to_json(const RatVec& v) {
    json out = json::array();
    for (const auto& q : v) out.push_back(to_json(q));
    return out;
}

RatVec ratvec_from_json(const json& j) {
    if (!j.is_array()) schema("expected an array of rationals");
    RatVec out;
    for (const auto& x : j) out.push_back(rational_from_json(x));
    return out;
}

IntVec intvec_from_json(const json& j) {
    if (!j.is_array()) schema("expected an array of integers");
    IntVec out;
    for (const auto& x : j) {
        if (!x.is_number_integer()) schema("expected an integer entry");
        out.push_back(x.get<long long>());
    }
    return out;
}

json to_json(const Polyhedron& p) {
    json hs = json::array();
    for (const auto& h : p.halfspaces()) hs.push_back({{"normal", h.normal}, {"offset", to_json(h.offset)}});
    return {{"dim", p.dim()}, {"halfspaces", hs}};
}

Polyhedron polyhedron_from_json(const json& j) {
    int dim = int_from_json(field(j, "dim"), "dim");
    if (dim < 1) schema("dim must be positive");
    const auto& hs = field(j, "halfspaces");
    if (!hs.is_array()) schema("halfspaces must be an array");
    std::vector<HalfSpace> out;
    for (const auto& h : hs) {
        IntVec normal = intvec_from_json(field(h, "normal"));
        if (static_cast<int>(normal.size()) != dim) schema("normal has the wrong length");
        out.emplace_back(std::move(normal), rational_from_json(field(h, "offset")));
    }
    return Polyhedron(dim, std::move(out));
}

json to_json(const Polynomial& p) {
    json coeffs = json::array();
    for (const auto& [m, c] : p.coeffs()) coeffs.push_back(json::array({m, to_json(c)}));
    return {{"coeffs", coeffs}};
}

Polynomial polynomial_from_json(const json& j, int nvars) {
    Polynomial p(nvars);
    const auto& coeffs = field(j, "coeffs");
    if (!coeffs.is_array()) schema("coeffs must be an array");
    for (const auto& entry : coeffs) {
        if (!entry.is_array() || entry.size() != 2) schema("coefficient entries are [exponents, value]");
        IntVec e = intvec_from_json(entry[0]);
        if (static_cast<int>(e.size()) != nvars) schema("exponent multi-index has the wrong length");
        Polynomial::Monomial m;
        for (auto x : e) {
            if (x < 0) schema("negative exponent in a polynomial");
            m.push_back(static_cast<int>(x));
        }
        p.add_term(m, rational_from_json(entry[1]));
    }
    return p;
}

json to_json(const Weight& w) {
    json terms = json::array();
    for (const auto& t : w.terms()) {
        json factors = json::array();
        for (const auto& f : t.factors) {
            if (f.base.degree() <= 1) {
                RatVec b(w.dim(), Rational(0));
                for (const auto& [m, c] : f.base.coeffs())
                    for (int i = 0; i < w.dim(); ++i)
                        if (m[i] == 1) b[i] = c;
                factors.push_back({{"b", to_json(b)}, {"c", to_json(f.base.constant_term())}, {"exp", f.exp}});
            } else {
                factors.push_back({{"base", to_json(f.base)}, {"exp", f.exp}});
            }
        }
        terms.push_back({{"poly", to_json(t.poly)},
                         {"factors", factors},
                         {"decay", to_json(t.decay)},
                         {"shift", to_json(t.shift)}});
    }
    return {{"dim", w.dim()}, {"terms", terms}};
}

Weight weight_from_json(const json& j) {
    int dim = int_from_json(field(j, "dim"), "dim");
    if (dim < 1) schema("weight dim must be positive");
    const auto& terms = field(j, "terms");
    if (!terms.is_array()) schema("terms must be an array");
    std::vector<WeightTerm> out;
    for (const auto& t : terms) {
        WeightTerm term;
        term.poly = polynomial_from_json(field(t, "poly"), dim);
        if (t.contains("factors")) {
            for (const auto& f : t["factors"]) {
                Factor factor;
                factor.exp = int_from_json(field(f, "exp"), "exp");
                if (f.contains("base")) {
                    factor.base = polynomial_from_json(f["base"], dim);
                } else {
                    RatVec b = ratvec_from_json(field(f, "b"));
                    if (static_cast<int>(b.size()) != dim) schema("factor b has the wrong length");
                    factor.base = Polynomial::affine(b, rational_from_json(field(f, "c")));
                }
                term.factors.push_back(std::move(factor));
            }
        }
        term.decay = t.contains("decay") ? ratvec_from_json(t["decay"]) : RatVec(dim, Rational(0));
        if (static_cast<int>(term.decay.size()) != dim) schema("decay has the wrong length");
        term.shift = t.contains("shift") ? rational_from_json(t["shift"]) : Rational(0);
        out.push_back(std::move(term));
    }
    return Weight(dim, std::move(out));
}

json to_json(const AffineForm& a) { return {{"b", to_json(a.b)}, {"c", to_json(a.c)}}; }

AffineForm affine_from_json(const json& j) {
    return AffineForm{ratvec_from_json(field(j, "b")), rational_from_json(field(j, "c"))};
}

json to_json(const PiecewiseLinear& f) {
    json pieces = json::array();
    for (const auto& a : f.pieces()) pieces.push_back(to_json(a));
    return {{"dim", f.dim()}, {"pieces", pieces}};
}

PiecewiseLinear pl_from_json(const json& j, int dim) {
    if (j.contains("family")) {
        const auto& name = field(j, "family").get_ref<const std::string&>();
        if (name == "f_x0") {
            if (dim != 1) schema("f_x0 lives on the line");
            return PiecewiseLinear::f_x0(rational_from_json(field(j, "x0")));
        }
        if (name == "f_R") return PiecewiseLinear::f_r(ratvec_from_json(field(j, "direction")), rational_from_json(field(j, "R")));
        if (name == "simple_crease")
            return PiecewiseLinear::simple_crease(ratvec_from_json(field(j, "b")), rational_from_json(field(j, "a")));
        if (name == "affine") return PiecewiseLinear::affine(ratvec_from_json(field(j, "b")), rational_from_json(field(j, "c")));
        schema("unknown function family '" + name + "'");
    }
    const auto& pieces = field(j, "pieces");
    if (!pieces.is_array() || pieces.empty()) schema("pieces must be a nonempty array");
    std::vector<AffineForm> out;
    for (const auto& p : pieces) {
        out.push_back(affine_from_json(p));
        if (static_cast<int>(out.back().b.size()) != dim) schema("piece slope has the wrong length");
    }
    return PiecewiseLinear(dim, std::move(out));
}

json to_json(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::Const: return {{"const", number(e.value())}};
        case Expr::Kind::Var: return {{"var", e.index()}};
        case Expr::Kind::Add:
        case Expr::Kind::Mul: {
            json args = json::array();
            for (const auto& a : e.args()) args.push_back(to_json(a));
            return {{e.kind() == Expr::Kind::Add ? "add" : "mul", args}};
        }
        case Expr::Kind::Pow: return {{"pow", {to_json(e.args()[0]), e.exponent()}}};
        case Expr::Kind::Log: return {{"log", to_json(e.args()[0])}};
        case Expr::Kind::Exp: return {{"exp", to_json(e.args()[0])}};
    }
    return {};
}

Expr expr_from_json(const json& j) {
    if (j.is_number()) return Expr::constant(j.get<double>());
    if (!j.is_object() || j.size() != 1) schema("expression nodes are single-key objects");
    const auto& [key, val] = *j.items().begin();
    if (key == "const") return Expr::constant(number_from_json(val));
    if (key == "var") return Expr::var(int_from_json(val, "var"));
    if (key == "add" || key == "mul") {
        if (!val.is_array()) schema(key + " takes an array");
        std::vector<Expr> args;
        for (const auto& a : val) args.push_back(expr_from_json(a));
        return key == "add" ? Expr::add(std::move(args)) : Expr::mul(std::move(args));
    }
    if (key == "pow") {
        if (!val.is_array() || val.size() != 2) schema("pow takes [base, exponent]");
        return Expr::pow(expr_from_json(val[0]), int_from_json(val[1], "pow exponent"));
    }
    if (key == "log") return Expr::log(expr_from_json(val));
    if (key == "exp") return Expr::exp(expr_from_json(val));
    schema("unknown expression node '" + std::string(key) + "'");
}

json to_json(const SymplecticPotential& u) {
    json terms = json::array();
    for (const auto& t : u.log_terms()) terms.push_back({{"L", to_json(t.form)}, {"coeff", to_json(t.coeff)}});
    json out{{"dim", u.dim()}, {"log_terms", terms}, {"smooth", to_json(u.smooth())}};
    if (u.domain()) out["domain"] = to_json(*u.domain());
    return out;
}

SymplecticPotential potential_from_json(const json& j, int dim) {
    if (j.contains("dim") && int_from_json(j["dim"], "dim") != dim) schema("potential dim does not match the polyhedron");
    std::vector<LogTerm> terms;
    if (j.contains("log_terms")) {
        for (const auto& t : j["log_terms"]) {
            LogTerm term{affine_from_json(field(t, "L")), rational_from_json(field(t, "coeff"))};
            if (static_cast<int>(term.form.b.size()) != dim) schema("log term slope has the wrong length");
            terms.push_back(std::move(term));
        }
    }
    Expr smooth = j.contains("smooth") ? expr_from_json(j["smooth"]) : Expr();
    if (smooth.arity() > dim) schema("smooth part uses more variables than the dimension");
    std::optional<Polyhedron> domain;
    if (j.contains("domain")) domain = polyhedron_from_json(j["domain"]);
    return SymplecticPotential(dim, std::move(terms), smooth, domain);
}

json to_json(const FibrationFactor& f) {
    return {{"p", to_json(f.p)}, {"c", to_json(f.c)}, {"n", f.n}, {"s", to_json(f.s)}};
}

FibrationFactor fibration_factor_from_json(const json& j) {
    FibrationFactor f;
    f.p = ratvec_from_json(field(j, "p"));
    f.c = rational_from_json(field(j, "c"));
    f.n = j.contains("n") ? int_from_json(j["n"], "n") : 1;
    f.s = j.contains("s") ? rational_from_json(j["s"]) : Rational(0);
    return f;
}

json to_json(const KrsFactor& f) { return {{"p", to_json(f.p)}, {"k", to_json(f.k)}, {"n", f.n}}; }

KrsFactor krs_factor_from_json(const json& j) {
    KrsFactor f;
    f.p = ratvec_from_json(field(j, "p"));
    f.k = rational_from_json(field(j, "k"));
    f.n = j.contains("n") ? int_from_json(j["n"], "n") : 1;
    return f;
}

json to_json(const IntegralResult& r) {
    return {{"value", number(r.value)},
            {"abs_error_bound", number(r.abs_error_bound)},
            {"tail_bound", number(r.tail_bound)},
            {"cells_used", r.cells_used},
            {"converged", r.converged},
            {"tail_certified", r.tail_certified},
            {"delta_star", number(r.delta_star)},
            {"magnitude", number(r.magnitude)}};
}

IntegralResult integral_result_from_json(const json& j) {
    IntegralResult r;
    r.value = number_from_json(field(j, "value"));
    r.abs_error_bound = number_from_json(field(j, "abs_error_bound"));
    r.tail_bound = number_from_json(field(j, "tail_bound"));
    r.cells_used = field(j, "cells_used").get<long>();
    r.converged = field(j, "converged").get<bool>();
    r.tail_certified = field(j, "tail_certified").get<bool>();
    r.delta_star = number_from_json(field(j, "delta_star"));
    r.magnitude = number_from_json(field(j, "magnitude"));
    return r;
}

json to_json(const ScanEntry& e) {
    return {{"family", e.family},
            {"params", doubles(e.params)},
            {"value", number(e.value)},
            {"error", number(e.error)},
            {"certified", e.certified}};
}

ScanEntry scan_entry_from_json(const json& j) {
    ScanEntry e;
    e.family = field(j, "family").get<std::string>();
    e.params = doubles_from_json(field(j, "params"));
    e.value = number_from_json(field(j, "value"));
    e.error = number_from_json(field(j, "error"));
    e.certified = field(j, "certified").get<bool>();
    return e;
}

VerdictKind verdict_kind_from_string(const std::string& s) {
    for (auto k : {VerdictKind::NoDestabilizerFound, VerdictKind::Destabilizer, VerdictKind::AffineObstruction})
        if (to_string(k) == s) return k;
    schema("unknown verdict '" + s + "'");
}

json to_json(const StabilityVerdict& v) {
    json out{{"verdict", to_string(v.kind)},
             {"family", v.family},
             {"value", number(v.value)},
             {"error", number(v.error)},
             {"affine", doubles(v.affine)},
             {"destabilizer", v.destabilizer ? to_json(*v.destabilizer) : json(nullptr)},
             {"sign_flip", v.sign_flip ? json::array({number(v.sign_flip->first), number(v.sign_flip->second)})
                                       : json(nullptr)}};
    json log = json::array();
    for (const auto& e : v.log) log.push_back(to_json(e));
    out["log"] = log;
    return out;
}

StabilityVerdict verdict_from_json(const json& j, int dim) {
    StabilityVerdict v;
    v.kind = verdict_kind_from_string(field(j, "verdict").get<std::string>());
    v.family = field(j, "family").get<std::string>();
    v.value = number_from_json(field(j, "value"));
    v.error = number_from_json(field(j, "error"));
    v.affine = doubles_from_json(field(j, "affine"));
    if (!field(j, "destabilizer").is_null()) v.destabilizer = pl_from_json(j["destabilizer"], dim);
    const auto& flip = field(j, "sign_flip");
    if (!flip.is_null()) v.sign_flip = std::make_pair(number_from_json(flip.at(0)), number_from_json(flip.at(1)));
    if (j.contains("log"))
        for (const auto& e : j["log"]) v.log.push_back(scan_entry_from_json(e));
    return v;
}

json to_json(const LiProfile& prof) {
    return {{"d", prof.d},
            {"k", prof.k},
            {"tau", to_json(prof.tau)},
            {"kappa", to_json(prof.kappa)},
            {"mu", to_json(prof.mu)},
            {"p", to_json(prof.p)},
            {"h", to_json(prof.h)},
            {"numerator", to_json(prof.numerator)},
            {"denominator", to_json(prof.denominator)},
            {"slope", to_json(prof.slope)},
            {"offset", to_json(prof.offset)},
            {"flags", prof.flags}};
}

LiProfile li_profile_from_json(const json& j) {
    return li_profile(int_from_json(field(j, "d"), "d"), int_from_json(field(j, "k"), "k"),
                      rational_from_json(field(j, "tau")), rational_from_json(field(j, "kappa")),
                      j.contains("mu") ? rational_from_json(j["mu"]) : Rational(1));
}

}  // namespace toricwk::io
