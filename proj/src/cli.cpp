#include "toricwk/cli.hpp"

#include "toricwk/errors.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace toricwk::cli {

namespace {

constexpr const char* kVersion = "1.0.0";

using io::format_double;

std::string csv_line(const std::vector<std::string>& cells) {
    std::string out;
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    return out + "\n";
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

Polyhedron half_line() { return Polyhedron(1, {HalfSpace({1}, Rational(1))}); }

template <class T>
T param(const json& params, const char* key, T fallback) {
    if (!params.contains(key)) return fallback;
    try {
        return params[key].get<T>();
    } catch (const json::exception&) {
        throw SchemaError(std::string("parameter '") + key + "' has the wrong type");
    }
}

std::vector<double> param_list(const json& params, const char* key, std::vector<double> fallback) {
    if (!params.contains(key)) return fallback;
    if (!params[key].is_array()) throw SchemaError(std::string("parameter '") + key + "' must be an array");
    std::vector<double> out;
    for (const auto& x : params[key]) {
        if (!x.is_number()) throw SchemaError(std::string("parameter '") + key + "' must hold numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

struct Problem {
    std::string task;
    std::optional<Polyhedron> p;
    std::optional<Weight> v, w;
    json params = json::object();
    json weight_info = json::object();
    QuadOptions quad;
    double affine_rel_tol = 1e-8;

    const Polyhedron& poly() const {
        if (!p) throw SchemaError("task '" + task + "' needs a polyhedron");
        return *p;
    }
    const Weight& vw() const {
        if (!v) throw SchemaError("task '" + task + "' needs weights");
        return *v;
    }
    const Weight& ww() const {
        if (!w) throw SchemaError("task '" + task + "' needs weights");
        return *w;
    }
};

Weight weight_or_soliton(const json& j, const Weight& v) {
    if (j.is_string()) {
        if (j.get<std::string>() != "soliton") throw SchemaError("w must be a weight or \"soliton\"");
        return soliton_weight(v, v.dim());
    }
    return io::weight_from_json(j);
}

void parse_weights(const json& spec, Problem& pr) {
    if (!spec.is_object()) throw SchemaError("weights must be an object");
    std::string ctor = spec.contains("constructor") ? spec["constructor"].get<std::string>() : "explicit";
    pr.weight_info["constructor"] = ctor;
    if (ctor == "explicit" || ctor == "soliton") {
        Weight v = io::weight_from_json(spec.at("v"));
        pr.w = ctor == "soliton" ? soliton_weight(v, param<int>(spec, "n", v.dim()))
                                 : weight_or_soliton(spec.at("w"), v);
        pr.v = v;
    } else if (ctor == "fibration" || ctor == "line_bundle") {
        Weight v = io::weight_from_json(spec.at("v"));
        Weight w = weight_or_soliton(spec.at("w"), v);
        std::vector<FibrationFactor> data;
        for (const auto& f : spec.at("data")) data.push_back(io::fibration_factor_from_json(f));
        if (ctor == "line_bundle") {
            if (v.dim() != 1) throw SchemaError("line_bundle weights live on the line");
            auto lb = line_bundle_weights(v, w, data);
            pr.v = lb.v;
            pr.w = lb.w;
            pr.weight_info["base_curvatures"] = io::to_json(lb.base_curvatures);
        } else {
            auto [vt, wt] = fibration_transform(v, w, data, pr.poly());
            pr.v = vt;
            pr.w = wt;
        }
    } else if (ctor == "krs") {
        std::vector<KrsFactor> data;
        for (const auto& f : spec.at("data")) data.push_back(io::krs_factor_from_json(f));
        Weight v = krs_fibration_weight(data, io::ratvec_from_json(spec.at("b_w")), pr.poly());
        pr.w = spec.contains("w") ? weight_or_soliton(spec["w"], v) : soliton_weight(v, v.dim());
        pr.v = v;
    } else if (ctor == "quartic") {
        Rational lambda = io::rational_from_json(spec.at("lambda"));
        double c;
        if (spec.contains("c")) {
            c = spec["c"].get<double>();
        } else {
            auto cl = find_c_lambda(to_double(lambda));
            if (!cl.found) throw ToleranceNotMet("no c found for lambda " + to_string(lambda));
            c = cl.c;
            pr.weight_info["c_residual"] = cl.residual;
        }
        auto ex = quartic_example(lambda, c);
        if (!pr.p) pr.p = ex.p;
        pr.v = ex.v;
        pr.w = ex.w;
        pr.weight_info["c"] = c;
    } else {
        throw SchemaError("unknown weight constructor '" + ctor + "'");
    }
    if (pr.p && (pr.v->dim() != pr.p->dim() || pr.w->dim() != pr.p->dim()))
        throw SchemaError("weight dimension does not match the polyhedron");
}

Problem parse_problem(const json& j, const RunFlags& flags) {
    if (!j.is_object()) throw SchemaError("problem file must be a JSON object");
    Problem pr;
    if (!j.contains("task") || !j["task"].is_string()) throw SchemaError("missing task");
    pr.task = j["task"].get<std::string>();
    const auto& names = task_names();
    if (std::find(names.begin(), names.end(), pr.task) == names.end())
        throw SchemaError("unknown task '" + pr.task + "'");
    if (j.contains("polyhedron")) pr.p = io::polyhedron_from_json(j["polyhedron"]);
    if (j.contains("params")) {
        if (!j["params"].is_object()) throw SchemaError("params must be an object");
        pr.params = j["params"];
    }
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        pr.quad.rel_tol = param<double>(t, "rel_tol", pr.quad.rel_tol);
        pr.quad.abs_tol = param<double>(t, "abs_tol", pr.quad.abs_tol);
        pr.quad.max_cells = param<long>(t, "max_cells", pr.quad.max_cells);
        pr.affine_rel_tol = param<double>(t, "affine_rel_tol", pr.affine_rel_tol);
    }
    if (flags.rel_tol) pr.quad.rel_tol = *flags.rel_tol;
    pr.quad.threads = std::max(1, flags.threads);
    if (!(pr.quad.rel_tol > 0.0)) throw SchemaError("rel_tol must be positive");
    if (j.contains("weights")) parse_weights(j["weights"], pr);
    return pr;
}

SymplecticPotential potential_param(const Problem& pr, const char* key) {
    if (!pr.params.contains(key) || pr.params[key] == "guillemin") return guillemin_potential(pr.poly());
    return io::potential_from_json(pr.params[key], pr.poly().dim());
}

// Bounded region for sampling: P itself or its truncation.
Polyhedron bounded_part(const Polyhedron& p, double delta) {
    if (validate(p).bounded) return p;
    return truncate(p, std::nullopt, from_double(delta));
}

std::vector<std::vector<double>> sample_points(const Polyhedron& p, int count, unsigned seed, double margin) {
    Polyhedron box = bounded_part(p, 6.0);
    auto verts = vertices(validate(box).reduced);
    int n = p.dim();
    std::vector<double> lo(n, 1e300), hi(n, -1e300);
    for (const auto& v : verts)
        for (int i = 0; i < n; ++i) {
            lo[i] = std::min(lo[i], to_double(v[i]));
            hi[i] = std::max(hi[i], to_double(v[i]));
        }
    std::mt19937 rng(seed);
    std::vector<std::vector<double>> out;
    std::vector<double> x(n);
    for (long tries = 0; static_cast<int>(out.size()) < count && tries < 1000000; ++tries) {
        for (int i = 0; i < n; ++i) x[i] = std::uniform_real_distribution<double>(lo[i], hi[i])(rng);
        bool inside = true;
        for (const auto& h : box.halfspaces()) inside = inside && h.value(x) > margin;
        if (inside) out.push_back(x);
    }
    if (out.empty()) throw EmptyInterior("no interior sample points found");
    return out;
}

json affine_json(const AffineFutaki& aff) {
    json values = json::array();
    for (const auto& r : aff.values) values.push_back(io::to_json(r));
    return {{"values", values}, {"scale", aff.scale}, {"tol", aff.tol}, {"vanishes", aff.vanishes}};
}

// ---------------------------------------------------------------------------
// Tasks

json task_validate(const Problem& pr, Artifacts& art) {
    const auto& p = pr.poly();
    auto rep = validate(p);
    auto del = is_delzant(rep.reduced);
    auto rec = recession_cone(rep.reduced);
    json verts = json::array();
    std::string csv = "vertex";
    for (int i = 0; i < p.dim(); ++i) csv += ",x" + std::to_string(i + 1);
    csv += ",det\n";
    for (size_t k = 0; k < del.vertices.size(); ++k) {
        const auto& v = del.vertices[k];
        verts.push_back({{"vertex", io::to_json(v.vertex)}, {"edges", v.edges}, {"det", io::to_json(v.det)}});
        std::vector<std::string> row{std::to_string(k)};
        for (const auto& q : v.vertex) row.push_back(to_string(q));
        row.push_back(to_string(v.det));
        csv += csv_line(row);
    }
    art.add("vertices.csv", csv);
    return {{"task", "validate"},
            {"dim", p.dim()},
            {"witness", io::to_json(rep.witness)},
            {"irredundant", rep.irredundant},
            {"bounded", rep.bounded},
            {"reduced", io::to_json(rep.reduced)},
            {"delzant", del.delzant},
            {"vertices", verts},
            {"recession_generators", rec.generators},
            {"anticanonical", is_anticanonical(rep.reduced)}};
}

json task_futaki(const Problem& pr, Artifacts& art) {
    const auto& p = pr.poly();
    int n = p.dim();
    std::vector<std::pair<std::string, PiecewiseLinear>> fs;
    if (pr.params.contains("x0")) {
        if (n != 1) throw SchemaError("x0 grids need a one-dimensional polyhedron");
        for (const auto& x : pr.params["x0"]) {
            Rational q = io::rational_from_json(x);
            fs.emplace_back("f_x0(" + to_string(q) + ")", PiecewiseLinear::f_x0(q));
        }
    }
    if (pr.params.contains("functions"))
        for (const auto& f : pr.params["functions"]) {
            auto pl = io::pl_from_json(f, n);
            fs.emplace_back(io::to_json(pl)["pieces"].dump(), pl);
        }
    if (fs.empty()) throw SchemaError("futaki needs params.x0 or params.functions");
    bool exact = param<bool>(pr.params, "exact", false) && n == 1 && !pr.ww().has_negative_factors() &&
                 !pr.vw().has_negative_factors();

    std::string csv = csv_line({"index", "x0", "value", "error", "tail", "converged", "exact"});
    json rows = json::array();
    for (size_t i = 0; i < fs.size(); ++i) {
        auto r = futaki(p, pr.vw(), pr.ww(), fs[i].second, pr.quad);
        std::string x0 = pr.params.contains("x0") && i < pr.params["x0"].size()
                             ? format_double(to_double(io::rational_from_json(pr.params["x0"][i])))
                             : "";
        std::string ex;
        json row{{"function", io::to_json(fs[i].second)}, {"result", io::to_json(r)}};
        if (exact) {
            auto e = futaki_exact_1d(p, pr.vw(), pr.ww(), fs[i].second);
            ex = e.to_string();
            row["exact"] = ex;
            row["exact_value"] = e.to_double();
        }
        csv += csv_line({std::to_string(i), x0, format_double(r.value), format_double(r.abs_error_bound),
                         format_double(r.tail_bound), r.converged ? "1" : "0", "\"" + ex + "\""});
        rows.push_back(row);
    }
    art.add("futaki.csv", csv);
    auto aff = futaki_affine(p, pr.vw(), pr.ww(), pr.quad, pr.affine_rel_tol);
    return {{"task", "futaki"}, {"values", rows}, {"affine", affine_json(aff)}};
}

json task_scan(const Problem& pr, Artifacts& art) {
    const auto& p = pr.poly();
    Weight w = pr.ww();
    json extra = json::object();
    if (param<bool>(pr.params, "normalize_w", false)) {
        double a = normalize_w_scale(p, pr.vw(), w, pr.quad);
        w = w * from_double(a);
        extra["w_scale"] = a;
    }
    ScanOptions so;
    so.quad = pr.quad;
    so.affine_rel_tol = pr.affine_rel_tol;
    so.creases = param<bool>(pr.params, "creases", so.creases);
    so.rays = param<bool>(pr.params, "rays", so.rays);
    so.multi_crease = param<bool>(pr.params, "multi_crease", so.multi_crease);
    so.r0 = param<double>(pr.params, "r0", so.r0);
    so.offsets = param<int>(pr.params, "offsets", so.offsets);
    so.directions = param<int>(pr.params, "directions", so.directions);
    so.golden_steps = param<int>(pr.params, "golden_steps", so.golden_steps);
    so.descent_rounds = param<int>(pr.params, "descent_rounds", so.descent_rounds);
    so.radii = param_list(pr.params, "radii", so.radii);
    auto verdict = semistability_scan(p, pr.vw(), w, so);

    std::string csv = csv_line({"index", "family", "params", "value", "error", "certified"});
    for (size_t i = 0; i < verdict.log.size(); ++i) {
        const auto& e = verdict.log[i];
        std::string ps;
        for (size_t k = 0; k < e.params.size(); ++k) ps += (k ? ";" : "") + format_double(e.params[k]);
        csv += csv_line({std::to_string(i), e.family, ps, format_double(e.value), format_double(e.error),
                         e.certified ? "1" : "0"});
    }
    art.add("scan.csv", csv);
    json out = io::to_json(verdict);
    out.erase("log");
    out["task"] = "scan";
    out["entries"] = verdict.log.size();
    out.update(extra);
    return out;
}

json task_profile(const Problem& pr, Artifacts& art) {
    if (pr.p) {
        auto red = validate(*pr.p).reduced;
        if (red.dim() != 1 || !(red == half_line())) throw InvalidInput("profile problems live on [-1, inf)");
    }
    bool decaying = param<bool>(pr.params, "decaying", false);
    auto sol = decaying ? profile_solve_decaying(pr.vw(), pr.ww()) : profile_solve(pr.vw(), pr.ww());
    auto ev = existence_verdict(sol, param<double>(pr.params, "x_max", 50.0));
    std::vector<Rational> x0s;
    for (double x : param_list(pr.params, "x0", {0.0, 1.0, 2.0})) x0s.push_back(from_double(x));
    auto crease = crease_profile_identity(sol, x0s, pr.quad.rel_tol);

    double lo = param<double>(pr.params, "table_lo", -1.0), hi = param<double>(pr.params, "table_hi", 10.0);
    int count = param<int>(pr.params, "table_points", 111);
    if (count < 2 || !(hi > lo) || lo < -1.0) throw SchemaError("bad profile table range");
    std::string csv = csv_line({"x", "theta", "vtheta"});
    for (int i = 0; i < count; ++i) {
        double x = lo + (hi - lo) * i / (count - 1);
        csv += csv_line({format_double(x), format_double(sol.theta(x)), format_double(sol.vtheta_at(x))});
    }
    art.add("profile.csv", csv);

    json out{{"task", "profile"},
             {"method", decaying ? "decaying" : "forward"},
             {"exact", sol.exact},
             {"boundary_exact", sol.boundary_exact},
             {"theta_at_minus_one", sol.theta_at_minus_one},
             {"theta_slope_residual", sol.theta_slope_residual},
             {"exists", ev.exists},
             {"fails_at", ev.fails_at ? json(*ev.fails_at) : json(nullptr)},
             {"positivity_method", ev.method},
             {"crease", {{"x0", io::to_json(x0s)},
                         {"futaki", crease.futaki},
                         {"profile", crease.profile},
                         {"max_residual", crease.max_residual}}}};
    if (sol.exact) out["vtheta"] = io::to_json(sol.vtheta);
    if (sol.theta_exact) out["theta"] = io::to_json(*sol.theta_exact);
    return out;
}

json task_li(const Problem& pr, Artifacts& art) {
    const auto& ps = pr.params;
    auto prof = li_profile(param<int>(ps, "d", 1), param<int>(ps, "k", 1),
                           ps.contains("tau") ? io::rational_from_json(ps["tau"]) : Rational(3),
                           ps.contains("kappa") ? io::rational_from_json(ps["kappa"]) : Rational(1),
                           ps.contains("mu") ? io::rational_from_json(ps["mu"]) : Rational(1));
    double phi0 = param<double>(ps, "phi0", 1.0);
    auto c0 = li_C0(prof, phi0);
    json cauchy = json::array();
    bool cauchy_ok = true;
    for (double big : param_list(ps, "cauchy", {1e2, 1e3, 1e4})) {
        double step = std::abs(li_G(prof, phi0, 2 * big) - li_G(prof, phi0, big));
        double env = li_envelope(prof, big);
        cauchy_ok = cauchy_ok && step <= env;
        cauchy.push_back({{"Phi", big}, {"step", step}, {"envelope", env}});
    }
    auto rep = li_decay_check(prof, phi0, param<double>(ps, "s0", 1.0), param<double>(ps, "s_lo", 1e2),
                              param<double>(ps, "s_hi", 1e6), param<int>(ps, "points", 41));
    std::string csv = csv_line({"s", "phi", "e", "residual"});
    for (size_t i = 0; i < rep.s.size(); ++i)
        csv += csv_line({format_double(rep.s[i]), format_double(rep.phi[i]), format_double(rep.e[i]),
                         format_double(rep.residual[i])});
    art.add("li.csv", csv);
    return {{"task", "li"},
            {"profile", io::to_json(prof)},
            {"F_at_1", prof.F(1.0)},
            {"F_ratio_1e4", prof.F(1e4) / 1e4},
            {"c0", c0.c0},
            {"tail_bound", c0.tail_bound},
            {"cutoff", c0.cutoff},
            {"fitted_offset", c0.offset},
            {"cauchy", cauchy},
            {"cauchy_ok", cauchy_ok},
            {"d0", rep.d0},
            {"slope", rep.slope},
            {"monotone", rep.monotone},
            {"max_residual", rep.max_residual},
            {"flags", rep.flags}};
}

json task_mabuchi(const Problem& pr, Artifacts& art) {
    auto u = potential_param(pr, "u");
    auto u0 = potential_param(pr, "u0");
    auto r = mabuchi_energy(pr.poly(), pr.vw(), pr.ww(), u, u0, pr.quad);
    art.add("mabuchi.csv", csv_line({"value", "error", "tail", "converged"}) +
                               csv_line({format_double(r.value), format_double(r.abs_error_bound),
                                         format_double(r.tail_bound), r.converged ? "1" : "0"}));
    return {{"task", "mabuchi"}, {"u", io::to_json(u)}, {"u0", io::to_json(u0)}, {"result", io::to_json(r)}};
}

json task_abreu_check(const Problem& pr, Artifacts& art) {
    const auto& p = pr.poly();
    auto u = potential_param(pr, "potential");
    auto pts = sample_points(p, param<int>(pr.params, "points", 100), param<unsigned>(pr.params, "seed", 1u), 1e-3);
    double tol = param<double>(pr.params, "tol", 1e-6);
    int n = p.dim();
    std::vector<std::string> head;
    for (int i = 0; i < n; ++i) head.push_back("x" + std::to_string(i + 1));
    head.insert(head.end(), {"scal_v", "w", "rel_diff"});
    std::string csv = csv_line(head);
    double worst = 0.0;
    for (const auto& x : pts) {
        double s = abreu_scal_v(u, pr.vw(), x.data());
        double wv = pr.ww().eval(x.data());
        double rel = std::abs(s - wv) / std::max(std::abs(wv), 1e-300);
        worst = std::max(worst, rel);
        std::vector<std::string> row;
        for (double c : x) row.push_back(format_double(c));
        row.insert(row.end(), {format_double(s), format_double(wv), format_double(rel)});
        csv += csv_line(row);
    }
    art.add("abreu.csv", csv);
    auto fit = soliton_residual(u, pr.vw(), pts);
    return {{"task", "abreu-check"},
            {"points", pts.size()},
            {"max_rel_diff", worst},
            {"tol", tol},
            {"solves", worst <= tol},
            {"soliton_fit", {{"deviation", fit.deviation}, {"alpha", fit.alpha}, {"beta", fit.beta}}}};
}

json task_class_check(const Problem& pr, Artifacts& art) {
    const auto& p = pr.poly();
    auto cw = check_class_W(pr.vw(), pr.ww(), p, param<double>(pr.params, "beta", 1.0));
    auto u = potential_param(pr, "potential");
    PotentialMetric m(u);
    json h = json::array();
    std::string csv = csv_line({"eps", "condition", "growth", "evaluated", "finite"});
    bool all = cw.pass;
    for (double eps : param_list(pr.params, "eps", {0.1, 0.3})) {
        auto rep = h_class_check(m, &u, pr.vw(), p, eps, param<double>(pr.params, "delta_bar", 0.5));
        json conds = json::array();
        for (const auto& c : rep.conditions) {
            conds.push_back({{"name", c.name}, {"sups", c.sups}, {"growth", c.growth},
                             {"evaluated", c.evaluated}, {"finite", c.finite}});
            csv += csv_line({format_double(eps), c.name, format_double(c.growth), c.evaluated ? "1" : "0",
                             c.finite ? "1" : "0"});
        }
        h.push_back({{"eps", eps}, {"pass", rep.pass}, {"conditions", conds}});
        all = all && rep.pass;
    }
    art.add("class_check.csv", csv);
    return {{"task", "class-check"},
            {"class_W", {{"decay_rate", cw.decay_rate}, {"decay_ok", cw.decay_ok}, {"sup_v", cw.sup_v},
                         {"sup_w", cw.sup_w}, {"growth_v", cw.growth_v}, {"growth_w", cw.growth_w},
                         {"v_bounded", cw.v_bounded}, {"w_bounded", cw.w_bounded}, {"pass", cw.pass}}},
            {"H", h},
            {"pass", all},
            {"qualifier", cw.qualifier}};
}

json dispatch(const Problem& pr, Artifacts& art) {
    if (pr.task == "validate") return task_validate(pr, art);
    if (pr.task == "futaki") return task_futaki(pr, art);
    if (pr.task == "scan") return task_scan(pr, art);
    if (pr.task == "profile") return task_profile(pr, art);
    if (pr.task == "li") return task_li(pr, art);
    if (pr.task == "mabuchi") return task_mabuchi(pr, art);
    if (pr.task == "abreu-check") return task_abreu_check(pr, art);
    return task_class_check(pr, art);
}

json error_json(const std::string& code, const std::string& message, bool input) {
    return {{"code", code}, {"message", message}, {"input_error", input}};
}

// Runs body, converting failures into error.json and an exit code.
template <class Body>
RunResult guarded(Body body) {
    RunResult res;
    try {
        body(res);
    } catch (const FactorNotPositive& e) {
        auto j = error_json(e.code(), e.what(), true);
        j["witness"] = e.witness();
        res.artifacts.add("error.json", dump(j));
        res.exit_code = kExitInput;
    } catch (const Error& e) {
        res.artifacts.add("error.json", dump(error_json(e.code(), e.what(), e.input_error())));
        res.exit_code = e.input_error() ? kExitInput : kExitNumerical;
    } catch (const json::exception& e) {
        res.artifacts.add("error.json", dump(error_json("SchemaError", e.what(), true)));
        res.exit_code = kExitInput;
    } catch (const std::exception& e) {
        res.artifacts.add("error.json", dump(error_json("InternalError", e.what(), false)));
        res.exit_code = kExitNumerical;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Stored cases

struct Check {
    std::string name;
    double value, expected, tol;
    bool ok() const { return std::isfinite(value) && std::abs(value - expected) <= tol; }
};

json check_json(const Check& c) {
    return {{"name", c.name}, {"value", c.value}, {"expected", c.expected}, {"tol", c.tol}, {"ok", c.ok()}};
}

// Affine Futaki component relative to the magnitude of its integrand.
Check relative_affine(const json& r, int i, double tol) {
    double scale = std::max(r["magnitude"].get<double>(), 1e-300);
    return {"affine component " + std::to_string(i) + " / magnitude", r["value"].get<double>() / scale, 0.0, tol};
}

json weight_spec(const Weight& v) { return io::to_json(v); }

json flat_problem(int n, const std::string& task) {
    std::vector<HalfSpace> hs;
    for (int i = 0; i < n; ++i) {
        IntVec e(n, 0);
        e[i] = 1;
        hs.emplace_back(e, Rational(1));
    }
    Weight v = Weight::exponential(RatVec(n, Rational(1)));
    return {{"task", task},
            {"polyhedron", io::to_json(Polyhedron(n, hs))},
            {"weights", {{"constructor", "soliton"}, {"v", weight_spec(v)}}}};
}

void merge(RunResult& into, const RunResult& part, const std::string& prefix) {
    for (const auto& [name, content] : part.artifacts.files()) into.artifacts.add(prefix + name, content);
    if (part.exit_code != kExitOk) {
        const std::string* err = part.artifacts.find("error.json");
        throw RegressionMismatch(prefix + " step failed" + (err ? ": " + json::parse(*err)["message"].get<std::string>() : ""));
    }
}

std::vector<Check> case_flat_1d(RunResult& res, const RunFlags& flags) {
    std::vector<Check> checks;
    json fut = flat_problem(1, "futaki");
    fut["params"] = {{"x0", {0, 1, 2}}, {"exact", true}};
    auto r = run(fut, flags);
    merge(res, r, "futaki_");
    for (int i = 0; i < 3; ++i)
        checks.push_back({"F(f_x0) at " + std::to_string(i), r.verdict["values"][i]["exact_value"].get<double>(),
                          2.0 * (i + 1) * std::exp(-static_cast<double>(i)), 1e-10});
    for (int i = 0; i < 2; ++i)
        checks.push_back(relative_affine(r.verdict["affine"]["values"][i], i, 1e-8));

    json prof = flat_problem(1, "profile");
    auto p = run(prof, flags);
    merge(res, p, "profile_");
    Weight theta = io::weight_from_json(p.verdict.at("theta"));
    Polynomial two_x_plus_two = Polynomial::affine(RatVec{Rational(2)}, Rational(2));
    checks.push_back({"theta equals 2(x+1)", theta == Weight::from_polynomial(two_x_plus_two) ? 1.0 : 0.0, 1.0, 0.0});
    checks.push_back({"crease profile residual", p.verdict["crease"]["max_residual"].get<double>(), 0.0, 1e-10});
    checks.push_back({"exists", p.verdict["exists"].get<bool>() ? 1.0 : 0.0, 1.0, 0.0});
    return checks;
}

std::vector<Check> case_flat_c2(RunResult& res, const RunFlags& flags) {
    std::vector<Check> checks;
    json ab = flat_problem(2, "abreu-check");
    ab["params"] = {{"points", 100}, {"seed", 7}};
    auto a = run(ab, flags);
    merge(res, a, "abreu_");
    checks.push_back({"abreu relative residual", a.verdict["max_rel_diff"].get<double>(), 0.0, 1e-6});
    checks.push_back({"soliton fit deviation", a.verdict["soliton_fit"]["deviation"].get<double>(), 0.0, 1e-10});
    checks.push_back({"soliton fit constant", a.verdict["soliton_fit"]["alpha"].get<double>(), 2.0 * std::log(2.0), 1e-8});

    json fut = flat_problem(2, "futaki");
    fut["params"] = {{"functions", json::array({{{"family", "simple_crease"}, {"b", {-1, 0}}, {"a", 0}}})}};
    auto f = run(fut, flags);
    merge(res, f, "futaki_");
    for (int i = 0; i < 3; ++i)
        checks.push_back(relative_affine(f.verdict["affine"]["values"][i], i, 1e-8));
    Polyhedron orth = io::polyhedron_from_json(fut["polyhedron"]);
    QuadOptions q;
    q.rel_tol = flags.rel_tol.value_or(1e-8);
    auto vv = futaki_v_vector(orth, Weight::exponential(RatVec(2, Rational(1))), q);
    for (int i = 0; i < 2; ++i) checks.push_back({"futaki v vector " + std::to_string(i), vv[i].value, 0.0, 1e-8});
    return checks;
}

std::vector<Check> case_c2_nonexistence(RunResult& res, const RunFlags& flags) {
    std::vector<Check> checks;
    json scan{{"task", "scan"},
              {"weights", {{"constructor", "quartic"}, {"lambda", "1/2"}}},
              {"params", {{"normalize_w", true}}}};
    auto s = run(scan, flags);
    merge(res, s, "scan_");
    checks.push_back({"destabilizer found", s.verdict["verdict"] == "Destabilizer" ? 1.0 : 0.0, 1.0, 0.0});
    checks.push_back({"certified negative", s.verdict["value"].get<double>() + s.verdict["error"].get<double>() < 0 ? 1.0 : 0.0,
                      1.0, 0.0});
    checks.push_back({"sign flip recorded", s.verdict["sign_flip"].is_null() ? 0.0 : 1.0, 1.0, 0.0});
    auto cl = find_c_lambda(0.5);
    checks.push_back({"c_lambda", cl.c, 2.2387310040543835, 1e-8});
    checks.push_back({"c_lambda residual", cl.residual, 0.0, 1e-8});
    checks.push_back({"w scale", s.verdict["w_scale"].get<double>(), 65.63385, 1e-3});
    for (size_t i = 0; i < s.verdict["affine"].size(); ++i)
        checks.push_back({"affine component " + std::to_string(i), s.verdict["affine"][i].get<double>(), 0.0,
                          i == 0 ? 1e-8 : 1e-6});
    return checks;
}

std::vector<Check> case_li(RunResult& res, const RunFlags& flags) {
    std::vector<Check> checks;
    json li{{"task", "li"}, {"params", {{"d", 1}, {"k", 1}, {"tau", 3}, {"kappa", 1}, {"mu", 1}}}};
    auto r = run(li, flags);
    merge(res, r, "li_");
    checks.push_back({"F(1)", r.verdict["F_at_1"].get<double>(), 5.5, 0.0});
    checks.push_back({"F(1e4)/1e4", r.verdict["F_ratio_1e4"].get<double>(), 2.0, 0.02});
    checks.push_back({"tail Cauchy within envelope", r.verdict["cauchy_ok"].get<bool>() ? 1.0 : 0.0, 1.0, 0.0});
    checks.push_back({"decay slope", r.verdict["slope"].get<double>(), -2.0, 0.2});
    checks.push_back({"e(s) monotone", r.verdict["monotone"].get<bool>() ? 1.0 : 0.0, 1.0, 0.0});
    checks.push_back({"fixed point residual", r.verdict["max_residual"].get<double>(), 0.0, 1e-12});
    return checks;
}


}  // namespace

// ---------------------------------------------------------------------------

void Artifacts::add(const std::string& name, std::string content) {
    for (auto& [n, c] : files_)
        if (n == name) {
            c = std::move(content);
            return;
        }
    files_.emplace_back(name, std::move(content));
}

const std::string* Artifacts::find(const std::string& name) const {
    for (const auto& [n, c] : files_)
        if (n == name) return &c;
    return nullptr;
}

json Artifacts::manifest(const json& header) const {
    json list = json::array();
    for (const auto& [name, content] : files_)
        list.push_back({{"file", name}, {"bytes", content.size()}, {"fnv1a64", fnv1a_hex(content)}});
    json out = header;
    out["tool"] = "toricwk";
    out["version"] = kVersion;
    out["artifacts"] = list;
    return out;
}

void Artifacts::write(const std::string& dir, const json& header) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    for (const auto& [name, content] : files_) {
        std::ofstream f(fs::path(dir) / name, std::ios::binary);
        f << content;
    }
    std::ofstream m(fs::path(dir) / "manifest.json", std::ios::binary);
    m << dump(manifest(header));
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

const std::vector<std::string>& task_names() {
    static const std::vector<std::string> names{"validate", "futaki", "scan", "profile",
                                                "li", "mabuchi", "abreu-check", "class-check"};
    return names;
}

const std::vector<std::string>& case_names() {
    static const std::vector<std::string> names{"flat_1d", "flat_c2_soliton", "c2_nonexistence", "li_profile_k1"};
    return names;
}

RunResult run(const json& problem, const RunFlags& flags) {
    return guarded([&](RunResult& res) {
        Problem pr = parse_problem(problem, flags);
        res.verdict = dispatch(pr, res.artifacts);
        if (!pr.weight_info.empty()) res.verdict["weights"] = pr.weight_info;
        res.artifacts.add("verdict.json", dump(res.verdict));
    });
}

RunResult reproduce(const std::string& name, const RunFlags& flags) {
    return guarded([&](RunResult& res) {
        std::vector<Check> checks;
        if (name == "flat_1d")
            checks = case_flat_1d(res, flags);
        else if (name == "flat_c2_soliton")
            checks = case_flat_c2(res, flags);
        else if (name == "c2_nonexistence")
            checks = case_c2_nonexistence(res, flags);
        else if (name == "li_profile_k1")
            checks = case_li(res, flags);
        else
            throw InvalidInput("unknown case '" + name + "'");
        json list = json::array();
        bool pass = true;
        std::string failed;
        for (const auto& c : checks) {
            list.push_back(check_json(c));
            if (!c.ok()) {
                pass = false;
                failed += (failed.empty() ? "" : ", ") + c.name;
            }
        }
        res.verdict = {{"case", name}, {"checks", list}, {"pass", pass}};
        res.artifacts.add("report.json", dump(res.verdict));
        if (!pass) throw RegressionMismatch("checks failed: " + failed);
    });
}

int main(int argc, char** argv) {
    CLI::App app{"Weighted toric stability toolkit"};
    app.require_subcommand(1);
    RunFlags flags;
    std::string input, case_name;
    double rel_tol = 0.0;

    auto* run_cmd = app.add_subcommand("run", "Run a problem file");
    run_cmd->add_option("--input", input, "Problem file (JSON)")->required();
    auto* reproduce_cmd = app.add_subcommand("reproduce", "Run a stored reference case");
    reproduce_cmd->add_option("--case", case_name, "Case name")->required()->check(CLI::IsMember(case_names()));
    for (auto* cmd : {run_cmd, reproduce_cmd}) {
        cmd->add_option("--out", flags.out, "Output directory")->required();
        cmd->add_option("--rel-tol", rel_tol, "Relative quadrature tolerance");
        cmd->add_option("--threads", flags.threads, "Worker threads")->check(CLI::PositiveNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }
    if (rel_tol > 0.0) flags.rel_tol = rel_tol;

    RunResult res;
    json header;
    if (*run_cmd) {
        std::ifstream f(input, std::ios::binary);
        std::stringstream text;
        if (f) text << f.rdbuf();
        header = {{"command", "run"}, {"input", std::filesystem::path(input).filename().string()}};
        if (!f) {
            res.exit_code = kExitInput;
            res.artifacts.add("error.json", dump(error_json("InvalidInput", "cannot read " + input, true)));
        } else {
            json problem;
            try {
                problem = json::parse(text.str());
            } catch (const json::exception& e) {
                res.exit_code = kExitInput;
                res.artifacts.add("error.json", dump(error_json("SchemaError", e.what(), true)));
            }
            if (res.exit_code == kExitOk) {
                res = run(problem, flags);
                header["task"] = problem.value("task", "");
            }
            header["input_fnv1a64"] = fnv1a_hex(text.str());
        }
    } else {
        header = {{"command", "reproduce"}, {"case", case_name}};
        res = reproduce(case_name, flags);
    }
    if (flags.rel_tol) header["rel_tol"] = *flags.rel_tol;
    header["exit_code"] = res.exit_code;
    try {
        res.artifacts.write(flags.out, header);
    } catch (const std::exception& e) {
        std::cerr << "cannot write output: " << e.what() << "\n";
        return kExitInput;
    }
    if (const auto* err = res.artifacts.find("error.json")) std::cerr << *err;
    return res.exit_code;
}

}  // namespace toricwk::cli
