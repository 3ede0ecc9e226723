#pragma once

#include "toricwk/calabi.hpp"
#include "toricwk/geometry.hpp"
#include "toricwk/pl.hpp"
#include "toricwk/potentials.hpp"
#include "toricwk/stability.hpp"
#include "toricwk/weights.hpp"

#include <json.hpp>

#include <string>

namespace toricwk::io {

using json = nlohmann::json;

// Rationals are written as "p/q" strings; integers, decimal strings and JSON numbers are accepted.
json to_json(const Rational& q);
Rational rational_from_json(const json& j);
json to_json(const RatVec& v);
RatVec ratvec_from_json(const json& j);
IntVec intvec_from_json(const json& j);

json to_json(const Polyhedron& p);
Polyhedron polyhedron_from_json(const json& j);

json to_json(const Polynomial& p);
Polynomial polynomial_from_json(const json& j, int nvars);

json to_json(const Weight& w);
Weight weight_from_json(const json& j);

json to_json(const AffineForm& a);
AffineForm affine_from_json(const json& j);
json to_json(const PiecewiseLinear& f);
// {"pieces": [...]} or a named family: f_x0, f_R, simple_crease, affine.
PiecewiseLinear pl_from_json(const json& j, int dim);

json to_json(const Expr& e);
Expr expr_from_json(const json& j);
json to_json(const SymplecticPotential& u);
SymplecticPotential potential_from_json(const json& j, int dim);

json to_json(const FibrationFactor& f);
FibrationFactor fibration_factor_from_json(const json& j);
json to_json(const KrsFactor& f);
KrsFactor krs_factor_from_json(const json& j);

json to_json(const IntegralResult& r);
IntegralResult integral_result_from_json(const json& j);
json to_json(const ScanEntry& e);
ScanEntry scan_entry_from_json(const json& j);
json to_json(const StabilityVerdict& v);
StabilityVerdict verdict_from_json(const json& j, int dim);
VerdictKind verdict_kind_from_string(const std::string& s);

json to_json(const LiProfile& prof);
LiProfile li_profile_from_json(const json& j);

// Shortest decimal form that reads back to the same double.
std::string format_double(double x);

}  // namespace toricwk::io
