#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace toricwk {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

using RatVec = std::vector<Rational>;
using RatMat = std::vector<RatVec>;  // row major
using IntVec = std::vector<long long>;

// Accepts "p/q", integers and finite decimal literals ("0.25", "-3e-2").
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);
double to_double(const Rational& q);
// Exact binary value of a finite double.
Rational from_double(double x);

RatVec to_rat(const IntVec& v);
std::vector<double> to_double(const RatVec& v);
Rational dot(const RatVec& a, const RatVec& b);
Rational dot(const IntVec& a, const RatVec& b);
double norm(const IntVec& v);
double norm(const RatVec& v);
bool is_zero(const RatVec& v);

long long gcd_of(const IntVec& v);
bool is_primitive(const IntVec& v);

// Smallest integer vector that is a positive multiple of v (v must be nonzero).
// `scale` receives the positive rational q with v = q * result.
IntVec primitive_of(const RatVec& v, Rational* scale = nullptr);

int rank(RatMat a);
Rational determinant(RatMat a);
// Unique solution of a square system, or nullopt when singular.
std::optional<RatVec> solve_square(RatMat a, RatVec b);
// Basis of {x : a x = 0} in reduced form (canonical for the subspace).
std::vector<RatVec> nullspace(const RatMat& a, int ncols);
// Reduced row echelon form with zero rows dropped.
RatMat rref(RatMat a);

}  // namespace toricwk
