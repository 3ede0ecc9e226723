#pragma once

#include "toricwk/rational.hpp"

#include <map>
#include <vector>

namespace toricwk {

// Multivariate polynomial with rational coefficients.
class Polynomial {
public:
    using Monomial = std::vector<int>;

    Polynomial() = default;
    explicit Polynomial(int nvars) : nvars_(nvars) {}

    static Polynomial constant(int nvars, const Rational& c);
    static Polynomial variable(int nvars, int i);
    // <b, x> + c
    static Polynomial affine(const RatVec& b, const Rational& c);

    int nvars() const { return nvars_; }
    const std::map<Monomial, Rational>& coeffs() const { return coeffs_; }
    void add_term(const Monomial& m, const Rational& c);

    bool is_zero() const { return coeffs_.empty(); }
    bool is_constant() const;
    Rational constant_term() const;
    int degree() const;
    // Coefficient of the largest monomial in the internal order.
    Rational leading_coefficient() const;
    // True when every monomial has only even exponents and a positive coefficient.
    bool is_even_positive() const;

    Polynomial derivative(int i) const;
    Polynomial pow(int e) const;
    // Composition with x = x0 + sum_k t_k cols[k], giving a polynomial in t.
    Polynomial substitute(const RatVec& x0, const std::vector<RatVec>& cols) const;

    Rational eval(const RatVec& x) const;
    double eval(const double* x) const;

    Polynomial& operator+=(const Polynomial& o);
    Polynomial& operator-=(const Polynomial& o);
    Polynomial& operator*=(const Rational& c);
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, const Rational& c) { return a *= c; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    bool operator==(const Polynomial& o) const = default;
    bool operator<(const Polynomial& o) const;

private:
    int nvars_ = 0;
    std::map<Monomial, Rational> coeffs_;
};

// Fast floating point evaluation of a fixed polynomial.
class CompiledPolynomial {
public:
    CompiledPolynomial() = default;
    explicit CompiledPolynomial(const Polynomial& p);
    double eval(const double* x) const;
    int degree() const { return degree_; }

private:
    int nvars_ = 0;
    int degree_ = 0;
    std::vector<int> exps_;
    std::vector<double> coef_;
};

// Exact finite sum  sum_q c_q e^{q}  with rational q and c_q. Distinct rational
// exponents give linearly independent values, so equality and the zero test are exact.
class ExpLinear {
public:
    ExpLinear() = default;
    static ExpLinear rational(const Rational& c) { return term(c, Rational(0)); }
    static ExpLinear term(const Rational& coef, const Rational& exponent);

    const std::map<Rational, Rational>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    double to_double() const;
    std::string to_string() const;

    ExpLinear& operator+=(const ExpLinear& o);
    ExpLinear& operator-=(const ExpLinear& o);
    ExpLinear& operator*=(const Rational& c);
    friend ExpLinear operator+(ExpLinear a, const ExpLinear& b) { return a += b; }
    friend ExpLinear operator-(ExpLinear a, const ExpLinear& b) { return a -= b; }
    friend ExpLinear operator*(ExpLinear a, const Rational& c) { return a *= c; }
    friend ExpLinear operator*(const ExpLinear& a, const ExpLinear& b);
    bool operator==(const ExpLinear& o) const = default;

private:
    std::map<Rational, Rational> terms_;
};

}  // namespace toricwk
