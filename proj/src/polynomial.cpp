#include "toricwk/polynomial.hpp"

#include "toricwk/errors.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <sstream>

namespace toricwk {

namespace {

using HighFloat = boost::multiprecision::cpp_bin_float_50;

HighFloat to_high(const Rational& q) {
    HighFloat num(boost::multiprecision::numerator(q).str());
    HighFloat den(boost::multiprecision::denominator(q).str());
    return num / den;
}

}  // namespace

Polynomial Polynomial::constant(int nvars, const Rational& c) {
    Polynomial p(nvars);
    p.add_term(Monomial(nvars, 0), c);
    return p;
}

Polynomial Polynomial::variable(int nvars, int i) {
    Polynomial p(nvars);
    Monomial m(nvars, 0);
    m[i] = 1;
    p.add_term(m, Rational(1));
    return p;
}

Polynomial Polynomial::affine(const RatVec& b, const Rational& c) {
    const int n = static_cast<int>(b.size());
    Polynomial p = constant(n, c);
    for (int i = 0; i < n; ++i) p += variable(n, i) * b[i];
    return p;
}

void Polynomial::add_term(const Monomial& m, const Rational& c) {
    if (static_cast<int>(m.size()) != nvars_) throw InvalidInput("monomial has wrong number of variables");
    if (c == 0) return;
    auto it = coeffs_.find(m);
    if (it == coeffs_.end()) {
        coeffs_.emplace(m, c);
        return;
    }
    it->second += c;
    if (it->second == 0) coeffs_.erase(it);
}

bool Polynomial::is_constant() const {
    return coeffs_.empty() || (coeffs_.size() == 1 && degree() == 0);
}

Rational Polynomial::constant_term() const {
    auto it = coeffs_.find(Monomial(nvars_, 0));
    return it == coeffs_.end() ? Rational(0) : it->second;
}

int Polynomial::degree() const {
    int d = 0;
    for (const auto& [m, c] : coeffs_) {
        int s = 0;
        for (int e : m) s += e;
        d = std::max(d, s);
    }
    return d;
}

Rational Polynomial::leading_coefficient() const {
    return coeffs_.empty() ? Rational(0) : coeffs_.rbegin()->second;
}

bool Polynomial::is_even_positive() const {
    for (const auto& [m, c] : coeffs_) {
        if (c <= 0) return false;
        for (int e : m)
            if (e % 2 != 0) return false;
    }
    return true;
}

Polynomial Polynomial::derivative(int i) const {
    Polynomial out(nvars_);
    for (const auto& [m, c] : coeffs_) {
        if (m[i] == 0) continue;
        Monomial d = m;
        d[i] -= 1;
        out.add_term(d, c * m[i]);
    }
    return out;
}

Polynomial Polynomial::pow(int e) const {
    if (e < 0) throw InvalidInput("negative polynomial power");
    Polynomial out = constant(nvars_, Rational(1));
    for (int k = 0; k < e; ++k) out = out * *this;
    return out;
}

Polynomial Polynomial::substitute(const RatVec& x0, const std::vector<RatVec>& cols) const {
    const int m = static_cast<int>(cols.size());
    std::vector<Polynomial> images;
    for (int i = 0; i < nvars_; ++i) {
        RatVec b(m);
        for (int k = 0; k < m; ++k) b[k] = cols[k][i];
        images.push_back(affine(b, x0[i]));
    }
    Polynomial out(m);
    for (const auto& [mono, c] : coeffs_) {
        Polynomial t = constant(m, c);
        for (int i = 0; i < nvars_; ++i)
            if (mono[i] > 0) t = t * images[i].pow(mono[i]);
        out += t;
    }
    return out;
}

Rational Polynomial::eval(const RatVec& x) const {
    Rational s = 0;
    for (const auto& [m, c] : coeffs_) {
        Rational t = c;
        for (int i = 0; i < nvars_; ++i)
            for (int k = 0; k < m[i]; ++k) t *= x[i];
        s += t;
    }
    return s;
}

double Polynomial::eval(const double* x) const { return CompiledPolynomial(*this).eval(x); }

Polynomial& Polynomial::operator+=(const Polynomial& o) {
    if (nvars_ == 0 && coeffs_.empty()) nvars_ = o.nvars_;
    for (const auto& [m, c] : o.coeffs_) add_term(m, c);
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
    if (nvars_ == 0 && coeffs_.empty()) nvars_ = o.nvars_;
    for (const auto& [m, c] : o.coeffs_) add_term(m, -c);
    return *this;
}

Polynomial& Polynomial::operator*=(const Rational& c) {
    if (c == 0) {
        coeffs_.clear();
        return *this;
    }
    for (auto& [m, v] : coeffs_) v *= c;
    return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial out(std::max(a.nvars_, b.nvars_));
    for (const auto& [ma, ca] : a.coeffs_)
        for (const auto& [mb, cb] : b.coeffs_) {
            Polynomial::Monomial m = ma;
            for (size_t i = 0; i < m.size(); ++i) m[i] += mb[i];
            out.add_term(m, ca * cb);
        }
    return out;
}

bool Polynomial::operator<(const Polynomial& o) const {
    if (nvars_ != o.nvars_) return nvars_ < o.nvars_;
    return coeffs_ < o.coeffs_;
}

CompiledPolynomial::CompiledPolynomial(const Polynomial& p) : nvars_(p.nvars()), degree_(p.degree()) {
    for (const auto& [m, c] : p.coeffs()) {
        exps_.insert(exps_.end(), m.begin(), m.end());
        coef_.push_back(to_double(c));
    }
}

double CompiledPolynomial::eval(const double* x) const {
    double s = 0.0;
    const int* e = exps_.data();
    for (double c : coef_) {
        double t = c;
        for (int i = 0; i < nvars_; ++i, ++e)
            for (int k = 0; k < *e; ++k) t *= x[i];
        s += t;
    }
    return s;
}

ExpLinear ExpLinear::term(const Rational& coef, const Rational& exponent) {
    ExpLinear e;
    if (coef != 0) e.terms_.emplace(exponent, coef);
    return e;
}

double ExpLinear::to_double() const {
    HighFloat s = 0;
    for (const auto& [q, c] : terms_) s += to_high(c) * boost::multiprecision::exp(to_high(q));
    return static_cast<double>(s);
}

std::string ExpLinear::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [q, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << "(" << toricwk::to_string(c) << ")";
        if (q != 0) os << "*e^(" << toricwk::to_string(q) << ")";
    }
    return os.str();
}

ExpLinear& ExpLinear::operator+=(const ExpLinear& o) {
    for (const auto& [q, c] : o.terms_) {
        auto& v = terms_[q];
        v += c;
        if (v == 0) terms_.erase(q);
    }
    return *this;
}

ExpLinear& ExpLinear::operator-=(const ExpLinear& o) {
    ExpLinear neg = o;
    neg *= Rational(-1);
    return *this += neg;
}

ExpLinear& ExpLinear::operator*=(const Rational& c) {
    if (c == 0) {
        terms_.clear();
        return *this;
    }
    for (auto& [q, v] : terms_) v *= c;
    return *this;
}

ExpLinear operator*(const ExpLinear& a, const ExpLinear& b) {
    ExpLinear out;
    for (const auto& [qa, ca] : a.terms_)
        for (const auto& [qb, cb] : b.terms_) out += ExpLinear::term(ca * cb, qa + qb);
    return out;
}

}  // namespace toricwk
