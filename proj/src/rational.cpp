#include "toricwk/rational.hpp"

#include "toricwk/errors.hpp"

#include <cmath>
#include <numeric>

namespace toricwk {

namespace {

Rational pow10(int e) {
    Rational r = 1;
    Rational base = e >= 0 ? Rational(10) : Rational(1, 10);
    for (int i = 0; i < std::abs(e); ++i) r *= base;
    return r;
}

Rational parse_decimal(std::string_view s) {
    std::string body(s);
    int exponent = 0;
    auto epos = body.find_first_of("eE");
    if (epos != std::string::npos) {
        exponent = std::stoi(body.substr(epos + 1));
        body = body.substr(0, epos);
    }
    bool negative = false;
    if (!body.empty() && (body[0] == '-' || body[0] == '+')) {
        negative = body[0] == '-';
        body = body.substr(1);
    }
    auto dot_pos = body.find('.');
    std::string digits = body;
    if (dot_pos != std::string::npos) {
        digits = body.substr(0, dot_pos) + body.substr(dot_pos + 1);
        exponent -= static_cast<int>(body.size() - dot_pos - 1);
    }
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
        throw SchemaError("not a number: '" + std::string(s) + "'");
    Rational r{Integer(digits)};
    r *= pow10(exponent);
    return negative ? Rational(-r) : r;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    std::string s(text);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    size_t start = 0;
    while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
    s = s.substr(start);
    if (s.empty()) throw SchemaError("empty rational literal");
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return parse_decimal(s);
        Rational num = parse_decimal(s.substr(0, slash));
        Rational den = parse_decimal(s.substr(slash + 1));
        if (den == 0) throw SchemaError("zero denominator in '" + s + "'");
        return num / den;
    } catch (const std::invalid_argument&) {
        throw SchemaError("not a rational: '" + s + "'");
    } catch (const std::out_of_range&) {
        throw SchemaError("rational out of range: '" + s + "'");
    }
}

std::string to_string(const Rational& q) { return q.str(); }

double to_double(const Rational& q) { return q.convert_to<double>(); }

Rational from_double(double x) {
    if (!std::isfinite(x)) throw InvalidInput("non-finite value cannot be made rational");
    return Rational(x);
}

RatVec to_rat(const IntVec& v) {
    RatVec r;
    r.reserve(v.size());
    for (long long c : v) r.emplace_back(c);
    return r;
}

std::vector<double> to_double(const RatVec& v) {
    std::vector<double> r;
    r.reserve(v.size());
    for (const auto& c : v) r.push_back(to_double(c));
    return r;
}

Rational dot(const RatVec& a, const RatVec& b) {
    Rational s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Rational dot(const IntVec& a, const RatVec& b) {
    Rational s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const IntVec& v) {
    double s = 0;
    for (long long c : v) s += static_cast<double>(c) * static_cast<double>(c);
    return std::sqrt(s);
}

double norm(const RatVec& v) {
    double s = 0;
    for (const auto& c : v) {
        double d = to_double(c);
        s += d * d;
    }
    return std::sqrt(s);
}

bool is_zero(const RatVec& v) {
    for (const auto& c : v)
        if (c != 0) return false;
    return true;
}

long long gcd_of(const IntVec& v) {
    long long g = 0;
    for (long long c : v) g = std::gcd(g, c < 0 ? -c : c);
    return g;
}

bool is_primitive(const IntVec& v) { return gcd_of(v) == 1; }

IntVec primitive_of(const RatVec& v, Rational* scale) {
    Integer lcm = 1;
    for (const auto& c : v) {
        Integer d = boost::multiprecision::denominator(c);
        lcm = lcm / boost::multiprecision::gcd(lcm, d) * d;
    }
    std::vector<Integer> ints;
    Integer g = 0;
    for (const auto& c : v) {
        Integer n = boost::multiprecision::numerator(c) * (lcm / boost::multiprecision::denominator(c));
        ints.push_back(n);
        g = boost::multiprecision::gcd(g, n);
    }
    if (g == 0) throw InvalidInput("zero vector has no primitive form");
    IntVec out;
    out.reserve(v.size());
    for (auto& n : ints) {
        Integer q = n / g;
        if (boost::multiprecision::abs(q) > Integer(std::numeric_limits<long long>::max() / 4))
            throw InvalidInput("integer vector entry exceeds supported range");
        out.push_back(q.convert_to<long long>());
    }
    if (scale) *scale = Rational(g) / Rational(lcm);
    return out;
}

RatMat rref(RatMat a) {
    if (a.empty()) return a;
    size_t rows = a.size(), cols = a[0].size();
    size_t r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t p = r;
        while (p < rows && a[p][c] == 0) ++p;
        if (p == rows) continue;
        std::swap(a[p], a[r]);
        Rational inv = 1 / a[r][c];
        for (auto& x : a[r]) x *= inv;
        for (size_t i = 0; i < rows; ++i) {
            if (i == r || a[i][c] == 0) continue;
            Rational f = a[i][c];
            for (size_t j = c; j < cols; ++j) a[i][j] -= f * a[r][j];
        }
        ++r;
    }
    a.resize(r);
    return a;
}

int rank(RatMat a) { return static_cast<int>(rref(std::move(a)).size()); }

Rational determinant(RatMat a) {
    size_t n = a.size();
    Rational det = 1;
    for (size_t c = 0; c < n; ++c) {
        size_t p = c;
        while (p < n && a[p][c] == 0) ++p;
        if (p == n) return 0;
        if (p != c) {
            std::swap(a[p], a[c]);
            det = -det;
        }
        det *= a[c][c];
        for (size_t i = c + 1; i < n; ++i) {
            if (a[i][c] == 0) continue;
            Rational f = a[i][c] / a[c][c];
            for (size_t j = c; j < n; ++j) a[i][j] -= f * a[c][j];
        }
    }
    return det;
}

std::optional<RatVec> solve_square(RatMat a, RatVec b) {
    size_t n = a.size();
    for (size_t i = 0; i < n; ++i) a[i].push_back(b[i]);
    for (size_t c = 0; c < n; ++c) {
        size_t p = c;
        while (p < n && a[p][c] == 0) ++p;
        if (p == n) return std::nullopt;
        std::swap(a[p], a[c]);
        Rational inv = 1 / a[c][c];
        for (size_t j = c; j <= n; ++j) a[c][j] *= inv;
        for (size_t i = 0; i < n; ++i) {
            if (i == c || a[i][c] == 0) continue;
            Rational f = a[i][c];
            for (size_t j = c; j <= n; ++j) a[i][j] -= f * a[c][j];
        }
    }
    RatVec x(n);
    for (size_t i = 0; i < n; ++i) x[i] = a[i][n];
    return x;
}

std::vector<RatVec> nullspace(const RatMat& a, int ncols) {
    RatMat r = a.empty() ? RatMat{} : rref(a);
    std::vector<int> pivot_col;
    for (const auto& row : r) {
        int c = 0;
        while (c < ncols && row[c] == 0) ++c;
        pivot_col.push_back(c);
    }
    std::vector<bool> is_pivot(ncols, false);
    for (int c : pivot_col) is_pivot[c] = true;
    std::vector<RatVec> basis;
    for (int free = 0; free < ncols; ++free) {
        if (is_pivot[free]) continue;
        RatVec v(ncols, Rational(0));
        v[free] = 1;
        for (size_t i = 0; i < r.size(); ++i) v[pivot_col[i]] = -r[i][free];
        basis.push_back(std::move(v));
    }
    return basis;
}

}  // namespace toricwk
