#include "toricwk/expr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace toricwk {

Expr Expr::make(Node n) { return Expr(std::make_shared<const Node>(std::move(n))); }

Expr Expr::constant(double c) {
    Node n;
    n.kind = Kind::Const;
    n.value = c;
    return make(std::move(n));
}

Expr Expr::var(int i) {
    if (i < 0) throw std::invalid_argument("negative variable index");
    Node n;
    n.kind = Kind::Var;
    n.index = i;
    return make(std::move(n));
}

Expr Expr::add(std::vector<Expr> terms) {
    std::vector<Expr> out;
    double c = 0.0;
    auto take = [&](const Expr& t) {
        if (t.is_constant())
            c += t.value();
        else
            out.push_back(t);
    };
    for (const auto& t : terms) {
        if (t.kind() == Kind::Add)
            for (const auto& s : t.args()) take(s);
        else
            take(t);
    }
    if (c != 0.0) out.push_back(constant(c));
    if (out.empty()) return constant(0.0);
    if (out.size() == 1) return out[0];
    Node n;
    n.kind = Kind::Add;
    n.args = std::move(out);
    return make(std::move(n));
}

Expr Expr::mul(std::vector<Expr> factors) {
    std::vector<Expr> out;
    double c = 1.0;
    auto take = [&](const Expr& f) {
        if (f.is_constant())
            c *= f.value();
        else
            out.push_back(f);
    };
    for (const auto& f : factors) {
        if (f.kind() == Kind::Mul)
            for (const auto& s : f.args()) take(s);
        else
            take(f);
    }
    if (c == 0.0) return constant(0.0);
    if (out.empty()) return constant(c);
    if (c != 1.0) out.insert(out.begin(), constant(c));
    if (out.size() == 1) return out[0];
    Node n;
    n.kind = Kind::Mul;
    n.args = std::move(out);
    return make(std::move(n));
}

Expr Expr::pow(const Expr& base, int exponent) {
    if (exponent == 0) return constant(1.0);
    if (exponent == 1) return base;
    if (base.is_constant()) return constant(std::pow(base.value(), exponent));
    if (base.kind() == Kind::Pow) return pow(base.args()[0], base.exponent() * exponent);
    Node n;
    n.kind = Kind::Pow;
    n.exponent = exponent;
    n.args = {base};
    return make(std::move(n));
}

Expr Expr::log(const Expr& arg) {
    if (arg.is_constant()) return constant(std::log(arg.value()));
    if (arg.kind() == Kind::Exp) return arg.args()[0];
    Node n;
    n.kind = Kind::Log;
    n.args = {arg};
    return make(std::move(n));
}

Expr Expr::exp(const Expr& arg) {
    if (arg.is_constant()) return constant(std::exp(arg.value()));
    Node n;
    n.kind = Kind::Exp;
    n.args = {arg};
    return make(std::move(n));
}

int Expr::arity() const {
    if (kind() == Kind::Var) return index() + 1;
    int a = 0;
    for (const auto& s : args()) a = std::max(a, s.arity());
    return a;
}

double Expr::eval(const double* x) const {
    switch (kind()) {
        case Kind::Const: return value();
        case Kind::Var: return x[index()];
        case Kind::Add: {
            double s = 0.0;
            for (const auto& t : args()) s += t.eval(x);
            return s;
        }
        case Kind::Mul: {
            double p = 1.0;
            for (const auto& t : args()) p *= t.eval(x);
            return p;
        }
        case Kind::Pow: {
            double b = args()[0].eval(x);
            int e = exponent();
            double r = 1.0;
            for (int k = 0; k < std::abs(e); ++k) r *= b;
            return e < 0 ? 1.0 / r : r;
        }
        case Kind::Log: return std::log(args()[0].eval(x));
        case Kind::Exp: return std::exp(args()[0].eval(x));
    }
    return 0.0;
}

Expr Expr::diff(int i) const {
    switch (kind()) {
        case Kind::Const: return constant(0.0);
        case Kind::Var: return constant(index() == i ? 1.0 : 0.0);
        case Kind::Add: {
            std::vector<Expr> ds;
            for (const auto& t : args()) ds.push_back(t.diff(i));
            return add(std::move(ds));
        }
        case Kind::Mul: {
            std::vector<Expr> terms;
            for (size_t k = 0; k < args().size(); ++k) {
                Expr dk = args()[k].diff(i);
                if (dk.is_zero()) continue;
                std::vector<Expr> fs = args();
                fs[k] = dk;
                terms.push_back(mul(std::move(fs)));
            }
            return add(std::move(terms));
        }
        case Kind::Pow: {
            const Expr& b = args()[0];
            Expr db = b.diff(i);
            if (db.is_zero()) return constant(0.0);
            return mul({constant(exponent()), pow(b, exponent() - 1), db});
        }
        case Kind::Log: {
            const Expr& a = args()[0];
            Expr da = a.diff(i);
            if (da.is_zero()) return constant(0.0);
            return mul({da, pow(a, -1)});
        }
        case Kind::Exp: {
            Expr da = args()[0].diff(i);
            if (da.is_zero()) return constant(0.0);
            return mul({*this, da});
        }
    }
    return constant(0.0);
}

std::string Expr::to_string() const {
    std::ostringstream os;
    os.precision(17);
    auto join = [&](const char* sep) {
        for (size_t k = 0; k < args().size(); ++k) {
            if (k) os << sep;
            os << args()[k].to_string();
        }
    };
    switch (kind()) {
        case Kind::Const: os << value(); break;
        case Kind::Var: os << "x" << index(); break;
        case Kind::Add: os << "("; join(" + "); os << ")"; break;
        case Kind::Mul: join("*"); break;
        case Kind::Pow: os << "(" << args()[0].to_string() << ")^" << exponent(); break;
        case Kind::Log: os << "log(" << args()[0].to_string() << ")"; break;
        case Kind::Exp: os << "exp(" << args()[0].to_string() << ")"; break;
    }
    return os.str();
}

bool Expr::operator==(const Expr& o) const {
    if (node_ == o.node_) return true;
    if (kind() != o.kind() || value() != o.value() || index() != o.index() || exponent() != o.exponent()) return false;
    return args() == o.args();
}

}  // namespace toricwk
