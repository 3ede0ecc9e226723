#pragma once

#include <memory>
#include <string>
#include <vector>

namespace toricwk {

// Immutable expression tree in the variables x_0, ..., x_{n-1}.
class Expr {
public:
    enum class Kind { Const, Var, Add, Mul, Pow, Log, Exp };

    Expr() : Expr(constant(0.0)) {}

    static Expr constant(double c);
    static Expr var(int i);
    static Expr add(std::vector<Expr> terms);
    static Expr mul(std::vector<Expr> factors);
    static Expr pow(const Expr& base, int exponent);
    static Expr log(const Expr& arg);
    static Expr exp(const Expr& arg);

    Kind kind() const { return node_->kind; }
    double value() const { return node_->value; }
    int index() const { return node_->index; }
    int exponent() const { return node_->exponent; }
    const std::vector<Expr>& args() const { return node_->args; }

    bool is_constant() const { return kind() == Kind::Const; }
    bool is_zero() const { return is_constant() && value() == 0.0; }
    // One more than the largest variable index, 0 for constants.
    int arity() const;

    double eval(const double* x) const;
    Expr diff(int i) const;
    std::string to_string() const;
    bool operator==(const Expr& o) const;

    friend Expr operator+(const Expr& a, const Expr& b) { return add({a, b}); }
    friend Expr operator*(const Expr& a, const Expr& b) { return mul({a, b}); }
    friend Expr operator-(const Expr& a) { return mul({constant(-1.0), a}); }
    friend Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

private:
    struct Node {
        Kind kind = Kind::Const;
        double value = 0.0;
        int index = 0;
        int exponent = 0;
        std::vector<Expr> args;
    };
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    static Expr make(Node n);

    std::shared_ptr<const Node> node_;
};

}  // namespace toricwk
