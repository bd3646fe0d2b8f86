#pragma once

// Scalar-field expressions over chart coordinates (u, v) and, on embedded
// surfaces, ambient Cartesian coordinates (x, y, z).
//
// Grammar (highest binding first):
//   primary := number | pi | variable | function '(' expr ')' | '(' expr ')'
//   power   := primary ['^' unary]          right associative
//   unary   := '-' unary | power
//   term    := unary {('*' | '/') unary}
//   expr    := term {('+' | '-') term}

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace myers::expr {

enum class Op : std::uint8_t { number, pi, variable, negate, add, sub, mul, div, pow, call };
enum class Func : std::uint8_t { sin, cos, tan, exp, log, sqrt, abs, cosh, sinh };
enum class Var : std::uint8_t { u = 0, v = 1, x = 2, y = 3, z = 4 };

inline constexpr std::size_t kChartArity = 2;
inline constexpr std::size_t kAmbientArity = 5;

struct Node {
    Op op = Op::number;
    double value = 0.0;
    Var var = Var::u;
    Func func = Func::sin;
    std::int32_t lhs = -1;
    std::int32_t rhs = -1;

    friend bool operator==(const Node&, const Node&) = default;
};

enum class EvalStatus : std::uint8_t { ok, domain_error, non_finite };

struct EvalResult {
    double value = 0.0;
    EvalStatus status = EvalStatus::ok;
    bool ok() const noexcept { return status == EvalStatus::ok; }
};

// Immutable parsed expression. Nodes are stored in post-order so that every
// child precedes its parent; the root is the last node.
class ScalarFieldExpr {
public:
    ScalarFieldExpr();  // the constant 0
    explicit ScalarFieldExpr(std::vector<Node> nodes);

    const std::vector<Node>& nodes() const noexcept { return *nodes_; }
    std::size_t size() const noexcept { return nodes_->size(); }
    bool uses(Var v) const noexcept;
    bool uses_ambient() const noexcept { return uses(Var::x) || uses(Var::y) || uses(Var::z); }
    bool uses_chart() const noexcept { return uses(Var::u) || uses(Var::v); }
    bool is_constant_zero() const noexcept;

    // Structural (AST) equality.
    friend bool operator==(const ScalarFieldExpr& a, const ScalarFieldExpr& b) {
        return a.nodes_ == b.nodes_ || *a.nodes_ == *b.nodes_;
    }

private:
    std::shared_ptr<const std::vector<Node>> nodes_;
};

ScalarFieldExpr parse(std::string_view source);

// Fully parenthesised text that parses back to the same tree.
std::string print(const ScalarFieldExpr& e);

// coords holds (u, v) or (u, v, x, y, z). Reading a variable that is not bound
// is reported as a domain error.
EvalResult evaluate(const ScalarFieldExpr& e, std::span<const double> coords) noexcept;

// Like evaluate(), but throws DomainError on any non-ok status.
double eval(const ScalarFieldExpr& e, std::span<const double> coords);

const char* func_name(Func f) noexcept;

}  // namespace myers::expr
