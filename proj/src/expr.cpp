#include "myers/expr.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <optional>

#include "myers/errors.hpp"

namespace myers::expr {

namespace {

constexpr std::array<std::pair<std::string_view, Func>, 9> kFunctions{{
    {"sin", Func::sin},
    {"cos", Func::cos},
    {"tan", Func::tan},
    {"exp", Func::exp},
    {"log", Func::log},
    {"sqrt", Func::sqrt},
    {"abs", Func::abs},
    {"cosh", Func::cosh},
    {"sinh", Func::sinh},
}};

constexpr std::array<std::pair<std::string_view, Var>, 5> kVariables{{
    {"u", Var::u},
    {"v", Var::v},
    {"x", Var::x},
    {"y", Var::y},
    {"z", Var::z},
}};

std::optional<Func> lookup_function(std::string_view name) {
    for (const auto& [n, f] : kFunctions)
        if (n == name) return f;
    return std::nullopt;
}

std::optional<Var> lookup_variable(std::string_view name) {
    for (const auto& [n, v] : kVariables)
        if (n == name) return v;
    return std::nullopt;
}

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    std::vector<Node> run() {
        expression();
        skip_ws();
        if (pos_ != src_.size())
            throw SyntaxError(pos_, {"operator", "end of input"},
                              "unexpected '" + std::string(1, src_[pos_]) + "'");
        return std::move(nodes_);
    }

private:
    std::int32_t emit(Node n) {
        nodes_.push_back(n);
        return static_cast<std::int32_t>(nodes_.size() - 1);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::int32_t expression() {
        std::int32_t lhs = term();
        for (;;) {
            if (accept('+'))
                lhs = emit({.op = Op::add, .lhs = lhs, .rhs = term()});
            else if (accept('-'))
                lhs = emit({.op = Op::sub, .lhs = lhs, .rhs = term()});
            else
                return lhs;
        }
    }

    std::int32_t term() {
        std::int32_t lhs = unary();
        for (;;) {
            if (accept('*'))
                lhs = emit({.op = Op::mul, .lhs = lhs, .rhs = unary()});
            else if (accept('/'))
                lhs = emit({.op = Op::div, .lhs = lhs, .rhs = unary()});
            else
                return lhs;
        }
    }

    std::int32_t unary() {
        if (accept('-')) return emit({.op = Op::negate, .lhs = unary()});
        return power();
    }

    std::int32_t power() {
        std::int32_t base = primary();
        if (accept('^')) return emit({.op = Op::pow, .lhs = base, .rhs = unary()});
        return base;
    }

    std::int32_t primary() {
        skip_ws();
        if (pos_ >= src_.size())
            throw SyntaxError(pos_, {"number", "identifier", "(", "-"}, "unexpected end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            std::int32_t inner = expression();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        throw SyntaxError(pos_, {"number", "identifier", "(", "-"},
                          "unexpected '" + std::string(1, c) + "'");
    }

    void expect(char c) {
        if (!accept(c)) {
            std::string found = pos_ < src_.size() ? std::string(1, src_[pos_]) : "end of input";
            throw SyntaxError(pos_, {std::string(1, c)}, "found '" + found + "'");
        }
    }

    std::int32_t number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t mantissa = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            mantissa += digits();
        }
        if (mantissa == 0) throw SyntaxError(start, {"digit"}, "malformed number");
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            const std::size_t save = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (digits() == 0) {
                // "2e" is a literal followed by an identifier, which is never valid; report it here.
                throw SyntaxError(save + 1, {"exponent digits"}, "malformed exponent");
            }
        }
        const std::string text(src_.substr(start, pos_ - start));
        const double value = std::strtod(text.c_str(), nullptr);
        if (!std::isfinite(value))
            throw SyntaxError(start, {"finite number"}, "literal '" + text + "' out of range");
        return emit({.op = Op::number, .value = value});
    }

    std::int32_t identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string_view name = src_.substr(start, pos_ - start);
        if (auto f = lookup_function(name)) {
            expect('(');
            std::int32_t arg = expression();
            expect(')');
            return emit({.op = Op::call, .func = *f, .lhs = arg});
        }
        if (auto v = lookup_variable(name)) return emit({.op = Op::variable, .var = *v});
        if (name == "pi") return emit({.op = Op::pi, .value = std::numbers::pi});
        throw UnknownIdentifier(start, std::string(name));
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::vector<Node> nodes_;
};

// Every compound node is parenthesised, so re-parsing emits nodes in the same
// post-order and parse(print(e)) == e node for node.
void print_node(const std::vector<Node>& nodes, std::int32_t i, std::string& out) {
    const Node& n = nodes[static_cast<std::size_t>(i)];
    switch (n.op) {
        case Op::number: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", n.value);
            out += buf;
            return;
        }
        case Op::pi:
            out += "pi";
            return;
        case Op::variable:
            out += kVariables[static_cast<std::size_t>(n.var)].first;
            return;
        case Op::negate:
            out += "(-";
            print_node(nodes, n.lhs, out);
            out += ")";
            return;
        case Op::call:
            out += func_name(n.func);
            out += "(";
            print_node(nodes, n.lhs, out);
            out += ")";
            return;
        default:
            break;
    }
    const char* sym = n.op == Op::add   ? " + "
                      : n.op == Op::sub ? " - "
                      : n.op == Op::mul ? " * "
                      : n.op == Op::div ? " / "
                                        : " ^ ";
    out += "(";
    print_node(nodes, n.lhs, out);
    out += sym;
    print_node(nodes, n.rhs, out);
    out += ")";
}

double apply(Func f, double a, EvalStatus& st) noexcept {
    switch (f) {
        case Func::sin: return std::sin(a);
        case Func::cos: return std::cos(a);
        case Func::tan: return std::tan(a);
        case Func::exp: return std::exp(a);
        case Func::log:
            if (!(a > 0.0)) st = EvalStatus::domain_error;
            return std::log(a);
        case Func::sqrt:
            if (a < 0.0) st = EvalStatus::domain_error;
            return std::sqrt(a);
        case Func::abs: return std::fabs(a);
        case Func::cosh: return std::cosh(a);
        case Func::sinh: return std::sinh(a);
    }
    return 0.0;
}

}  // namespace

const char* func_name(Func f) noexcept {
    return kFunctions[static_cast<std::size_t>(f)].first.data();
}

ScalarFieldExpr::ScalarFieldExpr()
    : nodes_(std::make_shared<const std::vector<Node>>(std::vector<Node>{Node{}})) {}

ScalarFieldExpr::ScalarFieldExpr(std::vector<Node> nodes)
    : nodes_(std::make_shared<const std::vector<Node>>(std::move(nodes))) {}

bool ScalarFieldExpr::uses(Var v) const noexcept {
    for (const Node& n : *nodes_)
        if (n.op == Op::variable && n.var == v) return true;
    return false;
}

bool ScalarFieldExpr::is_constant_zero() const noexcept {
    return nodes_->size() == 1 && nodes_->front().op == Op::number && nodes_->front().value == 0.0;
}

ScalarFieldExpr parse(std::string_view source) { return ScalarFieldExpr(Parser(source).run()); }

std::string print(const ScalarFieldExpr& e) {
    std::string out;
    print_node(e.nodes(), static_cast<std::int32_t>(e.size() - 1), out);
    return out;
}

EvalResult evaluate(const ScalarFieldExpr& e, std::span<const double> coords) noexcept {
    const auto& nodes = e.nodes();
    constexpr std::size_t kInline = 96;
    std::array<double, kInline> small;
    std::vector<double> large;
    double* vals = small.data();
    if (nodes.size() > kInline) {
        large.resize(nodes.size());
        vals = large.data();
    }

    EvalStatus st = EvalStatus::ok;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Node& n = nodes[i];
        const double a = n.lhs >= 0 ? vals[n.lhs] : 0.0;
        const double b = n.rhs >= 0 ? vals[n.rhs] : 0.0;
        double r = 0.0;
        switch (n.op) {
            case Op::number:
            case Op::pi: r = n.value; break;
            case Op::variable: {
                const auto k = static_cast<std::size_t>(n.var);
                if (k >= coords.size()) return {0.0, EvalStatus::domain_error};
                r = coords[k];
                break;
            }
            case Op::negate: r = -a; break;
            case Op::add: r = a + b; break;
            case Op::sub: r = a - b; break;
            case Op::mul: r = a * b; break;
            case Op::div:
                if (b == 0.0) st = EvalStatus::domain_error;
                r = a / b;
                break;
            case Op::pow:
                if (a < 0.0 && b != std::floor(b)) st = EvalStatus::domain_error;
                if (a == 0.0 && b < 0.0) st = EvalStatus::domain_error;
                r = std::pow(a, b);
                break;
            case Op::call: r = apply(n.func, a, st); break;
        }
        if (st != EvalStatus::ok) return {r, st};
        vals[i] = r;
    }
    const double out = vals[nodes.size() - 1];
    return {out, std::isfinite(out) ? EvalStatus::ok : EvalStatus::non_finite};
}

double eval(const ScalarFieldExpr& e, std::span<const double> coords) {
    const EvalResult r = evaluate(e, coords);
    switch (r.status) {
        case EvalStatus::ok: return r.value;
        case EvalStatus::domain_error:
            throw DomainError("expression '" + print(e) + "' evaluated outside its domain");
        case EvalStatus::non_finite:
            throw DomainError("expression '" + print(e) + "' produced a non-finite value");
    }
    return r.value;
}

}  // namespace myers::expr
