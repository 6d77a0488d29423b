#pragma once

// Closed-form expression language over chart coordinates.
//
// Grammar (lowest to highest precedence):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | identifier | identifier '(' expr ')' | '(' expr ')'
//
// Identifiers are coordinate names (u0, u1, ... unless renamed), named
// constants (pi, e, plus any caller-supplied parameters) and the functions
// sin cos tan sinh cosh tanh exp log sqrt abs. Exponents must not depend on
// the coordinates; a non-integer exponent requires a positive base.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "sasaki/errors.hpp"
#include "sasaki/jet.hpp"

namespace sasaki {

// Shortest decimal text that parses back to exactly `x`.
inline std::string format_double(double x) {
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

// Names visible to the parser.
struct SymbolTable {
    std::vector<std::string> coordinates;
    std::map<std::string, double, std::less<>> constants;

    static SymbolTable with_default_coordinates(std::size_t dim) {
        SymbolTable s;
        for (std::size_t i = 0; i < dim; ++i) s.coordinates.push_back("u" + std::to_string(i));
        return s;
    }

    std::size_t dim() const { return coordinates.size(); }
};

enum class Func { Sin, Cos, Tan, Sinh, Cosh, Tanh, Exp, Log, Sqrt, Abs };

inline const std::map<std::string, Func, std::less<>>& function_table() {
    static const std::map<std::string, Func, std::less<>> table{
        {"sin", Func::Sin},   {"cos", Func::Cos},   {"tan", Func::Tan}, {"sinh", Func::Sinh},
        {"cosh", Func::Cosh}, {"tanh", Func::Tanh}, {"exp", Func::Exp}, {"log", Func::Log},
        {"sqrt", Func::Sqrt}, {"abs", Func::Abs}};
    return table;
}

inline std::string_view function_name(Func f) {
    for (const auto& [name, fn] : function_table()) {
        if (fn == f) return name;
    }
    return "?";
}

namespace detail {

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Number {
    double value;
};
struct Variable {
    std::size_t index;
    std::string name;
};
struct NamedConstant {
    std::string name;
    double value;
};
struct Negate {
    NodePtr arg;
};
struct Binary {
    char op;
    NodePtr lhs, rhs;
};
struct Power {
    NodePtr base, exponent;
    double exponent_value;
};
struct Call {
    Func func;
    NodePtr arg;
};

struct Node {
    std::variant<Number, Variable, NamedConstant, Negate, Binary, Power, Call> data;
};

inline int precedence(const Node& n) {
    return std::visit(
        [](const auto& d) -> int {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Binary>) {
                return (d.op == '+' || d.op == '-') ? 1 : 2;
            } else if constexpr (std::is_same_v<T, Negate>) {
                return 3;
            } else if constexpr (std::is_same_v<T, Power>) {
                return 4;
            } else {
                return 5;
            }
        },
        n.data);
}

inline void print(const Node& n, std::string& out);

inline void print_wrapped(const Node& n, bool parens, std::string& out) {
    if (parens) out += '(';
    print(n, out);
    if (parens) out += ')';
}

// Round-trip printing: parenthesisation preserves the tree exactly, so the
// reparsed expression performs the same floating-point operations.
inline void print(const Node& n, std::string& out) {
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Number>) {
                out += format_double(d.value);
            } else if constexpr (std::is_same_v<T, Variable>) {
                out += d.name;
            } else if constexpr (std::is_same_v<T, NamedConstant>) {
                out += d.name;
            } else if constexpr (std::is_same_v<T, Negate>) {
                out += '-';
                print_wrapped(*d.arg, precedence(*d.arg) < 3, out);
            } else if constexpr (std::is_same_v<T, Binary>) {
                const int p = precedence(n);
                print_wrapped(*d.lhs, precedence(*d.lhs) < p, out);
                out += ' ';
                out += d.op;
                out += ' ';
                print_wrapped(*d.rhs, precedence(*d.rhs) <= p, out);
            } else if constexpr (std::is_same_v<T, Power>) {
                print_wrapped(*d.base, precedence(*d.base) <= 4, out);
                out += '^';
                print_wrapped(*d.exponent, precedence(*d.exponent) < 3, out);
            } else if constexpr (std::is_same_v<T, Call>) {
                out += function_name(d.func);
                out += '(';
                print(*d.arg, out);
                out += ')';
            }
        },
        n.data);
}

inline std::string to_text(const Node& n) {
    std::string s;
    print(n, s);
    return s;
}

inline bool depends_on_coordinates(const Node& n) {
    return std::visit(
        [](const auto& d) -> bool {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Variable>) {
                return true;
            } else if constexpr (std::is_same_v<T, Negate> || std::is_same_v<T, Call>) {
                return depends_on_coordinates(*d.arg);
            } else if constexpr (std::is_same_v<T, Binary>) {
                return depends_on_coordinates(*d.lhs) || depends_on_coordinates(*d.rhs);
            } else if constexpr (std::is_same_v<T, Power>) {
                return depends_on_coordinates(*d.base);
            } else {
                return false;
            }
        },
        n.data);
}

inline bool is_integer(double x) { return std::isfinite(x) && x == std::floor(x) && std::abs(x) < 1e9; }

// Scalar calculus backing both evaluation modes: value and first two
// derivatives of each elementary function at x. Throws DomainError.
struct Derivs {
    double f0, f1, f2;
};

inline Derivs function_derivs(Func f, double x, const Node& call, bool need_derivatives) {
    switch (f) {
        case Func::Sin:
            return {std::sin(x), std::cos(x), -std::sin(x)};
        case Func::Cos:
            return {std::cos(x), -std::sin(x), -std::cos(x)};
        case Func::Tan: {
            const double c = std::cos(x);
            if (c == 0.0) throw DomainError("tan at a pole", to_text(call));
            const double t = std::tan(x);
            const double s2 = 1.0 + t * t;
            return {t, s2, 2.0 * t * s2};
        }
        case Func::Sinh:
            return {std::sinh(x), std::cosh(x), std::sinh(x)};
        case Func::Cosh:
            return {std::cosh(x), std::sinh(x), std::cosh(x)};
        case Func::Tanh: {
            const double t = std::tanh(x);
            const double s2 = 1.0 - t * t;
            return {t, s2, -2.0 * t * s2};
        }
        case Func::Exp: {
            const double v = std::exp(x);
            return {v, v, v};
        }
        case Func::Log:
            if (!(x > 0.0)) throw DomainError("log of non-positive value", to_text(call));
            return {std::log(x), 1.0 / x, -1.0 / (x * x)};
        case Func::Sqrt: {
            if (x < 0.0 || (need_derivatives && x == 0.0)) {
                throw DomainError("sqrt outside its differentiable domain", to_text(call));
            }
            const double r = std::sqrt(x);
            if (!need_derivatives) return {r, 0.0, 0.0};
            return {r, 0.5 / r, -0.25 / (r * x)};
        }
        case Func::Abs:
            if (need_derivatives && x == 0.0) {
                throw DomainError("abs is not differentiable at 0", to_text(call));
            }
            return {std::abs(x), x > 0.0 ? 1.0 : -1.0, 0.0};
    }
    return {0.0, 0.0, 0.0};
}

inline Derivs power_derivs(double base, double p, const Node& pow_node, bool need_derivatives) {
    if (is_integer(p)) {
        if (p < 0.0 && base == 0.0) throw DomainError("zero to a negative power", to_text(pow_node));
        const double v = std::pow(base, p);
        if (!need_derivatives) return {v, 0.0, 0.0};
        const double d1 = p == 0.0 ? 0.0 : p * std::pow(base, p - 1.0);
        const double d2 = (p == 0.0 || p == 1.0) ? 0.0 : p * (p - 1.0) * std::pow(base, p - 2.0);
        return {v, d1, d2};
    }
    if (!(base > 0.0)) throw DomainError("non-integer power of non-positive base", to_text(pow_node));
    const double v = std::pow(base, p);
    return {v, p * v / base, p * (p - 1.0) * v / (base * base)};
}

inline double eval_value(const Node& n, std::span<const double> x) {
    return std::visit(
        [&](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Number>) {
                return d.value;
            } else if constexpr (std::is_same_v<T, Variable>) {
                return x[d.index];
            } else if constexpr (std::is_same_v<T, NamedConstant>) {
                return d.value;
            } else if constexpr (std::is_same_v<T, Negate>) {
                return -eval_value(*d.arg, x);
            } else if constexpr (std::is_same_v<T, Binary>) {
                const double a = eval_value(*d.lhs, x);
                const double b = eval_value(*d.rhs, x);
                switch (d.op) {
                    case '+': return a + b;
                    case '-': return a - b;
                    case '*': return a * b;
                    default:
                        if (b == 0.0) throw DomainError("division by zero", to_text(n));
                        return a / b;
                }
            } else if constexpr (std::is_same_v<T, Power>) {
                return power_derivs(eval_value(*d.base, x), d.exponent_value, n, false).f0;
            } else {
                return function_derivs(d.func, eval_value(*d.arg, x), n, false).f0;
            }
        },
        n.data);
}

inline Jet2 eval_jet(const Node& n, std::span<const double> x) {
    const std::size_t dim = x.size();
    return std::visit(
        [&](const auto& d) -> Jet2 {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Number>) {
                return Jet2::constant(dim, d.value);
            } else if constexpr (std::is_same_v<T, Variable>) {
                return Jet2::variable(dim, d.index, x[d.index]);
            } else if constexpr (std::is_same_v<T, NamedConstant>) {
                return Jet2::constant(dim, d.value);
            } else if constexpr (std::is_same_v<T, Negate>) {
                return -eval_jet(*d.arg, x);
            } else if constexpr (std::is_same_v<T, Binary>) {
                Jet2 a = eval_jet(*d.lhs, x);
                const Jet2 b = eval_jet(*d.rhs, x);
                switch (d.op) {
                    case '+': return a += b;
                    case '-': return a -= b;
                    case '*': return a * b;
                    default:
                        if (b.value() == 0.0) throw DomainError("division by zero", to_text(n));
                        return a / b;
                }
            } else if constexpr (std::is_same_v<T, Power>) {
                const Jet2 b = eval_jet(*d.base, x);
                const Derivs r = power_derivs(b.value(), d.exponent_value, n, true);
                return b.chain(r.f0, r.f1, r.f2);
            } else {
                const Jet2 a = eval_jet(*d.arg, x);
                const Derivs r = function_derivs(d.func, a.value(), n, true);
                return a.chain(r.f0, r.f1, r.f2);
            }
        },
        n.data);
}

class Parser {
public:
    Parser(std::string_view src, const SymbolTable& symbols) : src_(src), symbols_(symbols) {}

    NodePtr parse() {
        skip_space();
        if (pos_ == src_.size()) throw ParseError("empty expression", pos_);
        NodePtr e = parse_expr();
        skip_space();
        if (pos_ != src_.size()) throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
        return e;
    }

private:
    static NodePtr make(auto&& data) {
        return std::make_shared<const Node>(Node{std::forward<decltype(data)>(data)});
    }

    void skip_space() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\r' ||
                                      src_[pos_] == '\n')) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        while (true) {
            skip_space();
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) {
                const char op = src_[pos_++];
                lhs = make(Binary{op, lhs, parse_term()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        while (true) {
            skip_space();
            if (pos_ < src_.size() && (src_[pos_] == '*' || src_[pos_] == '/')) {
                const char op = src_[pos_++];
                lhs = make(Binary{op, lhs, parse_unary()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        if (accept('-')) return make(Negate{parse_unary()});
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == '^') {
            ++pos_;
            skip_space();
            const std::size_t at = pos_;
            NodePtr exponent = parse_unary();
            if (depends_on_coordinates(*exponent)) {
                throw ParseError("exponent must not depend on coordinates", at);
            }
            const std::vector<double> none;
            double p = 0.0;
            try {
                p = eval_value(*exponent, none);
            } catch (const DomainError& e) {
                throw ParseError(std::string("invalid exponent: ") + e.what(), at);
            }
            if (!std::isfinite(p)) throw ParseError("exponent is not finite", at);
            return make(Power{base, exponent, p});
        }
        return base;
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
            ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t q = pos_ + 1;
            if (q < src_.size() && (src_[q] == '+' || src_[q] == '-')) ++q;
            if (q < src_.size() && std::isdigit(static_cast<unsigned char>(src_[q]))) {
                pos_ = q;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            }
        }
        double v = 0.0;
        const char* first = src_.data() + start;
        const char* last = src_.data() + pos_;
        auto res = std::from_chars(first, last, v);
        if (res.ec != std::errc() || res.ptr != last) throw ParseError("malformed number", start);
        return make(Number{v});
    }

    NodePtr parse_primary() {
        skip_space();
        if (pos_ >= src_.size()) throw ParseError("unexpected end of expression", pos_);
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (c == '(') {
            ++pos_;
            NodePtr inner = parse_expr();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return inner;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                ++pos_;
            }
            const std::string name(src_.substr(start, pos_ - start));
            skip_space();
            const bool call = pos_ < src_.size() && src_[pos_] == '(';
            if (auto f = function_table().find(name); f != function_table().end()) {
                if (!call) throw ArityError("function '" + name + "' needs one argument", start);
                ++pos_;
                skip_space();
                if (pos_ < src_.size() && src_[pos_] == ')') {
                    throw ArityError("function '" + name + "' takes 1 argument, got 0", start);
                }
                NodePtr arg = parse_expr();
                std::size_t count = 1;
                while (accept(',')) {
                    parse_expr();
                    ++count;
                }
                if (count != 1) {
                    throw ArityError("function '" + name + "' takes 1 argument, got " + std::to_string(count),
                                     start);
                }
                if (!accept(')')) throw ParseError("expected ')'", pos_);
                return make(Call{f->second, arg});
            }
            NodePtr leaf;
            const auto& coords = symbols_.coordinates;
            if (auto it = std::find(coords.begin(), coords.end(), name); it != coords.end()) {
                leaf = make(Variable{static_cast<std::size_t>(it - coords.begin()), name});
            } else if (auto k = symbols_.constants.find(name); k != symbols_.constants.end()) {
                leaf = make(NamedConstant{name, k->second});
            } else if (name == "pi") {
                leaf = make(NamedConstant{name, std::numbers::pi});
            } else if (name == "e") {
                leaf = make(NamedConstant{name, std::numbers::e});
            } else {
                throw UnknownIdentifierError(name, start);
            }
            if (call) throw ArityError("'" + name + "' is not a function", start);
            return leaf;
        }
        throw ParseError(std::string("unexpected '") + c + "'", pos_);
    }

    std::string_view src_;
    const SymbolTable& symbols_;
    std::size_t pos_ = 0;
};

}  // namespace detail

// Immutable parsed expression. Copies share the tree.
class Expr {
public:
    Expr() = default;

    static Expr parse(std::string_view source, const SymbolTable& symbols) {
        Expr e;
        e.root_ = detail::Parser(source, symbols).parse();
        e.dim_ = symbols.dim();
        return e;
    }

    static Expr constant(double value, std::size_t dim) {
        Expr e;
        e.root_ = std::make_shared<const detail::Node>(detail::Node{detail::Number{value}});
        e.dim_ = dim;
        return e;
    }

    std::size_t dim() const { return dim_; }
    bool valid() const { return root_ != nullptr; }

    double eval(std::span<const double> point) const {
        check_point(point);
        return detail::eval_value(*root_, point);
    }

    Jet2 eval_jet2(std::span<const double> point) const {
        check_point(point);
        return detail::eval_jet(*root_, point);
    }

    std::string to_string() const { return root_ ? detail::to_text(*root_) : std::string(); }

private:
    void check_point(std::span<const double> point) const {
        if (!root_) throw Error("evaluating an empty expression");
        if (point.size() != dim_) {
            throw DimensionError("expression over " + std::to_string(dim_) + " coordinates evaluated at a point of size " +
                                 std::to_string(point.size()));
        }
    }

    detail::NodePtr root_;
    std::size_t dim_ = 0;
};

inline Expr parse(std::string_view source, const SymbolTable& symbols) { return Expr::parse(source, symbols); }

inline Jet2 eval_jet2(const Expr& e, std::span<const double> point) { return e.eval_jet2(point); }

}  // namespace sasaki
