// SPDX-License-Identifier: Apache-2.0
#pragma once

// Symbolic scalar expressions over named coordinates and parameters.
//
// Trees are immutable and shared. Builders fold constants and drop neutral
// elements but never rewrite beyond that; identities are certified
// numerically (see sampling.hpp).

#include "edsbt/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace edsbt {

//---------------------------------------------------------------------------//
// Exact rational constants
//---------------------------------------------------------------------------//

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    /// Reduced rational, or nullopt when it does not fit in 64 bits.
    static std::optional<Rational> make(__int128 n, __int128 d) {
        if (d == 0) {
            return std::nullopt;
        }
        if (d < 0) {
            n = -n;
            d = -d;
        }
        __int128 a = n < 0 ? -n : n;
        __int128 b = d;
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        if (a > 1) {
            n /= a;
            d /= a;
        }
        constexpr __int128 lim = INT64_MAX;
        if (n > lim || n < -lim || d > lim) {
            return std::nullopt;
        }
        return Rational{static_cast<std::int64_t>(n), static_cast<std::int64_t>(d)};
    }

    static Rational integer(std::int64_t n) { return Rational{n, 1}; }

    bool is_zero() const noexcept { return num == 0; }
    bool is_one() const noexcept { return num == 1 && den == 1; }
    bool is_integer() const noexcept { return den == 1; }
    bool is_negative() const noexcept { return num < 0; }
    double to_double() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }

    friend bool operator==(const Rational&, const Rational&) = default;
};

inline std::optional<Rational> operator+(Rational a, Rational b) {
    return Rational::make(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
                          static_cast<__int128>(a.den) * b.den);
}
inline std::optional<Rational> operator-(Rational a, Rational b) {
    return Rational::make(static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den,
                          static_cast<__int128>(a.den) * b.den);
}
inline std::optional<Rational> operator*(Rational a, Rational b) {
    return Rational::make(static_cast<__int128>(a.num) * b.num, static_cast<__int128>(a.den) * b.den);
}
inline std::optional<Rational> operator/(Rational a, Rational b) {
    if (b.is_zero()) {
        return std::nullopt;
    }
    return Rational::make(static_cast<__int128>(a.num) * b.den, static_cast<__int128>(a.den) * b.num);
}
inline std::optional<Rational> power(Rational a, int n) {
    if (n < 0) {
        if (a.is_zero()) {
            return std::nullopt;
        }
        auto inv = Rational::make(a.den, a.num);
        return inv ? power(*inv, -n) : std::nullopt;
    }
    Rational r = Rational::integer(1);
    for (int i = 0; i < n; ++i) {
        auto next = r * a;
        if (!next) {
            return std::nullopt;
        }
        r = *next;
    }
    return r;
}

//---------------------------------------------------------------------------//
// Expression tree
//---------------------------------------------------------------------------//

enum class Op : std::uint8_t { constant, variable, parameter, add, sub, mul, div, pow, neg, func };
enum class Fn : std::uint8_t { sin, cos, tan, exp, ln, sqrt, atan };

inline constexpr std::array<std::pair<std::string_view, Fn>, 7> function_names{{
    {"sin", Fn::sin},
    {"cos", Fn::cos},
    {"tan", Fn::tan},
    {"exp", Fn::exp},
    {"ln", Fn::ln},
    {"sqrt", Fn::sqrt},
    {"atan", Fn::atan},
}};

inline std::string_view to_string(Fn f) {
    for (const auto& [name, fn] : function_names) {
        if (fn == f) {
            return name;
        }
    }
    return "?";
}

inline std::optional<Fn> function_from_name(std::string_view name) {
    for (const auto& [n, fn] : function_names) {
        if (n == name) {
            return fn;
        }
    }
    return std::nullopt;
}

struct Node;

/// Immutable handle to a shared expression node.
class Expr {
public:
    Expr();  // the constant 0

    Op op() const noexcept;
    Fn fn() const noexcept;
    const Rational& value() const noexcept;
    const std::string& name() const noexcept;
    int exponent() const noexcept;
    /// Left operand; the sole operand of neg, pow and func nodes.
    const Expr& lhs() const noexcept;
    const Expr& rhs() const noexcept;

    bool is_constant() const noexcept { return op() == Op::constant; }
    bool is_zero() const noexcept { return is_constant() && value().is_zero(); }
    bool is_one() const noexcept { return is_constant() && value().is_one(); }

    // Raw constructors: no folding. The parser uses these.
    static Expr constant(Rational r);
    static Expr constant(std::int64_t n) { return constant(Rational::integer(n)); }
    static Expr variable(std::string name);
    static Expr parameter(std::string name);
    static Expr binary(Op op, Expr a, Expr b);
    static Expr power(Expr base, int n);
    static Expr negate(Expr a);
    static Expr apply(Fn f, Expr a);

    const Node* get() const noexcept { return node_.get(); }

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    friend struct Node;

    std::shared_ptr<const Node> node_;
};

struct Node {
    Op op = Op::constant;
    Fn fn = Fn::sin;
    Rational value{};
    int exponent = 0;
    std::string name;
    Expr lhs;
    Expr rhs;

    // Leaf nodes carry empty children; the default Expr would recurse.
    explicit Node(Op o) : op(o), lhs(nullptr_tag()), rhs(nullptr_tag()) {}

private:
    static Expr nullptr_tag();
};

namespace detail {
inline const std::shared_ptr<const Node>& zero_node() {
    static const std::shared_ptr<const Node> zero = [] {
        auto n = std::make_shared<Node>(Op::constant);
        n->value = Rational::integer(0);
        return std::shared_ptr<const Node>(std::move(n));
    }();
    return zero;
}
}  // namespace detail

// A null Expr is only ever used as the child slot of a leaf.
inline Expr Node::nullptr_tag() { return Expr(std::shared_ptr<const Node>{}); }

inline Expr::Expr() : node_(detail::zero_node()) {}

inline Op Expr::op() const noexcept { return node_->op; }
inline Fn Expr::fn() const noexcept { return node_->fn; }
inline const Rational& Expr::value() const noexcept { return node_->value; }
inline const std::string& Expr::name() const noexcept { return node_->name; }
inline int Expr::exponent() const noexcept { return node_->exponent; }
inline const Expr& Expr::lhs() const noexcept { return node_->lhs; }
inline const Expr& Expr::rhs() const noexcept { return node_->rhs; }

inline Expr Expr::constant(Rational r) {
    auto n = std::make_shared<Node>(Op::constant);
    n->value = r;
    return Expr(std::move(n));
}
inline Expr Expr::variable(std::string name) {
    auto n = std::make_shared<Node>(Op::variable);
    n->name = std::move(name);
    return Expr(std::move(n));
}
inline Expr Expr::parameter(std::string name) {
    auto n = std::make_shared<Node>(Op::parameter);
    n->name = std::move(name);
    return Expr(std::move(n));
}
inline Expr Expr::binary(Op op, Expr a, Expr b) {
    auto n = std::make_shared<Node>(op);
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return Expr(std::move(n));
}
inline Expr Expr::power(Expr base, int e) {
    auto n = std::make_shared<Node>(Op::pow);
    n->lhs = std::move(base);
    n->exponent = e;
    return Expr(std::move(n));
}
inline Expr Expr::negate(Expr a) {
    auto n = std::make_shared<Node>(Op::neg);
    n->lhs = std::move(a);
    return Expr(std::move(n));
}
inline Expr Expr::apply(Fn f, Expr a) {
    auto n = std::make_shared<Node>(Op::func);
    n->fn = f;
    n->lhs = std::move(a);
    return Expr(std::move(n));
}

/// Structural equality (same tree shape, names and exact constants).
inline bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.get() == b.get()) {
        return true;
    }
    if (a.op() != b.op()) {
        return false;
    }
    switch (a.op()) {
        case Op::constant: return a.value() == b.value();
        case Op::variable:
        case Op::parameter: return a.name() == b.name();
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div:
            return structurally_equal(a.lhs(), b.lhs()) && structurally_equal(a.rhs(), b.rhs());
        case Op::pow: return a.exponent() == b.exponent() && structurally_equal(a.lhs(), b.lhs());
        case Op::neg: return structurally_equal(a.lhs(), b.lhs());
        case Op::func: return a.fn() == b.fn() && structurally_equal(a.lhs(), b.lhs());
    }
    return false;
}

inline bool depends_on(const Expr& e, const std::string& name) {
    switch (e.op()) {
        case Op::constant: return false;
        case Op::variable:
        case Op::parameter: return e.name() == name;
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div: return depends_on(e.lhs(), name) || depends_on(e.rhs(), name);
        case Op::pow:
        case Op::neg:
        case Op::func: return depends_on(e.lhs(), name);
    }
    return false;
}

/// Names of all variables and parameters occurring in `e`.
inline void collect_names(const Expr& e, std::set<std::string>& out) {
    switch (e.op()) {
        case Op::constant: return;
        case Op::variable:
        case Op::parameter: out.insert(e.name()); return;
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div:
            collect_names(e.lhs(), out);
            collect_names(e.rhs(), out);
            return;
        case Op::pow:
        case Op::neg:
        case Op::func: collect_names(e.lhs(), out); return;
    }
}

inline std::size_t node_count(const Expr& e) {
    switch (e.op()) {
        case Op::constant:
        case Op::variable:
        case Op::parameter: return 1;
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div: return 1 + node_count(e.lhs()) + node_count(e.rhs());
        default: return 1 + node_count(e.lhs());
    }
}

//---------------------------------------------------------------------------//
// Folding builders
//---------------------------------------------------------------------------//

inline Expr constant(std::int64_t n) { return Expr::constant(n); }
inline Expr constant(std::int64_t num, std::int64_t den) {
    auto r = Rational::make(num, den);
    if (!r) {
        throw Error("invalid rational constant");
    }
    return Expr::constant(*r);
}
inline Expr var(std::string name) { return Expr::variable(std::move(name)); }
inline Expr param(std::string name) { return Expr::parameter(std::move(name)); }

inline Expr operator-(const Expr& a) {
    if (a.is_constant()) {
        if (auto r = Rational::make(-static_cast<__int128>(a.value().num), a.value().den)) {
            return Expr::constant(*r);
        }
    }
    if (a.op() == Op::neg) {
        return a.lhs();
    }
    return Expr::negate(a);
}

inline Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) {
        if (auto r = a.value() + b.value()) {
            return Expr::constant(*r);
        }
    }
    if (a.is_zero()) {
        return b;
    }
    if (b.is_zero()) {
        return a;
    }
    return Expr::binary(Op::add, a, b);
}

inline Expr operator-(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) {
        if (auto r = a.value() - b.value()) {
            return Expr::constant(*r);
        }
    }
    if (b.is_zero()) {
        return a;
    }
    if (a.is_zero()) {
        return -b;
    }
    return Expr::binary(Op::sub, a, b);
}

inline Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) {
        if (auto r = a.value() * b.value()) {
            return Expr::constant(*r);
        }
    }
    if (a.is_zero() || b.is_zero()) {
        return Expr{};
    }
    if (a.is_one()) {
        return b;
    }
    if (b.is_one()) {
        return a;
    }
    if (a.is_constant() && a.value() == Rational::integer(-1)) {
        return -b;
    }
    if (b.is_constant() && b.value() == Rational::integer(-1)) {
        return -a;
    }
    return Expr::binary(Op::mul, a, b);
}

inline Expr operator/(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant() && !b.is_zero()) {
        if (auto r = a.value() / b.value()) {
            return Expr::constant(*r);
        }
    }
    if (a.is_zero() && !b.is_zero()) {
        return Expr{};
    }
    if (b.is_one()) {
        return a;
    }
    return Expr::binary(Op::div, a, b);
}

inline Expr pow(const Expr& base, int n) {
    if (n == 0) {
        return constant(1);
    }
    if (n == 1) {
        return base;
    }
    if (base.is_constant() && std::abs(n) <= 64) {
        if (auto r = power(base.value(), n)) {
            return Expr::constant(*r);
        }
    }
    return Expr::power(base, n);
}

inline Expr apply(Fn f, const Expr& a) {
    if (a.is_zero()) {
        switch (f) {
            case Fn::sin:
            case Fn::tan:
            case Fn::atan:
            case Fn::sqrt: return Expr{};
            case Fn::cos:
            case Fn::exp: return constant(1);
            case Fn::ln: break;
        }
    }
    if (f == Fn::ln && a.is_one()) {
        return Expr{};
    }
    return Expr::apply(f, a);
}

inline Expr operator+(const Expr& a, std::int64_t b) { return a + constant(b); }
inline Expr operator+(std::int64_t a, const Expr& b) { return constant(a) + b; }
inline Expr operator-(const Expr& a, std::int64_t b) { return a - constant(b); }
inline Expr operator-(std::int64_t a, const Expr& b) { return constant(a) - b; }
inline Expr operator*(std::int64_t a, const Expr& b) { return constant(a) * b; }
inline Expr operator*(const Expr& a, std::int64_t b) { return a * constant(b); }
inline Expr operator/(const Expr& a, std::int64_t b) { return a / constant(b); }
inline Expr operator/(std::int64_t a, const Expr& b) { return constant(a) / b; }

namespace sym {
inline Expr sin(const Expr& a) { return apply(Fn::sin, a); }
inline Expr cos(const Expr& a) { return apply(Fn::cos, a); }
inline Expr tan(const Expr& a) { return apply(Fn::tan, a); }
inline Expr exp(const Expr& a) { return apply(Fn::exp, a); }
inline Expr ln(const Expr& a) { return apply(Fn::ln, a); }
inline Expr sqrt(const Expr& a) { return apply(Fn::sqrt, a); }
inline Expr atan(const Expr& a) { return apply(Fn::atan, a); }
}  // namespace sym

/// Replaces every variable or parameter called `name` by `with`.
inline Expr substitute(const Expr& e, const std::string& name, const Expr& with) {
    switch (e.op()) {
        case Op::constant: return e;
        case Op::variable:
        case Op::parameter: return e.name() == name ? with : e;
        case Op::add: return substitute(e.lhs(), name, with) + substitute(e.rhs(), name, with);
        case Op::sub: return substitute(e.lhs(), name, with) - substitute(e.rhs(), name, with);
        case Op::mul: return substitute(e.lhs(), name, with) * substitute(e.rhs(), name, with);
        case Op::div: return substitute(e.lhs(), name, with) / substitute(e.rhs(), name, with);
        case Op::pow: return pow(substitute(e.lhs(), name, with), e.exponent());
        case Op::neg: return -substitute(e.lhs(), name, with);
        case Op::func: return apply(e.fn(), substitute(e.lhs(), name, with));
    }
    return e;
}

//---------------------------------------------------------------------------//
// Differentiation
//---------------------------------------------------------------------------//

/// Exact partial derivative with respect to the coordinate `var`.
/// Parameters are constants.
inline Expr differentiate(const Expr& e, const std::string& var) {
    if (!depends_on(e, var)) {
        return Expr{};
    }
    const Expr& a = e.lhs();
    switch (e.op()) {
        case Op::constant:
        case Op::parameter: return Expr{};
        case Op::variable: return e.name() == var ? constant(1) : Expr{};
        case Op::add: return differentiate(a, var) + differentiate(e.rhs(), var);
        case Op::sub: return differentiate(a, var) - differentiate(e.rhs(), var);
        case Op::mul: {
            const Expr& b = e.rhs();
            return differentiate(a, var) * b + a * differentiate(b, var);
        }
        case Op::div: {
            const Expr& b = e.rhs();
            if (!depends_on(b, var)) {
                return differentiate(a, var) / b;
            }
            return (differentiate(a, var) * b - a * differentiate(b, var)) / pow(b, 2);
        }
        case Op::pow: {
            const int n = e.exponent();
            return constant(n) * pow(a, n - 1) * differentiate(a, var);
        }
        case Op::neg: return -differentiate(a, var);
        case Op::func: {
            const Expr da = differentiate(a, var);
            switch (e.fn()) {
                case Fn::sin: return sym::cos(a) * da;
                case Fn::cos: return -(sym::sin(a) * da);
                case Fn::tan: return da / pow(sym::cos(a), 2);
                case Fn::exp: return e * da;
                case Fn::ln: return da / a;
                case Fn::sqrt: return da / (constant(2) * e);
                case Fn::atan: return da / (constant(1) + pow(a, 2));
            }
        }
    }
    return Expr{};
}

//---------------------------------------------------------------------------//
// Numeric evaluation
//---------------------------------------------------------------------------//

/// Values of coordinates and parameters at one point.
struct Point {
    std::map<std::string, double> coordinates;
    std::map<std::string, double> parameters;

    std::optional<double> lookup(const std::string& name) const {
        if (auto it = coordinates.find(name); it != coordinates.end()) {
            return it->second;
        }
        if (auto it = parameters.find(name); it != parameters.end()) {
            return it->second;
        }
        return std::nullopt;
    }
};

namespace detail {

// guard == 0 means only the mathematical domain is enforced.
inline double checked_divide(double num, double den, double guard) {
    if (den == 0.0 || std::abs(den) < guard) {
        throw DomainError("division by (near) zero");
    }
    return num / den;
}

inline double checked_power(double base, int n, double guard) {
    if (n < 0) {
        return checked_divide(1.0, std::pow(base, -n), guard > 0 ? std::pow(guard, -n) : 0.0);
    }
    return std::pow(base, n);
}

inline double apply_function(Fn f, double x, double guard) {
    switch (f) {
        case Fn::sin: return std::sin(x);
        case Fn::cos: return std::cos(x);
        case Fn::tan: {
            const double c = std::cos(x);
            return checked_divide(std::sin(x), c, guard);
        }
        case Fn::exp: return std::exp(x);
        case Fn::ln:
            if (!(x > 0.0) || x < guard) {
                throw DomainError("ln of non-positive argument");
            }
            return std::log(x);
        case Fn::sqrt:
            if (x < 0.0 || (guard > 0.0 && x < guard)) {
                throw DomainError("sqrt of negative argument");
            }
            return std::sqrt(x);
        case Fn::atan: return std::atan(x);
    }
    return 0.0;
}

inline double finite_or_throw(double v) {
    if (!std::isfinite(v)) {
        throw DomainError("non-finite intermediate value");
    }
    return v;
}

}  // namespace detail

/// Tree-walking evaluation. A positive `guard` rejects denominators and
/// ln/sqrt arguments smaller than it in absolute value.
inline double evaluate(const Expr& e, const Point& pt, double guard = 0.0) {
    switch (e.op()) {
        case Op::constant: return e.value().to_double();
        case Op::variable:
        case Op::parameter: {
            auto v = pt.lookup(e.name());
            if (!v) {
                throw Error("unbound name '" + e.name() + "'");
            }
            return *v;
        }
        case Op::add: return detail::finite_or_throw(evaluate(e.lhs(), pt, guard) + evaluate(e.rhs(), pt, guard));
        case Op::sub: return detail::finite_or_throw(evaluate(e.lhs(), pt, guard) - evaluate(e.rhs(), pt, guard));
        case Op::mul: return detail::finite_or_throw(evaluate(e.lhs(), pt, guard) * evaluate(e.rhs(), pt, guard));
        case Op::div:
            return detail::finite_or_throw(
                detail::checked_divide(evaluate(e.lhs(), pt, guard), evaluate(e.rhs(), pt, guard), guard));
        case Op::pow:
            return detail::finite_or_throw(detail::checked_power(evaluate(e.lhs(), pt, guard), e.exponent(), guard));
        case Op::neg: return -evaluate(e.lhs(), pt, guard);
        case Op::func:
            return detail::finite_or_throw(detail::apply_function(e.fn(), evaluate(e.lhs(), pt, guard), guard));
    }
    return 0.0;
}

/// Postfix program with names bound to slot indices, for hot loops.
class CompiledExpr {
public:
    CompiledExpr() = default;

    CompiledExpr(const Expr& e, std::span<const std::string> slots) {
        int depth = 0;
        emit(e, slots, depth);
    }

    double operator()(std::span<const double> values, double guard = 0.0) const {
        std::array<double, 64> small{};
        std::vector<double> large;
        double* stack = small.data();
        if (max_depth_ > static_cast<int>(small.size())) {
            large.resize(static_cast<std::size_t>(max_depth_));
            stack = large.data();
        }
        int top = -1;
        for (const Instr& in : code_) {
            switch (in.op) {
                case Op::constant: stack[++top] = in.value; break;
                case Op::variable:
                case Op::parameter: stack[++top] = values[static_cast<std::size_t>(in.slot)]; break;
                case Op::add:
                    --top;
                    stack[top] = detail::finite_or_throw(stack[top] + stack[top + 1]);
                    break;
                case Op::sub:
                    --top;
                    stack[top] = detail::finite_or_throw(stack[top] - stack[top + 1]);
                    break;
                case Op::mul:
                    --top;
                    stack[top] = detail::finite_or_throw(stack[top] * stack[top + 1]);
                    break;
                case Op::div:
                    --top;
                    stack[top] = detail::finite_or_throw(detail::checked_divide(stack[top], stack[top + 1], guard));
                    break;
                case Op::pow:
                    stack[top] = detail::finite_or_throw(detail::checked_power(stack[top], in.exponent, guard));
                    break;
                case Op::neg: stack[top] = -stack[top]; break;
                case Op::func:
                    stack[top] = detail::finite_or_throw(detail::apply_function(in.fn, stack[top], guard));
                    break;
            }
        }
        return top == 0 ? stack[0] : 0.0;
    }

    bool empty() const noexcept { return code_.empty(); }

private:
    struct Instr {
        Op op;
        Fn fn;
        int slot;
        int exponent;
        double value;
    };

    void emit(const Expr& e, std::span<const std::string> slots, int& depth) {
        auto push = [&](Instr in) {
            code_.push_back(in);
        };
        switch (e.op()) {
            case Op::constant:
                push({Op::constant, Fn::sin, 0, 0, e.value().to_double()});
                max_depth_ = std::max(max_depth_, ++depth);
                return;
            case Op::variable:
            case Op::parameter: {
                int slot = -1;
                for (std::size_t i = 0; i < slots.size(); ++i) {
                    if (slots[i] == e.name()) {
                        slot = static_cast<int>(i);
                        break;
                    }
                }
                if (slot < 0) {
                    throw Error("unbound name '" + e.name() + "'");
                }
                push({e.op(), Fn::sin, slot, 0, 0.0});
                max_depth_ = std::max(max_depth_, ++depth);
                return;
            }
            case Op::add:
            case Op::sub:
            case Op::mul:
            case Op::div:
                emit(e.lhs(), slots, depth);
                emit(e.rhs(), slots, depth);
                push({e.op(), Fn::sin, 0, 0, 0.0});
                --depth;
                return;
            case Op::pow:
            case Op::neg:
            case Op::func:
                emit(e.lhs(), slots, depth);
                push({e.op(), e.fn(), 0, e.exponent(), 0.0});
                return;
        }
    }

    std::vector<Instr> code_;
    int max_depth_ = 0;
};

//---------------------------------------------------------------------------//
// Rendering
//---------------------------------------------------------------------------//

namespace detail {

enum Precedence : int { prec_sum = 1, prec_product = 2, prec_unary = 3, prec_power = 4, prec_atom = 5 };

// Digits after the decimal point needed to print r exactly, or -1.
inline int decimal_places(const Rational& r) {
    std::int64_t d = r.den;
    int twos = 0;
    int fives = 0;
    while (d % 2 == 0) {
        d /= 2;
        ++twos;
    }
    while (d % 5 == 0) {
        d /= 5;
        ++fives;
    }
    if (d != 1) {
        return -1;
    }
    return std::max(twos, fives);
}

inline std::string int128_to_string(__int128 v) {
    if (v == 0) {
        return "0";
    }
    std::string s;
    while (v > 0) {
        s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    return s;
}

// Renders |r| and reports the precedence of the resulting text.
inline std::pair<std::string, int> render_constant(const Rational& r) {
    const bool negative = r.is_negative();
    const __int128 num = negative ? -static_cast<__int128>(r.num) : r.num;
    const int places = decimal_places(r);
    std::string body;
    int prec = prec_atom;
    if (places >= 0 && places <= 30) {
        __int128 scale = 1;
        for (int i = 0; i < places; ++i) {
            scale *= 10;
        }
        const __int128 scaled = num * (scale / r.den);
        body = int128_to_string(scaled / scale);
        if (places > 0) {
            std::string frac = int128_to_string(scaled % scale);
            frac.insert(frac.begin(), static_cast<std::size_t>(places) - frac.size(), '0');
            body += "." + frac;
        }
    } else {
        body = int128_to_string(num) + "/" + int128_to_string(r.den);
        prec = prec_product;
    }
    if (negative) {
        return {"-" + body, std::min(prec, static_cast<int>(prec_unary))};
    }
    return {body, prec};
}

inline int precedence(const Expr& e) {
    switch (e.op()) {
        case Op::constant: return render_constant(e.value()).second;
        case Op::variable:
        case Op::parameter:
        case Op::func: return prec_atom;
        case Op::add:
        case Op::sub: return prec_sum;
        case Op::mul:
        case Op::div: return prec_product;
        case Op::neg: return prec_unary;
        case Op::pow: return prec_power;
    }
    return prec_atom;
}

inline void render_into(const Expr& e, std::string& out, int min_prec) {
    const int prec = precedence(e);
    const bool paren = prec < min_prec;
    if (paren) {
        out += '(';
    }
    switch (e.op()) {
        case Op::constant: out += render_constant(e.value()).first; break;
        case Op::variable:
        case Op::parameter: out += e.name(); break;
        case Op::add:
        case Op::sub:
            render_into(e.lhs(), out, prec_sum);
            out += e.op() == Op::add ? '+' : '-';
            render_into(e.rhs(), out, prec_product);
            break;
        case Op::mul:
        case Op::div:
            render_into(e.lhs(), out, prec_product);
            out += e.op() == Op::mul ? '*' : '/';
            render_into(e.rhs(), out, prec_unary);
            break;
        case Op::neg:
            out += '-';
            render_into(e.lhs(), out, prec_unary);
            break;
        case Op::pow:
            render_into(e.lhs(), out, prec_atom);
            out += '^';
            out += std::to_string(e.exponent());
            break;
        case Op::func:
            out += to_string(e.fn());
            out += '(';
            render_into(e.lhs(), out, prec_sum);
            out += ')';
            break;
    }
    if (paren) {
        out += ')';
    }
}

}  // namespace detail

/// Text in the input grammar with minimal parentheses.
inline std::string render(const Expr& e) {
    std::string out;
    detail::render_into(e, out, detail::prec_sum);
    return out;
}

//---------------------------------------------------------------------------//
// Parsing
//---------------------------------------------------------------------------//

/// Identifiers an expression may refer to.
struct Names {
    std::vector<std::string> coordinates;
    std::vector<std::string> parameters;

    bool is_coordinate(std::string_view n) const {
        return std::find(coordinates.begin(), coordinates.end(), n) != coordinates.end();
    }
    bool is_parameter(std::string_view n) const {
        return std::find(parameters.begin(), parameters.end(), n) != parameters.end();
    }
};

namespace detail {

class Parser {
public:
    Parser(std::string_view text, const Names& names) : text_(text), names_(names) {}

    Expr parse() {
        Expr e = expr();
        skip_space();
        if (pos_ < text_.size()) {
            fail(std::string("unexpected character '") + text_[pos_] + "'");
        }
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_ + 1); }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= text_.size()) {
                fail(std::string("expected '") + c + "' before end of input");
            }
            fail(std::string("expected '") + c + "'");
        }
    }

    Expr expr() {
        Expr lhs = term();
        for (;;) {
            if (accept('+')) {
                lhs = lhs + term();
            } else if (accept('-')) {
                lhs = lhs - term();
            } else {
                return lhs;
            }
        }
    }

    Expr term() {
        Expr lhs = factor();
        for (;;) {
            if (accept('*')) {
                lhs = lhs * factor();
            } else if (accept('/')) {
                lhs = lhs / factor();
            } else {
                return lhs;
            }
        }
    }

    Expr factor() {
        if (accept('-')) {
            return -factor();
        }
        Expr b = base();
        if (accept('^')) {
            return edsbt::pow(b, exponent());
        }
        return b;
    }

    int exponent() {
        skip_space();
        const bool negative = accept('-');
        skip_space();
        const std::size_t start = pos_;
        long long n = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            n = n * 10 + (text_[pos_] - '0');
            if (n > 1024) {
                fail("exponent too large");
            }
            ++pos_;
        }
        if (pos_ == start) {
            fail("expected integer exponent");
        }
        if (negative) {
            n = -n;
        }
        if (accept('^')) {
            const int rest = exponent();
            if (rest < 0) {
                fail("negative exponent in exponent chain");
            }
            long long v = 1;
            for (int i = 0; i < rest; ++i) {
                v *= n;
                if (v > 1024 || v < -1024) {
                    fail("exponent too large");
                }
            }
            n = v;
        }
        return static_cast<int>(n);
    }

    Expr base() {
        skip_space();
        if (pos_ >= text_.size()) {
            fail("unexpected end of input");
        }
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            return number();
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
            }
            std::string ident(text_.substr(start, pos_ - start));
            if (auto f = function_from_name(ident)) {
                expect('(');
                Expr arg = expr();
                expect(')');
                return edsbt::apply(*f, arg);
            }
            if (names_.is_coordinate(ident)) {
                return Expr::variable(ident);
            }
            if (names_.is_parameter(ident)) {
                return Expr::parameter(ident);
            }
            throw UndeclaredIdentifier(ident, start + 1);
        }
        if (accept('(')) {
            Expr inner = expr();
            expect(')');
            return inner;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    Expr number() {
        const std::size_t start = pos_;
        __int128 num = 0;
        int digits = 0;
        int places = 0;
        bool in_fraction = false;
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                num = num * 10 + (c - '0');
                if (++digits > 18) {
                    throw ParseError("numeric literal too long", start + 1);
                }
                if (in_fraction) {
                    ++places;
                }
                ++pos_;
            } else if (c == '.' && !in_fraction) {
                in_fraction = true;
                ++pos_;
                if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                    fail("expected digits after '.'");
                }
            } else {
                break;
            }
        }
        __int128 den = 1;
        for (int i = 0; i < places; ++i) {
            den *= 10;
        }
        auto r = Rational::make(num, den);
        if (!r) {
            throw ParseError("numeric literal out of range", start + 1);
        }
        return Expr::constant(*r);
    }

    std::string_view text_;
    const Names& names_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses `text` against the declared coordinates and parameters.
///
/// Precedence: `^` > unary `-` > `*` `/` > `+` `-`; binary operators are
/// left-associative and `^` takes an integer exponent.
inline Expr parse(std::string_view text, const Names& names) { return detail::Parser(text, names).parse(); }

}  // namespace edsbt
