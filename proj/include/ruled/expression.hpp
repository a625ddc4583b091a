#ifndef RULED_EXPRESSION_HPP
#define RULED_EXPRESSION_HPP

// Arithmetic expressions in the single variable `u`.
//
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := "-" factor | power
//   power  := atom ("^" factor)?
//   atom   := number | "u" | "pi" | "e" | func "(" expr ")" | "(" expr ")"
//   func   := "sin" | "cos" | "tan" | "exp" | "log" | "sqrt"
//
// "^" binds tighter than unary minus and is right-associative, so
// "-u^2" is -(u^2) and "2^-1" is 0.5.

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ruled/error.hpp"
#include "ruled/format.hpp"

namespace ruled::expr {

enum class Func { Sin, Cos, Tan, Exp, Log, Sqrt };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class NamedConstant { Pi, E };

inline const char* func_name(Func f)
{
    switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Tan: return "tan";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sqrt: return "sqrt";
    }
    return "?";
}

inline char op_symbol(BinaryOp op)
{
    switch (op) {
    case BinaryOp::Add: return '+';
    case BinaryOp::Sub: return '-';
    case BinaryOp::Mul: return '*';
    case BinaryOp::Div: return '/';
    case BinaryOp::Pow: return '^';
    }
    return '?';
}

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Constant {
    double value;
};
struct Variable {};
struct Named {
    NamedConstant which;
};
struct Negate {
    NodePtr operand;
};
struct Call {
    Func func;
    NodePtr arg;
};
struct Binary {
    BinaryOp op;
    NodePtr lhs;
    NodePtr rhs;
};

struct Node {
    std::variant<Constant, Variable, Named, Negate, Call, Binary> data;
};

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline NodePtr make(auto&& alternative)
{
    return std::make_shared<const Node>(Node{std::forward<decltype(alternative)>(alternative)});
}

inline bool equal(const NodePtr& a, const NodePtr& b)
{
    if (a == b) {
        return true;
    }
    if (!a || !b || a->data.index() != b->data.index()) {
        return false;
    }
    return std::visit(
        overloaded{
            [&](const Constant& x) {
                const auto& y = std::get<Constant>(b->data);
                // bitwise-equivalent comparison; NaN never appears in parsed trees
                return x.value == y.value && std::signbit(x.value) == std::signbit(y.value);
            },
            [](const Variable&) { return true; },
            [&](const Named& x) { return x.which == std::get<Named>(b->data).which; },
            [&](const Negate& x) { return equal(x.operand, std::get<Negate>(b->data).operand); },
            [&](const Call& x) {
                const auto& y = std::get<Call>(b->data);
                return x.func == y.func && equal(x.arg, y.arg);
            },
            [&](const Binary& x) {
                const auto& y = std::get<Binary>(b->data);
                return x.op == y.op && equal(x.lhs, y.lhs) && equal(x.rhs, y.rhs);
            },
        },
        a->data);
}

inline double checked(double value, const char* what)
{
    if (!std::isfinite(value)) {
        throw EvaluationError(std::string("non-finite result in ") + what);
    }
    return value;
}

inline double evaluate(const Node& node, double u)
{
    return std::visit(
        overloaded{
            [](const Constant& c) { return c.value; },
            [u](const Variable&) { return u; },
            [](const Named& n) {
                return n.which == NamedConstant::Pi ? std::numbers::pi : std::numbers::e;
            },
            [u](const Negate& n) { return -evaluate(*n.operand, u); },
            [u](const Call& c) {
                const double x = evaluate(*c.arg, u);
                switch (c.func) {
                case Func::Sin: return std::sin(x);
                case Func::Cos: return std::cos(x);
                case Func::Tan: return checked(std::tan(x), "tan");
                case Func::Exp: return checked(std::exp(x), "exp");
                case Func::Log:
                    if (!(x > 0.0)) {
                        throw EvaluationError("log of non-positive argument " + format_double(x));
                    }
                    return std::log(x);
                case Func::Sqrt:
                    if (x < 0.0) {
                        throw EvaluationError("sqrt of negative argument " + format_double(x));
                    }
                    return std::sqrt(x);
                }
                return 0.0;
            },
            [u](const Binary& b) {
                const double x = evaluate(*b.lhs, u);
                const double y = evaluate(*b.rhs, u);
                switch (b.op) {
                case BinaryOp::Add: return checked(x + y, "addition");
                case BinaryOp::Sub: return checked(x - y, "subtraction");
                case BinaryOp::Mul: return checked(x * y, "multiplication");
                case BinaryOp::Div:
                    if (y == 0.0) {
                        throw EvaluationError("division by zero");
                    }
                    return checked(x / y, "division");
                case BinaryOp::Pow: return checked(std::pow(x, y), "power");
                }
                return 0.0;
            },
        },
        node.data);
}

inline bool depends_on_u(const Node& node)
{
    return std::visit(overloaded{
                          [](const Constant&) { return false; },
                          [](const Variable&) { return true; },
                          [](const Named&) { return false; },
                          [](const Negate& n) { return depends_on_u(*n.operand); },
                          [](const Call& c) { return depends_on_u(*c.arg); },
                          [](const Binary& b) { return depends_on_u(*b.lhs) || depends_on_u(*b.rhs); },
                      },
                      node.data);
}

inline void print(const Node& node, std::string& out)
{
    std::visit(overloaded{
                   [&](const Constant& c) {
                       if (c.value < 0.0) {
                           out += '(';
                           out += format_double(c.value);
                           out += ')';
                       } else {
                           out += format_double(c.value);
                       }
                   },
                   [&](const Variable&) { out += 'u'; },
                   [&](const Named& n) { out += n.which == NamedConstant::Pi ? "pi" : "e"; },
                   [&](const Negate& n) {
                       out += "(-";
                       print(*n.operand, out);
                       out += ')';
                   },
                   [&](const Call& c) {
                       out += func_name(c.func);
                       out += '(';
                       print(*c.arg, out);
                       out += ')';
                   },
                   [&](const Binary& b) {
                       out += '(';
                       print(*b.lhs, out);
                       out += ' ';
                       out += op_symbol(b.op);
                       out += ' ';
                       print(*b.rhs, out);
                       out += ')';
                   },
               },
               node.data);
}

// Constructors with light constant folding; they keep derivative trees small.

inline const Constant* as_constant(const NodePtr& n)
{
    return std::get_if<Constant>(&n->data);
}

inline bool is_value(const NodePtr& n, double v)
{
    const auto* c = as_constant(n);
    return c && c->value == v;
}

inline NodePtr constant(double v) { return make(Constant{v}); }

inline NodePtr negate(NodePtr a)
{
    if (const auto* c = as_constant(a)) {
        return constant(-c->value);
    }
    if (const auto* n = std::get_if<Negate>(&a->data)) {
        return n->operand;
    }
    return make(Negate{std::move(a)});
}

inline NodePtr add(NodePtr a, NodePtr b)
{
    if (is_value(a, 0.0)) return b;
    if (is_value(b, 0.0)) return a;
    if (as_constant(a) && as_constant(b)) return constant(as_constant(a)->value + as_constant(b)->value);
    return make(Binary{BinaryOp::Add, std::move(a), std::move(b)});
}

inline NodePtr sub(NodePtr a, NodePtr b)
{
    if (is_value(b, 0.0)) return a;
    if (is_value(a, 0.0)) return negate(std::move(b));
    if (as_constant(a) && as_constant(b)) return constant(as_constant(a)->value - as_constant(b)->value);
    return make(Binary{BinaryOp::Sub, std::move(a), std::move(b)});
}

inline NodePtr mul(NodePtr a, NodePtr b)
{
    if (is_value(a, 0.0) || is_value(b, 0.0)) return constant(0.0);
    if (is_value(a, 1.0)) return b;
    if (is_value(b, 1.0)) return a;
    if (is_value(a, -1.0)) return negate(std::move(b));
    if (is_value(b, -1.0)) return negate(std::move(a));
    if (as_constant(a) && as_constant(b)) return constant(as_constant(a)->value * as_constant(b)->value);
    return make(Binary{BinaryOp::Mul, std::move(a), std::move(b)});
}

inline NodePtr div(NodePtr a, NodePtr b)
{
    if (is_value(a, 0.0)) return constant(0.0);
    if (is_value(b, 1.0)) return a;
    return make(Binary{BinaryOp::Div, std::move(a), std::move(b)});
}

inline NodePtr pow(NodePtr a, NodePtr b)
{
    if (is_value(b, 1.0)) return a;
    if (is_value(b, 0.0)) return constant(1.0);
    return make(Binary{BinaryOp::Pow, std::move(a), std::move(b)});
}

inline NodePtr call(Func f, NodePtr a) { return make(Call{f, std::move(a)}); }

inline NodePtr differentiate(const NodePtr& node)
{
    return std::visit(
        overloaded{
            [](const Constant&) { return constant(0.0); },
            [](const Variable&) { return constant(1.0); },
            [](const Named&) { return constant(0.0); },
            [](const Negate& n) { return negate(differentiate(n.operand)); },
            [&node](const Call& c) {
                const NodePtr inner = differentiate(c.arg);
                if (is_value(inner, 0.0)) {
                    return constant(0.0);
                }
                NodePtr outer;
                switch (c.func) {
                case Func::Sin: outer = call(Func::Cos, c.arg); break;
                case Func::Cos: outer = negate(call(Func::Sin, c.arg)); break;
                case Func::Tan: {
                    // 1/cos^2
                    NodePtr cosine = call(Func::Cos, c.arg);
                    outer = div(constant(1.0), mul(cosine, cosine));
                    break;
                }
                case Func::Exp: outer = node; break;
                case Func::Log: outer = div(constant(1.0), c.arg); break;
                case Func::Sqrt: outer = div(constant(0.5), node); break;
                }
                return mul(outer, inner);
            },
            [&node](const Binary& b) {
                const NodePtr da = differentiate(b.lhs);
                const NodePtr db = differentiate(b.rhs);
                switch (b.op) {
                case BinaryOp::Add: return add(da, db);
                case BinaryOp::Sub: return sub(da, db);
                case BinaryOp::Mul: return add(mul(da, b.rhs), mul(b.lhs, db));
                case BinaryOp::Div:
                    return div(sub(mul(da, b.rhs), mul(b.lhs, db)), mul(b.rhs, b.rhs));
                case BinaryOp::Pow:
                    if (!depends_on_u(*b.rhs)) {
                        // b * a^(b-1) * a'
                        return mul(mul(b.rhs, pow(b.lhs, sub(b.rhs, constant(1.0)))), da);
                    }
                    if (!depends_on_u(*b.lhs)) {
                        // a^b * log(a) * b'
                        return mul(mul(node, call(Func::Log, b.lhs)), db);
                    }
                    // a^b * (b' log a + b a'/a)
                    return mul(node, add(mul(db, call(Func::Log, b.lhs)), div(mul(b.rhs, da), b.lhs)));
                }
                return constant(0.0);
            },
        },
        node->data);
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    NodePtr parse()
    {
        skip_space();
        if (pos_ == text_.size()) {
            throw ParseError(ParseError::Kind::Syntax, "empty expression", pos_);
        }
        NodePtr root = parse_expr();
        skip_space();
        if (pos_ != text_.size()) {
            throw ParseError(ParseError::Kind::Syntax,
                             std::string("unexpected '") + text_[pos_] + "'", pos_);
        }
        return root;
    }

private:
    void skip_space()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool accept(char c)
    {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail_here(const std::string& what)
    {
        if (pos_ >= text_.size()) {
            throw ParseError(ParseError::Kind::Syntax, what + ", got end of input", pos_);
        }
        throw ParseError(ParseError::Kind::Syntax, what + ", got '" + text_[pos_] + "'", pos_);
    }

    NodePtr parse_expr()
    {
        NodePtr lhs = parse_term();
        for (;;) {
            if (accept('+')) {
                lhs = make(Binary{BinaryOp::Add, lhs, parse_term()});
            } else if (accept('-')) {
                lhs = make(Binary{BinaryOp::Sub, lhs, parse_term()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term()
    {
        NodePtr lhs = parse_factor();
        for (;;) {
            if (accept('*')) {
                lhs = make(Binary{BinaryOp::Mul, lhs, parse_factor()});
            } else if (accept('/')) {
                lhs = make(Binary{BinaryOp::Div, lhs, parse_factor()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_factor()
    {
        if (accept('-')) {
            return make(Negate{parse_factor()});
        }
        NodePtr base = parse_atom();
        if (accept('^')) {
            return make(Binary{BinaryOp::Pow, base, parse_factor()});
        }
        return base;
    }

    NodePtr parse_atom()
    {
        skip_space();
        if (pos_ >= text_.size()) {
            fail_here("expected operand");
        }
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return parse_number();
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            return parse_identifier();
        }
        if (accept('(')) {
            NodePtr inner = parse_expr();
            if (!accept(')')) {
                fail_here("expected ')'");
            }
            return inner;
        }
        fail_here("expected operand");
    }

    NodePtr parse_number()
    {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t mantissa = digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            mantissa += digits();
        }
        if (mantissa == 0) {
            throw ParseError(ParseError::Kind::Syntax, "malformed number", start);
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            // Only an exponent if digits follow; otherwise leave 'e' for the caller.
            std::size_t look = pos_ + 1;
            if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) {
                ++look;
            }
            if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
                pos_ = look;
                digits();
            }
        }
        double value = 0.0;
        const char* first = text_.data() + start;
        const char* last = text_.data() + pos_;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec == std::errc::result_out_of_range) {
            throw ParseError(ParseError::Kind::Syntax, "number out of range", start);
        }
        if (ec != std::errc{} || ptr != last) {
            throw ParseError(ParseError::Kind::Syntax, "malformed number", start);
        }
        return make(Constant{value});
    }

    NodePtr parse_identifier()
    {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view name = text_.substr(start, pos_ - start);
        if (name == "u") return make(Variable{});
        if (name == "pi") return make(Named{NamedConstant::Pi});
        if (name == "e") return make(Named{NamedConstant::E});

        static constexpr Func funcs[] = {Func::Sin, Func::Cos, Func::Tan, Func::Exp, Func::Log, Func::Sqrt};
        for (Func f : funcs) {
            if (name != func_name(f)) {
                continue;
            }
            if (!accept('(')) {
                throw ParseError(ParseError::Kind::Arity,
                                 "function '" + std::string(name) + "' expects 1 argument, got none", pos_);
            }
            std::vector<NodePtr> args;
            skip_space();
            if (!accept(')')) {
                do {
                    args.push_back(parse_expr());
                } while (accept(','));
                if (!accept(')')) {
                    fail_here("expected ')'");
                }
            }
            if (args.size() != 1) {
                throw ParseError(ParseError::Kind::Arity,
                                 "function '" + std::string(name) + "' expects 1 argument, got " +
                                     std::to_string(args.size()),
                                 start);
            }
            return make(Call{f, args.front()});
        }
        throw ParseError(ParseError::Kind::UnknownIdentifier,
                         "unknown identifier '" + std::string(name) + "'", start);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Immutable expression tree in `u`. Copies share structure.
class Expression {
public:
    static Expression parse(std::string_view text) { return Expression(detail::Parser(text).parse()); }
    static Expression constant(double value) { return Expression(detail::constant(value)); }

    /// Throws EvaluationError on a domain error or non-finite intermediate.
    double evaluate(double u) const { return detail::evaluate(*root_, u); }

    /// Symbolic d/du.
    Expression derivative() const { return Expression(detail::differentiate(root_)); }

    bool depends_on_u() const { return detail::depends_on_u(*root_); }

    /// Fully parenthesized text that parses back to a structurally equal tree.
    std::string to_string() const
    {
        std::string out;
        detail::print(*root_, out);
        return out;
    }

    const Node& root() const { return *root_; }

    friend bool operator==(const Expression& a, const Expression& b) { return detail::equal(a.root_, b.root_); }

private:
    explicit Expression(NodePtr root) : root_(std::move(root)) {}

    NodePtr root_;
};

} // namespace ruled::expr

#endif // RULED_EXPRESSION_HPP
