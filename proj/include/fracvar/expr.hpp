#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fracvar/errors.hpp"

// Expression DSL for Lagrangians L(t, x1..xm, d1..dm, z).
//
// Grammar (whitespace insignificant):
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := unary ('^' factor)?          -- power is right-associative
//   unary  := '-' unary | atom
//   atom   := number | identifier | fn '(' expr ')' | '(' expr ')'
//   fn     := sin | cos | exp | ln | sqrt | abs | sign
//
// `pi` is a reserved constant. `sign` exists so printed derivatives of
// `abs` re-parse; sign(0) evaluates to 0.

namespace fracvar {

enum class Fn { Sin, Cos, Exp, Ln, Sqrt, Abs, Sign };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Tag { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Call };

    Tag tag;
    double value = 0;   // Const
    std::string name;   // Var
    Fn fn = Fn::Sin;    // Call
    ExprPtr lhs, rhs;   // Neg and Call use lhs only
};

namespace ex {

inline ExprPtr constant(double v) {
    auto e = std::make_shared<Expr>();
    e->tag = Expr::Tag::Const;
    e->value = v;
    return e;
}

inline ExprPtr var(std::string name) {
    auto e = std::make_shared<Expr>();
    e->tag = Expr::Tag::Var;
    e->name = std::move(name);
    return e;
}

inline bool is_const(const ExprPtr& e, double v) {
    return e->tag == Expr::Tag::Const && e->value == v;
}

inline ExprPtr binary(Expr::Tag tag, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->tag = tag;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
}

// smart constructors fold constants and drop 0/1 identities; best effort
// only, correctness lives in evaluation
inline ExprPtr add(ExprPtr a, ExprPtr b) {
    if (a->tag == Expr::Tag::Const && b->tag == Expr::Tag::Const)
        return constant(a->value + b->value);
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    return binary(Expr::Tag::Add, std::move(a), std::move(b));
}

inline ExprPtr sub(ExprPtr a, ExprPtr b) {
    if (a->tag == Expr::Tag::Const && b->tag == Expr::Tag::Const)
        return constant(a->value - b->value);
    if (is_const(b, 0.0)) return a;
    return binary(Expr::Tag::Sub, std::move(a), std::move(b));
}

inline ExprPtr neg(ExprPtr a) {
    if (a->tag == Expr::Tag::Const) return constant(-a->value);
    auto e = std::make_shared<Expr>();
    e->tag = Expr::Tag::Neg;
    e->lhs = std::move(a);
    return e;
}

inline ExprPtr mul(ExprPtr a, ExprPtr b) {
    if (a->tag == Expr::Tag::Const && b->tag == Expr::Tag::Const)
        return constant(a->value * b->value);
    if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    return binary(Expr::Tag::Mul, std::move(a), std::move(b));
}

inline ExprPtr div(ExprPtr a, ExprPtr b) {
    if (is_const(a, 0.0) && !(b->tag == Expr::Tag::Const && b->value == 0.0))
        return constant(0.0);
    if (is_const(b, 1.0)) return a;
    return binary(Expr::Tag::Div, std::move(a), std::move(b));
}

inline ExprPtr pow(ExprPtr a, ExprPtr b) {
    if (is_const(b, 1.0)) return a;
    if (is_const(b, 0.0)) return constant(1.0);
    return binary(Expr::Tag::Pow, std::move(a), std::move(b));
}

inline ExprPtr call(Fn fn, ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->tag = Expr::Tag::Call;
    e->fn = fn;
    e->lhs = std::move(a);
    return e;
}

} // namespace ex

inline const char* fn_name(Fn f) {
    switch (f) {
        case Fn::Sin: return "sin";
        case Fn::Cos: return "cos";
        case Fn::Exp: return "exp";
        case Fn::Ln: return "ln";
        case Fn::Sqrt: return "sqrt";
        case Fn::Abs: return "abs";
        case Fn::Sign: return "sign";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    ExprPtr run() {
        if (src_.empty()) throw ParseError(0, "empty expression");
        ExprPtr e = expr();
        skip_ws();
        if (pos_ != src_.size()) throw ParseError(pos_, "unexpected trailing input");
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }
    bool peek(char c) {
        skip_ws();
        return pos_ < src_.size() && src_[pos_] == c;
    }
    bool accept(char c) {
        if (peek(c)) {
            ++pos_;
            return true;
        }
        return false;
    }

    ExprPtr expr() {
        ExprPtr e = term();
        for (;;) {
            if (accept('+'))
                e = ex::binary(Expr::Tag::Add, e, term());
            else if (accept('-'))
                e = ex::binary(Expr::Tag::Sub, e, term());
            else
                return e;
        }
    }

    ExprPtr term() {
        ExprPtr e = factor();
        for (;;) {
            if (accept('*'))
                e = ex::binary(Expr::Tag::Mul, e, factor());
            else if (accept('/'))
                e = ex::binary(Expr::Tag::Div, e, factor());
            else
                return e;
        }
    }

    ExprPtr factor() {
        ExprPtr base = unary();
        if (accept('^')) return ex::binary(Expr::Tag::Pow, base, factor());
        return base;
    }

    ExprPtr unary() {
        if (accept('-')) {
            auto e = std::make_shared<Expr>();
            e->tag = Expr::Tag::Neg;
            e->lhs = unary();
            return e;
        }
        return atom();
    }

    ExprPtr atom() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError(pos_, "expected number, name or '('");
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        if (accept('(')) {
            ExprPtr e = expr();
            if (!accept(')')) throw ParseError(pos_, "expected ')'");
            return e;
        }
        throw ParseError(pos_, "expected number, name or '('");
    }

    ExprPtr number() {
        const char* begin = src_.data() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) throw ParseError(pos_, "malformed number");
        pos_ += static_cast<std::size_t>(end - begin);
        return ex::constant(v);
    }

    ExprPtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string name(src_.substr(start, pos_ - start));
        if (name == "pi") return ex::constant(3.141592653589793238462643383279502884);
        static const std::map<std::string, Fn, std::less<>> fns = {
            {"sin", Fn::Sin}, {"cos", Fn::Cos},   {"exp", Fn::Exp}, {"ln", Fn::Ln},
            {"sqrt", Fn::Sqrt}, {"abs", Fn::Abs}, {"sign", Fn::Sign},
        };
        if (auto it = fns.find(name); it != fns.end()) {
            if (!accept('(')) throw ParseError(pos_, "expected '(' after function name");
            ExprPtr arg = expr();
            if (!accept(')')) throw ParseError(pos_, "expected ')'");
            return ex::call(it->second, arg);
        }
        return ex::var(std::move(name));
    }
};

} // namespace detail

inline ExprPtr parse(std::string_view src) { return detail::Parser(src).run(); }

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace detail {

inline bool is_integral_value(double v) {
    return std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15;
}

inline double eval_pow(double base, double expo) {
    if (base < 0.0 && !is_integral_value(expo))
        throw EvalError(EvalErrorKind::PowNegativeBase,
                        "negative base with non-integer exponent");
    if (base == 0.0 && expo < 0.0)
        throw EvalError(EvalErrorKind::DivByZero, "zero base with negative exponent");
    return std::pow(base, expo);
}

inline double eval_call(Fn fn, double v) {
    switch (fn) {
        case Fn::Sin: return std::sin(v);
        case Fn::Cos: return std::cos(v);
        case Fn::Exp: return std::exp(v);
        case Fn::Ln:
            if (!(v > 0.0)) throw EvalError(EvalErrorKind::LnNonPositive, "ln of non-positive value");
            return std::log(v);
        case Fn::Sqrt:
            if (v < 0.0) throw EvalError(EvalErrorKind::SqrtNegative, "sqrt of negative value");
            return std::sqrt(v);
        case Fn::Abs: return std::abs(v);
        case Fn::Sign: return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    }
    return 0.0;
}

} // namespace detail

inline double eval(const Expr& e, const std::map<std::string, double>& bindings) {
    switch (e.tag) {
        case Expr::Tag::Const: return e.value;
        case Expr::Tag::Var: {
            auto it = bindings.find(e.name);
            if (it == bindings.end()) throw UnboundVariableError(e.name);
            return it->second;
        }
        case Expr::Tag::Add: return eval(*e.lhs, bindings) + eval(*e.rhs, bindings);
        case Expr::Tag::Sub: return eval(*e.lhs, bindings) - eval(*e.rhs, bindings);
        case Expr::Tag::Mul: return eval(*e.lhs, bindings) * eval(*e.rhs, bindings);
        case Expr::Tag::Div: {
            const double num = eval(*e.lhs, bindings);
            const double den = eval(*e.rhs, bindings);
            if (den == 0.0) throw EvalError(EvalErrorKind::DivByZero, "division by zero");
            return num / den;
        }
        case Expr::Tag::Pow:
            return detail::eval_pow(eval(*e.lhs, bindings), eval(*e.rhs, bindings));
        case Expr::Tag::Neg: return -eval(*e.lhs, bindings);
        case Expr::Tag::Call: return detail::eval_call(e.fn, eval(*e.lhs, bindings));
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Symbolic derivative
// ---------------------------------------------------------------------------

inline ExprPtr diff(const ExprPtr& e, const std::string& var) {
    using namespace ex;
    switch (e->tag) {
        case Expr::Tag::Const: return constant(0.0);
        case Expr::Tag::Var: return constant(e->name == var ? 1.0 : 0.0);
        case Expr::Tag::Add: return add(diff(e->lhs, var), diff(e->rhs, var));
        case Expr::Tag::Sub: return sub(diff(e->lhs, var), diff(e->rhs, var));
        case Expr::Tag::Mul:
            return add(mul(diff(e->lhs, var), e->rhs), mul(e->lhs, diff(e->rhs, var)));
        case Expr::Tag::Div:
            return div(sub(mul(diff(e->lhs, var), e->rhs), mul(e->lhs, diff(e->rhs, var))),
                       pow(e->rhs, constant(2.0)));
        case Expr::Tag::Pow: {
            const ExprPtr& u = e->lhs;
            const ExprPtr& v = e->rhs;
            ExprPtr du = diff(u, var);
            if (v->tag == Expr::Tag::Const) {
                // c u^(c-1) u'
                return mul(mul(v, pow(u, constant(v->value - 1.0))), du);
            }
            ExprPtr dv = diff(v, var);
            // u^v (v' ln u + v u'/u); evaluation requires u > 0
            return mul(pow(u, v), add(mul(dv, call(Fn::Ln, u)), div(mul(v, du), u)));
        }
        case Expr::Tag::Neg: return neg(diff(e->lhs, var));
        case Expr::Tag::Call: {
            ExprPtr inner = diff(e->lhs, var);
            switch (e->fn) {
                case Fn::Sin: return mul(call(Fn::Cos, e->lhs), inner);
                case Fn::Cos: return neg(mul(call(Fn::Sin, e->lhs), inner));
                case Fn::Exp: return mul(call(Fn::Exp, e->lhs), inner);
                case Fn::Ln: return div(inner, e->lhs);
                case Fn::Sqrt:
                    return div(inner, mul(constant(2.0), call(Fn::Sqrt, e->lhs)));
                case Fn::Abs: return mul(call(Fn::Sign, e->lhs), inner);
                case Fn::Sign: return constant(0.0);
            }
            return constant(0.0);
        }
    }
    return ex::constant(0.0);
}

// ---------------------------------------------------------------------------
// Printing / structural equality / variable analysis
// ---------------------------------------------------------------------------

namespace detail {

// '-' lives inside factor in this grammar, so unary minus binds tighter
// than '^' ("-a^b" parses as (-a)^b) and Neg outranks Pow here.
inline int precedence(Expr::Tag t) {
    switch (t) {
        case Expr::Tag::Add:
        case Expr::Tag::Sub: return 1;
        case Expr::Tag::Mul:
        case Expr::Tag::Div: return 2;
        case Expr::Tag::Pow: return 3;
        case Expr::Tag::Neg: return 4;
        default: return 5;
    }
}

inline void print_rec(const Expr& e, int parent_prec, bool rhs_side, std::string& out) {
    const int prec = precedence(e.tag);
    // equal precedence: left-assoc ops need parens on the right child,
    // right-assoc '^' needs them on the left child
    const bool parens = prec < parent_prec ||
                        (prec == parent_prec && rhs_side && prec != 3) ||
                        (prec == parent_prec && !rhs_side && prec == 3);
    if (parens) out += '(';
    switch (e.tag) {
        case Expr::Tag::Const: {
            char buf[32];
            if (e.value < 0) {
                out += '(';
                std::snprintf(buf, sizeof buf, "%.17g", e.value);
                out += buf;
                out += ')';
            } else {
                std::snprintf(buf, sizeof buf, "%.17g", e.value);
                out += buf;
            }
            break;
        }
        case Expr::Tag::Var: out += e.name; break;
        case Expr::Tag::Add:
            print_rec(*e.lhs, prec, false, out);
            out += " + ";
            print_rec(*e.rhs, prec, true, out);
            break;
        case Expr::Tag::Sub:
            print_rec(*e.lhs, prec, false, out);
            out += " - ";
            print_rec(*e.rhs, prec, true, out);
            break;
        case Expr::Tag::Mul:
            print_rec(*e.lhs, prec, false, out);
            out += "*";
            print_rec(*e.rhs, prec, true, out);
            break;
        case Expr::Tag::Div:
            print_rec(*e.lhs, prec, false, out);
            out += "/";
            print_rec(*e.rhs, prec, true, out);
            break;
        case Expr::Tag::Pow:
            print_rec(*e.lhs, prec, false, out);
            out += "^";
            print_rec(*e.rhs, prec, true, out);
            break;
        case Expr::Tag::Neg:
            out += "-";
            print_rec(*e.lhs, prec, true, out);
            break;
        case Expr::Tag::Call:
            out += fn_name(e.fn);
            out += '(';
            print_rec(*e.lhs, 0, false, out);
            out += ')';
            break;
    }
    if (parens) out += ')';
}

} // namespace detail

inline std::string print(const Expr& e) {
    std::string out;
    detail::print_rec(e, 0, false, out);
    return out;
}
inline std::string print(const ExprPtr& e) { return print(*e); }

inline bool structural_equal(const Expr& a, const Expr& b) {
    if (a.tag != b.tag) return false;
    switch (a.tag) {
        case Expr::Tag::Const: return a.value == b.value;
        case Expr::Tag::Var: return a.name == b.name;
        case Expr::Tag::Neg: return structural_equal(*a.lhs, *b.lhs);
        case Expr::Tag::Call: return a.fn == b.fn && structural_equal(*a.lhs, *b.lhs);
        default:
            return structural_equal(*a.lhs, *b.lhs) && structural_equal(*a.rhs, *b.rhs);
    }
}
inline bool structural_equal(const ExprPtr& a, const ExprPtr& b) {
    return structural_equal(*a, *b);
}

inline void collect_vars(const Expr& e, std::set<std::string>& out) {
    switch (e.tag) {
        case Expr::Tag::Const: return;
        case Expr::Tag::Var: out.insert(e.name); return;
        case Expr::Tag::Neg:
        case Expr::Tag::Call: collect_vars(*e.lhs, out); return;
        default:
            collect_vars(*e.lhs, out);
            collect_vars(*e.rhs, out);
    }
}

inline std::set<std::string> free_vars(const Expr& e) {
    std::set<std::string> out;
    collect_vars(e, out);
    return out;
}
inline std::set<std::string> free_vars(const ExprPtr& e) { return free_vars(*e); }

// Replace named variables by constants (used to bake problem parameters in).
inline ExprPtr substitute(const ExprPtr& e, const std::map<std::string, double>& values) {
    switch (e->tag) {
        case Expr::Tag::Const: return e;
        case Expr::Tag::Var: {
            auto it = values.find(e->name);
            return it == values.end() ? e : ex::constant(it->second);
        }
        case Expr::Tag::Neg: return ex::neg(substitute(e->lhs, values));
        case Expr::Tag::Call: return ex::call(e->fn, substitute(e->lhs, values));
        default:
            return ex::binary(e->tag, substitute(e->lhs, values), substitute(e->rhs, values));
    }
}

// ---------------------------------------------------------------------------
// Compiled form: postfix program over a fixed variable slot layout. The
// variational layer evaluates partial derivatives at every grid node inside
// optimizer loops; a flat program avoids tree-walk and name-lookup costs.
// ---------------------------------------------------------------------------

struct Program {
    enum class Op : unsigned char { PushConst, PushSlot, Add, Sub, Mul, Div, Pow, Neg, Call };
    struct Ins {
        Op op;
        int arg = 0;    // slot index or Fn
        double c = 0;   // constant
    };
    std::vector<Ins> code;
    std::size_t max_stack = 0;

    double run(std::span<const double> slots) const {
        double stack[64];
        std::size_t top = 0;
        for (const Ins& ins : code) {
            switch (ins.op) {
                case Op::PushConst: stack[top++] = ins.c; break;
                case Op::PushSlot: stack[top++] = slots[static_cast<std::size_t>(ins.arg)]; break;
                case Op::Add: --top; stack[top - 1] += stack[top]; break;
                case Op::Sub: --top; stack[top - 1] -= stack[top]; break;
                case Op::Mul: --top; stack[top - 1] *= stack[top]; break;
                case Op::Div: {
                    --top;
                    if (stack[top] == 0.0)
                        throw EvalError(EvalErrorKind::DivByZero, "division by zero");
                    stack[top - 1] /= stack[top];
                    break;
                }
                case Op::Pow:
                    --top;
                    stack[top - 1] = detail::eval_pow(stack[top - 1], stack[top]);
                    break;
                case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
                case Op::Call:
                    stack[top - 1] = detail::eval_call(static_cast<Fn>(ins.arg), stack[top - 1]);
                    break;
            }
        }
        return stack[0];
    }
};

namespace detail {

inline void compile_rec(const Expr& e, const std::vector<std::string>& slots,
                        Program& prog, std::size_t& depth, std::size_t& max_depth) {
    auto push = [&](Program::Ins ins) {
        prog.code.push_back(ins);
    };
    switch (e.tag) {
        case Expr::Tag::Const:
            push({Program::Op::PushConst, 0, e.value});
            max_depth = std::max(max_depth, ++depth);
            return;
        case Expr::Tag::Var: {
            int idx = -1;
            for (std::size_t i = 0; i < slots.size(); ++i)
                if (slots[i] == e.name) { idx = static_cast<int>(i); break; }
            if (idx < 0) throw UnboundVariableError(e.name);
            push({Program::Op::PushSlot, idx, 0.0});
            max_depth = std::max(max_depth, ++depth);
            return;
        }
        case Expr::Tag::Neg:
            compile_rec(*e.lhs, slots, prog, depth, max_depth);
            push({Program::Op::Neg, 0, 0.0});
            return;
        case Expr::Tag::Call:
            compile_rec(*e.lhs, slots, prog, depth, max_depth);
            push({Program::Op::Call, static_cast<int>(e.fn), 0.0});
            return;
        default: {
            compile_rec(*e.lhs, slots, prog, depth, max_depth);
            compile_rec(*e.rhs, slots, prog, depth, max_depth);
            Program::Op op = Program::Op::Add;
            switch (e.tag) {
                case Expr::Tag::Add: op = Program::Op::Add; break;
                case Expr::Tag::Sub: op = Program::Op::Sub; break;
                case Expr::Tag::Mul: op = Program::Op::Mul; break;
                case Expr::Tag::Div: op = Program::Op::Div; break;
                case Expr::Tag::Pow: op = Program::Op::Pow; break;
                default: break;
            }
            push({op, 0, 0.0});
            --depth;
            return;
        }
    }
}

} // namespace detail

inline Program compile(const ExprPtr& e, const std::vector<std::string>& slots) {
    Program prog;
    std::size_t depth = 0, max_depth = 0;
    detail::compile_rec(*e, slots, prog, depth, max_depth);
    prog.max_stack = max_depth;
    if (max_depth > 63)
        throw DomainError("expression too deeply nested to compile");
    return prog;
}

// ---------------------------------------------------------------------------
// Lagrangian: expression plus its variable contract
// ---------------------------------------------------------------------------

struct Lagrangian {
    ExprPtr expr;
    std::size_t m = 1;   // number of dependent variables
    bool has_z = false;  // Herglotz state occurs
    std::map<std::string, double> params;

    std::set<std::string> declared_vars() const {
        std::set<std::string> v{"t"};
        for (std::size_t i = 1; i <= m; ++i) {
            v.insert("x" + std::to_string(i));
            v.insert("d" + std::to_string(i));
        }
        if (has_z) v.insert("z");
        return v;
    }

    // dynamic slot layout: t, x1..xm, d1..dm, then z when present
    std::vector<std::string> slot_names() const {
        std::vector<std::string> s{"t"};
        for (std::size_t i = 1; i <= m; ++i) s.push_back("x" + std::to_string(i));
        for (std::size_t i = 1; i <= m; ++i) s.push_back("d" + std::to_string(i));
        if (has_z) s.push_back("z");
        return s;
    }

    void validate() const {
        if (m < 1) throw DomainError("Lagrangian: m must be >= 1");
        const auto declared = declared_vars();
        for (const auto& v : free_vars(expr)) {
            if (declared.count(v) || params.count(v)) continue;
            if (v == "z") throw DomainError("Lagrangian: z occurs but has_z is false");
            throw UnknownIdentifierError(v);
        }
    }

    // expression with parameters folded to constants
    ExprPtr bound_expr() const { return substitute(expr, params); }
};

inline Lagrangian make_lagrangian(std::string_view src, std::size_t m, bool has_z = false,
                                  std::map<std::string, double> params = {}) {
    Lagrangian lag{parse(src), m, has_z, std::move(params)};
    lag.validate();
    return lag;
}

} // namespace fracvar
