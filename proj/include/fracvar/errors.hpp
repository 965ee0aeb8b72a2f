#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace fracvar {

// Precondition violations on numeric inputs (grid bounds, operator orders, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// An operation was asked of a Problem whose kind does not support it.
class KindError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class EvalErrorKind {
    DivByZero,
    LnNonPositive,
    SqrtNegative,
    PowNegativeBase,
};

// Runtime domain violation while evaluating an expression. `node` is filled
// in by callers that evaluate along a trajectory and know the grid index.
class EvalError : public std::runtime_error {
public:
    EvalError(EvalErrorKind k, const std::string& what_arg)
        : std::runtime_error(what_arg), kind(k) {}
    EvalError(EvalErrorKind k, const std::string& what_arg, std::size_t node_index)
        : std::runtime_error(what_arg + " at node " + std::to_string(node_index)),
          kind(k), node(node_index) {}

    EvalErrorKind kind;
    std::optional<std::size_t> node;
};

class UnboundVariableError : public std::runtime_error {
public:
    explicit UnboundVariableError(const std::string& var)
        : std::runtime_error("unbound variable '" + var + "'"), name(var) {}
    std::string name;
};

// Undeclared identifier detected when an expression is bound to a problem.
class UnknownIdentifierError : public std::runtime_error {
public:
    explicit UnknownIdentifierError(const std::string& ident)
        : std::runtime_error("unknown identifier '" + ident + "'"), name(ident) {}
    std::string name;
};

// Syntax error with the byte offset into the source text.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t at, const std::string& expected)
        : std::runtime_error("parse error at offset " + std::to_string(at) + ": " + expected),
          offset(at) {}
    std::size_t offset;
};

// |dg/dx2| fell below tolerance somewhere along a holonomic trajectory.
class SingularConstraint : public std::runtime_error {
public:
    explicit SingularConstraint(std::size_t node_index)
        : std::runtime_error("holonomic constraint is singular (dg/dx2 ~ 0) at node " +
                             std::to_string(node_index)),
          node(node_index) {}
    std::size_t node;
};

class RootFindFailure : public std::runtime_error {
public:
    explicit RootFindFailure(std::size_t node_index)
        : std::runtime_error("could not bracket a constraint root at node " +
                             std::to_string(node_index)),
          node(node_index) {}
    std::size_t node;
};

// Isoperimetric solve hit the abnormal multiplier case: the iterate is an
// extremal of the constraint functional while the defect stays irreducible.
class AbnormalCase : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace fracvar
