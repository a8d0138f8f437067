#ifndef MBE_OCL_HPP
#define MBE_OCL_HPP

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mbe/model.hpp"

namespace mbe::ocl {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class BoolOpKind { And, Or, Implies };
enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };
enum class ArithOp { Add, Sub, Mul, Div };
enum class CollOpKind { Size, IsEmpty, NotEmpty, Includes, ForAll, Exists };

struct BoolOp {
    BoolOpKind op;
    ExprPtr lhs, rhs;
};
struct NotOp {
    ExprPtr operand;
};
struct Compare {
    CompareOp op;
    ExprPtr lhs, rhs;
};
struct Arith {
    ArithOp op;
    ExprPtr lhs, rhs;
};
struct Negate {
    ExprPtr operand;
};
struct Nav {
    ExprPtr receiver;
    std::string member;
};
struct CollOp {
    ExprPtr receiver;
    CollOpKind op;
    std::string var;  // binder for forAll/exists
    ExprPtr arg;      // quantifier body, or includes() argument
};
struct SelfRef {};
struct VarRef {
    std::string name;
};
struct Literal {
    std::variant<std::int64_t, double, std::string, bool> value;
};

struct Expr {
    std::variant<BoolOp, NotOp, Compare, Arith, Negate, Nav, CollOp, SelfRef, VarRef, Literal> node;
};

bool exprEquals(const Expr& a, const Expr& b);

// Precedence-aware rendering; parse(print(ast)) is structurally equal to ast.
std::string printExpr(const Expr& expr);

struct Constraint {
    std::string contextClass;
    std::string name;
    ExprPtr body;
};

struct SyntaxError {
    int line = 0;  // 1-based
    int column = 0;
    std::string message;
};

struct ParseResult {
    std::vector<Constraint> constraints;
    std::vector<SyntaxError> errors;

    bool ok() const { return errors.empty(); }
};

// "context IDENT inv IDENT : expr" clauses; "--" comments to end of line.
ParseResult parseConstraints(std::string_view text);

// Parse a single expression (test/value helper).
ExprPtr parseExpression(std::string_view text);

struct Violation {
    std::string constraintName;
    std::string contextClass;
    std::string objectId;
    std::string message;  // failing subexpression with actual values
};

struct EvalError {
    std::string constraintName;
    std::string objectId;
    std::string message;
};

struct ComplianceResult {
    bool compliant = false;  // true iff violations and errors are both empty
    std::vector<Violation> violations;
    std::vector<EvalError> errors;
};

// Evaluates every constraint on every object whose class conforms to its
// context class. Unset slots, type mismatches, and division by zero are
// evaluation errors, not violations. Throws Error(UNKNOWN_CONTEXT_CLASS).
ComplianceResult checkCompliance(const model::Metamodel& mm, const model::Instance& inst,
                                 const std::vector<Constraint>& constraints);

// One human-readable line naming object, constraint, and failing comparison.
std::string explainViolation(const Violation& violation);

}  // namespace mbe::ocl

#endif  // MBE_OCL_HPP
