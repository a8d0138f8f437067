#include "mbe/ocl.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mbe::ocl {

using model::Instance;
using model::Metamodel;
using model::ModelObject;
using model::ScalarValue;

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

namespace {

enum class Tok {
    Ident, Int, Real, String,
    LParen, RParen, Dot, Arrow, Pipe, Colon,
    Eq, Ne, Lt, Le, Gt, Ge, Plus, Minus, Star, Slash,
    End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::int64_t intValue = 0;
    double realValue = 0.0;
    int line = 1;
    int column = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run(std::vector<SyntaxError>& errors) {
        std::vector<Token> tokens;
        while (true) {
            skipTrivia();
            Token tok;
            tok.line = line_;
            tok.column = column_;
            if (atEnd()) {
                tok.kind = Tok::End;
                tokens.push_back(tok);
                return tokens;
            }
            const char c = peek();
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                tok.kind = Tok::Ident;
                while (!atEnd() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
                    tok.text.push_back(advance());
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                lexNumber(tok);
            } else if (c == '\'') {
                lexString(tok, errors);
            } else {
                advance();
                switch (c) {
                    case '(': tok.kind = Tok::LParen; break;
                    case ')': tok.kind = Tok::RParen; break;
                    case '.': tok.kind = Tok::Dot; break;
                    case '|': tok.kind = Tok::Pipe; break;
                    case ':': tok.kind = Tok::Colon; break;
                    case '+': tok.kind = Tok::Plus; break;
                    case '*': tok.kind = Tok::Star; break;
                    case '/': tok.kind = Tok::Slash; break;
                    case '=': tok.kind = Tok::Eq; break;
                    case '-':
                        if (!atEnd() && peek() == '>') {
                            advance();
                            tok.kind = Tok::Arrow;
                        } else {
                            tok.kind = Tok::Minus;
                        }
                        break;
                    case '<':
                        if (!atEnd() && peek() == '>') {
                            advance();
                            tok.kind = Tok::Ne;
                        } else if (!atEnd() && peek() == '=') {
                            advance();
                            tok.kind = Tok::Le;
                        } else {
                            tok.kind = Tok::Lt;
                        }
                        break;
                    case '>':
                        if (!atEnd() && peek() == '=') {
                            advance();
                            tok.kind = Tok::Ge;
                        } else {
                            tok.kind = Tok::Gt;
                        }
                        break;
                    default:
                        errors.push_back({tok.line, tok.column,
                                          std::string("unexpected character '") + c + "'"});
                        continue;
                }
            }
            tokens.push_back(std::move(tok));
        }
    }

private:
    bool atEnd() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }

    char advance() {
        const char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        return c;
    }

    void skipTrivia() {
        while (!atEnd()) {
            if (std::isspace(static_cast<unsigned char>(peek()))) {
                advance();
            } else if (peek() == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '-') {
                while (!atEnd() && peek() != '\n') advance();
            } else {
                return;
            }
        }
    }

    void lexNumber(Token& tok) {
        std::string digits;
        while (!atEnd() && std::isdigit(static_cast<unsigned char>(peek()))) digits.push_back(advance());
        bool isReal = false;
        if (!atEnd() && peek() == '.' && pos_ + 1 < text_.size() &&
            std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
            isReal = true;
            digits.push_back(advance());
            while (!atEnd() && std::isdigit(static_cast<unsigned char>(peek())))
                digits.push_back(advance());
        }
        if (!atEnd() && (peek() == 'e' || peek() == 'E')) {
            const size_t mark = pos_;
            std::string expPart(1, advance());
            if (!atEnd() && (peek() == '+' || peek() == '-')) expPart.push_back(advance());
            if (!atEnd() && std::isdigit(static_cast<unsigned char>(peek()))) {
                isReal = true;
                while (!atEnd() && std::isdigit(static_cast<unsigned char>(peek())))
                    expPart.push_back(advance());
                digits += expPart;
            } else {
                // not an exponent after all; rewind
                pos_ = mark;
            }
        }
        if (isReal) {
            tok.kind = Tok::Real;
            tok.realValue = std::stod(digits);
        } else {
            tok.kind = Tok::Int;
            tok.intValue = std::stoll(digits);
        }
        tok.text = digits;
    }

    void lexString(Token& tok, std::vector<SyntaxError>& errors) {
        advance();  // opening quote
        tok.kind = Tok::String;
        while (!atEnd() && peek() != '\'') {
            char c = advance();
            if (c == '\\' && !atEnd()) {
                const char esc = advance();
                c = esc == 'n' ? '\n' : esc;  // \' \\ \n
            }
            tok.text.push_back(c);
        }
        if (atEnd()) {
            errors.push_back({tok.line, tok.column, "unterminated string literal"});
        } else {
            advance();  // closing quote
        }
    }

    std::string_view text_;
    size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct ParseAbort {};

class ConstraintParser {
public:
    ConstraintParser(std::vector<Token> tokens, std::vector<SyntaxError>& errors)
        : tokens_(std::move(tokens)), errors_(errors) {}

    std::vector<Constraint> parseAll() {
        std::vector<Constraint> constraints;
        while (!at(Tok::End)) {
            try {
                constraints.push_back(parseConstraint());
            } catch (const ParseAbort&) {
                recoverToNextContext();
            }
        }
        return constraints;
    }

    ExprPtr parseSingleExpression() {
        scopes_.clear();
        ExprPtr expr = parseExpr();
        expect(Tok::End, "end of input");
        return expr;
    }

private:
    const Token& cur() const { return tokens_[pos_]; }
    bool at(Tok kind) const { return cur().kind == kind; }
    bool atKeyword(const char* word) const { return at(Tok::Ident) && cur().text == word; }

    const Token& advance() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] void fail(const std::string& message) {
        errors_.push_back({cur().line, cur().column, message});
        throw ParseAbort{};
    }

    const Token& expect(Tok kind, const char* what) {
        if (!at(kind)) fail(std::string("expected ") + what);
        return advance();
    }

    std::string expectIdent(const char* what) {
        if (!at(Tok::Ident)) fail(std::string("expected ") + what);
        return advance().text;
    }

    void expectKeyword(const char* word) {
        if (!atKeyword(word)) fail(std::string("expected '") + word + "'");
        advance();
    }

    void recoverToNextContext() {
        while (!at(Tok::End) && !atKeyword("context")) advance();
    }

    Constraint parseConstraint() {
        expectKeyword("context");
        Constraint constraint;
        constraint.contextClass = expectIdent("context class name");
        expectKeyword("inv");
        constraint.name = expectIdent("invariant name");
        expect(Tok::Colon, "':'");
        scopes_.clear();
        constraint.body = parseExpr();
        return constraint;
    }

    ExprPtr parseExpr() {
        ExprPtr lhs = parseOr();
        if (atKeyword("implies")) {
            advance();
            ExprPtr rhs = parseOr();
            return std::make_shared<Expr>(Expr{BoolOp{BoolOpKind::Implies, lhs, rhs}});
        }
        return lhs;
    }

    ExprPtr parseOr() {
        ExprPtr lhs = parseAnd();
        while (atKeyword("or")) {
            advance();
            lhs = std::make_shared<Expr>(Expr{BoolOp{BoolOpKind::Or, lhs, parseAnd()}});
        }
        return lhs;
    }

    ExprPtr parseAnd() {
        ExprPtr lhs = parseNot();
        while (atKeyword("and")) {
            advance();
            lhs = std::make_shared<Expr>(Expr{BoolOp{BoolOpKind::And, lhs, parseNot()}});
        }
        return lhs;
    }

    ExprPtr parseNot() {
        if (atKeyword("not")) {
            advance();
            return std::make_shared<Expr>(Expr{NotOp{parseNot()}});
        }
        return parseRel();
    }

    ExprPtr parseRel() {
        ExprPtr lhs = parseAdd();
        std::optional<CompareOp> op;
        switch (cur().kind) {
            case Tok::Eq: op = CompareOp::Eq; break;
            case Tok::Ne: op = CompareOp::Ne; break;
            case Tok::Lt: op = CompareOp::Lt; break;
            case Tok::Le: op = CompareOp::Le; break;
            case Tok::Gt: op = CompareOp::Gt; break;
            case Tok::Ge: op = CompareOp::Ge; break;
            default: break;
        }
        if (!op) return lhs;
        advance();
        return std::make_shared<Expr>(Expr{Compare{*op, lhs, parseAdd()}});
    }

    ExprPtr parseAdd() {
        ExprPtr lhs = parseMul();
        while (at(Tok::Plus) || at(Tok::Minus)) {
            const ArithOp op = at(Tok::Plus) ? ArithOp::Add : ArithOp::Sub;
            advance();
            lhs = std::make_shared<Expr>(Expr{Arith{op, lhs, parseMul()}});
        }
        return lhs;
    }

    ExprPtr parseMul() {
        ExprPtr lhs = parseUnary();
        while (at(Tok::Star) || at(Tok::Slash)) {
            const ArithOp op = at(Tok::Star) ? ArithOp::Mul : ArithOp::Div;
            advance();
            lhs = std::make_shared<Expr>(Expr{Arith{op, lhs, parseUnary()}});
        }
        return lhs;
    }

    ExprPtr parseUnary() {
        if (at(Tok::Minus)) {
            advance();
            return std::make_shared<Expr>(Expr{Negate{parseUnary()}});
        }
        return parsePostfix();
    }

    ExprPtr parsePostfix() {
        ExprPtr expr = parsePrimary();
        while (true) {
            if (at(Tok::Dot)) {
                advance();
                expr = std::make_shared<Expr>(Expr{Nav{expr, expectIdent("member name after '.'")}});
            } else if (at(Tok::Arrow)) {
                advance();
                expr = parseCollOp(expr);
            } else {
                return expr;
            }
        }
    }

    ExprPtr parseCollOp(ExprPtr receiver) {
        const std::string name = expectIdent("collection operation after '->'");
        CollOp node;
        node.receiver = std::move(receiver);
        if (name == "size" || name == "isEmpty" || name == "notEmpty") {
            node.op = name == "size" ? CollOpKind::Size
                      : name == "isEmpty" ? CollOpKind::IsEmpty
                                          : CollOpKind::NotEmpty;
            expect(Tok::LParen, "'('");
            expect(Tok::RParen, "')'");
        } else if (name == "forAll" || name == "exists") {
            node.op = name == "forAll" ? CollOpKind::ForAll : CollOpKind::Exists;
            expect(Tok::LParen, "'('");
            node.var = expectIdent("bound variable name");
            expect(Tok::Pipe, "'|'");
            scopes_.push_back(node.var);
            node.arg = parseExpr();
            scopes_.pop_back();
            expect(Tok::RParen, "')'");
        } else if (name == "includes") {
            node.op = CollOpKind::Includes;
            expect(Tok::LParen, "'('");
            node.arg = parseExpr();
            expect(Tok::RParen, "')'");
        } else {
            fail("unknown collection operation '" + name + "'");
        }
        return std::make_shared<Expr>(Expr{std::move(node)});
    }

    ExprPtr parsePrimary() {
        switch (cur().kind) {
            case Tok::Int: {
                const auto value = advance().intValue;
                return std::make_shared<Expr>(Expr{Literal{value}});
            }
            case Tok::Real: {
                const auto value = advance().realValue;
                return std::make_shared<Expr>(Expr{Literal{value}});
            }
            case Tok::String: {
                auto value = advance().text;
                return std::make_shared<Expr>(Expr{Literal{std::move(value)}});
            }
            case Tok::LParen: {
                advance();
                ExprPtr inner = parseExpr();
                expect(Tok::RParen, "')'");
                return inner;
            }
            case Tok::Ident: {
                const std::string word = cur().text;
                if (word == "self") {
                    advance();
                    return std::make_shared<Expr>(Expr{SelfRef{}});
                }
                if (word == "true" || word == "false") {
                    advance();
                    return std::make_shared<Expr>(Expr{Literal{word == "true"}});
                }
                if (std::find(scopes_.begin(), scopes_.end(), word) == scopes_.end()) {
                    fail("unbound variable '" + word + "'");
                }
                advance();
                return std::make_shared<Expr>(Expr{VarRef{word}});
            }
            default:
                fail("expected an expression");
        }
    }

    std::vector<Token> tokens_;
    size_t pos_ = 0;
    std::vector<SyntaxError>& errors_;
    std::vector<std::string> scopes_;
};

}  // namespace

ParseResult parseConstraints(std::string_view text) {
    ParseResult result;
    Lexer lexer(text);
    std::vector<Token> tokens = lexer.run(result.errors);
    if (!result.errors.empty()) return result;
    ConstraintParser parser(std::move(tokens), result.errors);
    result.constraints = parser.parseAll();
    return result;
}

ExprPtr parseExpression(std::string_view text) {
    std::vector<SyntaxError> errors;
    Lexer lexer(text);
    std::vector<Token> tokens = lexer.run(errors);
    if (errors.empty()) {
        ConstraintParser parser(std::move(tokens), errors);
        try {
            return parser.parseSingleExpression();
        } catch (const ParseAbort&) {
        }
    }
    std::string detail = "syntax error";
    if (!errors.empty()) {
        detail = "line " + std::to_string(errors.front().line) + ", column " +
                 std::to_string(errors.front().column) + ": " + errors.front().message;
    }
    throw Error("SYNTAX_ERROR", detail);
}

// ---------------------------------------------------------------------------
// Structural equality and printing
// ---------------------------------------------------------------------------

bool exprEquals(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        [&](const auto& lhs) -> bool {
            using T = std::decay_t<decltype(lhs)>;
            const auto& rhs = std::get<T>(b.node);
            if constexpr (std::is_same_v<T, BoolOp>) {
                return lhs.op == rhs.op && exprEquals(*lhs.lhs, *rhs.lhs) &&
                       exprEquals(*lhs.rhs, *rhs.rhs);
            } else if constexpr (std::is_same_v<T, NotOp>) {
                return exprEquals(*lhs.operand, *rhs.operand);
            } else if constexpr (std::is_same_v<T, Compare>) {
                return lhs.op == rhs.op && exprEquals(*lhs.lhs, *rhs.lhs) &&
                       exprEquals(*lhs.rhs, *rhs.rhs);
            } else if constexpr (std::is_same_v<T, Arith>) {
                return lhs.op == rhs.op && exprEquals(*lhs.lhs, *rhs.lhs) &&
                       exprEquals(*lhs.rhs, *rhs.rhs);
            } else if constexpr (std::is_same_v<T, Negate>) {
                return exprEquals(*lhs.operand, *rhs.operand);
            } else if constexpr (std::is_same_v<T, Nav>) {
                return lhs.member == rhs.member && exprEquals(*lhs.receiver, *rhs.receiver);
            } else if constexpr (std::is_same_v<T, CollOp>) {
                if (lhs.op != rhs.op || lhs.var != rhs.var) return false;
                if (!exprEquals(*lhs.receiver, *rhs.receiver)) return false;
                if (!lhs.arg != !rhs.arg) return false;
                return !lhs.arg || exprEquals(*lhs.arg, *rhs.arg);
            } else if constexpr (std::is_same_v<T, SelfRef>) {
                return true;
            } else if constexpr (std::is_same_v<T, VarRef>) {
                return lhs.name == rhs.name;
            } else {
                return lhs.value == rhs.value;
            }
        },
        a.node);
}

namespace {

// Precedence levels, lowest binding first.
enum Level {
    kImplies = 1, kOr, kAnd, kNot, kRel, kAdd, kMul, kUnary, kPostfix, kPrimary
};

const char* compareOpText(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "=";
        case CompareOp::Ne: return "<>";
        case CompareOp::Lt: return "<";
        case CompareOp::Le: return "<=";
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
    }
    return "";
}

const char* arithOpText(ArithOp op) {
    switch (op) {
        case ArithOp::Add: return "+";
        case ArithOp::Sub: return "-";
        case ArithOp::Mul: return "*";
        case ArithOp::Div: return "/";
    }
    return "";
}

std::string printAt(const Expr& expr, int minLevel);

std::string printNode(const Expr& expr, int& level) {
    return std::visit(
        [&](const auto& node) -> std::string {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, BoolOp>) {
                switch (node.op) {
                    case BoolOpKind::Implies:
                        level = kImplies;
                        // implies is non-associative: both operands sit above it
                        return printAt(*node.lhs, kOr) + " implies " + printAt(*node.rhs, kOr);
                    case BoolOpKind::Or:
                        level = kOr;
                        return printAt(*node.lhs, kOr) + " or " + printAt(*node.rhs, kAnd);
                    case BoolOpKind::And:
                        level = kAnd;
                        return printAt(*node.lhs, kAnd) + " and " + printAt(*node.rhs, kNot);
                }
                return {};
            } else if constexpr (std::is_same_v<T, NotOp>) {
                level = kNot;
                return "not " + printAt(*node.operand, kNot);
            } else if constexpr (std::is_same_v<T, Compare>) {
                level = kRel;
                return printAt(*node.lhs, kAdd) + " " + compareOpText(node.op) + " " +
                       printAt(*node.rhs, kAdd);
            } else if constexpr (std::is_same_v<T, Arith>) {
                const bool additive = node.op == ArithOp::Add || node.op == ArithOp::Sub;
                level = additive ? kAdd : kMul;
                const int lhsLevel = additive ? kAdd : kMul;
                const int rhsLevel = additive ? kMul : kUnary;
                return printAt(*node.lhs, lhsLevel) + " " + arithOpText(node.op) + " " +
                       printAt(*node.rhs, rhsLevel);
            } else if constexpr (std::is_same_v<T, Negate>) {
                level = kUnary;
                std::string inner = printAt(*node.operand, kUnary);
                // "--" would lex as a comment
                if (!inner.empty() && inner.front() == '-') inner = "(" + inner + ")";
                return "-" + inner;
            } else if constexpr (std::is_same_v<T, Nav>) {
                level = kPostfix;
                return printAt(*node.receiver, kPostfix) + "." + node.member;
            } else if constexpr (std::is_same_v<T, CollOp>) {
                level = kPostfix;
                const std::string recv = printAt(*node.receiver, kPostfix);
                switch (node.op) {
                    case CollOpKind::Size: return recv + "->size()";
                    case CollOpKind::IsEmpty: return recv + "->isEmpty()";
                    case CollOpKind::NotEmpty: return recv + "->notEmpty()";
                    case CollOpKind::Includes:
                        return recv + "->includes(" + printAt(*node.arg, kImplies) + ")";
                    case CollOpKind::ForAll:
                        return recv + "->forAll(" + node.var + " | " +
                               printAt(*node.arg, kImplies) + ")";
                    case CollOpKind::Exists:
                        return recv + "->exists(" + node.var + " | " +
                               printAt(*node.arg, kImplies) + ")";
                }
                return {};
            } else if constexpr (std::is_same_v<T, SelfRef>) {
                level = kPrimary;
                return "self";
            } else if constexpr (std::is_same_v<T, VarRef>) {
                level = kPrimary;
                return node.name;
            } else {
                level = kPrimary;
                const auto& value = node.value;
                if (std::holds_alternative<std::int64_t>(value))
                    return std::to_string(std::get<std::int64_t>(value));
                if (std::holds_alternative<double>(value))
                    return nlohmann::json(std::get<double>(value)).dump();
                if (std::holds_alternative<bool>(value))
                    return std::get<bool>(value) ? "true" : "false";
                std::string out = "'";
                for (char c : std::get<std::string>(value)) {
                    if (c == '\'' || c == '\\') out.push_back('\\');
                    out.push_back(c);
                }
                out.push_back('\'');
                return out;
            }
        },
        expr.node);
}

std::string printAt(const Expr& expr, int minLevel) {
    int level = kPrimary;
    std::string text = printNode(expr, level);
    if (level < minLevel) return "(" + text + ")";
    return text;
}

}  // namespace

std::string printExpr(const Expr& expr) { return printAt(expr, kImplies); }

// ---------------------------------------------------------------------------
// Evaluator
// ---------------------------------------------------------------------------

namespace {

struct EvalAbort {
    std::string message;
};

struct Value {
    std::variant<std::int64_t, double, std::string, bool, const ModelObject*,
                 std::vector<const ModelObject*>>
        v;

    bool isInt() const { return v.index() == 0; }
    bool isReal() const { return v.index() == 1; }
    bool isNumeric() const { return isInt() || isReal(); }
    bool isString() const { return v.index() == 2; }
    bool isBool() const { return v.index() == 3; }
    bool isObject() const { return v.index() == 4; }
    bool isCollection() const { return v.index() == 5; }

    double numeric() const {
        return isInt() ? static_cast<double>(std::get<std::int64_t>(v)) : std::get<double>(v);
    }
};

std::string typeName(const Value& value) {
    switch (value.v.index()) {
        case 0: return "int";
        case 1: return "real";
        case 2: return "string";
        case 3: return "bool";
        case 4: return "object";
        default: return "collection";
    }
}

std::string renderValue(const Value& value) {
    switch (value.v.index()) {
        case 0: return std::to_string(std::get<std::int64_t>(value.v));
        case 1: return nlohmann::json(std::get<double>(value.v)).dump();
        case 2: return "'" + std::get<std::string>(value.v) + "'";
        case 3: return std::get<bool>(value.v) ? "true" : "false";
        case 4: return std::get<const ModelObject*>(value.v)->id;
        default: {
            std::string out = "[";
            const auto& coll = std::get<std::vector<const ModelObject*>>(value.v);
            for (size_t i = 0; i < coll.size(); ++i) {
                if (i > 0) out += ", ";
                out += coll[i]->id;
            }
            return out + "]";
        }
    }
}

class Evaluator {
public:
    Evaluator(const Metamodel& mm, const Instance& inst) : mm_(mm), inst_(inst) {}

    Value eval(const Expr& expr, const ModelObject& self) {
        self_ = &self;
        vars_.clear();
        return evalExpr(expr);
    }

    bool evalBool(const Expr& expr, const ModelObject& self) {
        const Value value = eval(expr, self);
        if (!value.isBool()) {
            throw EvalAbort{"constraint body evaluated to " + typeName(value) + ", expected bool"};
        }
        return std::get<bool>(value.v);
    }

    // Descends into the falsified part of a boolean expression and renders it
    // with actual operand values.
    std::string explainFalse(const Expr& expr) {
        return std::visit(
            [&](const auto& node) -> std::string {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, BoolOp>) {
                    if (node.op == BoolOpKind::And) {
                        const Value lhs = evalExpr(*node.lhs);
                        if (lhs.isBool() && !std::get<bool>(lhs.v)) return explainFalse(*node.lhs);
                        return explainFalse(*node.rhs);
                    }
                    if (node.op == BoolOpKind::Implies) return explainFalse(*node.rhs);
                    return printExpr(expr) + " is false";  // or: both branches false
                } else if constexpr (std::is_same_v<T, Compare>) {
                    const Value lhs = evalExpr(*node.lhs);
                    const Value rhs = evalExpr(*node.rhs);
                    return printExpr(expr) + " is false (" + renderValue(lhs) + " " +
                           compareOpText(node.op) + " " + renderValue(rhs) + ")";
                } else if constexpr (std::is_same_v<T, CollOp>) {
                    return explainCollOp(expr, node);
                } else {
                    return printExpr(expr) + " is false";
                }
            },
            expr.node);
    }

private:
    std::string explainCollOp(const Expr& expr, const CollOp& node) {
        const Value recv = evalExpr(*node.receiver);
        if (!recv.isCollection()) return printExpr(expr) + " is false";
        const auto& coll = std::get<std::vector<const ModelObject*>>(recv.v);
        switch (node.op) {
            case CollOpKind::ForAll:
                for (const ModelObject* element : coll) {
                    ScopedVar scope(*this, node.var, element);
                    const Value body = evalExpr(*node.arg);
                    if (body.isBool() && !std::get<bool>(body.v)) {
                        return printExpr(expr) + " fails for '" + element->id + "'";
                    }
                }
                break;
            case CollOpKind::Exists:
                return printExpr(expr) + " is false (no element of " + renderValue(recv) +
                       " satisfies the body)";
            case CollOpKind::IsEmpty:
            case CollOpKind::NotEmpty:
                return printExpr(expr) + " is false (size = " + std::to_string(coll.size()) + ")";
            case CollOpKind::Includes:
                return printExpr(expr) + " is false (collection = " + renderValue(recv) + ")";
            default:
                break;
        }
        return printExpr(expr) + " is false";
    }

    struct ScopedVar {
        ScopedVar(Evaluator& eval, const std::string& name, const ModelObject* value)
            : eval_(eval) {
            eval_.vars_.emplace_back(name, value);
        }
        ~ScopedVar() { eval_.vars_.pop_back(); }
        Evaluator& eval_;
    };

    Value evalExpr(const Expr& expr) {
        return std::visit([&](const auto& node) { return evalNode(node); }, expr.node);
    }

    Value evalNode(const BoolOp& node) {
        const bool lhs = expectBool(evalExpr(*node.lhs), "boolean operator");
        switch (node.op) {
            case BoolOpKind::And:
                if (!lhs) return Value{false};
                return Value{expectBool(evalExpr(*node.rhs), "'and'")};
            case BoolOpKind::Or:
                if (lhs) return Value{true};
                return Value{expectBool(evalExpr(*node.rhs), "'or'")};
            case BoolOpKind::Implies:
                if (!lhs) return Value{true};
                return Value{expectBool(evalExpr(*node.rhs), "'implies'")};
        }
        throw EvalAbort{"unreachable"};
    }

    Value evalNode(const NotOp& node) {
        return Value{!expectBool(evalExpr(*node.operand), "'not'")};
    }

    Value evalNode(const Compare& node) {
        const Value lhs = evalExpr(*node.lhs);
        const Value rhs = evalExpr(*node.rhs);
        if (lhs.isNumeric() && rhs.isNumeric()) {
            int cmp;
            if (lhs.isInt() && rhs.isInt()) {
                const auto a = std::get<std::int64_t>(lhs.v);
                const auto b = std::get<std::int64_t>(rhs.v);
                cmp = a < b ? -1 : a > b ? 1 : 0;
            } else {
                const double a = lhs.numeric();
                const double b = rhs.numeric();
                cmp = std::fabs(a - b) <= kRealTolerance ? 0 : a < b ? -1 : 1;
            }
            return Value{applyOrdering(node.op, cmp)};
        }
        if (lhs.isString() && rhs.isString()) {
            const auto& a = std::get<std::string>(lhs.v);
            const auto& b = std::get<std::string>(rhs.v);
            return Value{applyOrdering(node.op, a.compare(b) < 0 ? -1 : a == b ? 0 : 1)};
        }
        if (lhs.isBool() && rhs.isBool()) {
            if (node.op != CompareOp::Eq && node.op != CompareOp::Ne) {
                throw EvalAbort{"booleans only support = and <>"};
            }
            const bool eq = std::get<bool>(lhs.v) == std::get<bool>(rhs.v);
            return Value{node.op == CompareOp::Eq ? eq : !eq};
        }
        if (lhs.isObject() && rhs.isObject()) {
            if (node.op != CompareOp::Eq && node.op != CompareOp::Ne) {
                throw EvalAbort{"objects only support = and <>"};
            }
            const bool eq = std::get<const ModelObject*>(lhs.v) == std::get<const ModelObject*>(rhs.v);
            return Value{node.op == CompareOp::Eq ? eq : !eq};
        }
        throw EvalAbort{"cannot compare " + typeName(lhs) + " with " + typeName(rhs)};
    }

    static bool applyOrdering(CompareOp op, int cmp) {
        switch (op) {
            case CompareOp::Eq: return cmp == 0;
            case CompareOp::Ne: return cmp != 0;
            case CompareOp::Lt: return cmp < 0;
            case CompareOp::Le: return cmp <= 0;
            case CompareOp::Gt: return cmp > 0;
            case CompareOp::Ge: return cmp >= 0;
        }
        return false;
    }

    Value evalNode(const Arith& node) {
        const Value lhs = evalExpr(*node.lhs);
        const Value rhs = evalExpr(*node.rhs);
        if (!lhs.isNumeric() || !rhs.isNumeric()) {
            throw EvalAbort{"arithmetic needs numeric operands, got " + typeName(lhs) + " and " +
                            typeName(rhs)};
        }
        if (node.op == ArithOp::Div) {
            const double divisor = rhs.numeric();
            if (divisor == 0.0) throw EvalAbort{"division by zero"};
            return Value{lhs.numeric() / divisor};
        }
        if (lhs.isInt() && rhs.isInt()) {
            const auto a = std::get<std::int64_t>(lhs.v);
            const auto b = std::get<std::int64_t>(rhs.v);
            switch (node.op) {
                case ArithOp::Add: return Value{a + b};
                case ArithOp::Sub: return Value{a - b};
                case ArithOp::Mul: return Value{a * b};
                default: break;
            }
        }
        const double a = lhs.numeric();
        const double b = rhs.numeric();
        switch (node.op) {
            case ArithOp::Add: return Value{a + b};
            case ArithOp::Sub: return Value{a - b};
            case ArithOp::Mul: return Value{a * b};
            default: break;
        }
        throw EvalAbort{"unreachable"};
    }

    Value evalNode(const Negate& node) {
        const Value operand = evalExpr(*node.operand);
        if (operand.isInt()) return Value{-std::get<std::int64_t>(operand.v)};
        if (operand.isReal()) return Value{-std::get<double>(operand.v)};
        throw EvalAbort{"unary minus needs a numeric operand, got " + typeName(operand)};
    }

    Value evalNode(const Nav& node) {
        const Value recv = evalExpr(*node.receiver);
        if (!recv.isObject()) {
            throw EvalAbort{"cannot navigate '" + node.member + "' on " + typeName(recv) +
                            " (use '->' for collections)"};
        }
        const ModelObject& obj = *std::get<const ModelObject*>(recv.v);

        for (const auto& attr : model::allAttributesOf(mm_, obj.className)) {
            if (!sameName(attr.name, node.member)) continue;
            const ScalarValue* slot = obj.findSlot(attr.name);
            if (!slot) {
                throw EvalAbort{"slot '" + attr.name + "' of object '" + obj.id + "' is unset"};
            }
            return scalarToValue(*slot);
        }
        for (const model::MetaClass* cls : model::supertypeClosure(mm_, obj.className)) {
            for (const auto& rel : mm_.relations) {
                if (!sameName(rel.name, node.member) || !sameName(rel.source, cls->name)) continue;
                std::vector<const ModelObject*> targets;
                if (const auto* ids = obj.findLink(rel.name)) {
                    for (const auto& id : *ids) {
                        const ModelObject* target = inst_.findObject(id);
                        if (!target) {
                            throw EvalAbort{"link target '" + id + "' does not exist"};
                        }
                        targets.push_back(target);
                    }
                }
                return Value{std::move(targets)};
            }
        }
        throw EvalAbort{"'" + node.member + "' is neither an attribute nor a relation of '" +
                        obj.className + "'"};
    }

    Value scalarToValue(const ScalarValue& scalar) {
        using Kind = ScalarValue::Kind;
        switch (scalar.kind()) {
            case Kind::Int: return Value{scalar.asInt()};
            case Kind::Real: return Value{scalar.asReal()};
            case Kind::String: return Value{scalar.asString()};
            case Kind::Bool: return Value{scalar.asBool()};
            case Kind::Ref: {
                const ModelObject* target = inst_.findObject(scalar.asRef().id);
                if (!target) throw EvalAbort{"reference '" + scalar.asRef().id + "' does not exist"};
                return Value{target};
            }
        }
        throw EvalAbort{"unreachable"};
    }

    Value evalNode(const CollOp& node) {
        const Value recv = evalExpr(*node.receiver);
        if (!recv.isCollection()) {
            throw EvalAbort{"'->' operations need a collection, got " + typeName(recv)};
        }
        const auto& coll = std::get<std::vector<const ModelObject*>>(recv.v);
        switch (node.op) {
            case CollOpKind::Size: return Value{static_cast<std::int64_t>(coll.size())};
            case CollOpKind::IsEmpty: return Value{coll.empty()};
            case CollOpKind::NotEmpty: return Value{!coll.empty()};
            case CollOpKind::Includes: {
                const Value arg = evalExpr(*node.arg);
                if (!arg.isObject()) {
                    throw EvalAbort{"includes() needs an object argument, got " + typeName(arg)};
                }
                const ModelObject* wanted = std::get<const ModelObject*>(arg.v);
                return Value{std::find(coll.begin(), coll.end(), wanted) != coll.end()};
            }
            case CollOpKind::ForAll:
                for (const ModelObject* element : coll) {
                    ScopedVar scope(*this, node.var, element);
                    if (!expectBool(evalExpr(*node.arg), "forAll body")) return Value{false};
                }
                return Value{true};  // vacuous truth over the empty collection
            case CollOpKind::Exists:
                for (const ModelObject* element : coll) {
                    ScopedVar scope(*this, node.var, element);
                    if (expectBool(evalExpr(*node.arg), "exists body")) return Value{true};
                }
                return Value{false};
        }
        throw EvalAbort{"unreachable"};
    }

    Value evalNode(const SelfRef&) { return Value{self_}; }

    Value evalNode(const VarRef& node) {
        for (auto it = vars_.rbegin(); it != vars_.rend(); ++it) {
            if (it->first == node.name) return Value{it->second};
        }
        throw EvalAbort{"unbound variable '" + node.name + "'"};
    }

    Value evalNode(const Literal& node) {
        return std::visit([](const auto& value) { return Value{value}; }, node.value);
    }

    bool expectBool(const Value& value, const char* where) {
        if (!value.isBool()) {
            throw EvalAbort{std::string(where) + " needs a boolean, got " + typeName(value)};
        }
        return std::get<bool>(value.v);
    }

    const Metamodel& mm_;
    const Instance& inst_;
    const ModelObject* self_ = nullptr;
    std::vector<std::pair<std::string, const ModelObject*>> vars_;
};

}  // namespace

ComplianceResult checkCompliance(const Metamodel& mm, const Instance& inst,
                                 const std::vector<Constraint>& constraints) {
    for (const auto& constraint : constraints) {
        if (!mm.findClass(constraint.contextClass)) {
            throw Error("UNKNOWN_CONTEXT_CLASS",
                        "constraint '" + constraint.name + "' names unknown context class '" +
                            constraint.contextClass + "'");
        }
    }
    ComplianceResult result;
    Evaluator evaluator(mm, inst);
    for (const auto& constraint : constraints) {
        for (const auto& obj : inst.objects) {
            if (!model::isKindOf(mm, obj.className, constraint.contextClass)) continue;
            try {
                if (!evaluator.evalBool(*constraint.body, obj)) {
                    std::string message;
                    try {
                        message = evaluator.explainFalse(*constraint.body);
                    } catch (const EvalAbort&) {
                        message = printExpr(*constraint.body) + " is false";
                    }
                    result.violations.push_back(
                        {constraint.name, constraint.contextClass, obj.id, std::move(message)});
                }
            } catch (const EvalAbort& abort) {
                result.errors.push_back({constraint.name, obj.id, abort.message});
            }
        }
    }
    result.compliant = result.violations.empty() && result.errors.empty();
    return result;
}

std::string explainViolation(const Violation& violation) {
    return "object '" + violation.objectId + "' violates '" + violation.constraintName +
           "' (context " + violation.contextClass + "): " + violation.message;
}

}  // namespace mbe::ocl
