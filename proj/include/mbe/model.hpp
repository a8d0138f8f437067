#ifndef MBE_MODEL_HPP
#define MBE_MODEL_HPP

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mbe {

// Shared error type for hard failures (unknown names, bad payloads, backend
// faults). Recoverable findings travel as data (ValidationIssue, ParseError).
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

// Identifier syntax: nonempty, first char alphabetic, then
// alphanumeric/underscore/hyphen. Accommodates names like "Co-Processor".
bool isValidIdentifier(std::string_view name);

// Lookup normalization: case-insensitive, all non-alphanumeric characters
// stripped, so "Co-Processor" == "CoProcessor" == "co processor".
std::string normalizeName(std::string_view name);

bool sameName(std::string_view a, std::string_view b);

// Absolute tolerance for real-valued comparisons in validation and diffing.
inline constexpr double kRealTolerance = 1e-9;

namespace model {

struct RefId {
    std::string id;
    bool operator==(const RefId&) const = default;
};

// Attribute slot value: int, real, string, bool, or object reference.
class ScalarValue {
public:
    enum class Kind { Int, Real, String, Bool, Ref };

    ScalarValue() : v_(std::int64_t{0}) {}
    explicit ScalarValue(std::int64_t i) : v_(i) {}
    explicit ScalarValue(double d) : v_(d) {}
    explicit ScalarValue(std::string s) : v_(std::move(s)) {}
    explicit ScalarValue(bool b) : v_(b) {}
    explicit ScalarValue(RefId r) : v_(std::move(r)) {}

    Kind kind() const { return static_cast<Kind>(v_.index()); }
    bool isNumeric() const { return kind() == Kind::Int || kind() == Kind::Real; }

    std::int64_t asInt() const { return std::get<std::int64_t>(v_); }
    double asReal() const { return std::get<double>(v_); }
    const std::string& asString() const { return std::get<std::string>(v_); }
    bool asBool() const { return std::get<bool>(v_); }
    const RefId& asRef() const { return std::get<RefId>(v_); }

    double numericValue() const {
        return kind() == Kind::Int ? static_cast<double>(asInt()) : asReal();
    }

    // Exact structural equality (kind + payload).
    bool operator==(const ScalarValue&) const = default;

    // Deterministic single-line rendering, e.g. for diff entries.
    std::string render() const;

private:
    std::variant<std::int64_t, double, std::string, bool, RefId> v_;
};

// Numeric values compare with kRealTolerance; everything else by kind+payload.
bool scalarEquals(const ScalarValue& a, const ScalarValue& b);

struct AttributeDef {
    std::string name;
    std::string typeRef;  // "int" | "real" | "string" | "bool" | class name
    bool operator==(const AttributeDef&) const = default;
};

struct ParamDef {
    std::string name;
    std::string typeRef;
    bool operator==(const ParamDef&) const = default;
};

struct OperationDef {
    std::string name;
    std::vector<ParamDef> params;
    std::optional<std::string> returns;
    bool operator==(const OperationDef&) const = default;

    // "(task: ProcessingTask): bool"
    std::string signature() const;
};

struct MetaClass {
    std::string name;
    bool abstractFlag = false;
    std::vector<std::string> supertypes;
    std::vector<AttributeDef> attributes;
    std::vector<OperationDef> operations;
    bool operator==(const MetaClass&) const = default;
};

enum class RelationKind { Association, Composition, Aggregation };

std::string toString(RelationKind kind);
std::optional<RelationKind> relationKindFromString(std::string_view text);

struct Multiplicity {
    std::int64_t lower = 0;
    std::optional<std::int64_t> upper;  // nullopt = unbounded ("*")
    bool operator==(const Multiplicity&) const = default;

    std::string render() const;  // "0..*", "1..1", ...
};

struct Relation {
    RelationKind kind = RelationKind::Association;
    std::string name;
    std::string source;
    std::string target;
    Multiplicity multiplicity;
    bool operator==(const Relation&) const = default;
};

struct Metamodel {
    std::string name;
    std::vector<MetaClass> classes;
    std::vector<Relation> relations;
    bool operator==(const Metamodel&) const = default;

    const MetaClass* findClass(std::string_view name) const;
};

struct ModelObject {
    std::string id;
    std::string className;
    std::vector<std::pair<std::string, ScalarValue>> slots;  // declaration order
    std::vector<std::pair<std::string, std::vector<std::string>>> links;
    bool operator==(const ModelObject&) const = default;

    const ScalarValue* findSlot(std::string_view name) const;
    const std::vector<std::string>* findLink(std::string_view name) const;
};

struct Instance {
    std::string metamodelName;
    std::vector<ModelObject> objects;
    bool operator==(const Instance&) const = default;

    const ModelObject* findObject(std::string_view id) const;
};

struct ValidationIssue {
    std::string code;     // machine-readable, e.g. UNRESOLVED_SUPERTYPE
    std::string path;     // offending element, e.g. "X" or "Camera.resolution"
    std::string message;
    bool operator==(const ValidationIssue&) const = default;
};

// Issue codes are stable identifiers; tests match on them.
std::vector<ValidationIssue> validateMetamodel(const Metamodel& mm);
std::vector<ValidationIssue> validateInstance(const Instance& inst, const Metamodel& mm);

// The subset of instance checks that need no metamodel: identifier syntax,
// object-id uniqueness, finite reals. validateInstance includes these.
std::vector<ValidationIssue> instanceStructureIssues(const Instance& inst);

// Declared attributes first, then inherited ones nearest ancestor first.
// Throws Error(UNKNOWN_CLASS) when the class does not resolve.
std::vector<AttributeDef> allAttributesOf(const Metamodel& mm, std::string_view className);

// Same walk for operations; an operation redeclared in a subclass overrides
// the inherited one.
std::vector<OperationDef> allOperationsOf(const Metamodel& mm, std::string_view className);

// Reflexive transitive supertype closure test.
bool isKindOf(const Metamodel& mm, std::string_view className, std::string_view ancestorName);

// Supertype closure in BFS order, including the class itself first.
// Silently stops at unresolved supertype names (validation reports those).
std::vector<const MetaClass*> supertypeClosure(const Metamodel& mm, std::string_view className);

}  // namespace model
}  // namespace mbe

#endif  // MBE_MODEL_HPP
