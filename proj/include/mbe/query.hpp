#ifndef MBE_QUERY_HPP
#define MBE_QUERY_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mbe/model.hpp"

namespace mbe::query {

enum class EdgeKind { Inheritance, Association, Composition, Aggregation };

std::string toString(EdgeKind kind);

struct ChainEdge {
    EdgeKind kind = EdgeKind::Inheritance;
    std::optional<std::string> relationName;  // present for relation edges
    bool operator==(const ChainEdge&) const = default;
};

// Shortest class-to-class path over inheritance and relation edges,
// endpoints included. edges.size() == classNames.size() - 1.
struct RelationChain {
    std::vector<std::string> classNames;
    std::vector<ChainEdge> edges;
    bool operator==(const RelationChain&) const = default;

    // "Camera -> Sensor -> ProcessingNode -> Component"
    std::string render() const;
};

// All class names in declaration order.
std::vector<std::string> listClasses(const model::Metamodel& mm);

struct Members {
    std::vector<model::AttributeDef> attributes;
    std::vector<model::OperationDef> operations;
};

// Declared + inherited members. Throws Error(UNKNOWN_CLASS).
Members listMembers(const model::Metamodel& mm, std::string_view className);

// True iff ancestorName is in the reflexive transitive supertype closure.
// Throws Error(UNKNOWN_CLASS) when either name fails to resolve.
bool isKindOf(const model::Metamodel& mm, std::string_view className,
              std::string_view ancestorName);

// direct=true: immediate subclasses; direct=false: transitive closure,
// excluding the class itself. Declaration order.
std::vector<std::string> subclassesOf(const model::Metamodel& mm, std::string_view className,
                                      bool direct);

// Shortest undirected path whose edges are inheritance pairs and relation
// source/target pairs; ties broken by the lexicographically smallest next
// class name. Throws Error(UNKNOWN_CLASS) or Error(NO_CHAIN).
RelationChain relationChain(const model::Metamodel& mm, std::string_view fromClass,
                            std::string_view toClass);

// Ids of all objects whose class isKindOf roleClass, in declaration order.
std::vector<std::string> extractByRole(const model::Metamodel& mm, const model::Instance& inst,
                                       std::string_view roleClass);

struct Property {
    std::string name;
    std::string typeRef;
    std::optional<model::ScalarValue> value;  // nullopt = unset slot
    bool operator==(const Property&) const = default;
};

// Every attribute (incl. inherited) of the named object with its slot value.
// Lookup is name-normalized. Throws Error(UNKNOWN_ELEMENT).
std::vector<Property> elementProperties(const model::Metamodel& mm, const model::Instance& inst,
                                        std::string_view elementName);

}  // namespace mbe::query

#endif  // MBE_QUERY_HPP
