#include "mbe/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace mbe {

bool isValidIdentifier(std::string_view name) {
    if (name.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(name.front()))) return false;
    return std::all_of(name.begin() + 1, name.end(), [](char c) {
        auto uc = static_cast<unsigned char>(c);
        return std::isalnum(uc) || c == '_' || c == '-';
    });
}

std::string normalizeName(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    for (char c : name) {
        auto uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc)) out.push_back(static_cast<char>(std::tolower(uc)));
    }
    return out;
}

bool sameName(std::string_view a, std::string_view b) {
    return normalizeName(a) == normalizeName(b);
}

namespace model {

std::string ScalarValue::render() const {
    // Matches the JSON forms emitted by model_io so diffs and documents agree.
    switch (kind()) {
        case Kind::Int: return nlohmann::json(asInt()).dump();
        case Kind::Real: return nlohmann::json(asReal()).dump();
        case Kind::String: return nlohmann::json(asString()).dump();
        case Kind::Bool: return asBool() ? "true" : "false";
        case Kind::Ref: return "@" + asRef().id;
    }
    return {};
}

bool scalarEquals(const ScalarValue& a, const ScalarValue& b) {
    if (a.isNumeric() && b.isNumeric()) {
        return std::fabs(a.numericValue() - b.numericValue()) <= kRealTolerance;
    }
    return a == b;
}

std::string OperationDef::signature() const {
    std::ostringstream out;
    out << "(";
    for (size_t i = 0; i < params.size(); ++i) {
        if (i > 0) out << ", ";
        out << params[i].name << ": " << params[i].typeRef;
    }
    out << ")";
    if (returns) out << ": " << *returns;
    return out.str();
}

std::string toString(RelationKind kind) {
    switch (kind) {
        case RelationKind::Association: return "association";
        case RelationKind::Composition: return "composition";
        case RelationKind::Aggregation: return "aggregation";
    }
    return {};
}

std::optional<RelationKind> relationKindFromString(std::string_view text) {
    if (text == "association") return RelationKind::Association;
    if (text == "composition") return RelationKind::Composition;
    if (text == "aggregation") return RelationKind::Aggregation;
    return std::nullopt;
}

std::string Multiplicity::render() const {
    std::ostringstream out;
    out << lower << "..";
    if (upper) {
        out << *upper;
    } else {
        out << "*";
    }
    return out.str();
}

const MetaClass* Metamodel::findClass(std::string_view name) const {
    const std::string key = normalizeName(name);
    for (const auto& cls : classes) {
        if (normalizeName(cls.name) == key) return &cls;
    }
    return nullptr;
}

const ScalarValue* ModelObject::findSlot(std::string_view name) const {
    const std::string key = normalizeName(name);
    for (const auto& [slotName, value] : slots) {
        if (normalizeName(slotName) == key) return &value;
    }
    return nullptr;
}

const std::vector<std::string>* ModelObject::findLink(std::string_view name) const {
    const std::string key = normalizeName(name);
    for (const auto& [linkName, targets] : links) {
        if (normalizeName(linkName) == key) return &targets;
    }
    return nullptr;
}

const ModelObject* Instance::findObject(std::string_view id) const {
    const std::string key = normalizeName(id);
    for (const auto& obj : objects) {
        if (normalizeName(obj.id) == key) return &obj;
    }
    return nullptr;
}

std::vector<const MetaClass*> supertypeClosure(const Metamodel& mm, std::string_view className) {
    std::vector<const MetaClass*> out;
    const MetaClass* start = mm.findClass(className);
    if (!start) return out;
    std::deque<const MetaClass*> frontier{start};
    std::unordered_set<const MetaClass*> seen{start};
    while (!frontier.empty()) {
        const MetaClass* cur = frontier.front();
        frontier.pop_front();
        out.push_back(cur);
        for (const auto& superName : cur->supertypes) {
            const MetaClass* super = mm.findClass(superName);
            if (super && seen.insert(super).second) frontier.push_back(super);
        }
    }
    return out;
}

bool isKindOf(const Metamodel& mm, std::string_view className, std::string_view ancestorName) {
    const MetaClass* ancestor = mm.findClass(ancestorName);
    if (!ancestor) return false;
    for (const MetaClass* cls : supertypeClosure(mm, className)) {
        if (cls == ancestor) return true;
    }
    return false;
}

std::vector<AttributeDef> allAttributesOf(const Metamodel& mm, std::string_view className) {
    if (!mm.findClass(className)) {
        throw Error("UNKNOWN_CLASS", "unknown class: " + std::string(className));
    }
    std::vector<AttributeDef> out;
    std::unordered_set<std::string> seen;
    for (const MetaClass* cls : supertypeClosure(mm, className)) {
        for (const auto& attr : cls->attributes) {
            if (seen.insert(normalizeName(attr.name)).second) out.push_back(attr);
        }
    }
    return out;
}

std::vector<OperationDef> allOperationsOf(const Metamodel& mm, std::string_view className) {
    if (!mm.findClass(className)) {
        throw Error("UNKNOWN_CLASS", "unknown class: " + std::string(className));
    }
    std::vector<OperationDef> out;
    std::unordered_set<std::string> seen;
    for (const MetaClass* cls : supertypeClosure(mm, className)) {
        for (const auto& op : cls->operations) {
            if (seen.insert(normalizeName(op.name)).second) out.push_back(op);
        }
    }
    return out;
}

namespace {

bool isBuiltinType(std::string_view type) {
    return type == "int" || type == "real" || type == "string" || type == "bool";
}

void checkIdentifier(std::vector<ValidationIssue>& issues, std::string_view name,
                     const std::string& path, const std::string& what) {
    if (!isValidIdentifier(name)) {
        issues.push_back({"BAD_IDENTIFIER", path, what + " name '" + std::string(name) +
                                                     "' is not a valid identifier"});
    }
}

// Tarjan-free cycle check: iterative DFS coloring over supertype edges.
void findInheritanceCycles(const Metamodel& mm, std::vector<ValidationIssue>& issues) {
    enum class Color { White, Gray, Black };
    std::unordered_map<const MetaClass*, Color> color;
    for (const auto& cls : mm.classes) color[&cls] = Color::White;

    std::set<std::string> reported;  // dedupe: one issue per cycle set
    for (const auto& cls : mm.classes) {
        if (color[&cls] != Color::White) continue;
        // stack of (node, next supertype index), with the gray path tracked
        std::vector<std::pair<const MetaClass*, size_t>> stack{{&cls, 0}};
        std::vector<const MetaClass*> path{&cls};
        color[&cls] = Color::Gray;
        while (!stack.empty()) {
            auto& [node, idx] = stack.back();
            if (idx >= node->supertypes.size()) {
                color[node] = Color::Black;
                stack.pop_back();
                path.pop_back();
                continue;
            }
            const MetaClass* super = mm.findClass(node->supertypes[idx++]);
            if (!super) continue;
            if (color[super] == Color::Gray) {
                // Collect the gray segment forming the cycle.
                std::set<std::string> members;
                bool in = false;
                for (const MetaClass* p : path) {
                    if (p == super) in = true;
                    if (in) members.insert(p->name);
                }
                std::string joined;
                for (const auto& m : members) {
                    if (!joined.empty()) joined += ", ";
                    joined += m;
                }
                if (reported.insert(joined).second) {
                    issues.push_back({"INHERITANCE_CYCLE", super->name,
                                      "inheritance cycle involving {" + joined + "}"});
                }
            } else if (color[super] == Color::White) {
                color[super] = Color::Gray;
                stack.emplace_back(super, 0);
                path.push_back(super);
            }
        }
    }
}

}  // namespace

std::vector<ValidationIssue> validateMetamodel(const Metamodel& mm) {
    std::vector<ValidationIssue> issues;
    checkIdentifier(issues, mm.name, mm.name, "metamodel");

    std::unordered_set<std::string> classNames;
    for (const auto& cls : mm.classes) {
        checkIdentifier(issues, cls.name, cls.name, "class");
        if (!classNames.insert(normalizeName(cls.name)).second) {
            issues.push_back({"DUPLICATE_CLASS", cls.name,
                              "class name '" + cls.name + "' is not unique after normalization"});
        }
    }

    for (const auto& cls : mm.classes) {
        for (const auto& superName : cls.supertypes) {
            if (!mm.findClass(superName)) {
                issues.push_back({"UNRESOLVED_SUPERTYPE", cls.name,
                                  "class '" + cls.name + "' lists unknown supertype '" +
                                      superName + "'"});
            }
        }

        std::unordered_set<std::string> attrNames;
        for (const auto& attr : cls.attributes) {
            const std::string path = cls.name + "." + attr.name;
            checkIdentifier(issues, attr.name, path, "attribute");
            if (!attrNames.insert(normalizeName(attr.name)).second) {
                issues.push_back({"DUPLICATE_ATTRIBUTE", path,
                                  "attribute '" + attr.name + "' declared twice in '" +
                                      cls.name + "'"});
            }
            if (!isBuiltinType(attr.typeRef) && !mm.findClass(attr.typeRef)) {
                issues.push_back({"UNRESOLVED_TYPE", path,
                                  "attribute type '" + attr.typeRef + "' does not resolve"});
            }
        }

        std::unordered_set<std::string> opNames;
        for (const auto& op : cls.operations) {
            const std::string path = cls.name + "." + op.name;
            checkIdentifier(issues, op.name, path, "operation");
            if (!opNames.insert(normalizeName(op.name)).second) {
                issues.push_back({"DUPLICATE_OPERATION", path,
                                  "operation '" + op.name + "' declared twice in '" +
                                      cls.name + "'"});
            }
            std::unordered_set<std::string> paramNames;
            for (const auto& param : op.params) {
                if (!paramNames.insert(normalizeName(param.name)).second) {
                    issues.push_back({"DUPLICATE_PARAM", path,
                                      "parameter '" + param.name + "' declared twice"});
                }
                if (!isBuiltinType(param.typeRef) && !mm.findClass(param.typeRef)) {
                    issues.push_back({"UNRESOLVED_TYPE", path,
                                      "parameter type '" + param.typeRef + "' does not resolve"});
                }
            }
            if (op.returns && !isBuiltinType(*op.returns) && !mm.findClass(*op.returns)) {
                issues.push_back({"UNRESOLVED_TYPE", path,
                                  "return type '" + *op.returns + "' does not resolve"});
            }
        }
    }

    findInheritanceCycles(mm, issues);

    // Shadowing check runs on the closure, so it also catches same-named
    // attributes converging from two unrelated supertypes.
    for (const auto& cls : mm.classes) {
        std::unordered_map<std::string, const MetaClass*> owner;
        for (const MetaClass* c : supertypeClosure(mm, cls.name)) {
            for (const auto& attr : c->attributes) {
                auto [it, inserted] = owner.emplace(normalizeName(attr.name), c);
                if (!inserted && it->second != c) {
                    issues.push_back({"ATTRIBUTE_SHADOWED", cls.name + "." + attr.name,
                                      "attribute '" + attr.name + "' of '" + c->name +
                                          "' collides with the one inherited via '" +
                                          it->second->name + "'"});
                }
            }
        }
    }

    for (const auto& rel : mm.relations) {
        const std::string path = rel.source + "." + rel.name;
        checkIdentifier(issues, rel.name, path, "relation");
        if (!mm.findClass(rel.source)) {
            issues.push_back({"UNRESOLVED_RELATION_END", path,
                              "relation source '" + rel.source + "' does not resolve"});
        }
        if (!mm.findClass(rel.target)) {
            issues.push_back({"UNRESOLVED_RELATION_END", path,
                              "relation target '" + rel.target + "' does not resolve"});
        }
        if (rel.multiplicity.lower < 0 ||
            (rel.multiplicity.upper &&
             (*rel.multiplicity.upper < 1 || rel.multiplicity.lower > *rel.multiplicity.upper))) {
            issues.push_back({"MULTIPLICITY_INVALID", path,
                              "multiplicity " + rel.multiplicity.render() + " is invalid"});
        }
    }
    std::set<std::pair<std::string, std::string>> relKeys;
    for (const auto& rel : mm.relations) {
        if (!relKeys.insert({normalizeName(rel.source), normalizeName(rel.name)}).second) {
            issues.push_back({"DUPLICATE_RELATION", rel.source + "." + rel.name,
                              "relation '" + rel.name + "' declared twice for source '" +
                                  rel.source + "'"});
        }
    }
    return issues;
}

namespace {

bool slotTypeMatches(const Metamodel& mm, const Instance& inst, const AttributeDef& attr,
                     const ScalarValue& value) {
    using Kind = ScalarValue::Kind;
    if (attr.typeRef == "int") return value.kind() == Kind::Int;
    if (attr.typeRef == "real") return value.kind() == Kind::Real || value.kind() == Kind::Int;
    if (attr.typeRef == "string") return value.kind() == Kind::String;
    if (attr.typeRef == "bool") return value.kind() == Kind::Bool;
    // Class-typed attribute: value must reference an existing object whose
    // class conforms to the attribute type. Plain strings are accepted as ids.
    std::string id;
    if (value.kind() == Kind::Ref) {
        id = value.asRef().id;
    } else if (value.kind() == Kind::String) {
        id = value.asString();
    } else {
        return false;
    }
    const ModelObject* target = inst.findObject(id);
    return target && isKindOf(mm, target->className, attr.typeRef);
}

}  // namespace

std::vector<ValidationIssue> instanceStructureIssues(const Instance& inst) {
    std::vector<ValidationIssue> issues;
    std::unordered_set<std::string> ids;
    for (const auto& obj : inst.objects) {
        checkIdentifier(issues, obj.id, obj.id, "object");
        if (!ids.insert(normalizeName(obj.id)).second) {
            issues.push_back({"DUPLICATE_OBJECT", obj.id,
                              "object id '" + obj.id + "' is not unique"});
        }
        for (const auto& [slotName, value] : obj.slots) {
            if (value.kind() == ScalarValue::Kind::Real && !std::isfinite(value.asReal())) {
                issues.push_back({"NON_FINITE_REAL", obj.id + "." + slotName,
                                  "real slot value must be finite"});
            }
        }
    }
    return issues;
}

std::vector<ValidationIssue> validateInstance(const Instance& inst, const Metamodel& mm) {
    std::vector<ValidationIssue> issues;
    if (!sameName(inst.metamodelName, mm.name)) {
        issues.push_back({"METAMODEL_MISMATCH", inst.metamodelName,
                          "instance references metamodel '" + inst.metamodelName +
                              "' but was validated against '" + mm.name + "'"});
    }

    const auto structural = instanceStructureIssues(inst);
    issues.insert(issues.end(), structural.begin(), structural.end());

    for (const auto& obj : inst.objects) {
        const MetaClass* cls = mm.findClass(obj.className);
        if (!cls) {
            issues.push_back({"UNKNOWN_CLASS", obj.id,
                              "object '" + obj.id + "' has unknown class '" + obj.className + "'"});
            continue;
        }
        if (cls->abstractFlag) {
            issues.push_back({"ABSTRACT_INSTANTIATION", obj.id,
                              "object '" + obj.id + "' instantiates abstract class '" +
                                  cls->name + "'"});
        }

        const auto attrs = allAttributesOf(mm, cls->name);
        for (const auto& [slotName, value] : obj.slots) {
            const AttributeDef* attr = nullptr;
            for (const auto& a : attrs) {
                if (sameName(a.name, slotName)) {
                    attr = &a;
                    break;
                }
            }
            const std::string path = obj.id + "." + slotName;
            if (!attr) {
                issues.push_back({"UNKNOWN_SLOT", path,
                                  "slot '" + slotName + "' does not match any attribute of '" +
                                      cls->name + "'"});
                continue;
            }
            if (!slotTypeMatches(mm, inst, *attr, value)) {
                issues.push_back({"SLOT_TYPE_MISMATCH", path,
                                  "slot '" + slotName + "' value " + value.render() +
                                      " does not match type '" + attr->typeRef + "'"});
            }
        }

        // Resolve each link against relations visible from the object's class.
        for (const auto& [linkName, targets] : obj.links) {
            const Relation* rel = nullptr;
            for (const MetaClass* c : supertypeClosure(mm, cls->name)) {
                for (const auto& r : mm.relations) {
                    if (sameName(r.name, linkName) && sameName(r.source, c->name)) {
                        rel = &r;
                        break;
                    }
                }
                if (rel) break;
            }
            const std::string path = obj.id + "." + linkName;
            if (!rel) {
                issues.push_back({"UNKNOWN_LINK", path,
                                  "link '" + linkName + "' matches no relation reachable from '" +
                                      cls->name + "'"});
                continue;
            }
            for (const auto& targetId : targets) {
                const ModelObject* target = inst.findObject(targetId);
                if (!target) {
                    issues.push_back({"UNKNOWN_LINK_TARGET", path,
                                      "link target '" + targetId + "' does not exist"});
                } else if (!isKindOf(mm, target->className, rel->target)) {
                    issues.push_back({"LINK_TARGET_TYPE_MISMATCH", path,
                                      "link target '" + targetId + "' of class '" +
                                          target->className + "' does not conform to '" +
                                          rel->target + "'"});
                }
            }
        }

        // Cardinality: every relation applicable to this object constrains the
        // number of targets, with an absent link counting as zero.
        for (const auto& rel : mm.relations) {
            if (!isKindOf(mm, cls->name, rel.source)) continue;
            const auto* targets = obj.findLink(rel.name);
            const std::int64_t count = targets ? static_cast<std::int64_t>(targets->size()) : 0;
            const bool belowLower = count < rel.multiplicity.lower;
            const bool aboveUpper = rel.multiplicity.upper && count > *rel.multiplicity.upper;
            if (belowLower || aboveUpper) {
                issues.push_back({"LINK_CARDINALITY", obj.id + "." + rel.name,
                                  "link '" + rel.name + "' has " + std::to_string(count) +
                                      " target(s), multiplicity is " + rel.multiplicity.render()});
            }
        }
    }
    return issues;
}

}  // namespace model
}  // namespace mbe
