#ifndef MBE_TESTS_GENERATORS_HPP
#define MBE_TESTS_GENERATORS_HPP

#include <algorithm>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mbe/model.hpp"
#include "mbe/ocl.hpp"

namespace mbe::testgen {

using Rng = std::mt19937;

inline int pick(Rng& rng, int loInclusive, int hiInclusive) {
    return std::uniform_int_distribution<int>(loInclusive, hiInclusive)(rng);
}

inline bool chance(Rng& rng, double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

template <typename T>
const T& pickOne(Rng& rng, const std::vector<T>& items) {
    return items[static_cast<size_t>(pick(rng, 0, static_cast<int>(items.size()) - 1))];
}

// ---------------------------------------------------------------------------
// Random valid metamodels. Connected by construction: every class after the
// first hooks into an earlier one via inheritance or a relation. Attribute
// names are globally unique so shadowing can never arise.
// ---------------------------------------------------------------------------

inline model::Metamodel randomMetamodel(Rng& rng, int maxClasses = 15) {
    static const std::vector<std::string> builtins{"int", "real", "string", "bool"};
    model::Metamodel mm;
    mm.name = "gen" + std::to_string(pick(rng, 0, 999999));
    const int classCount = pick(rng, 1, maxClasses);
    int attrCounter = 0;
    int opCounter = 0;
    int relCounter = 0;

    for (int i = 0; i < classCount; ++i) {
        model::MetaClass cls;
        cls.name = "C" + std::to_string(i);
        cls.abstractFlag = chance(rng, 0.2);
        mm.classes.push_back(std::move(cls));
    }

    // Spanning connection: class i attaches to some j < i.
    for (int i = 1; i < classCount; ++i) {
        const int j = pick(rng, 0, i - 1);
        if (chance(rng, 0.5)) {
            mm.classes[i].supertypes.push_back(mm.classes[j].name);
        } else {
            model::Relation rel;
            rel.kind = static_cast<model::RelationKind>(pick(rng, 0, 2));
            rel.name = "r" + std::to_string(relCounter++);
            rel.source = mm.classes[i].name;
            rel.target = mm.classes[j].name;
            rel.multiplicity.lower = 0;
            rel.multiplicity.upper = chance(rng, 0.5)
                                         ? std::optional<std::int64_t>(pick(rng, 1, 4))
                                         : std::nullopt;
            mm.relations.push_back(std::move(rel));
        }
    }

    // Extra inheritance edges (acyclic: only towards earlier classes).
    for (int i = 2; i < classCount; ++i) {
        if (!chance(rng, 0.15)) continue;
        const int j = pick(rng, 0, i - 1);
        auto& supers = mm.classes[i].supertypes;
        if (std::find(supers.begin(), supers.end(), mm.classes[j].name) == supers.end()) {
            supers.push_back(mm.classes[j].name);
        }
    }

    // Members.
    for (auto& cls : mm.classes) {
        const int attrCount = pick(rng, 0, 3);
        for (int a = 0; a < attrCount; ++a) {
            std::string type = pickOne(rng, builtins);
            if (chance(rng, 0.1)) type = pickOne(rng, mm.classes).name;
            cls.attributes.push_back({"att" + std::to_string(attrCounter++), type});
        }
        if (chance(rng, 0.3)) {
            model::OperationDef op;
            op.name = "op" + std::to_string(opCounter++);
            const int paramCount = pick(rng, 0, 2);
            for (int p = 0; p < paramCount; ++p) {
                op.params.push_back({"p" + std::to_string(p), pickOne(rng, builtins)});
            }
            if (chance(rng, 0.7)) op.returns = pickOne(rng, builtins);
            cls.operations.push_back(std::move(op));
        }
    }

    // Extra relations.
    const int extraRelations = pick(rng, 0, classCount / 2);
    for (int r = 0; r < extraRelations; ++r) {
        model::Relation rel;
        rel.kind = static_cast<model::RelationKind>(pick(rng, 0, 2));
        rel.name = "r" + std::to_string(relCounter++);
        rel.source = pickOne(rng, mm.classes).name;
        rel.target = pickOne(rng, mm.classes).name;
        rel.multiplicity.lower = 0;
        rel.multiplicity.upper =
            chance(rng, 0.5) ? std::optional<std::int64_t>(pick(rng, 1, 4)) : std::nullopt;
        mm.relations.push_back(std::move(rel));
    }
    return mm;
}

// ---------------------------------------------------------------------------
// Test metamodel with attribute-bearing link targets, for evaluator oracles:
// Node --items--> Item{weight:int, price:real, tag:string}, Node.fav: Item.
// ---------------------------------------------------------------------------

inline model::Metamodel inventoryMetamodel() {
    model::Metamodel mm;
    mm.name = "inventory";
    model::MetaClass node;
    node.name = "Node";
    node.attributes.push_back({"fav", "Item"});
    node.attributes.push_back({"capacity", "int"});
    model::MetaClass item;
    item.name = "Item";
    item.attributes.push_back({"weight", "int"});
    item.attributes.push_back({"price", "real"});
    item.attributes.push_back({"tag", "string"});
    mm.classes.push_back(std::move(node));
    mm.classes.push_back(std::move(item));
    model::Relation items;
    items.kind = model::RelationKind::Composition;
    items.name = "items";
    items.source = "Node";
    items.target = "Item";
    items.multiplicity = {0, std::nullopt};
    mm.relations.push_back(std::move(items));
    return mm;
}

// Instance over inventoryMetamodel: one node with 0..maxItems items, every
// slot set, fav pointing at a random item when any exist.
inline model::Instance randomInventoryInstance(Rng& rng, int maxItems = 8) {
    model::Instance inst;
    inst.metamodelName = "inventory";
    const int itemCount = pick(rng, 0, maxItems);
    std::vector<std::string> itemIds;
    for (int i = 0; i < itemCount; ++i) {
        model::ModelObject item;
        item.id = "item" + std::to_string(i);
        item.className = "Item";
        item.slots.emplace_back("weight", model::ScalarValue(std::int64_t(pick(rng, 0, 20))));
        item.slots.emplace_back("price", model::ScalarValue(pick(rng, 0, 400) / 4.0));
        item.slots.emplace_back("tag", model::ScalarValue(std::string(1, char('a' + pick(rng, 0, 3)))));
        itemIds.push_back(item.id);
        inst.objects.push_back(std::move(item));
    }
    model::ModelObject node;
    node.id = "node0";
    node.className = "Node";
    node.slots.emplace_back("capacity", model::ScalarValue(std::int64_t(pick(rng, 0, 30))));
    if (!itemIds.empty()) {
        node.slots.emplace_back("fav", model::ScalarValue(model::RefId{pickOne(rng, itemIds)}));
        std::vector<std::string> linked = itemIds;
        std::shuffle(linked.begin(), linked.end(), rng);
        linked.resize(static_cast<size_t>(pick(rng, 0, static_cast<int>(linked.size()))));
        node.links.emplace_back("items", std::move(linked));
    }
    inst.objects.push_back(std::move(node));
    return inst;
}

// ---------------------------------------------------------------------------
// Random OCL expression ASTs for print/parse round-trips. Syntactic only; the
// trees need not evaluate. Bound-variable references always resolve.
// ---------------------------------------------------------------------------

inline ocl::ExprPtr randomExpr(Rng& rng, int depth, std::vector<std::string>& scope) {
    using namespace ocl;
    auto leaf = [&]() -> ExprPtr {
        switch (pick(rng, 0, 5)) {
            case 0: return std::make_shared<Expr>(Expr{SelfRef{}});
            case 1:
                if (!scope.empty()) {
                    return std::make_shared<Expr>(Expr{VarRef{pickOne(rng, scope)}});
                }
                [[fallthrough]];
            case 2: return std::make_shared<Expr>(Expr{Literal{std::int64_t(pick(rng, 0, 999))}});
            case 3: return std::make_shared<Expr>(Expr{Literal{pick(rng, 0, 400) / 4.0}});
            case 4: return std::make_shared<Expr>(Expr{Literal{chance(rng, 0.5)}});
            default: {
                std::string text;
                const int len = pick(rng, 0, 5);
                for (int i = 0; i < len; ++i) {
                    const int c = pick(rng, 0, 27);
                    if (c == 26) {
                        text.push_back('\'');
                    } else if (c == 27) {
                        text.push_back('\\');
                    } else {
                        text.push_back(char('a' + c));
                    }
                }
                return std::make_shared<Expr>(Expr{Literal{text}});
            }
        }
    };
    if (depth <= 0) return leaf();

    switch (pick(rng, 0, 8)) {
        case 0: {
            const auto op = static_cast<BoolOpKind>(pick(rng, 0, 2));
            return std::make_shared<Expr>(
                Expr{BoolOp{op, randomExpr(rng, depth - 1, scope), randomExpr(rng, depth - 1, scope)}});
        }
        case 1:
            return std::make_shared<Expr>(Expr{NotOp{randomExpr(rng, depth - 1, scope)}});
        case 2: {
            const auto op = static_cast<CompareOp>(pick(rng, 0, 5));
            return std::make_shared<Expr>(Expr{
                Compare{op, randomExpr(rng, depth - 1, scope), randomExpr(rng, depth - 1, scope)}});
        }
        case 3: {
            const auto op = static_cast<ArithOp>(pick(rng, 0, 3));
            return std::make_shared<Expr>(Expr{
                Arith{op, randomExpr(rng, depth - 1, scope), randomExpr(rng, depth - 1, scope)}});
        }
        case 4:
            return std::make_shared<Expr>(Expr{Negate{randomExpr(rng, depth - 1, scope)}});
        case 5:
            return std::make_shared<Expr>(
                Expr{Nav{randomExpr(rng, depth - 1, scope), "m" + std::to_string(pick(rng, 0, 9))}});
        case 6: {
            CollOp node;
            node.receiver = randomExpr(rng, depth - 1, scope);
            node.op = static_cast<CollOpKind>(pick(rng, 0, 5));
            if (node.op == CollOpKind::ForAll || node.op == CollOpKind::Exists) {
                node.var = "v" + std::to_string(scope.size());
                scope.push_back(node.var);
                node.arg = randomExpr(rng, depth - 1, scope);
                scope.pop_back();
            } else if (node.op == CollOpKind::Includes) {
                node.arg = randomExpr(rng, depth - 1, scope);
            }
            return std::make_shared<Expr>(Expr{std::move(node)});
        }
        default:
            return leaf();
    }
}

inline ocl::ExprPtr randomExpr(Rng& rng, int depth = 4) {
    std::vector<std::string> scope;
    return randomExpr(rng, depth, scope);
}

// Boolean-valued expressions over inventory instances, for logic properties.
inline ocl::ExprPtr randomBoolExpr(Rng& rng, int depth) {
    using namespace ocl;
    auto self = [] { return std::make_shared<Expr>(Expr{SelfRef{}}); };
    auto navItems = [&] { return std::make_shared<Expr>(Expr{Nav{self(), "items"}}); };
    auto intLit = [&](std::int64_t v) { return std::make_shared<Expr>(Expr{Literal{v}}); };

    if (depth <= 0) {
        switch (pick(rng, 0, 4)) {
            case 0:
                return std::make_shared<Expr>(Expr{Literal{chance(rng, 0.5)}});
            case 1:  // self.capacity OP k
                return std::make_shared<Expr>(
                    Expr{Compare{static_cast<CompareOp>(pick(rng, 0, 5)),
                                 std::make_shared<Expr>(Expr{Nav{self(), "capacity"}}),
                                 intLit(pick(rng, 0, 30))}});
            case 2:  // self.items->size() OP k
                return std::make_shared<Expr>(Expr{Compare{
                    static_cast<CompareOp>(pick(rng, 0, 5)),
                    std::make_shared<Expr>(Expr{CollOp{navItems(), CollOpKind::Size, "", nullptr}}),
                    intLit(pick(rng, 0, 8))}});
            case 3:
                return std::make_shared<Expr>(
                    Expr{CollOp{navItems(), CollOpKind::IsEmpty, "", nullptr}});
            default:  // self.items->includes(self.fav) -- errors when fav unset
                return std::make_shared<Expr>(
                    Expr{CollOp{navItems(), CollOpKind::Includes, "",
                                std::make_shared<Expr>(Expr{Nav{self(), "fav"}})}});
        }
    }
    switch (pick(rng, 0, 4)) {
        case 0:
        case 1: {
            const auto op = static_cast<BoolOpKind>(pick(rng, 0, 2));
            return std::make_shared<Expr>(Expr{
                BoolOp{op, randomBoolExpr(rng, depth - 1), randomBoolExpr(rng, depth - 1)}});
        }
        case 2:
            return std::make_shared<Expr>(Expr{NotOp{randomBoolExpr(rng, depth - 1)}});
        case 3: {  // quantifier over items with a comparison body
            CollOp node;
            node.receiver = navItems();
            node.op = chance(rng, 0.5) ? CollOpKind::ForAll : CollOpKind::Exists;
            node.var = "x";
            node.arg = std::make_shared<Expr>(
                Expr{Compare{static_cast<CompareOp>(pick(rng, 0, 5)),
                             std::make_shared<Expr>(Expr{Nav{
                                 std::make_shared<Expr>(Expr{VarRef{"x"}}), "weight"}}),
                             intLit(pick(rng, 0, 20))}});
            return std::make_shared<Expr>(Expr{std::move(node)});
        }
        default:
            return randomBoolExpr(rng, 0);
    }
}

// ---------------------------------------------------------------------------
// Primitive-edit generators for diff properties. Each edit touches exactly one
// element; candidates that break validity are discarded and redrawn.
// ---------------------------------------------------------------------------

inline std::optional<model::Metamodel> tryMetamodelEdit(Rng& rng, const model::Metamodel& base,
                                                        int salt) {
    static const std::vector<std::string> builtins{"int", "real", "string", "bool"};
    model::Metamodel mm = base;
    const int classCount = static_cast<int>(mm.classes.size());
    switch (pick(rng, 0, 11)) {
        case 0: {  // add class
            model::MetaClass cls;
            cls.name = "Zadd" + std::to_string(salt);
            mm.classes.push_back(std::move(cls));
            break;
        }
        case 1: {  // remove class (post-validation rejects dangling references)
            if (classCount == 0) return std::nullopt;
            mm.classes.erase(mm.classes.begin() + pick(rng, 0, classCount - 1));
            break;
        }
        case 2: {  // toggle abstract
            if (classCount == 0) return std::nullopt;
            auto& cls = mm.classes[static_cast<size_t>(pick(rng, 0, classCount - 1))];
            cls.abstractFlag = !cls.abstractFlag;
            break;
        }
        case 3: {  // add supertype
            if (classCount < 2) return std::nullopt;
            auto& cls = mm.classes[static_cast<size_t>(pick(rng, 0, classCount - 1))];
            const auto& super = pickOne(rng, mm.classes).name;
            if (sameName(cls.name, super)) return std::nullopt;
            for (const auto& existing : cls.supertypes) {
                if (sameName(existing, super)) return std::nullopt;
            }
            cls.supertypes.push_back(super);
            break;
        }
        case 4: {  // remove supertype
            if (classCount == 0) return std::nullopt;
            auto& cls = mm.classes[static_cast<size_t>(pick(rng, 0, classCount - 1))];
            if (cls.supertypes.empty()) return std::nullopt;
            cls.supertypes.erase(cls.supertypes.begin() +
                                 pick(rng, 0, static_cast<int>(cls.supertypes.size()) - 1));
            break;
        }
        case 5: {  // add attribute
            if (classCount == 0) return std::nullopt;
            auto& cls = mm.classes[static_cast<size_t>(pick(rng, 0, classCount - 1))];
            cls.attributes.push_back({"zatt" + std::to_string(salt), pickOne(rng, builtins)});
            break;
        }
        case 6: {  // remove attribute
            if (classCount == 0) return std::nullopt;
            auto& cls = mm.classes[static_cast<size_t>(pick(rng, 0, classCount - 1))];
            if (cls.attributes.empty()) return std::nullopt;
            cls.attributes.erase(cls.attributes.begin() +
                                 pick(rng, 0, static_cast<int>(cls.attributes.size()) - 1));
            break;
        }
        case 7: {  // change attribute type
            if (classCount == 0) return std::nullopt;
            auto& cls = mm.classes[static_cast<size_t>(pick(rng, 0, classCount - 1))];
            if (cls.attributes.empty()) return std::nullopt;
            auto& attr = cls.attributes[static_cast<size_t>(
                pick(rng, 0, static_cast<int>(cls.attributes.size()) - 1))];
            std::string next = pickOne(rng, builtins);
            if (next == attr.typeRef) next = next == "int" ? "real" : "int";
            attr.typeRef = next;
            break;
        }
        case 8: {  // add or remove operation
            if (classCount == 0) return std::nullopt;
            auto& cls = mm.classes[static_cast<size_t>(pick(rng, 0, classCount - 1))];
            if (cls.operations.empty() || chance(rng, 0.5)) {
                model::OperationDef op;
                op.name = "zop" + std::to_string(salt);
                op.returns = pickOne(rng, builtins);
                cls.operations.push_back(std::move(op));
            } else {
                cls.operations.erase(cls.operations.begin() +
                                     pick(rng, 0, static_cast<int>(cls.operations.size()) - 1));
            }
            break;
        }
        case 9: {  // change operation signature
            if (classCount == 0) return std::nullopt;
            auto& cls = mm.classes[static_cast<size_t>(pick(rng, 0, classCount - 1))];
            if (cls.operations.empty()) return std::nullopt;
            auto& op = cls.operations[static_cast<size_t>(
                pick(rng, 0, static_cast<int>(cls.operations.size()) - 1))];
            if (chance(rng, 0.5)) {
                op.params.push_back({"q" + std::to_string(op.params.size()), "int"});
            } else {
                op.returns = op.returns && *op.returns == "int" ? std::optional<std::string>("bool")
                                                                : std::optional<std::string>("int");
            }
            break;
        }
        case 10: {  // add or remove relation
            if (classCount == 0) return std::nullopt;
            if (mm.relations.empty() || chance(rng, 0.5)) {
                model::Relation rel;
                rel.kind = static_cast<model::RelationKind>(pick(rng, 0, 2));
                rel.name = "zrel" + std::to_string(salt);
                rel.source = pickOne(rng, mm.classes).name;
                rel.target = pickOne(rng, mm.classes).name;
                rel.multiplicity = {0, std::nullopt};
                mm.relations.push_back(std::move(rel));
            } else {
                mm.relations.erase(mm.relations.begin() +
                                   pick(rng, 0, static_cast<int>(mm.relations.size()) - 1));
            }
            break;
        }
        default: {  // change relation target/kind/multiplicity
            if (mm.relations.empty() || classCount == 0) return std::nullopt;
            auto& rel = mm.relations[static_cast<size_t>(
                pick(rng, 0, static_cast<int>(mm.relations.size()) - 1))];
            switch (pick(rng, 0, 2)) {
                case 0:
                    rel.kind = static_cast<model::RelationKind>(
                        (static_cast<int>(rel.kind) + 1) % 3);
                    break;
                case 1: {
                    const auto& next = pickOne(rng, mm.classes).name;
                    if (sameName(rel.target, next)) return std::nullopt;
                    rel.target = next;
                    break;
                }
                default:
                    rel.multiplicity.upper = rel.multiplicity.upper
                                                 ? std::nullopt
                                                 : std::optional<std::int64_t>(pick(rng, 1, 4));
                    break;
            }
            break;
        }
    }
    if (!model::validateMetamodel(mm).empty()) return std::nullopt;
    return mm;
}

inline model::Metamodel randomMetamodelEdit(Rng& rng, const model::Metamodel& base) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        if (auto edited = tryMetamodelEdit(rng, base, pick(rng, 0, 1'000'000))) return *edited;
    }
    // With addClass always applicable this is unreachable in practice.
    model::Metamodel mm = base;
    model::MetaClass cls;
    cls.name = "Zfallback";
    mm.classes.push_back(std::move(cls));
    return mm;
}

inline std::optional<model::Instance> tryInstanceEdit(Rng& rng, const model::Instance& base,
                                                      const model::Metamodel& mm, int salt) {
    model::Instance inst = base;
    std::vector<size_t> itemIdx, nodeIdx;
    for (size_t i = 0; i < inst.objects.size(); ++i) {
        (sameName(inst.objects[i].className, "Item") ? itemIdx : nodeIdx).push_back(i);
    }
    switch (pick(rng, 0, 3)) {
        case 0: {  // change one slot value
            if (inst.objects.empty()) return std::nullopt;
            auto& obj = inst.objects[static_cast<size_t>(
                pick(rng, 0, static_cast<int>(inst.objects.size()) - 1))];
            if (obj.slots.empty()) return std::nullopt;
            auto& [name, value] = obj.slots[static_cast<size_t>(
                pick(rng, 0, static_cast<int>(obj.slots.size()) - 1))];
            using Kind = model::ScalarValue::Kind;
            switch (value.kind()) {
                case Kind::Int: value = model::ScalarValue(value.asInt() + 1); break;
                case Kind::Real: value = model::ScalarValue(value.asReal() + 1.0); break;
                case Kind::String: value = model::ScalarValue(value.asString() + "x"); break;
                case Kind::Bool: value = model::ScalarValue(!value.asBool()); break;
                case Kind::Ref: {
                    if (itemIdx.size() < 2) return std::nullopt;
                    std::string next = inst.objects[pickOne(rng, itemIdx)].id;
                    if (sameName(next, value.asRef().id)) return std::nullopt;
                    value = model::ScalarValue(model::RefId{next});
                    break;
                }
            }
            break;
        }
        case 1: {  // add an unlinked item
            model::ModelObject obj;
            obj.id = "zitem" + std::to_string(salt);
            obj.className = "Item";
            obj.slots.emplace_back("weight", model::ScalarValue(std::int64_t(pick(rng, 0, 20))));
            obj.slots.emplace_back("price", model::ScalarValue(pick(rng, 0, 400) / 4.0));
            obj.slots.emplace_back("tag", model::ScalarValue(std::string("z")));
            inst.objects.push_back(std::move(obj));
            break;
        }
        case 2: {  // remove an unreferenced item
            if (itemIdx.empty()) return std::nullopt;
            const size_t victim = pickOne(rng, itemIdx);
            inst.objects.erase(inst.objects.begin() + static_cast<std::ptrdiff_t>(victim));
            break;
        }
        default: {  // change a link list
            if (nodeIdx.empty()) return std::nullopt;
            auto& node = inst.objects[pickOne(rng, nodeIdx)];
            std::vector<std::string> targets;
            if (const auto* existing = node.findLink("items")) targets = *existing;
            const std::vector<std::string> before = targets;
            if (itemIdx.empty()) return std::nullopt;
            if (targets.empty() || chance(rng, 0.5)) {
                targets.push_back(inst.objects[pickOne(rng, itemIdx)].id);
            } else {
                targets.erase(targets.begin() + pick(rng, 0, static_cast<int>(targets.size()) - 1));
            }
            if (targets == before) return std::nullopt;
            bool replaced = false;
            for (auto& [name, list] : node.links) {
                if (sameName(name, "items")) {
                    list = targets;
                    replaced = true;
                }
            }
            if (!replaced) node.links.emplace_back("items", targets);
            break;
        }
    }
    if (!model::validateInstance(inst, mm).empty()) return std::nullopt;
    return inst;
}

inline model::Instance randomInstanceEdit(Rng& rng, const model::Instance& base,
                                          const model::Metamodel& mm) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        if (auto edited = tryInstanceEdit(rng, base, mm, pick(rng, 0, 1'000'000))) return *edited;
    }
    model::Instance inst = base;
    model::ModelObject obj;
    obj.id = "zfallback";
    obj.className = "Item";
    obj.slots.emplace_back("weight", model::ScalarValue(std::int64_t(1)));
    obj.slots.emplace_back("price", model::ScalarValue(1.0));
    obj.slots.emplace_back("tag", model::ScalarValue(std::string("z")));
    inst.objects.push_back(std::move(obj));
    return inst;
}

}  // namespace mbe::testgen

#endif  // MBE_TESTS_GENERATORS_HPP
