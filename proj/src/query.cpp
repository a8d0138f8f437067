#include "mbe/query.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

namespace mbe::query {

using model::MetaClass;
using model::Metamodel;

std::string toString(EdgeKind kind) {
    switch (kind) {
        case EdgeKind::Inheritance: return "inheritance";
        case EdgeKind::Association: return "association";
        case EdgeKind::Composition: return "composition";
        case EdgeKind::Aggregation: return "aggregation";
    }
    return {};
}

std::string RelationChain::render() const {
    std::ostringstream out;
    for (size_t i = 0; i < classNames.size(); ++i) {
        if (i > 0) out << " -> ";
        out << classNames[i];
    }
    return out.str();
}

namespace {

const MetaClass& resolveClass(const Metamodel& mm, std::string_view name) {
    const MetaClass* cls = mm.findClass(name);
    if (!cls) throw Error("UNKNOWN_CLASS", "unknown class: " + std::string(name));
    return *cls;
}

EdgeKind edgeKindOf(model::RelationKind kind) {
    switch (kind) {
        case model::RelationKind::Association: return EdgeKind::Association;
        case model::RelationKind::Composition: return EdgeKind::Composition;
        case model::RelationKind::Aggregation: return EdgeKind::Aggregation;
    }
    return EdgeKind::Association;
}

}  // namespace

std::vector<std::string> listClasses(const Metamodel& mm) {
    std::vector<std::string> names;
    names.reserve(mm.classes.size());
    for (const auto& cls : mm.classes) names.push_back(cls.name);
    return names;
}

Members listMembers(const Metamodel& mm, std::string_view className) {
    return {model::allAttributesOf(mm, className), model::allOperationsOf(mm, className)};
}

bool isKindOf(const Metamodel& mm, std::string_view className, std::string_view ancestorName) {
    resolveClass(mm, className);
    resolveClass(mm, ancestorName);
    return model::isKindOf(mm, className, ancestorName);
}

std::vector<std::string> subclassesOf(const Metamodel& mm, std::string_view className,
                                      bool direct) {
    const MetaClass& parent = resolveClass(mm, className);
    std::vector<std::string> out;
    for (const auto& cls : mm.classes) {
        if (&cls == &parent) continue;
        if (direct) {
            for (const auto& superName : cls.supertypes) {
                if (sameName(superName, parent.name)) {
                    out.push_back(cls.name);
                    break;
                }
            }
        } else if (model::isKindOf(mm, cls.name, parent.name)) {
            out.push_back(cls.name);
        }
    }
    return out;
}

RelationChain relationChain(const Metamodel& mm, std::string_view fromClass,
                            std::string_view toClass) {
    const MetaClass& from = resolveClass(mm, fromClass);
    const MetaClass& to = resolveClass(mm, toClass);

    // Undirected adjacency over class indices. Parallel edges collapse to the
    // preferred label: inheritance first, then the lexicographically smallest
    // relation name.
    std::unordered_map<std::string, size_t> index;
    for (size_t i = 0; i < mm.classes.size(); ++i) index[normalizeName(mm.classes[i].name)] = i;

    struct EdgeLabel {
        EdgeKind kind;
        std::optional<std::string> relationName;
    };
    std::vector<std::map<size_t, EdgeLabel>> adjacency(mm.classes.size());
    auto addEdge = [&](size_t a, size_t b, EdgeLabel label) {
        if (a == b) return;
        for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
            auto it = adjacency[x].find(y);
            if (it == adjacency[x].end()) {
                adjacency[x].emplace(y, label);
            } else {
                const bool incumbentInherit = it->second.kind == EdgeKind::Inheritance;
                const bool challengerInherit = label.kind == EdgeKind::Inheritance;
                if (!incumbentInherit &&
                    (challengerInherit ||
                     (label.relationName && it->second.relationName &&
                      *label.relationName < *it->second.relationName))) {
                    it->second = label;
                }
            }
        }
    };
    for (size_t i = 0; i < mm.classes.size(); ++i) {
        for (const auto& superName : mm.classes[i].supertypes) {
            auto it = index.find(normalizeName(superName));
            if (it != index.end()) addEdge(i, it->second, {EdgeKind::Inheritance, std::nullopt});
        }
    }
    for (const auto& rel : mm.relations) {
        auto s = index.find(normalizeName(rel.source));
        auto t = index.find(normalizeName(rel.target));
        if (s != index.end() && t != index.end()) {
            addEdge(s->second, t->second, {edgeKindOf(rel.kind), rel.name});
        }
    }

    const size_t start = index.at(normalizeName(from.name));
    const size_t goal = index.at(normalizeName(to.name));

    // BFS distances from the goal, then a greedy walk from the start picking
    // the smallest-named neighbour that stays on a shortest path.
    constexpr size_t kUnreached = std::numeric_limits<size_t>::max();
    std::vector<size_t> dist(mm.classes.size(), kUnreached);
    std::deque<size_t> frontier{goal};
    dist[goal] = 0;
    while (!frontier.empty()) {
        const size_t cur = frontier.front();
        frontier.pop_front();
        for (const auto& [next, label] : adjacency[cur]) {
            if (dist[next] == kUnreached) {
                dist[next] = dist[cur] + 1;
                frontier.push_back(next);
            }
        }
    }
    if (dist[start] == kUnreached) {
        throw Error("NO_CHAIN", "no chain between '" + from.name + "' and '" + to.name + "'");
    }

    RelationChain chain;
    chain.classNames.push_back(mm.classes[start].name);
    size_t cur = start;
    while (cur != goal) {
        size_t best = kUnreached;
        const EdgeLabel* bestLabel = nullptr;
        for (const auto& [next, label] : adjacency[cur]) {
            if (dist[next] + 1 != dist[cur]) continue;
            if (best == kUnreached || mm.classes[next].name < mm.classes[best].name) {
                best = next;
                bestLabel = &label;
            }
        }
        chain.classNames.push_back(mm.classes[best].name);
        chain.edges.push_back({bestLabel->kind, bestLabel->relationName});
        cur = best;
    }
    return chain;
}

std::vector<std::string> extractByRole(const Metamodel& mm, const model::Instance& inst,
                                       std::string_view roleClass) {
    resolveClass(mm, roleClass);
    std::vector<std::string> ids;
    for (const auto& obj : inst.objects) {
        if (model::isKindOf(mm, obj.className, roleClass)) ids.push_back(obj.id);
    }
    return ids;
}

std::vector<Property> elementProperties(const Metamodel& mm, const model::Instance& inst,
                                        std::string_view elementName) {
    const model::ModelObject* obj = inst.findObject(elementName);
    if (!obj) throw Error("UNKNOWN_ELEMENT", "unknown element: " + std::string(elementName));
    std::vector<Property> out;
    for (const auto& attr : model::allAttributesOf(mm, obj->className)) {
        const model::ScalarValue* slot = obj->findSlot(attr.name);
        out.push_back({attr.name, attr.typeRef,
                       slot ? std::optional(*slot) : std::nullopt});
    }
    return out;
}

}  // namespace mbe::query
