#include "mbe/diff.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mbe::diff {

using model::Instance;
using model::MetaClass;
using model::Metamodel;
using model::ModelObject;
using model::Relation;

namespace {

constexpr const char* kKindNames[] = {
    "ClassAdded",        "ClassRemoved",     "ClassAbstractChanged",
    "SupertypesChanged", "AttributeAdded",   "AttributeRemoved",
    "AttributeTypeChanged", "OperationAdded", "OperationRemoved",
    "OperationSignatureChanged", "RelationAdded", "RelationRemoved",
    "RelationChanged",   "ObjectAdded",      "ObjectRemoved",
    "SlotValueChanged",  "LinkSetChanged",
};

std::string renderClass(const MetaClass& cls) {
    std::ostringstream out;
    out << "class " << cls.name;
    if (cls.abstractFlag) out << " (abstract)";
    if (!cls.supertypes.empty()) {
        out << " extends ";
        for (size_t i = 0; i < cls.supertypes.size(); ++i) {
            if (i > 0) out << ", ";
            out << cls.supertypes[i];
        }
    }
    return out.str();
}

std::string renderNameList(const std::vector<std::string>& names) {
    std::ostringstream out;
    out << "[";
    for (size_t i = 0; i < names.size(); ++i) {
        if (i > 0) out << ", ";
        out << names[i];
    }
    out << "]";
    return out.str();
}

std::string renderRelation(const Relation& rel) {
    std::ostringstream out;
    out << model::toString(rel.kind) << " " << rel.name << ": " << rel.source << " -> "
        << rel.target << " [" << rel.multiplicity.render() << "]";
    return out.str();
}

bool sameNameSet(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::set<std::string> an, bn;
    for (const auto& s : a) an.insert(normalizeName(s));
    for (const auto& s : b) bn.insert(normalizeName(s));
    return an == bn;
}

void finalize(DiffReport& report) {
    std::stable_sort(report.entries.begin(), report.entries.end(),
                     [](const DiffEntry& a, const DiffEntry& b) {
                         if (a.kind != b.kind) return a.kind < b.kind;
                         return a.path < b.path;
                     });
    for (const auto& entry : report.entries) ++report.summaryCounts[toString(entry.kind)];
}

}  // namespace

std::string toString(DiffKind kind) { return kKindNames[static_cast<size_t>(kind)]; }

std::optional<DiffKind> diffKindFromString(std::string_view text) {
    for (size_t i = 0; i < std::size(kKindNames); ++i) {
        if (text == kKindNames[i]) return static_cast<DiffKind>(i);
    }
    return std::nullopt;
}

std::string DiffReport::renderJson() const {
    nlohmann::ordered_json root;
    root["entries"] = nlohmann::ordered_json::array();
    for (const auto& entry : entries) {
        root["entries"].push_back({{"kind", toString(entry.kind)},
                                   {"path", entry.path},
                                   {"before", entry.before ? nlohmann::ordered_json(*entry.before)
                                                           : nlohmann::ordered_json(nullptr)},
                                   {"after", entry.after ? nlohmann::ordered_json(*entry.after)
                                                         : nlohmann::ordered_json(nullptr)}});
    }
    root["summary"] = nlohmann::ordered_json::object();
    for (const auto& [kind, count] : summaryCounts) root["summary"][kind] = count;
    return root.dump(2) + "\n";
}

DiffReport diffMetamodels(const Metamodel& oldModel, const Metamodel& newModel) {
    DiffReport report;
    auto& entries = report.entries;

    for (const auto& oldCls : oldModel.classes) {
        const MetaClass* newCls = newModel.findClass(oldCls.name);
        if (!newCls) {
            entries.push_back({DiffKind::ClassRemoved, oldCls.name, renderClass(oldCls), std::nullopt});
            continue;
        }
        if (oldCls.abstractFlag != newCls->abstractFlag) {
            entries.push_back({DiffKind::ClassAbstractChanged, oldCls.name,
                               oldCls.abstractFlag ? "abstract" : "concrete",
                               newCls->abstractFlag ? "abstract" : "concrete"});
        }
        if (!sameNameSet(oldCls.supertypes, newCls->supertypes)) {
            entries.push_back({DiffKind::SupertypesChanged, oldCls.name,
                               renderNameList(oldCls.supertypes),
                               renderNameList(newCls->supertypes)});
        }

        for (const auto& oldAttr : oldCls.attributes) {
            const model::AttributeDef* newAttr = nullptr;
            for (const auto& a : newCls->attributes) {
                if (sameName(a.name, oldAttr.name)) {
                    newAttr = &a;
                    break;
                }
            }
            const std::string path = oldCls.name + "." + oldAttr.name;
            if (!newAttr) {
                entries.push_back({DiffKind::AttributeRemoved, path,
                                   oldAttr.name + ": " + oldAttr.typeRef, std::nullopt});
            } else if (!sameName(oldAttr.typeRef, newAttr->typeRef)) {
                entries.push_back({DiffKind::AttributeTypeChanged, path, oldAttr.typeRef,
                                   newAttr->typeRef});
            }
        }
        for (const auto& newAttr : newCls->attributes) {
            if (std::none_of(oldCls.attributes.begin(), oldCls.attributes.end(),
                             [&](const auto& a) { return sameName(a.name, newAttr.name); })) {
                entries.push_back({DiffKind::AttributeAdded, oldCls.name + "." + newAttr.name,
                                   std::nullopt, newAttr.name + ": " + newAttr.typeRef});
            }
        }

        for (const auto& oldOp : oldCls.operations) {
            const model::OperationDef* newOp = nullptr;
            for (const auto& o : newCls->operations) {
                if (sameName(o.name, oldOp.name)) {
                    newOp = &o;
                    break;
                }
            }
            const std::string path = oldCls.name + "." + oldOp.name;
            if (!newOp) {
                entries.push_back({DiffKind::OperationRemoved, path,
                                   oldOp.name + oldOp.signature(), std::nullopt});
            } else if (oldOp.signature() != newOp->signature()) {
                entries.push_back({DiffKind::OperationSignatureChanged, path, oldOp.signature(),
                                   newOp->signature()});
            }
        }
        for (const auto& newOp : newCls->operations) {
            if (std::none_of(oldCls.operations.begin(), oldCls.operations.end(),
                             [&](const auto& o) { return sameName(o.name, newOp.name); })) {
                entries.push_back({DiffKind::OperationAdded, oldCls.name + "." + newOp.name,
                                   std::nullopt, newOp.name + newOp.signature()});
            }
        }
    }
    for (const auto& newCls : newModel.classes) {
        if (!oldModel.findClass(newCls.name)) {
            entries.push_back({DiffKind::ClassAdded, newCls.name, std::nullopt, renderClass(newCls)});
        }
    }

    auto findRelation = [](const Metamodel& mm, const Relation& key) -> const Relation* {
        for (const auto& rel : mm.relations) {
            if (sameName(rel.name, key.name) && sameName(rel.source, key.source)) return &rel;
        }
        return nullptr;
    };
    for (const auto& oldRel : oldModel.relations) {
        const Relation* newRel = findRelation(newModel, oldRel);
        const std::string path = oldRel.source + "." + oldRel.name;
        if (!newRel) {
            entries.push_back({DiffKind::RelationRemoved, path, renderRelation(oldRel), std::nullopt});
        } else if (oldRel.kind != newRel->kind || !sameName(oldRel.target, newRel->target) ||
                   !(oldRel.multiplicity == newRel->multiplicity)) {
            entries.push_back({DiffKind::RelationChanged, path, renderRelation(oldRel),
                               renderRelation(*newRel)});
        }
    }
    for (const auto& newRel : newModel.relations) {
        if (!findRelation(oldModel, newRel)) {
            entries.push_back({DiffKind::RelationAdded, newRel.source + "." + newRel.name,
                               std::nullopt, renderRelation(newRel)});
        }
    }

    finalize(report);
    return report;
}

DiffReport diffInstances(const Instance& oldInst, const Instance& newInst, const Metamodel& mm) {
    (void)mm;  // matching and comparison are purely structural
    DiffReport report;
    auto& entries = report.entries;

    auto renderObject = [](const ModelObject& obj) { return obj.className + " " + obj.id; };
    auto renderTargets = [](const std::vector<std::string>& targets) {
        std::ostringstream out;
        out << "[";
        for (size_t i = 0; i < targets.size(); ++i) {
            if (i > 0) out << ", ";
            out << targets[i];
        }
        out << "]";
        return out.str();
    };
    auto sameTargets = [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
        if (a.size() != b.size()) return false;
        for (size_t i = 0; i < a.size(); ++i) {
            if (!sameName(a[i], b[i])) return false;
        }
        return true;
    };

    for (const auto& oldObj : oldInst.objects) {
        const ModelObject* newObj = newInst.findObject(oldObj.id);
        if (!newObj || !sameName(newObj->className, oldObj.className)) {
            // A class change reads as remove + add of the same id.
            entries.push_back({DiffKind::ObjectRemoved, oldObj.id, renderObject(oldObj), std::nullopt});
            continue;
        }

        for (const auto& [slotName, oldValue] : oldObj.slots) {
            const model::ScalarValue* newValue = newObj->findSlot(slotName);
            const std::string path = oldObj.id + "." + slotName;
            if (!newValue) {
                entries.push_back({DiffKind::SlotValueChanged, path, oldValue.render(), "unset"});
            } else if (!model::scalarEquals(oldValue, *newValue)) {
                entries.push_back({DiffKind::SlotValueChanged, path, oldValue.render(),
                                   newValue->render()});
            }
        }
        for (const auto& [slotName, newValue] : newObj->slots) {
            if (!oldObj.findSlot(slotName)) {
                entries.push_back({DiffKind::SlotValueChanged, oldObj.id + "." + slotName, "unset",
                                   newValue.render()});
            }
        }

        for (const auto& [linkName, oldTargets] : oldObj.links) {
            const auto* newTargets = newObj->findLink(linkName);
            const std::string path = oldObj.id + "." + linkName;
            if (!newTargets) {
                if (!oldTargets.empty()) {
                    entries.push_back({DiffKind::LinkSetChanged, path, renderTargets(oldTargets),
                                       renderTargets({})});
                }
            } else if (!sameTargets(oldTargets, *newTargets)) {
                entries.push_back({DiffKind::LinkSetChanged, path, renderTargets(oldTargets),
                                   renderTargets(*newTargets)});
            }
        }
        for (const auto& [linkName, newTargets] : newObj->links) {
            if (!oldObj.findLink(linkName) && !newTargets.empty()) {
                entries.push_back({DiffKind::LinkSetChanged, oldObj.id + "." + linkName,
                                   renderTargets({}), renderTargets(newTargets)});
            }
        }
    }
    for (const auto& newObj : newInst.objects) {
        const ModelObject* oldObj = oldInst.findObject(newObj.id);
        if (!oldObj || !sameName(oldObj->className, newObj.className)) {
            entries.push_back({DiffKind::ObjectAdded, newObj.id, std::nullopt, renderObject(newObj)});
        }
    }

    finalize(report);
    return report;
}

}  // namespace mbe::diff
