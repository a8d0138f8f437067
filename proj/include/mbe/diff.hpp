#ifndef MBE_DIFF_HPP
#define MBE_DIFF_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mbe/model.hpp"

namespace mbe::diff {

// Canonical report order is this enum order, then path.
enum class DiffKind {
    ClassAdded,
    ClassRemoved,
    ClassAbstractChanged,
    SupertypesChanged,
    AttributeAdded,
    AttributeRemoved,
    AttributeTypeChanged,
    OperationAdded,
    OperationRemoved,
    OperationSignatureChanged,
    RelationAdded,
    RelationRemoved,
    RelationChanged,
    ObjectAdded,
    ObjectRemoved,
    SlotValueChanged,
    LinkSetChanged,
};

std::string toString(DiffKind kind);
std::optional<DiffKind> diffKindFromString(std::string_view text);

struct DiffEntry {
    DiffKind kind;
    std::string path;                   // "FPGA", "Camera.resolution", "frontCam.feeds"
    std::optional<std::string> before;  // present for *Removed / *Changed
    std::optional<std::string> after;   // present for *Added / *Changed
    bool operator==(const DiffEntry&) const = default;
};

struct DiffReport {
    std::vector<DiffEntry> entries;  // sorted by (kind rank, path)
    std::map<std::string, int> summaryCounts;

    bool operator==(const DiffReport&) const = default;

    // {"entries":[...],"summary":{...}} rendering, two-space indent.
    std::string renderJson() const;
};

// Structural metamodel diff; matching by normalized class name, no rename
// detection. A removed class yields exactly one ClassRemoved entry.
DiffReport diffMetamodels(const model::Metamodel& oldModel, const model::Metamodel& newModel);

// Instance diff; object matching by normalized id, slot comparison with the
// shared real tolerance, link lists compared element-wise.
DiffReport diffInstances(const model::Instance& oldInst, const model::Instance& newInst,
                         const model::Metamodel& mm);

}  // namespace mbe::diff

#endif  // MBE_DIFF_HPP
