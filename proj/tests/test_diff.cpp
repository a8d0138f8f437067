#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mbe/diff.hpp"

#include <map>

#include "support/fixtures.hpp"
#include "support/generators.hpp"

using namespace mbe;
using diff::DiffEntry;
using diff::DiffKind;
using diff::DiffReport;

TEST_CASE("GT5: reduced fixture differs by exactly the three removed classes") {
    const DiffReport report = diff::diffMetamodels(testfix::ccsMini(), testfix::ccsMiniReduced());
    REQUIRE(report.entries.size() == 3);
    CHECK((report.entries[0].kind == DiffKind::ClassRemoved));
    CHECK(report.entries[0].path == "FPGA");
    CHECK(report.entries[1].path == "GPU");
    CHECK(report.entries[2].path == "TPU");
    for (const auto& entry : report.entries) {
        CHECK(entry.before.has_value());
        CHECK_FALSE(entry.after.has_value());
    }
    CHECK(report.summaryCounts.at("ClassRemoved") == 3);
}

TEST_CASE("diff of a model with itself is empty") {
    const auto mm = testfix::ccsMini();
    CHECK(diff::diffMetamodels(mm, mm).entries.empty());
    const auto inst = testfix::demoVehicle();
    CHECK(diff::diffInstances(inst, inst, mm).entries.empty());
}

TEST_CASE("attribute type change is a single entry at class.attribute") {
    auto newModel = testfix::ccsMini();
    for (auto& cls : newModel.classes) {
        if (cls.name == "Camera") cls.attributes[0].typeRef = "real";
    }
    const DiffReport report = diff::diffMetamodels(testfix::ccsMini(), newModel);
    REQUIRE(report.entries.size() == 1);
    CHECK((report.entries[0].kind == DiffKind::AttributeTypeChanged));
    CHECK(report.entries[0].path == "Camera.resolution");
    CHECK(report.entries[0].before == "int");
    CHECK(report.entries[0].after == "real");
}

TEST_CASE("class matching is by normalized name") {
    auto renamed = testfix::ccsMini();
    for (auto& cls : renamed.classes) {
        if (cls.name == "CoProcessor") cls.name = "Co-Processor";
    }
    for (auto& cls : renamed.classes) {
        for (auto& super : cls.supertypes) {
            if (super == "CoProcessor") super = "Co-Processor";
        }
    }
    for (auto& rel : renamed.relations) {
        if (rel.target == "CoProcessor") rel.target = "Co-Processor";
    }
    CHECK(diff::diffMetamodels(testfix::ccsMini(), renamed).entries.empty());
}

TEST_CASE("camera resolution increase mirrors the paper's update example") {
    const auto mm = testfix::ccsMini();
    const auto before = testfix::demoVehicle();
    auto after = before;
    for (auto& obj : after.objects) {
        if (obj.id == "frontCam") obj.slots[0].second = model::ScalarValue(std::int64_t(1920));
    }
    const DiffReport report = diff::diffInstances(before, after, mm);
    REQUIRE(report.entries.size() == 1);
    CHECK((report.entries[0].kind == DiffKind::SlotValueChanged));
    CHECK(report.entries[0].path == "frontCam.resolution");
    CHECK(report.entries[0].before == "1280");
    CHECK(report.entries[0].after == "1920");
}

TEST_CASE("added object yields exactly one entry") {
    const auto mm = testfix::ccsMini();
    const auto before = testfix::demoVehicle();
    auto after = before;
    model::ModelObject rearCam;
    rearCam.id = "rearCam";
    rearCam.className = "Camera";
    rearCam.slots.emplace_back("resolution", model::ScalarValue(std::int64_t(640)));
    rearCam.links.emplace_back("feeds", std::vector<std::string>{"ecu1"});
    after.objects.push_back(rearCam);
    const DiffReport report = diff::diffInstances(before, after, mm);
    REQUIRE(report.entries.size() == 1);
    CHECK((report.entries[0].kind == DiffKind::ObjectAdded));
    CHECK(report.entries[0].path == "rearCam");
}

TEST_CASE("slot values within tolerance do not diff") {
    const auto mm = testfix::ccsMini();
    const auto before = testfix::demoVehicle();
    auto after = before;
    for (auto& obj : after.objects) {
        if (obj.id == "roofLidar") obj.slots[0].second = model::ScalarValue(120.0 + 1e-12);
    }
    CHECK(diff::diffInstances(before, after, mm).entries.empty());
}

TEST_CASE("link order changes count as a difference") {
    const auto mm = testgen::inventoryMetamodel();
    model::Instance before;
    before.metamodelName = "inventory";
    for (int i = 0; i < 2; ++i) {
        model::ModelObject item;
        item.id = "item" + std::to_string(i);
        item.className = "Item";
        before.objects.push_back(item);
    }
    model::ModelObject node;
    node.id = "node0";
    node.className = "Node";
    node.links.emplace_back("items", std::vector<std::string>{"item0", "item1"});
    before.objects.push_back(node);

    auto after = before;
    after.objects.back().links[0].second = {"item1", "item0"};
    const DiffReport report = diff::diffInstances(before, after, mm);
    REQUIRE(report.entries.size() == 1);
    CHECK((report.entries[0].kind == DiffKind::LinkSetChanged));
    CHECK(report.entries[0].path == "node0.items");
}

TEST_CASE("json rendering is stable and kind-ordered") {
    auto newModel = testfix::ccsMiniReduced();
    newModel.classes[0].abstractFlag = true;  // Component
    const DiffReport report = diff::diffMetamodels(testfix::ccsMini(), newModel);
    REQUIRE(report.entries.size() == 4);
    // ClassAbstractChanged ranks after ClassRemoved in the canonical order.
    CHECK((report.entries[0].kind == DiffKind::ClassRemoved));
    CHECK((report.entries[3].kind == DiffKind::ClassAbstractChanged));
    CHECK(report.renderJson() == report.renderJson());
    CHECK(report.renderJson().find("\"summary\"") != std::string::npos);
}

namespace {

DiffKind swappedKind(DiffKind kind) {
    switch (kind) {
        case DiffKind::ClassAdded: return DiffKind::ClassRemoved;
        case DiffKind::ClassRemoved: return DiffKind::ClassAdded;
        case DiffKind::AttributeAdded: return DiffKind::AttributeRemoved;
        case DiffKind::AttributeRemoved: return DiffKind::AttributeAdded;
        case DiffKind::OperationAdded: return DiffKind::OperationRemoved;
        case DiffKind::OperationRemoved: return DiffKind::OperationAdded;
        case DiffKind::RelationAdded: return DiffKind::RelationRemoved;
        case DiffKind::RelationRemoved: return DiffKind::RelationAdded;
        case DiffKind::ObjectAdded: return DiffKind::ObjectRemoved;
        case DiffKind::ObjectRemoved: return DiffKind::ObjectAdded;
        default: return kind;
    }
}

// Multiset of entries after the Added/Removed involution with before/after swapped.
std::multiset<std::string> involutionKey(const std::vector<DiffEntry>& entries, bool swap) {
    std::multiset<std::string> keys;
    for (const auto& entry : entries) {
        const DiffKind kind = swap ? swappedKind(entry.kind) : entry.kind;
        const auto& before = swap ? entry.after : entry.before;
        const auto& after = swap ? entry.before : entry.after;
        keys.insert(diff::toString(kind) + "|" + entry.path + "|" + before.value_or("<none>") +
                    "|" + after.value_or("<none>"));
    }
    return keys;
}

}  // namespace

TEST_CASE("swap symmetry on random metamodel pairs") {
    testgen::Rng rng(55);
    for (int round = 0; round < 60; ++round) {
        const auto a = testgen::randomMetamodel(rng, 10);
        auto b = a;
        const int edits = testgen::pick(rng, 1, 4);
        for (int e = 0; e < edits; ++e) b = testgen::randomMetamodelEdit(rng, b);
        const auto forward = diff::diffMetamodels(a, b);
        const auto backward = diff::diffMetamodels(b, a);
        CHECK(involutionKey(forward.entries, true) == involutionKey(backward.entries, false));
    }
}

TEST_CASE("swap symmetry on random instance pairs") {
    testgen::Rng rng(56);
    const auto mm = testgen::inventoryMetamodel();
    for (int round = 0; round < 40; ++round) {
        const auto a = testgen::randomInventoryInstance(rng);
        auto b = a;
        const int edits = testgen::pick(rng, 1, 3);
        for (int e = 0; e < edits; ++e) b = testgen::randomInstanceEdit(rng, b, mm);
        const auto forward = diff::diffInstances(a, b, mm);
        const auto backward = diff::diffInstances(b, a, mm);
        CHECK(involutionKey(forward.entries, true) == involutionKey(backward.entries, false));
    }
}

TEST_CASE("single primitive edits produce exactly one entry") {
    testgen::Rng rng(57);
    for (int round = 0; round < 120; ++round) {
        const auto base = testgen::randomMetamodel(rng, 10);
        const auto edited = testgen::randomMetamodelEdit(rng, base);
        const auto report = diff::diffMetamodels(base, edited);
        if (report.entries.size() != 1) {
            CAPTURE(report.renderJson());
            CHECK(report.entries.size() == 1);
        }
    }
    const auto mm = testgen::inventoryMetamodel();
    for (int round = 0; round < 80; ++round) {
        const auto base = testgen::randomInventoryInstance(rng);
        const auto edited = testgen::randomInstanceEdit(rng, base, mm);
        const auto report = diff::diffInstances(base, edited, mm);
        if (report.entries.size() != 1) {
            CAPTURE(report.renderJson());
            CHECK(report.entries.size() == 1);
        }
    }
}
