#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mbe/query.hpp"

#include <set>

#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace mbe;
using model::Metamodel;

TEST_CASE("listClasses returns declaration order") {
    const Metamodel mm = testfix::ccsMini();
    const auto names = query::listClasses(mm);
    REQUIRE(names.size() == 15);
    CHECK(names[0] == "Component");
    CHECK(names[1] == "Sensor");
    CHECK(names[2] == "Camera");
    CHECK(names.back() == "ControlTask");

    CHECK(query::listClasses(Metamodel{}).empty());
}

TEST_CASE("listMembers: ProcessingNode has 4 attributes and 2 operations") {
    const auto members = query::listMembers(testfix::ccsMini(), "ProcessingNode");
    CHECK(members.attributes.size() == 4);
    REQUIRE(members.operations.size() == 2);
    CHECK(members.operations[0].name == "schedule");
    CHECK(members.operations[0].signature() == "(task: ProcessingTask): bool");
    CHECK(members.operations[1].name == "status");
    CHECK(members.operations[1].signature() == "(): string");
}

TEST_CASE("listMembers: FPGA inherits nothing from the empty CoProcessor") {
    const auto members = query::listMembers(testfix::ccsMini(), "FPGA");
    CHECK(members.attributes.empty());
    CHECK(members.operations.empty());
}

TEST_CASE("listMembers: unknown class") {
    CHECK_THROWS_WITH_AS((void)query::listMembers(testfix::ccsMini(), "Radar"),
                         "unknown class: Radar", Error);
}

TEST_CASE("isKindOf over the fixture") {
    const Metamodel mm = testfix::ccsMini();
    CHECK(query::isKindOf(mm, "FPGA", "CoProcessor"));
    CHECK(query::isKindOf(mm, "Camera", "Sensor"));
    CHECK_FALSE(query::isKindOf(mm, "Camera", "Actuator"));
    CHECK(query::isKindOf(mm, "Camera", "Camera"));  // reflexive
    CHECK(query::isKindOf(mm, "FPGA", "Component"));  // transitive via CoProcessor
    CHECK(query::isKindOf(mm, "fpga", "Co-Processor"));  // normalized lookup
    CHECK_THROWS_AS((void)query::isKindOf(mm, "FPGA", "Radar"), Error);
}

TEST_CASE("subclassesOf direct and transitive") {
    const Metamodel mm = testfix::ccsMini();
    const auto tasks = query::subclassesOf(mm, "ProcessingTask", true);
    CHECK(tasks == std::vector<std::string>{"PerceptionTask", "PlanningTask", "ControlTask"});
    const auto coprocessors = query::subclassesOf(mm, "CoProcessor", true);
    CHECK(coprocessors == std::vector<std::string>{"FPGA", "GPU", "TPU"});
    CHECK(query::subclassesOf(mm, "Camera", true).empty());

    const auto components = query::subclassesOf(mm, "Component", false);
    CHECK(components == std::vector<std::string>{"ProcessingNode", "CoProcessor", "FPGA", "GPU", "TPU"});
}

TEST_CASE("relationChain: the GT4 chain has exactly four classes") {
    const auto chain = query::relationChain(testfix::ccsMini(), "Camera", "Component");
    CHECK(chain.classNames ==
          std::vector<std::string>{"Camera", "Sensor", "ProcessingNode", "Component"});
    REQUIRE(chain.edges.size() == 3);
    CHECK((chain.edges[0].kind == query::EdgeKind::Inheritance));
    CHECK((chain.edges[1].kind == query::EdgeKind::Association));
    CHECK(chain.edges[1].relationName == "feeds");
    CHECK((chain.edges[2].kind == query::EdgeKind::Inheritance));
    CHECK(chain.render() == "Camera -> Sensor -> ProcessingNode -> Component");
}

TEST_CASE("relationChain: identity and disconnection") {
    Metamodel mm = testfix::ccsMini();
    const auto identity = query::relationChain(mm, "Camera", "Camera");
    CHECK(identity.classNames == std::vector<std::string>{"Camera"});
    CHECK(identity.edges.empty());

    model::MetaClass isolated;
    isolated.name = "Island";
    mm.classes.push_back(isolated);
    CHECK_THROWS_AS((void)query::relationChain(mm, "Camera", "Island"), Error);
    try {
        (void)query::relationChain(mm, "Camera", "Island");
    } catch (const Error& error) {
        CHECK(error.code() == "NO_CHAIN");
    }
    CHECK_THROWS_AS((void)query::relationChain(mm, "Camera", "Nowhere"), Error);
}

TEST_CASE("relationChain ties break towards the smallest class name") {
    // Two 2-edge routes from A to D: via B and via C. The walk must pick B.
    Metamodel mm;
    mm.name = "m";
    for (const char* name : {"A", "C", "B", "D"}) {
        model::MetaClass cls;
        cls.name = name;
        mm.classes.push_back(cls);
    }
    auto link = [&](const char* from, const char* to, const char* name) {
        model::Relation rel;
        rel.kind = model::RelationKind::Association;
        rel.name = name;
        rel.source = from;
        rel.target = to;
        rel.multiplicity = {0, std::nullopt};
        mm.relations.push_back(rel);
    };
    link("A", "C", "ac");
    link("C", "D", "cd");
    link("A", "B", "ab");
    link("B", "D", "bd");
    REQUIRE(model::validateMetamodel(mm).empty());

    const auto chain = query::relationChain(mm, "A", "D");
    CHECK(chain.classNames == std::vector<std::string>{"A", "B", "D"});
}

TEST_CASE("relationChain length equals exhaustive enumeration on random models") {
    testgen::Rng rng(424242);
    for (int round = 0; round < 60; ++round) {
        const Metamodel mm = testgen::randomMetamodel(rng, 15);
        REQUIRE(model::validateMetamodel(mm).empty());
        const auto& from = testgen::pickOne(rng, mm.classes).name;
        const auto& to = testgen::pickOne(rng, mm.classes).name;
        const auto expected = oracle::exhaustiveShortestChain(mm, from, to);
        REQUIRE(expected.has_value());  // generator builds connected graphs
        const auto chain = query::relationChain(mm, from, to);
        CHECK(chain.edges.size() == *expected);
        CHECK(chain.classNames.size() == *expected + 1);
        // Consecutive classes really are connected as labelled.
        for (size_t i = 0; i + 1 < chain.classNames.size(); ++i) {
            const auto& a = chain.classNames[i];
            const auto& b = chain.classNames[i + 1];
            if (chain.edges[i].kind == query::EdgeKind::Inheritance) {
                const auto* ca = mm.findClass(a);
                const auto* cb = mm.findClass(b);
                bool related = false;
                for (const auto& s : ca->supertypes) related |= sameName(s, b);
                for (const auto& s : cb->supertypes) related |= sameName(s, a);
                CHECK(related);
            } else {
                REQUIRE(chain.edges[i].relationName.has_value());
                bool found = false;
                for (const auto& rel : mm.relations) {
                    if (!sameName(rel.name, *chain.edges[i].relationName)) continue;
                    found |= (sameName(rel.source, a) && sameName(rel.target, b)) ||
                             (sameName(rel.source, b) && sameName(rel.target, a));
                }
                CHECK(found);
            }
        }
    }
}

TEST_CASE("cross-operation consistency: subclassesOf vs isKindOf") {
    testgen::Rng rng(99);
    for (int round = 0; round < 40; ++round) {
        const Metamodel mm = testgen::randomMetamodel(rng, 12);
        for (const auto& cls : mm.classes) {
            const auto closure = query::subclassesOf(mm, cls.name, false);
            std::set<std::string> expected;
            for (const auto& other : mm.classes) {
                if (!sameName(other.name, cls.name) && model::isKindOf(mm, other.name, cls.name)) {
                    expected.insert(other.name);
                }
            }
            CHECK(std::set<std::string>(closure.begin(), closure.end()) == expected);
        }
    }
}

TEST_CASE("extractByRole walks the supertype closure") {
    const Metamodel mm = testfix::ccsMini();
    const auto inst = testfix::demoVehicle();
    CHECK(query::extractByRole(mm, inst, "Sensor") ==
          std::vector<std::string>{"frontCam", "roofLidar"});
    CHECK(query::extractByRole(mm, inst, "Actuator") == std::vector<std::string>{"frontBrake"});
    CHECK(query::extractByRole(mm, inst, "ProcessingTask").empty());
    // Ancestor roles contain every subclass extraction.
    const auto components = query::extractByRole(mm, inst, "Component");
    for (const auto& id : query::extractByRole(mm, inst, "CoProcessor")) {
        CHECK(std::find(components.begin(), components.end(), id) != components.end());
    }
}

TEST_CASE("elementProperties lists attributes with values or unset") {
    const Metamodel mm = testfix::ccsMini();
    const auto inst = testfix::demoVehicle();

    const auto cam = query::elementProperties(mm, inst, "frontCam");
    REQUIRE(cam.size() == 2);
    CHECK(cam[0].name == "resolution");
    CHECK(cam[0].typeRef == "int");
    CHECK(cam[0].value->asInt() == 1280);
    CHECK(cam[1].value->asInt() == 30);

    CHECK(query::elementProperties(mm, inst, "fpga1").empty());
    CHECK(query::elementProperties(mm, inst, "FRONT-CAM")[0].value->asInt() == 1280);
    CHECK_THROWS_AS((void)query::elementProperties(mm, inst, "nope"), Error);

    auto partial = inst;
    for (auto& obj : partial.objects) {
        if (obj.id == "frontCam") obj.slots.erase(obj.slots.begin() + 1);  // drop fps
    }
    const auto props = query::elementProperties(mm, partial, "frontCam");
    REQUIRE(props.size() == 2);
    CHECK(props[1].name == "fps");
    CHECK_FALSE(props[1].value.has_value());  // unset, not an error
}
