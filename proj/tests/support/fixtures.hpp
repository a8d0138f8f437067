#ifndef MBE_TESTS_FIXTURES_HPP
#define MBE_TESTS_FIXTURES_HPP

#include <fstream>
#include <sstream>
#include <string>

#include "mbe/model_io.hpp"

#ifndef FIXTURE_DIR
#error "FIXTURE_DIR must be defined by the build"
#endif

namespace mbe::testfix {

inline std::string fixturePath(const std::string& name) {
    return std::string(FIXTURE_DIR) + "/" + name;
}

inline std::string readFixture(const std::string& name) {
    std::ifstream in(fixturePath(name), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline model::Metamodel ccsMini() {
    return format::loadDocumentFile(fixturePath("ccs-mini.json")).metamodel();
}

inline model::Metamodel ccsMiniReduced() {
    return format::loadDocumentFile(fixturePath("ccs-mini-reduced.json")).metamodel();
}

inline model::Instance demoVehicle() {
    return format::loadDocumentFile(fixturePath("demo-vehicle.json")).instance();
}

inline std::string rulesText() { return readFixture("rules.ocl"); }

}  // namespace mbe::testfix

#endif  // MBE_TESTS_FIXTURES_HPP
