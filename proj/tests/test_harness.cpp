#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mbe/harness.hpp"

#include "support/fixtures.hpp"
#include "support/generators.hpp"

using namespace mbe;
using gateway::AnswerValue;
using gateway::NormalizedAnswer;
using gateway::TaskKind;
using harness::Band;
using harness::GroundTruth;
using harness::Score;
using harness::scoreAnswer;

namespace {

GroundTruth classListGt(int count) {
    GroundTruth gt;
    gt.kind = TaskKind::ListClasses;
    for (int i = 1; i <= count; ++i) gt.expected.names.push_back("Class" + std::to_string(i));
    return gt;
}

NormalizedAnswer answerWith(TaskKind kind, AnswerValue value) {
    NormalizedAnswer answer;
    answer.kind = kind;
    answer.value = std::move(value);
    return answer;
}

}  // namespace

TEST_CASE("Q1: one missing name out of 29 reads 28/29") {
    const GroundTruth gt = classListGt(29);
    AnswerValue value;
    value.names.assign(gt.expected.names.begin(), gt.expected.names.end() - 1);
    const Score score = scoreAnswer(gt, answerWith(TaskKind::ListClasses, value));
    CHECK(score.display == "28/29");
    CHECK((score.band == Band::MostlyCorrect));
    CHECK(score.recall == doctest::Approx(28.0 / 29.0));
    CHECK(score.precision == doctest::Approx(1.0));
    CHECK(score.hallucinations.empty());
}

TEST_CASE("Q1: perfect answer and empty answer") {
    const GroundTruth gt = classListGt(15);
    const Score perfect = scoreAnswer(gt, answerWith(TaskKind::ListClasses, gt.expected));
    CHECK(perfect.display == "15/15");
    CHECK((perfect.band == Band::TotallyCorrect));

    const Score empty = scoreAnswer(gt, answerWith(TaskKind::ListClasses, {}));
    CHECK(empty.display == "0/15");
    CHECK((empty.band == Band::TotallyWrong));
}

TEST_CASE("Q1: hallucinated names hurt precision, not recall") {
    const GroundTruth gt = classListGt(4);
    AnswerValue value;
    value.names = gt.expected.names;
    value.names.push_back("Hovercraft");
    const Score score = scoreAnswer(gt, answerWith(TaskKind::ListClasses, value));
    CHECK(score.display == "4/4");
    CHECK(score.recall == doctest::Approx(1.0));
    CHECK(score.precision == doctest::Approx(0.8));
    REQUIRE(score.hallucinations.size() == 1);
    CHECK(score.hallucinations[0] == "Hovercraft");
    CHECK((score.band == Band::MostlyCorrect));
}

TEST_CASE("Q2: member scoring separates categories and records partial matches") {
    GroundTruth gt;
    gt.kind = TaskKind::ListMembers;
    gt.expected.attributes = {{"id", "string"}, {"cores", "int"}};
    gt.expected.operations = {{"status", "(): string"}};

    SUBCASE("perfect") {
        const Score score = scoreAnswer(gt, answerWith(TaskKind::ListMembers, gt.expected));
        CHECK(score.display == "Totally correct");
        CHECK((score.band == Band::TotallyCorrect));
    }
    SUBCASE("wrong type is a partial, not a match") {
        AnswerValue value = gt.expected;
        value.attributes[1].detail = "real";
        const Score score = scoreAnswer(gt, answerWith(TaskKind::ListMembers, value));
        CHECK(score.recall == doctest::Approx(2.0 / 3.0));
        REQUIRE(score.partials.size() == 1);
        CHECK(score.partials[0].find("cores") != std::string::npos);
        CHECK(score.hallucinations.empty());
    }
    SUBCASE("attribute names never match operations") {
        AnswerValue value;
        value.operations = {{"id", ""}, {"cores", ""}, {"status", "(): string"}};
        const Score score = scoreAnswer(gt, answerWith(TaskKind::ListMembers, value));
        CHECK(score.recall == doctest::Approx(1.0 / 3.0));
        CHECK(score.hallucinations.size() == 2);
    }
    SUBCASE("much hallucination reaches the Table-2 phrase") {
        AnswerValue value = gt.expected;
        value.attributes = {{"id", "string"}};  // recall 2/3
        value.attributes.push_back({"alpha", "int"});
        value.attributes.push_back({"beta", "int"});
        const Score score = scoreAnswer(gt, answerWith(TaskKind::ListMembers, value));
        CHECK((score.band == Band::PartiallyCorrect));
        CHECK(score.display == "Partially correct with much hallucination");
    }
}

TEST_CASE("Q3: A/B displays") {
    GroundTruth gt;
    gt.kind = TaskKind::KindOfQuery;
    gt.expected.boolA = true;
    gt.expected.boolB = true;

    AnswerValue both;
    both.boolA = true;
    both.boolB = true;
    CHECK(scoreAnswer(gt, answerWith(TaskKind::KindOfQuery, both)).display == "A&B correct");

    AnswerValue onlyA;
    onlyA.boolA = true;
    onlyA.boolB = false;
    const Score partial = scoreAnswer(gt, answerWith(TaskKind::KindOfQuery, onlyA));
    CHECK(partial.display == "Only A correct");
    CHECK((partial.band == Band::PartiallyCorrect));

    AnswerValue silentB;
    silentB.boolA = false;
    const Score wrong = scoreAnswer(gt, answerWith(TaskKind::KindOfQuery, silentB));
    CHECK(wrong.display == "A&B wrong");
    CHECK((wrong.band == Band::TotallyWrong));
}

TEST_CASE("Q4: exact chain required, reversal allowed, subclasses as a set") {
    GroundTruth gt;
    gt.kind = TaskKind::RelationChainQuery;
    gt.expected.chain = {"Camera", "Sensor", "ProcessingNode", "Component"};
    gt.expected.subclasses = {"PerceptionTask", "PlanningTask", "ControlTask"};

    AnswerValue good;
    good.chain = {"Camera", "Sensor", "ProcessingNode", "Component"};
    good.subclasses = {"ControlTask", "PlanningTask", "PerceptionTask"};  // set semantics
    CHECK(scoreAnswer(gt, answerWith(gt.kind, good)).display == "A&B correct");

    AnswerValue reversed = good;
    std::reverse(reversed.chain.begin(), reversed.chain.end());
    CHECK(scoreAnswer(gt, answerWith(gt.kind, reversed)).display == "A&B correct");

    AnswerValue badChain = good;
    badChain.chain = {"Camera", "ProcessingNode", "Component"};  // wrong length
    CHECK(scoreAnswer(gt, answerWith(gt.kind, badChain)).display == "Only B correct");

    AnswerValue scrambled = good;
    scrambled.chain = {"Camera", "ProcessingNode", "Sensor", "Component"};  // wrong order
    CHECK(scoreAnswer(gt, answerWith(gt.kind, scrambled)).display == "Only B correct");

    AnswerValue badSubs = good;
    badSubs.subclasses = {"PerceptionTask"};
    CHECK(scoreAnswer(gt, answerWith(gt.kind, badSubs)).display == "Only A correct");
}

TEST_CASE("Q5: recall drives the band and the Table-2 phrases") {
    GroundTruth gt;
    gt.kind = TaskKind::DetectDifferences;
    gt.expected.differences = {{"ClassRemoved", "FPGA"},
                               {"ClassRemoved", "GPU"},
                               {"ClassRemoved", "TPU"}};

    const Score none = scoreAnswer(gt, answerWith(gt.kind, {}));
    CHECK(none.display == "No correct difference detected");
    CHECK((none.band == Band::TotallyWrong));

    AnswerValue partial;
    partial.differences = {{"ClassRemoved", "FPGA"}};
    const Score some = scoreAnswer(gt, answerWith(gt.kind, partial));
    CHECK(some.display == "Partial difference detected");
    CHECK((some.band == Band::PartiallyCorrect));

    AnswerValue all;
    all.differences = {{"ClassRemoved", "GPU"},
                       {"ClassRemoved", "FPGA"},
                       {"ClassRemoved", "TPU"},
                       {"ClassAdded", "Hoverboard"}};
    const Score full = scoreAnswer(gt, answerWith(gt.kind, all));
    CHECK(full.display == "Correct difference detected");
    CHECK((full.band == Band::TotallyCorrect));
    REQUIRE(full.hallucinations.size() == 1);
}

TEST_CASE("task mismatch is a hard error") {
    const GroundTruth gt = classListGt(3);
    CHECK_THROWS_AS((void)scoreAnswer(gt, answerWith(TaskKind::SubclassQuery, {})), Error);
}

TEST_CASE("property: correct names never lower the band, hallucinations never raise recall") {
    testgen::Rng rng(909);
    for (int round = 0; round < 100; ++round) {
        const GroundTruth gt = classListGt(testgen::pick(rng, 2, 12));
        AnswerValue value;
        for (const auto& name : gt.expected.names) {
            if (testgen::chance(rng, 0.5)) value.names.push_back(name);
        }
        const Score before = scoreAnswer(gt, answerWith(TaskKind::ListClasses, value));

        // add one missing correct name (if any remain)
        for (const auto& name : gt.expected.names) {
            if (std::find(value.names.begin(), value.names.end(), name) == value.names.end()) {
                AnswerValue more = value;
                more.names.push_back(name);
                const Score after = scoreAnswer(gt, answerWith(TaskKind::ListClasses, more));
                CHECK(after.recall >= before.recall);
                CHECK(static_cast<int>(after.band) <= static_cast<int>(before.band));
                break;
            }
        }
        AnswerValue noisy = value;
        noisy.names.push_back("Zeppelin" + std::to_string(round));
        const Score worse = scoreAnswer(gt, answerWith(TaskKind::ListClasses, noisy));
        CHECK(worse.recall == doctest::Approx(before.recall));
    }
}

TEST_CASE("loadSuite reads the fixture ground-truth files in order") {
    const auto suite = harness::loadSuite(testfix::fixturePath("gt-suite"));
    REQUIRE(suite.size() == 5);
    CHECK(suite[0].label == "Q1");
    CHECK((suite[0].task.kind == TaskKind::ListClasses));
    CHECK(suite[1].task.arguments.at("className") == "ProcessingNode");
    CHECK((suite[2].task.kind == TaskKind::KindOfQuery));
    CHECK(suite[3].groundTruth.expected.chain.size() == 4);
    CHECK(suite[3].groundTruth.expected.subclasses.size() == 3);
    CHECK((suite[4].task.kind == TaskKind::DetectDifferences));
    REQUIRE(suite[4].task.diagrams.size() == 2);
    CHECK(suite[0].groundTruth.expected.names.size() == 15);
}

TEST_CASE("mock suite run is all TotallyCorrect with the Table-2 displays") {
    gateway::MockBackend mock;
    const auto suite = harness::loadSuite(testfix::fixturePath("gt-suite"));
    const auto report = harness::runSuite(mock, suite);
    REQUIRE(report.scores.size() == 5);
    const std::vector<std::string> expected{
        "15/15", "Totally correct", "A&B correct", "A&B correct", "Correct difference detected"};
    for (size_t i = 0; i < expected.size(); ++i) {
        CHECK((report.scores[i].band == Band::TotallyCorrect));
        CHECK(report.scores[i].display == expected[i]);
        CHECK(report.scores[i].note.empty());
    }
    CHECK(report.backendName == "mock");
    CHECK(report.latenciesMs.size() == 5);
}

namespace {

class ExplodingBackend final : public gateway::Backend {
public:
    std::string name() const override { return "exploding"; }
    gateway::BackendAnswer send(const gateway::BuiltPrompt&) override {
        throw Error("BACKEND_UNREACHABLE", "synthetic outage");
    }
    nlohmann::json mapFreeformEdits(const std::string&) override {
        throw Error("BACKEND_UNREACHABLE", "synthetic outage");
    }
};

}  // namespace

TEST_CASE("a dead backend annotates every question and the run still renders") {
    ExplodingBackend dead;
    const auto suite = harness::loadSuite(testfix::fixturePath("gt-suite"));
    const auto report = harness::runSuite(dead, suite);
    REQUIRE(report.scores.size() == 5);
    for (const auto& score : report.scores) {
        CHECK((score.band == Band::TotallyWrong));
        CHECK(score.note.find("BACKEND_UNREACHABLE") != std::string::npos);
    }
    CHECK(report.scores[0].display == "0/15");
    CHECK(report.scores[4].display == "No correct difference detected");

    const auto table = harness::renderReport({report}, harness::ReportFormat::MarkdownTable);
    CHECK(table.find("| exploding |") != std::string::npos);
}

TEST_CASE("renderReport formats") {
    gateway::MockBackend mock;
    const auto suite = harness::loadSuite(testfix::fixturePath("gt-suite"));
    const auto report = harness::runSuite(mock, suite);

    const auto table = harness::renderReport({report}, harness::ReportFormat::MarkdownTable);
    CHECK(table.find("| Model | Q1 | Q2 | Q3 | Q4 | Q5 |") == 0);
    CHECK(table.find("| mock | 15/15 | Totally correct | A&B correct | A&B correct | "
                     "Correct difference detected |") != std::string::npos);

    CHECK(harness::renderReport({}, harness::ReportFormat::MarkdownTable) == "| Model |\n|---|\n");

    const auto two = harness::renderReport({report, report}, harness::ReportFormat::MarkdownTable);
    CHECK(std::count(two.begin(), two.end(), '\n') == 4);  // header + divider + two rows

    const auto json = nlohmann::json::parse(
        harness::renderReport({report}, harness::ReportFormat::Json));
    REQUIRE(json.is_array());
    CHECK(json[0]["backend"] == "mock");
    CHECK(json[0]["questions"].size() == 5);
    CHECK(json[0]["questions"][0]["display"] == "15/15");
}

TEST_CASE("empty suite yields a report with zero questions") {
    gateway::MockBackend mock;
    const auto report = harness::runSuite(mock, {});
    CHECK(report.scores.empty());
    CHECK_FALSE(report.startedAt.empty());
}
