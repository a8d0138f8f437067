#ifndef MBE_HARNESS_HPP
#define MBE_HARNESS_HPP

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbe/gateway.hpp"

namespace mbe::harness {

// Expected answers share the task-shaped value layout of normalized answers.
struct GroundTruth {
    gateway::TaskKind kind = gateway::TaskKind::ListClasses;
    gateway::AnswerValue expected;
};

enum class Band { TotallyCorrect, MostlyCorrect, PartiallyCorrect, TotallyWrong };

std::string toString(Band band);

struct Score {
    gateway::TaskKind kind = gateway::TaskKind::ListClasses;
    double recall = 0.0;
    double precision = 0.0;
    std::vector<std::string> hallucinations;  // answer elements absent from GT
    std::vector<std::string> partials;        // name matched but detail did not
    Band band = Band::TotallyWrong;
    std::string display;  // Table-style cell text, e.g. "28/29", "A&B correct"
    std::string note;     // error annotation for failed questions
};

// Mechanical scoring per task kind. Throws Error(TASK_MISMATCH).
Score scoreAnswer(const GroundTruth& gt, const gateway::NormalizedAnswer& answer);

struct SuiteEntry {
    std::string label;  // e.g. "Q1"
    gateway::PromptTask task;
    GroundTruth groundTruth;
};

// Loads {"task","args","expected"} files (*.json, filename order). Diagram
// args (diagram / currentDiagram / newDiagram / metamodel) are file paths
// resolved against the GT file's directory.
std::vector<SuiteEntry> loadSuite(const std::string& directory);

struct RunReport {
    std::string backendName;
    std::vector<std::string> labels;
    std::vector<Score> scores;
    std::vector<std::int64_t> latenciesMs;
    std::string startedAt;   // ISO-8601 UTC
    std::string finishedAt;
};

// Dispatches each question in order, one fresh conversation each; transport
// failures annotate the affected question and the run continues.
RunReport runSuite(gateway::Backend& backend, const std::vector<SuiteEntry>& suite);

enum class ReportFormat { MarkdownTable, Json };

std::string renderReport(const std::vector<RunReport>& reports, ReportFormat format);

}  // namespace mbe::harness

#endif  // MBE_HARNESS_HPP
