#include "mbe/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace mbe::harness {

using gateway::AnswerValue;
using gateway::NormalizedAnswer;
using gateway::PromptTask;
using gateway::TaskKind;
using nlohmann::json;
using nlohmann::ordered_json;

std::string toString(Band band) {
    switch (band) {
        case Band::TotallyCorrect: return "TotallyCorrect";
        case Band::MostlyCorrect: return "MostlyCorrect";
        case Band::PartiallyCorrect: return "PartiallyCorrect";
        case Band::TotallyWrong: return "TotallyWrong";
    }
    return {};
}

namespace {

// Band thresholds: TotallyCorrect = recall 1 and precision 1; MostlyCorrect =
// recall >= 0.8 and at most 1 hallucination; PartiallyCorrect = recall > 0.
Band bandFor(double recall, double precision, size_t hallucinations) {
    if (recall >= 1.0 && precision >= 1.0) return Band::TotallyCorrect;
    if (recall >= 0.8 && hallucinations <= 1) return Band::MostlyCorrect;
    if (recall > 0.0) return Band::PartiallyCorrect;
    return Band::TotallyWrong;
}

std::string bandPhrase(Band band, size_t hallucinations) {
    switch (band) {
        case Band::TotallyCorrect: return "Totally correct";
        case Band::MostlyCorrect: return "Mostly correct";
        case Band::PartiallyCorrect:
            return hallucinations > 1 ? "Partially correct with much hallucination"
                                      : "Partially correct";
        case Band::TotallyWrong: return "Totally wrong";
    }
    return {};
}

std::string ratioDisplay(size_t found, size_t total) {
    return std::to_string(found) + "/" + std::to_string(total);
}

struct SetScore {
    size_t matched = 0;
    size_t expected = 0;
    size_t answered = 0;
    std::vector<std::string> hallucinations;
};

SetScore scoreNameSets(const std::vector<std::string>& expected,
                       const std::vector<std::string>& answered) {
    SetScore score;
    std::set<std::string> expectedNorm;
    for (const auto& name : expected) expectedNorm.insert(normalizeName(name));
    score.expected = expectedNorm.size();

    std::set<std::string> seen;
    for (const auto& name : answered) {
        const std::string norm = normalizeName(name);
        if (!seen.insert(norm).second) continue;
        ++score.answered;
        if (expectedNorm.count(norm)) {
            ++score.matched;
        } else {
            score.hallucinations.push_back(name);
        }
    }
    return score;
}

void applySetScore(Score& out, const SetScore& set) {
    out.recall = set.expected == 0 ? 1.0 : static_cast<double>(set.matched) / set.expected;
    out.precision = set.answered == 0 ? (set.expected == 0 ? 1.0 : 0.0)
                                      : static_cast<double>(set.matched) / set.answered;
    out.hallucinations = set.hallucinations;
}

bool sameDetail(const std::string& expected, const std::string& answered) {
    if (expected.empty()) return true;  // GT gives no type: name match suffices
    return normalizeName(expected) == normalizeName(answered);
}

struct MemberScore {
    size_t matched = 0;
    std::vector<std::string> partials;
    std::vector<std::string> hallucinations;
    size_t answered = 0;
};

MemberScore scoreMemberCategory(const std::vector<gateway::MemberItem>& expected,
                                const std::vector<gateway::MemberItem>& answered) {
    MemberScore score;
    std::set<std::string> seen;
    for (const auto& item : answered) {
        const std::string norm = normalizeName(item.name);
        if (!seen.insert(norm).second) continue;
        ++score.answered;
        const gateway::MemberItem* gt = nullptr;
        for (const auto& candidate : expected) {
            if (normalizeName(candidate.name) == norm) {
                gt = &candidate;
                break;
            }
        }
        if (!gt) {
            score.hallucinations.push_back(item.name);
        } else if (sameDetail(gt->detail, item.detail)) {
            ++score.matched;
        } else {
            score.partials.push_back(item.name + " (detail mismatch: got '" + item.detail +
                                     "', expected '" + gt->detail + "')");
        }
    }
    return score;
}

bool chainMatches(const std::vector<std::string>& expected, const std::vector<std::string>& answered) {
    if (expected.size() != answered.size()) return false;
    auto equalAt = [&](bool reversed) {
        for (size_t i = 0; i < expected.size(); ++i) {
            const auto& ans = reversed ? answered[answered.size() - 1 - i] : answered[i];
            if (!sameName(expected[i], ans)) return false;
        }
        return true;
    };
    // Chain direction is presentation-only: a reversed chain is the same chain.
    return equalAt(false) || equalAt(true);
}

bool nameSetEquals(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::set<std::string> an, bn;
    for (const auto& name : a) an.insert(normalizeName(name));
    for (const auto& name : b) bn.insert(normalizeName(name));
    return an == bn;
}

std::string abDisplay(bool aCorrect, bool bCorrect) {
    if (aCorrect && bCorrect) return "A&B correct";
    if (aCorrect) return "Only A correct";
    if (bCorrect) return "Only B correct";
    return "A&B wrong";
}

Band abBand(bool aCorrect, bool bCorrect) {
    if (aCorrect && bCorrect) return Band::TotallyCorrect;
    if (aCorrect || bCorrect) return Band::PartiallyCorrect;
    return Band::TotallyWrong;
}

}  // namespace

Score scoreAnswer(const GroundTruth& gt, const NormalizedAnswer& answer) {
    if (gt.kind != answer.kind) {
        throw Error("TASK_MISMATCH", "ground truth is " + gateway::toString(gt.kind) +
                                         " but answer is " + gateway::toString(answer.kind));
    }
    Score score;
    score.kind = gt.kind;

    switch (gt.kind) {
        case TaskKind::ListClasses: {
            const SetScore set = scoreNameSets(gt.expected.names, answer.value.names);
            applySetScore(score, set);
            score.band = bandFor(score.recall, score.precision, set.hallucinations.size());
            score.display = ratioDisplay(set.matched, set.expected);
            break;
        }
        case TaskKind::ListMembers: {
            const MemberScore attrs =
                scoreMemberCategory(gt.expected.attributes, answer.value.attributes);
            const MemberScore ops =
                scoreMemberCategory(gt.expected.operations, answer.value.operations);
            const size_t expected = gt.expected.attributes.size() + gt.expected.operations.size();
            const size_t matched = attrs.matched + ops.matched;
            const size_t answered = attrs.answered + ops.answered;
            score.recall = expected == 0 ? 1.0 : static_cast<double>(matched) / expected;
            score.precision = answered == 0 ? (expected == 0 ? 1.0 : 0.0)
                                            : static_cast<double>(matched) / answered;
            score.hallucinations = attrs.hallucinations;
            score.hallucinations.insert(score.hallucinations.end(), ops.hallucinations.begin(),
                                        ops.hallucinations.end());
            score.partials = attrs.partials;
            score.partials.insert(score.partials.end(), ops.partials.begin(), ops.partials.end());
            score.band = bandFor(score.recall, score.precision, score.hallucinations.size());
            score.display = bandPhrase(score.band, score.hallucinations.size());
            break;
        }
        case TaskKind::KindOfQuery: {
            const bool aCorrect = gt.expected.boolA && answer.value.boolA &&
                                  *gt.expected.boolA == *answer.value.boolA;
            const bool bCorrect = gt.expected.boolB && answer.value.boolB &&
                                  *gt.expected.boolB == *answer.value.boolB;
            score.band = abBand(aCorrect, bCorrect);
            score.display = abDisplay(aCorrect, bCorrect);
            score.recall = (aCorrect ? 0.5 : 0.0) + (bCorrect ? 0.5 : 0.0);
            score.precision = score.recall;
            break;
        }
        case TaskKind::RelationChainQuery: {
            const bool aCorrect = chainMatches(gt.expected.chain, answer.value.chain);
            if (gt.expected.subclasses.empty()) {
                score.band = aCorrect ? Band::TotallyCorrect : Band::TotallyWrong;
                score.display = aCorrect ? "Chain correct" : "Chain wrong";
                score.recall = aCorrect ? 1.0 : 0.0;
                score.precision = score.recall;
            } else {
                const bool bCorrect = nameSetEquals(gt.expected.subclasses, answer.value.subclasses);
                score.band = abBand(aCorrect, bCorrect);
                score.display = abDisplay(aCorrect, bCorrect);
                score.recall = (aCorrect ? 0.5 : 0.0) + (bCorrect ? 0.5 : 0.0);
                score.precision = score.recall;
            }
            break;
        }
        case TaskKind::SubclassQuery: {
            const SetScore set = scoreNameSets(gt.expected.subclasses, answer.value.subclasses);
            applySetScore(score, set);
            score.band = bandFor(score.recall, score.precision, set.hallucinations.size());
            score.display = bandPhrase(score.band, set.hallucinations.size());
            break;
        }
        case TaskKind::ExtractRole: {
            std::vector<std::string> expectedIds, answeredIds;
            for (const auto& item : gt.expected.elements) expectedIds.push_back(item.id);
            for (const auto& item : answer.value.elements) answeredIds.push_back(item.id);
            const SetScore set = scoreNameSets(expectedIds, answeredIds);
            applySetScore(score, set);
            score.band = bandFor(score.recall, score.precision, set.hallucinations.size());
            score.display = ratioDisplay(set.matched, set.expected);
            break;
        }
        case TaskKind::ElementProperties: {
            size_t matched = 0;
            std::set<std::string> seen;
            size_t answered = 0;
            for (const auto& item : answer.value.properties) {
                if (!seen.insert(normalizeName(item.name)).second) continue;
                ++answered;
                const gateway::PropertyItem* gtItem = nullptr;
                for (const auto& candidate : gt.expected.properties) {
                    if (sameName(candidate.name, item.name)) {
                        gtItem = &candidate;
                        break;
                    }
                }
                if (gtItem && gtItem->value == item.value) {
                    ++matched;
                } else if (gtItem) {
                    score.partials.push_back(item.name);
                } else {
                    score.hallucinations.push_back(item.name);
                }
            }
            const size_t expected = gt.expected.properties.size();
            score.recall = expected == 0 ? 1.0 : static_cast<double>(matched) / expected;
            score.precision = answered == 0 ? (expected == 0 ? 1.0 : 0.0)
                                            : static_cast<double>(matched) / answered;
            score.band = bandFor(score.recall, score.precision, score.hallucinations.size());
            score.display = bandPhrase(score.band, score.hallucinations.size());
            break;
        }
        case TaskKind::DetectDifferences: {
            std::set<std::pair<std::string, std::string>> expectedSet;
            for (const auto& item : gt.expected.differences) {
                expectedSet.insert({item.kind, normalizeName(item.path)});
            }
            std::set<std::pair<std::string, std::string>> seen;
            size_t matched = 0;
            size_t answered = 0;
            for (const auto& item : answer.value.differences) {
                const auto key = std::make_pair(item.kind, normalizeName(item.path));
                if (!seen.insert(key).second) continue;
                ++answered;
                if (expectedSet.count(key)) {
                    ++matched;
                } else {
                    score.hallucinations.push_back(item.kind + " " + item.path);
                }
            }
            score.recall = expectedSet.empty() ? 1.0
                                               : static_cast<double>(matched) / expectedSet.size();
            score.precision = answered == 0 ? (expectedSet.empty() ? 1.0 : 0.0)
                                            : static_cast<double>(matched) / answered;
            // Q5 band keys on recall alone: detection is judged, extras are
            // reported as hallucinations.
            score.band = score.recall >= 1.0  ? Band::TotallyCorrect
                         : score.recall > 0.0 ? Band::PartiallyCorrect
                                              : Band::TotallyWrong;
            score.display = score.recall >= 1.0  ? "Correct difference detected"
                            : score.recall > 0.0 ? "Partial difference detected"
                                                 : "No correct difference detected";
            break;
        }
    }
    return score;
}

namespace {

std::string isoTimestampUtc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t seconds = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&seconds, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

std::string readFile(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("IO_ERROR", "cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string failureDisplay(const GroundTruth& gt) {
    switch (gt.kind) {
        case TaskKind::ListClasses:
            return ratioDisplay(0, gt.expected.names.size());
        case TaskKind::KindOfQuery:
        case TaskKind::RelationChainQuery:
            return "A&B wrong";
        case TaskKind::DetectDifferences:
            return "No correct difference detected";
        default:
            return "Totally wrong";
    }
}

const model::Metamodel* metamodelForNormalization(const PromptTask& task) {
    for (const auto& diagram : task.diagrams) {
        if (diagram.format != gateway::DiagramPayload::Format::CcsJson) continue;
        if (diagram.contextMetamodel) return &*diagram.contextMetamodel;
        if (diagram.document && diagram.document->isMetamodel()) return &diagram.document->metamodel();
    }
    return nullptr;
}

}  // namespace

std::vector<SuiteEntry> loadSuite(const std::string& directory) {
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(directory)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());

    std::vector<SuiteEntry> suite;
    for (const auto& file : files) {
        const json root = json::parse(readFile(file), nullptr, false);
        if (root.is_discarded() || !root.is_object()) {
            throw Error("BAD_SUITE", "ground-truth file is not a JSON object: " + file.string());
        }
        const auto kind = gateway::taskKindFromString(root.value("task", ""));
        if (!kind) {
            throw Error("BAD_SUITE", "unknown task in " + file.string());
        }

        SuiteEntry entry;
        entry.label = file.stem().string();
        std::transform(entry.label.begin(), entry.label.end(), entry.label.begin(),
                       [](unsigned char c) { return std::toupper(c); });
        entry.task.kind = *kind;
        entry.groundTruth.kind = *kind;

        const json args = root.value("args", json::object());
        std::optional<model::Metamodel> bundleMm;
        if (args.contains("metamodel") && args["metamodel"].is_string()) {
            const auto doc = format::loadDocumentFile(
                (file.parent_path() / args["metamodel"].get<std::string>()).string());
            if (!doc.isMetamodel()) {
                throw Error("BAD_SUITE", "metamodel arg must point at a metamodel document");
            }
            bundleMm = doc.metamodel();
        }
        auto loadDiagram = [&](const std::string& ref) {
            auto doc = format::loadDocumentFile((file.parent_path() / ref).string());
            if (doc.isInstance() && bundleMm) {
                return gateway::DiagramPayload::fromInstanceBundle(*bundleMm, doc.instance());
            }
            return gateway::DiagramPayload::fromDocument(std::move(doc));
        };
        for (const char* key : {"diagram", "currentDiagram", "newDiagram"}) {
            if (args.contains(key) && args[key].is_string()) {
                entry.task.diagrams.push_back(loadDiagram(args[key].get<std::string>()));
            }
        }
        for (auto it = args.begin(); it != args.end(); ++it) {
            if (it.key() == "diagram" || it.key() == "currentDiagram" || it.key() == "newDiagram" ||
                it.key() == "metamodel") {
                continue;
            }
            if (it->is_string()) entry.task.arguments[it.key()] = it->get<std::string>();
        }

        if (!root.contains("expected")) {
            throw Error("BAD_SUITE", "missing 'expected' in " + file.string());
        }
        auto expected = gateway::answerValueFromJson(*kind, root["expected"]);
        if (!expected) {
            throw Error("BAD_SUITE", "'expected' does not match task shape in " + file.string());
        }
        entry.groundTruth.expected = std::move(*expected);
        suite.push_back(std::move(entry));
    }
    return suite;
}

RunReport runSuite(gateway::Backend& backend, const std::vector<SuiteEntry>& suite) {
    RunReport report;
    report.backendName = backend.name();
    report.startedAt = isoTimestampUtc();
    for (const auto& entry : suite) {
        report.labels.push_back(entry.label);
        try {
            const auto prompt = gateway::buildPrompt(entry.task);
            const auto answer = gateway::sendToBackend(backend, prompt);
            const auto normalized =
                gateway::normalizeAnswer(entry.task, answer, metamodelForNormalization(entry.task));
            report.scores.push_back(scoreAnswer(entry.groundTruth, normalized));
            report.latenciesMs.push_back(answer.latencyMs);
        } catch (const Error& error) {
            Score failed;
            failed.kind = entry.task.kind;
            failed.band = Band::TotallyWrong;
            failed.display = failureDisplay(entry.groundTruth);
            failed.note = std::string(error.code()) + ": " + error.what();
            report.scores.push_back(std::move(failed));
            report.latenciesMs.push_back(0);
        }
    }
    report.finishedAt = isoTimestampUtc();
    return report;
}

std::string renderReport(const std::vector<RunReport>& reports, ReportFormat format) {
    if (format == ReportFormat::Json) {
        ordered_json out = ordered_json::array();
        for (const auto& report : reports) {
            ordered_json run;
            run["backend"] = report.backendName;
            run["startedAt"] = report.startedAt;
            run["finishedAt"] = report.finishedAt;
            run["questions"] = ordered_json::array();
            for (size_t i = 0; i < report.scores.size(); ++i) {
                const Score& score = report.scores[i];
                ordered_json q;
                q["label"] = i < report.labels.size() ? report.labels[i] : "Q" + std::to_string(i + 1);
                q["task"] = gateway::toString(score.kind);
                q["band"] = toString(score.band);
                q["display"] = score.display;
                q["recall"] = score.recall;
                q["precision"] = score.precision;
                q["hallucinations"] = score.hallucinations;
                q["partials"] = score.partials;
                if (!score.note.empty()) q["note"] = score.note;
                if (i < report.latenciesMs.size()) q["latencyMs"] = report.latenciesMs[i];
                run["questions"].push_back(std::move(q));
            }
            out.push_back(std::move(run));
        }
        return out.dump(2) + "\n";
    }

    // Markdown table, one row per backend.
    std::vector<std::string> labels;
    for (const auto& report : reports) {
        for (size_t i = 0; i < report.scores.size(); ++i) {
            const std::string label =
                i < report.labels.size() ? report.labels[i] : "Q" + std::to_string(i + 1);
            if (i >= labels.size()) labels.push_back(label);
        }
    }
    std::ostringstream out;
    out << "| Model |";
    for (const auto& label : labels) out << " " << label << " |";
    out << "\n|---|";
    for (size_t i = 0; i < labels.size(); ++i) out << "---|";
    out << "\n";
    for (const auto& report : reports) {
        out << "| " << report.backendName << " |";
        for (size_t i = 0; i < labels.size(); ++i) {
            out << " " << (i < report.scores.size() ? report.scores[i].display : "") << " |";
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace mbe::harness
