#ifndef MBE_GATEWAY_HPP
#define MBE_GATEWAY_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbe/model.hpp"
#include "mbe/model_io.hpp"

namespace mbe::gateway {

// One diagram as handed to a backend: either a rendered image or a canonical
// ccs-json payload. A ccs-json instance travels together with its metamodel
// (the "bundle" form) because instance-level questions need both.
struct DiagramPayload {
    enum class Format { ImagePngBase64, CcsJson };

    Format format = Format::CcsJson;
    std::string imageBase64;                            // image form
    std::optional<format::ModelDocument> document;      // ccs-json form
    std::optional<model::Metamodel> contextMetamodel;   // bundle form only

    static DiagramPayload fromImage(std::string base64);
    static DiagramPayload fromDocument(format::ModelDocument doc);
    static DiagramPayload fromInstanceBundle(model::Metamodel mm, model::Instance inst);

    // {"format":"ccs-json","data":{...}} | {"format":"image/png;base64","data":"..."}
    // Bundle data: {"metamodel":{...},"instance":{...}}. Takes ordered JSON so
    // embedded documents keep their element order. Throws Error on bad input.
    static DiagramPayload fromJson(const nlohmann::ordered_json& node);
    nlohmann::ordered_json toJson() const;
};

enum class TaskKind {
    ListClasses,
    ListMembers,
    KindOfQuery,
    RelationChainQuery,
    SubclassQuery,
    ExtractRole,
    ElementProperties,
    DetectDifferences,
};

std::string toString(TaskKind kind);
std::optional<TaskKind> taskKindFromString(std::string_view text);

// Arguments by task kind:
//   ListMembers        className
//   KindOfQuery        classA ancestorA classB ancestorB  (the paper's A/B pair)
//   RelationChainQuery from to [subclassesOf]             (Q4 asks A and B together)
//   SubclassQuery      className
//   ExtractRole        role
//   ElementProperties  elementName
struct PromptTask {
    TaskKind kind = TaskKind::ListClasses;
    std::map<std::string, std::string> arguments;
    std::vector<DiagramPayload> diagrams;  // 2 for DetectDifferences, else 1

    std::string arg(const std::string& key) const;           // throws Error(MISSING_ARGUMENT)
    std::optional<std::string> argOpt(const std::string& key) const;
};

struct BuiltPrompt {
    PromptTask task;
    std::string systemText;
    std::string userText;
    std::vector<std::string> imageDataUrls;  // "data:image/png;base64,..."
};

// Deterministic prompt per task kind; user text embeds the question phrasing
// and any ccs-json payloads, system text pins the answer JSON schema.
BuiltPrompt buildPrompt(const PromptTask& task);

struct BackendAnswer {
    std::string rawText;
    std::optional<nlohmann::json> structured;  // first fenced/whole-text JSON block
    std::int64_t latencyMs = 0;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string name() const = 0;
    virtual BackendAnswer send(const BuiltPrompt& prompt) = 0;

    // Maps freeform change text to primitive-edit JSON:
    // [{"op":"setSlot","object":..,"attribute":..,"value":..}, ...]
    virtual nlohmann::json mapFreeformEdits(const std::string& text) = 0;
};

BackendAnswer sendToBackend(Backend& backend, const BuiltPrompt& prompt);

// Deterministic offline backend: requires ccs-json payloads and answers by
// running the query/diff engines, rendering the exact JSON the prompt asked
// for. Errors with MOCK_NEEDS_CANONICAL on image payloads.
class MockBackend final : public Backend {
public:
    std::string name() const override { return "mock"; }
    BackendAnswer send(const BuiltPrompt& prompt) override;
    nlohmann::json mapFreeformEdits(const std::string& text) override;
};

struct RemoteConfig {
    std::string baseUrl;        // e.g. "http://127.0.0.1:8099/v1"
    std::string modelName;
    std::string apiKey;
    int timeoutSeconds = 60;
    int maxConcurrentRequests = 4;
    int retryBaseMs = 500;      // exponential backoff base; 2 retries on transport failure

    // MBE_BACKEND_URL, MBE_BACKEND_MODEL, MBE_BACKEND_KEY, MBE_BACKEND_TIMEOUT_S.
    // nullopt when MBE_BACKEND_URL is unset.
    static std::optional<RemoteConfig> fromEnv();
};

// OpenAI-compatible chat-completions client with image content parts.
class RemoteBackend final : public Backend {
public:
    explicit RemoteBackend(RemoteConfig config);
    ~RemoteBackend() override;

    std::string name() const override;
    BackendAnswer send(const BuiltPrompt& prompt) override;
    nlohmann::json mapFreeformEdits(const std::string& text) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct MemberItem {
    std::string name;
    std::string detail;  // attribute type, or operation signature
    bool operator==(const MemberItem&) const = default;
};

struct ElementItem {
    std::string id;
    std::string className;
    bool operator==(const ElementItem&) const = default;
};

struct PropertyItem {
    std::string name;
    std::string typeRef;
    nlohmann::json value;  // null = unset
    bool operator==(const PropertyItem&) const = default;
};

struct DiffItem {
    std::string kind;
    std::string path;
    bool operator==(const DiffItem&) const = default;
};

// Task-shaped result; only the fields matching the task kind are populated.
struct AnswerValue {
    std::vector<std::string> names;                      // ListClasses
    std::vector<MemberItem> attributes;                  // ListMembers
    std::vector<MemberItem> operations;                  // ListMembers
    std::optional<bool> boolA, boolB;                    // KindOfQuery
    std::vector<std::string> chain;                      // RelationChainQuery
    std::vector<std::string> subclasses;                 // SubclassQuery / combined Q4
    std::vector<ElementItem> elements;                   // ExtractRole
    std::vector<PropertyItem> properties;                // ElementProperties
    std::vector<DiffItem> differences;                   // DetectDifferences
};

struct NormalizedAnswer {
    TaskKind kind = TaskKind::ListClasses;
    AnswerValue value;
    std::vector<std::string> unparsedLines;  // raw content matched by nothing
};

// Two-tier parsing: the fenced JSON block wins; otherwise line heuristics with
// bullet stripping, name normalization against mm when given, and first
// yes/no/true/false token for booleans.
NormalizedAnswer normalizeAnswer(const PromptTask& task, const BackendAnswer& answer,
                                 const model::Metamodel* mm);

// Parses a task-shaped JSON object (the per-task answer schema) into a value.
// nullopt when the object carries none of the task's fields.
std::optional<AnswerValue> answerValueFromJson(TaskKind kind, const nlohmann::json& root);

}  // namespace mbe::gateway

#endif  // MBE_GATEWAY_HPP
