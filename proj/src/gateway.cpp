#include "mbe/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "mbe/diff.hpp"
#include "mbe/query.hpp"

namespace mbe::gateway {

using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// DiagramPayload
// ---------------------------------------------------------------------------

DiagramPayload DiagramPayload::fromImage(std::string base64) {
    DiagramPayload payload;
    payload.format = Format::ImagePngBase64;
    payload.imageBase64 = std::move(base64);
    return payload;
}

DiagramPayload DiagramPayload::fromDocument(format::ModelDocument doc) {
    DiagramPayload payload;
    payload.format = Format::CcsJson;
    payload.document = std::move(doc);
    return payload;
}

DiagramPayload DiagramPayload::fromInstanceBundle(model::Metamodel mm, model::Instance inst) {
    DiagramPayload payload;
    payload.format = Format::CcsJson;
    payload.document = format::ModelDocument{std::move(inst)};
    payload.contextMetamodel = std::move(mm);
    return payload;
}

namespace {

bool looksLikeBase64(const std::string& text) {
    if (text.empty()) return false;
    return std::all_of(text.begin(), text.end(), [](char c) {
        auto uc = static_cast<unsigned char>(c);
        return std::isalnum(uc) || c == '+' || c == '/' || c == '=' || c == '\n' || c == '\r';
    });
}

format::ModelDocument documentFromJson(const ordered_json& node, const char* what) {
    format::ParseOutcome outcome = format::parseModelDocument(node.dump());
    if (!outcome.document) {
        std::string detail;
        for (const auto& e : outcome.errors) {
            if (!detail.empty()) detail += "; ";
            detail += e.code + " at '" + e.path + "'";
        }
        throw Error("BAD_PAYLOAD", std::string(what) + " does not parse: " + detail);
    }
    return std::move(*outcome.document);
}

}  // namespace

DiagramPayload DiagramPayload::fromJson(const ordered_json& node) {
    if (!node.is_object() || !node.contains("format") || !node.contains("data")) {
        throw Error("BAD_PAYLOAD", "diagram payload needs 'format' and 'data'");
    }
    const std::string fmt = node["format"].is_string() ? node["format"].get<std::string>() : "";
    if (fmt == "image/png;base64") {
        if (!node["data"].is_string() || !looksLikeBase64(node["data"].get<std::string>())) {
            throw Error("BAD_PAYLOAD", "image payload data must be a base64 string");
        }
        return fromImage(node["data"].get<std::string>());
    }
    if (fmt == "ccs-json") {
        const ordered_json& data = node["data"];
        if (!data.is_object()) throw Error("BAD_PAYLOAD", "ccs-json data must be an object");
        if (data.contains("metamodel") && data.contains("instance") && !data.contains("kind")) {
            format::ModelDocument mmDoc = documentFromJson(data["metamodel"], "bundle metamodel");
            format::ModelDocument instDoc = documentFromJson(data["instance"], "bundle instance");
            if (!mmDoc.isMetamodel() || !instDoc.isInstance()) {
                throw Error("BAD_PAYLOAD", "bundle must pair a metamodel with an instance");
            }
            return fromInstanceBundle(mmDoc.metamodel(), instDoc.instance());
        }
        return fromDocument(documentFromJson(data, "ccs-json data"));
    }
    throw Error("BAD_PAYLOAD", "unknown diagram format '" + fmt + "'");
}

ordered_json DiagramPayload::toJson() const {
    ordered_json out;
    if (format == Format::ImagePngBase64) {
        out["format"] = "image/png;base64";
        out["data"] = imageBase64;
        return out;
    }
    out["format"] = "ccs-json";
    if (contextMetamodel) {
        out["data"]["metamodel"] =
            ordered_json::parse(format::emitModelDocument(format::ModelDocument{*contextMetamodel}));
        out["data"]["instance"] = ordered_json::parse(format::emitModelDocument(*document));
    } else {
        out["data"] = ordered_json::parse(format::emitModelDocument(*document));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Task kinds and prompts
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kTaskNames[] = {
    "ListClasses",    "ListMembers",       "KindOfQuery",    "RelationChainQuery",
    "SubclassQuery",  "ExtractRole",       "ElementProperties", "DetectDifferences",
};

}  // namespace

std::string toString(TaskKind kind) { return kTaskNames[static_cast<size_t>(kind)]; }

std::optional<TaskKind> taskKindFromString(std::string_view text) {
    for (size_t i = 0; i < std::size(kTaskNames); ++i) {
        if (text == kTaskNames[i]) return static_cast<TaskKind>(i);
    }
    return std::nullopt;
}

std::string PromptTask::arg(const std::string& key) const {
    auto it = arguments.find(key);
    if (it == arguments.end()) {
        throw Error("MISSING_ARGUMENT", toString(kind) + " task needs argument '" + key + "'");
    }
    return it->second;
}

std::optional<std::string> PromptTask::argOpt(const std::string& key) const {
    auto it = arguments.find(key);
    if (it == arguments.end()) return std::nullopt;
    return it->second;
}

namespace {

void checkDiagramCount(const PromptTask& task) {
    const size_t expected = task.kind == TaskKind::DetectDifferences ? 2 : 1;
    if (task.diagrams.size() != expected) {
        throw Error("BAD_TASK", toString(task.kind) + " needs exactly " +
                                    std::to_string(expected) + " diagram(s), got " +
                                    std::to_string(task.diagrams.size()));
    }
}

std::string answerSchemaFor(const PromptTask& task) {
    switch (task.kind) {
        case TaskKind::ListClasses:
            return R"({"classes": ["ClassName", ...]})";
        case TaskKind::ListMembers:
            return R"({"attributes": [{"name": "...", "type": "..."}], "operations": [{"name": "...", "signature": "(param: Type): ReturnType"}]})";
        case TaskKind::KindOfQuery:
            return R"({"a": true|false, "b": true|false})";
        case TaskKind::RelationChainQuery:
            return task.argOpt("subclassesOf")
                       ? R"({"chain": ["ClassName", ...], "subclasses": ["ClassName", ...]})"
                       : R"({"chain": ["ClassName", ...]})";
        case TaskKind::SubclassQuery:
            return R"({"subclasses": ["ClassName", ...]})";
        case TaskKind::ExtractRole:
            return R"({"elements": [{"id": "...", "class": "..."}]})";
        case TaskKind::ElementProperties:
            return R"({"properties": [{"name": "...", "type": "...", "value": ...}]})";
        case TaskKind::DetectDifferences:
            return R"({"differences": [{"kind": "ClassRemoved", "path": "..."}]})";
    }
    return "{}";
}

std::string questionFor(const PromptTask& task) {
    switch (task.kind) {
        case TaskKind::ListClasses:
            return "list all classes in this UML diagram";
        case TaskKind::ListMembers:
            return "list all properties and functions in " + task.arg("className") + " class";
        case TaskKind::KindOfQuery:
            return "is " + task.arg("classA") + " one of the " + task.arg("ancestorA") +
                   "? (A) / is the " + task.arg("classB") + " " + task.arg("ancestorB") + "? (B)";
        case TaskKind::RelationChainQuery: {
            std::string text = "list all classes on the relation chain between " +
                               task.arg("from") + " and " + task.arg("to");
            if (auto parent = task.argOpt("subclassesOf")) {
                text += " (A) / list all subclasses that " + *parent + " class has (B)";
            }
            return text;
        }
        case TaskKind::SubclassQuery:
            return "list all subclasses that " + task.arg("className") + " class has";
        case TaskKind::ExtractRole:
            return "list all " + task.arg("role") +
                   " elements in this diagram with their identifiers and classes";
        case TaskKind::ElementProperties:
            return "list the properties and values for element " + task.arg("elementName");
        case TaskKind::DetectDifferences:
            return "what are the differences between these diagrams";
    }
    return {};
}

}  // namespace

BuiltPrompt buildPrompt(const PromptTask& task) {
    checkDiagramCount(task);
    BuiltPrompt prompt;
    prompt.task = task;
    prompt.systemText =
        "You are an analyst for model-based engineering diagrams (UML/EMF class diagrams and "
        "object diagrams). Answer strictly as a fenced JSON code block with this schema: " +
        answerSchemaFor(task) + ". Do not add prose outside the JSON block.";

    std::ostringstream user;
    user << questionFor(task);
    int index = 0;
    for (const auto& diagram : task.diagrams) {
        ++index;
        if (diagram.format == DiagramPayload::Format::ImagePngBase64) {
            prompt.imageDataUrls.push_back("data:image/png;base64," + diagram.imageBase64);
            continue;
        }
        user << "\n\nDiagram " << index << " (canonical JSON):\n```json\n";
        if (diagram.contextMetamodel) {
            user << ordered_json(diagram.toJson()["data"]).dump(2);
        } else {
            const std::string emitted = format::emitModelDocument(*diagram.document);
            user << emitted.substr(0, emitted.size() - 1);  // drop trailing newline
        }
        user << "\n```";
    }
    prompt.userText = user.str();
    return prompt;
}

// ---------------------------------------------------------------------------
// Mock backend
// ---------------------------------------------------------------------------

namespace {

struct ResolvedDiagram {
    const model::Metamodel* mm = nullptr;
    const model::Instance* inst = nullptr;  // null for metamodel payloads
};

ResolvedDiagram resolveCanonical(const DiagramPayload& diagram) {
    if (diagram.format != DiagramPayload::Format::CcsJson) {
        throw Error("MOCK_NEEDS_CANONICAL",
                    "the mock backend only understands ccs-json payloads");
    }
    ResolvedDiagram out;
    if (diagram.contextMetamodel) {
        out.mm = &*diagram.contextMetamodel;
        out.inst = &diagram.document->instance();
    } else if (diagram.document->isMetamodel()) {
        out.mm = &diagram.document->metamodel();
    } else {
        throw Error("BAD_PAYLOAD",
                    "instance payload needs its metamodel (bundle form) for this task");
    }
    return out;
}

ordered_json mockAnswerJson(const PromptTask& task) {
    const ResolvedDiagram first = resolveCanonical(task.diagrams.front());
    ordered_json out;
    switch (task.kind) {
        case TaskKind::ListClasses: {
            out["classes"] = query::listClasses(*first.mm);
            break;
        }
        case TaskKind::ListMembers: {
            const auto members = query::listMembers(*first.mm, task.arg("className"));
            out["attributes"] = ordered_json::array();
            for (const auto& attr : members.attributes) {
                out["attributes"].push_back({{"name", attr.name}, {"type", attr.typeRef}});
            }
            out["operations"] = ordered_json::array();
            for (const auto& op : members.operations) {
                out["operations"].push_back({{"name", op.name}, {"signature", op.signature()}});
            }
            break;
        }
        case TaskKind::KindOfQuery: {
            out["a"] = query::isKindOf(*first.mm, task.arg("classA"), task.arg("ancestorA"));
            out["b"] = query::isKindOf(*first.mm, task.arg("classB"), task.arg("ancestorB"));
            break;
        }
        case TaskKind::RelationChainQuery: {
            const auto chain = query::relationChain(*first.mm, task.arg("from"), task.arg("to"));
            out["chain"] = chain.classNames;
            if (auto parent = task.argOpt("subclassesOf")) {
                out["subclasses"] = query::subclassesOf(*first.mm, *parent, true);
            }
            break;
        }
        case TaskKind::SubclassQuery: {
            out["subclasses"] = query::subclassesOf(*first.mm, task.arg("className"), true);
            break;
        }
        case TaskKind::ExtractRole: {
            if (!first.inst) throw Error("BAD_PAYLOAD", "ExtractRole needs an instance bundle");
            out["elements"] = ordered_json::array();
            for (const auto& id : query::extractByRole(*first.mm, *first.inst, task.arg("role"))) {
                out["elements"].push_back(
                    {{"id", id}, {"class", first.inst->findObject(id)->className}});
            }
            break;
        }
        case TaskKind::ElementProperties: {
            if (!first.inst) throw Error("BAD_PAYLOAD", "ElementProperties needs an instance bundle");
            out["properties"] = ordered_json::array();
            for (const auto& prop :
                 query::elementProperties(*first.mm, *first.inst, task.arg("elementName"))) {
                ordered_json value = nullptr;
                if (prop.value) value = ordered_json::parse(prop.value->kind() == model::ScalarValue::Kind::Ref
                                                                ? json(prop.value->asRef().id).dump()
                                                                : prop.value->render());
                out["properties"].push_back(
                    {{"name", prop.name}, {"type", prop.typeRef}, {"value", value}});
            }
            break;
        }
        case TaskKind::DetectDifferences: {
            const ResolvedDiagram second = resolveCanonical(task.diagrams.back());
            diff::DiffReport report;
            if (first.inst && second.inst) {
                report = diff::diffInstances(*first.inst, *second.inst, *first.mm);
            } else if (!first.inst && !second.inst) {
                report = diff::diffMetamodels(*first.mm, *second.mm);
            } else {
                throw Error("BAD_PAYLOAD", "DetectDifferences needs two payloads of the same kind");
            }
            out["differences"] = ordered_json::array();
            for (const auto& entry : report.entries) {
                out["differences"].push_back(
                    {{"kind", diff::toString(entry.kind)}, {"path", entry.path}});
            }
            break;
        }
    }
    return out;
}

std::optional<json> extractStructured(const std::string& rawText) {
    // Fenced block first (``` or ```json), then the whole text.
    size_t fence = rawText.find("```");
    while (fence != std::string::npos) {
        size_t start = rawText.find('\n', fence);
        if (start == std::string::npos) break;
        const size_t end = rawText.find("```", start);
        if (end == std::string::npos) break;
        json parsed = json::parse(rawText.substr(start, end - start), nullptr, false);
        if (!parsed.is_discarded()) return parsed;
        fence = rawText.find("```", end + 3);
    }
    json whole = json::parse(rawText, nullptr, false);
    if (!whole.is_discarded() && (whole.is_object() || whole.is_array())) return whole;
    return std::nullopt;
}

}  // namespace

BackendAnswer sendToBackend(Backend& backend, const BuiltPrompt& prompt) {
    return backend.send(prompt);
}

BackendAnswer MockBackend::send(const BuiltPrompt& prompt) {
    const auto started = std::chrono::steady_clock::now();
    const ordered_json body = mockAnswerJson(prompt.task);
    BackendAnswer answer;
    answer.rawText = "```json\n" + body.dump(2) + "\n```";
    answer.structured = json::parse(body.dump());
    answer.latencyMs = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - started)
                           .count();
    return answer;
}

nlohmann::json MockBackend::mapFreeformEdits(const std::string& text) {
    // Offline mini-grammar, one edit per line:
    //   set <object>.<attr> = <value>
    //   add <Class> <id>
    //   remove <id>
    json edits = json::array();
    std::istringstream lines(text);
    std::string line;
    int lineNo = 0;
    while (std::getline(lines, line)) {
        ++lineNo;
        std::istringstream words(line);
        std::string verb;
        words >> verb;
        if (verb.empty() || verb.rfind("--", 0) == 0) continue;
        if (verb == "set") {
            std::string target, eq;
            words >> target >> eq;
            std::string valueText;
            std::getline(words, valueText);
            const size_t dot = target.find('.');
            if (dot == std::string::npos || eq != "=") {
                throw Error("BAD_FREEFORM",
                            "line " + std::to_string(lineNo) +
                                ": expected 'set <object>.<attr> = <value>'");
            }
            const size_t firstNonSpace = valueText.find_first_not_of(" \t");
            valueText = firstNonSpace == std::string::npos ? "" : valueText.substr(firstNonSpace);
            json value = json::parse(valueText, nullptr, false);
            if (value.is_discarded()) value = valueText;  // bare word = string
            edits.push_back({{"op", "setSlot"},
                             {"object", target.substr(0, dot)},
                             {"attribute", target.substr(dot + 1)},
                             {"value", value}});
        } else if (verb == "add") {
            std::string className, id;
            words >> className >> id;
            if (className.empty() || id.empty()) {
                throw Error("BAD_FREEFORM",
                            "line " + std::to_string(lineNo) + ": expected 'add <Class> <id>'");
            }
            edits.push_back({{"op", "addObject"}, {"id", id}, {"class", className}});
        } else if (verb == "remove") {
            std::string id;
            words >> id;
            if (id.empty()) {
                throw Error("BAD_FREEFORM",
                            "line " + std::to_string(lineNo) + ": expected 'remove <id>'");
            }
            edits.push_back({{"op", "removeObject"}, {"id", id}});
        } else {
            throw Error("BAD_FREEFORM",
                        "line " + std::to_string(lineNo) + ": unknown verb '" + verb + "'");
        }
    }
    return edits;
}

// ---------------------------------------------------------------------------
// Remote backend (OpenAI-compatible chat completions)
// ---------------------------------------------------------------------------

std::optional<RemoteConfig> RemoteConfig::fromEnv() {
    const char* url = std::getenv("MBE_BACKEND_URL");
    if (!url || !*url) return std::nullopt;
    RemoteConfig config;
    config.baseUrl = url;
    if (const char* model = std::getenv("MBE_BACKEND_MODEL")) config.modelName = model;
    if (const char* key = std::getenv("MBE_BACKEND_KEY")) config.apiKey = key;
    if (const char* timeout = std::getenv("MBE_BACKEND_TIMEOUT_S")) {
        try {
            config.timeoutSeconds = std::max(1, std::stoi(timeout));
        } catch (...) {
        }
    }
    return config;
}

namespace {

// Cap on in-flight requests per backend.
class RequestGate {
public:
    explicit RequestGate(int limit) : limit_(std::max(1, limit)) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return active_ < limit_; });
        ++active_;
    }

    void release() {
        {
            std::lock_guard lock(mutex_);
            --active_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int limit_;
    int active_ = 0;
};

struct SplitUrl {
    std::string hostPort;  // scheme://host[:port]
    std::string pathPrefix;
};

SplitUrl splitUrl(const std::string& url) {
    const size_t scheme = url.find("://");
    if (scheme == std::string::npos) throw Error("BAD_CONFIG", "backend URL needs a scheme: " + url);
    const size_t pathStart = url.find('/', scheme + 3);
    if (pathStart == std::string::npos) return {url, ""};
    std::string prefix = url.substr(pathStart);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, pathStart), prefix};
}

}  // namespace

struct RemoteBackend::Impl {
    RemoteConfig config;
    RequestGate gate;

    explicit Impl(RemoteConfig cfg) : config(std::move(cfg)), gate(config.maxConcurrentRequests) {}

    json chat(const json& messages) {
        json body{{"model", config.modelName}, {"messages", messages}};
        const SplitUrl url = splitUrl(config.baseUrl);

        gate.acquire();
        struct Release {
            RequestGate& gate;
            ~Release() { gate.release(); }
        } release{gate};

        httplib::Headers headers;
        if (!config.apiKey.empty()) headers.emplace("Authorization", "Bearer " + config.apiKey);

        std::string lastError;
        for (int attempt = 0; attempt <= 2; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(config.retryBaseMs * (1 << (attempt - 1))));
            }
            httplib::Client client(url.hostPort);
            client.set_connection_timeout(config.timeoutSeconds, 0);
            client.set_read_timeout(config.timeoutSeconds, 0);
            client.set_write_timeout(config.timeoutSeconds, 0);
            auto res = client.Post(url.pathPrefix + "/chat/completions", headers, body.dump(),
                                   "application/json");
            if (!res) {
                lastError = httplib::to_string(res.error());
                continue;  // transport failure: retry with backoff
            }
            if (res->status < 200 || res->status >= 300) {
                throw Error("BACKEND_REFUSED", "backend returned status " +
                                                   std::to_string(res->status) + ": " + res->body);
            }
            json parsed = json::parse(res->body, nullptr, false);
            if (parsed.is_discarded()) {
                throw Error("BACKEND_REFUSED", "backend returned unparseable JSON");
            }
            return parsed;
        }
        throw Error("BACKEND_UNREACHABLE",
                    "backend unreachable after 3 attempts: " + lastError);
    }
};

RemoteBackend::RemoteBackend(RemoteConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
RemoteBackend::~RemoteBackend() = default;

std::string RemoteBackend::name() const {
    return impl_->config.modelName.empty() ? "remote" : impl_->config.modelName;
}

BackendAnswer RemoteBackend::send(const BuiltPrompt& prompt) {
    json userContent = json::array();
    userContent.push_back({{"type", "text"}, {"text", prompt.userText}});
    for (const auto& dataUrl : prompt.imageDataUrls) {
        userContent.push_back({{"type", "image_url"}, {"image_url", {{"url", dataUrl}}}});
    }
    const json messages = json::array({
        json{{"role", "system"}, {"content", prompt.systemText}},
        json{{"role", "user"}, {"content", userContent}},
    });

    const auto started = std::chrono::steady_clock::now();
    const json response = impl_->chat(messages);
    BackendAnswer answer;
    answer.latencyMs = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - started)
                           .count();
    try {
        answer.rawText = response.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw Error("BACKEND_REFUSED", "chat completion response missing choices[0].message.content");
    }
    answer.structured = extractStructured(answer.rawText);
    return answer;
}

nlohmann::json RemoteBackend::mapFreeformEdits(const std::string& text) {
    BuiltPrompt prompt;
    prompt.systemText =
        "You translate change requests for a model instance into a JSON array of primitive "
        "edits. Allowed ops: {\"op\":\"setSlot\",\"object\":id,\"attribute\":name,\"value\":scalar}, "
        "{\"op\":\"addObject\",\"id\":id,\"class\":name}, {\"op\":\"removeObject\",\"id\":id}, "
        "{\"op\":\"addLink\",\"object\":id,\"relation\":name,\"target\":id}, "
        "{\"op\":\"removeLink\",\"object\":id,\"relation\":name,\"target\":id}. "
        "Answer with the JSON array only, in a fenced block.";
    prompt.userText = text;
    const BackendAnswer answer = send(prompt);
    if (!answer.structured || !answer.structured->is_array()) {
        throw Error("BAD_FREEFORM", "backend did not return an edit array");
    }
    return *answer.structured;
}

// ---------------------------------------------------------------------------
// Answer normalization
// ---------------------------------------------------------------------------

namespace {

std::string trimCopy(const std::string& text) {
    size_t begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    size_t end = text.find_last_not_of(" \t\r\n");
    return text.substr(begin, end - begin + 1);
}

// Strips "- ", "* ", "1. ", "2) " prefixes and trailing sentence punctuation.
std::string stripBullet(std::string line) {
    line = trimCopy(line);
    if (!line.empty() && (line[0] == '-' || line[0] == '*' || line[0] == '+')) {
        line = trimCopy(line.substr(1));
    } else {
        size_t digits = 0;
        while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits])))
            ++digits;
        if (digits > 0 && digits < line.size() && (line[digits] == '.' || line[digits] == ')')) {
            line = trimCopy(line.substr(digits + 1));
        }
    }
    while (!line.empty() && (line.back() == '.' || line.back() == ',' || line.back() == ';')) {
        line.pop_back();
    }
    return trimCopy(line);
}

std::vector<std::string> splitLines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

// Known-name pool for matching free text back to model vocabulary.
class NamePool {
public:
    explicit NamePool(const model::Metamodel* mm) {
        if (!mm) return;
        for (const auto& cls : mm->classes) add(cls.name);
    }

    void add(const std::string& name) { names_.emplace_back(normalizeName(name), name); }

    // Canonical name whose normalization equals the normalized input.
    std::optional<std::string> exact(const std::string& text) const {
        const std::string key = normalizeName(text);
        if (key.empty()) return std::nullopt;
        for (const auto& [norm, canon] : names_) {
            if (norm == key) return canon;
        }
        return std::nullopt;
    }

    // All canonical names occurring as substrings of the normalized input.
    std::vector<std::string> contained(const std::string& text) const {
        const std::string key = normalizeName(text);
        std::vector<std::string> found;
        for (const auto& [norm, canon] : names_) {
            if (!norm.empty() && key.find(norm) != std::string::npos) found.push_back(canon);
        }
        return found;
    }

    bool empty() const { return names_.empty(); }

private:
    std::vector<std::pair<std::string, std::string>> names_;
};

void pushUniqueName(std::vector<std::string>& names, const std::string& name) {
    for (const auto& existing : names) {
        if (sameName(existing, name)) return;
    }
    names.push_back(name);
}

// Accepts the line as a name when it matches the pool (or verbatim without one).
bool matchNameLine(const std::string& stripped, const NamePool& pool,
                   std::vector<std::string>& out) {
    if (stripped.empty()) return false;
    if (pool.empty()) {
        if (normalizeName(stripped).empty()) return false;
        pushUniqueName(out, stripped);
        return true;
    }
    if (auto canon = pool.exact(stripped)) {
        pushUniqueName(out, *canon);
        return true;
    }
    // Comma-separated enumerations on one line.
    bool any = false;
    std::istringstream segments(stripped);
    std::string segment;
    std::vector<std::string> matched;
    bool allMatch = true;
    while (std::getline(segments, segment, ',')) {
        segment = stripBullet(segment);
        if (segment.empty()) continue;
        if (auto canon = pool.exact(segment)) {
            matched.push_back(*canon);
        } else {
            allMatch = false;
        }
    }
    if (allMatch && !matched.empty()) {
        for (const auto& name : matched) pushUniqueName(out, name);
        any = true;
    }
    return any;
}

std::vector<bool> boolTokens(const std::string& text) {
    std::vector<bool> out;
    std::string word;
    auto flush = [&] {
        if (word.empty()) return;
        std::string lower;
        for (char c : word) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        if (lower == "yes" || lower == "true") out.push_back(true);
        if (lower == "no" || lower == "false") out.push_back(false);
        word.clear();
    };
    for (char c : text) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            word.push_back(c);
        } else {
            flush();
        }
    }
    flush();
    return out;
}

std::string jsonToPlain(const json& node) {
    return node.is_string() ? node.get<std::string>() : node.dump();
}

std::vector<std::string> namesFromJsonArray(const json& node) {
    std::vector<std::string> out;
    if (!node.is_array()) return out;
    for (const auto& item : node) {
        if (item.is_string()) pushUniqueName(out, item.get<std::string>());
    }
    return out;
}

void fillMembersFromJson(const json& root, AnswerValue& value) {
    if (root.contains("attributes") && root["attributes"].is_array()) {
        for (const auto& item : root["attributes"]) {
            if (item.is_object() && item.contains("name")) {
                value.attributes.push_back({jsonToPlain(item["name"]),
                                            item.contains("type") ? jsonToPlain(item["type"]) : ""});
            } else if (item.is_string()) {
                value.attributes.push_back({item.get<std::string>(), ""});
            }
        }
    }
    if (root.contains("operations") && root["operations"].is_array()) {
        for (const auto& item : root["operations"]) {
            if (item.is_object() && item.contains("name")) {
                std::string detail;
                if (item.contains("signature")) detail = jsonToPlain(item["signature"]);
                value.operations.push_back({jsonToPlain(item["name"]), detail});
            } else if (item.is_string()) {
                value.operations.push_back({item.get<std::string>(), ""});
            }
        }
    }
}

bool fillFromStructured(const PromptTask& task, const json& root, AnswerValue& value) {
    if (!root.is_object()) return false;
    switch (task.kind) {
        case TaskKind::ListClasses:
            value.names = namesFromJsonArray(root.value("classes", json::array()));
            return !value.names.empty() || root.contains("classes");
        case TaskKind::ListMembers:
            fillMembersFromJson(root, value);
            return root.contains("attributes") || root.contains("operations");
        case TaskKind::KindOfQuery: {
            bool any = false;
            if (root.contains("a") && root["a"].is_boolean()) {
                value.boolA = root["a"].get<bool>();
                any = true;
            }
            if (root.contains("b") && root["b"].is_boolean()) {
                value.boolB = root["b"].get<bool>();
                any = true;
            }
            if (root.contains("answers") && root["answers"].is_array()) {
                const auto& answers = root["answers"];
                if (answers.size() > 0 && answers[0].is_boolean()) value.boolA = answers[0].get<bool>();
                if (answers.size() > 1 && answers[1].is_boolean()) value.boolB = answers[1].get<bool>();
                any = any || !answers.empty();
            }
            return any;
        }
        case TaskKind::RelationChainQuery: {
            value.chain = namesFromJsonArray(root.value("chain", json::array()));
            value.subclasses = namesFromJsonArray(root.value("subclasses", json::array()));
            return root.contains("chain");
        }
        case TaskKind::SubclassQuery:
            value.subclasses = namesFromJsonArray(root.value("subclasses", json::array()));
            return root.contains("subclasses");
        case TaskKind::ExtractRole: {
            if (!root.contains("elements") || !root["elements"].is_array()) return false;
            for (const auto& item : root["elements"]) {
                if (item.is_object() && item.contains("id")) {
                    value.elements.push_back({jsonToPlain(item["id"]),
                                              item.contains("class") ? jsonToPlain(item["class"]) : ""});
                } else if (item.is_string()) {
                    value.elements.push_back({item.get<std::string>(), ""});
                }
            }
            return true;
        }
        case TaskKind::ElementProperties: {
            if (!root.contains("properties") || !root["properties"].is_array()) return false;
            for (const auto& item : root["properties"]) {
                if (!item.is_object() || !item.contains("name")) continue;
                value.properties.push_back({jsonToPlain(item["name"]),
                                            item.contains("type") ? jsonToPlain(item["type"]) : "",
                                            item.value("value", json(nullptr))});
            }
            return true;
        }
        case TaskKind::DetectDifferences: {
            if (!root.contains("differences") || !root["differences"].is_array()) return false;
            for (const auto& item : root["differences"]) {
                if (item.is_object() && item.contains("kind") && item.contains("path")) {
                    value.differences.push_back({jsonToPlain(item["kind"]), jsonToPlain(item["path"])});
                }
            }
            return true;
        }
    }
    return false;
}

bool lineMentions(const std::string& normalizedLine, std::initializer_list<const char*> words) {
    for (const char* word : words) {
        if (normalizedLine.find(word) != std::string::npos) return true;
    }
    return false;
}

void heuristicLines(const PromptTask& task, const std::string& rawText, const NamePool& pool,
                    AnswerValue& value, std::vector<std::string>& unparsed) {
    switch (task.kind) {
        case TaskKind::KindOfQuery: {
            const auto tokens = boolTokens(rawText);
            if (!tokens.empty()) value.boolA = tokens[0];
            if (tokens.size() > 1) value.boolB = tokens[1];
            if (tokens.empty()) {
                for (const auto& line : splitLines(rawText)) {
                    if (!trimCopy(line).empty()) unparsed.push_back(line);
                }
            }
            return;
        }
        case TaskKind::ListClasses:
        case TaskKind::SubclassQuery: {
            auto& sink = task.kind == TaskKind::ListClasses ? value.names : value.subclasses;
            for (const auto& line : splitLines(rawText)) {
                const std::string stripped = stripBullet(line);
                if (stripped.empty()) continue;
                if (!matchNameLine(stripped, pool, sink)) unparsed.push_back(line);
            }
            return;
        }
        case TaskKind::RelationChainQuery: {
            bool haveChain = false;
            for (const auto& line : splitLines(rawText)) {
                const std::string stripped = stripBullet(line);
                if (stripped.empty()) continue;
                if (!haveChain && stripped.find("->") != std::string::npos) {
                    std::vector<std::string> parts;
                    size_t start = 0;
                    while (true) {
                        const size_t arrow = stripped.find("->", start);
                        const std::string piece = trimCopy(
                            arrow == std::string::npos ? stripped.substr(start)
                                                       : stripped.substr(start, arrow - start));
                        if (!piece.empty()) {
                            if (pool.empty()) {
                                parts.push_back(piece);
                            } else if (auto canon = pool.exact(piece)) {
                                parts.push_back(*canon);
                            }
                        }
                        if (arrow == std::string::npos) break;
                        start = arrow + 2;
                    }
                    if (parts.size() >= 2) {
                        value.chain = parts;
                        haveChain = true;
                        continue;
                    }
                }
                if (task.argOpt("subclassesOf") && matchNameLine(stripped, pool, value.subclasses))
                    continue;
                unparsed.push_back(line);
            }
            return;
        }
        case TaskKind::ListMembers: {
            for (const auto& line : splitLines(rawText)) {
                const std::string stripped = stripBullet(line);
                if (stripped.empty()) continue;
                const size_t paren = stripped.find('(');
                if (paren != std::string::npos && paren > 0) {
                    const std::string name = trimCopy(stripped.substr(0, paren));
                    if (name.find(' ') == std::string::npos && !normalizeName(name).empty()) {
                        value.operations.push_back({name, trimCopy(stripped.substr(paren))});
                        continue;
                    }
                }
                const size_t colon = stripped.find(':');
                if (colon != std::string::npos && colon > 0) {
                    const std::string name = trimCopy(stripped.substr(0, colon));
                    const std::string type = trimCopy(stripped.substr(colon + 1));
                    if (!name.empty() && !type.empty() && name.find(' ') == std::string::npos) {
                        value.attributes.push_back({name, type});
                        continue;
                    }
                }
                unparsed.push_back(line);
            }
            return;
        }
        case TaskKind::ExtractRole: {
            for (const auto& line : splitLines(rawText)) {
                const std::string stripped = stripBullet(line);
                if (stripped.empty()) continue;
                std::istringstream words(stripped);
                std::string id;
                words >> id;
                std::string rest;
                std::getline(words, rest);
                std::string className;
                for (char strip : {'(', ')', ':'}) {
                    rest.erase(std::remove(rest.begin(), rest.end(), strip), rest.end());
                }
                if (auto canon = pool.exact(trimCopy(rest))) className = *canon;
                if (!id.empty() && isValidIdentifier(id)) {
                    value.elements.push_back({id, className});
                } else {
                    unparsed.push_back(line);
                }
            }
            return;
        }
        case TaskKind::ElementProperties: {
            for (const auto& line : splitLines(rawText)) {
                const std::string stripped = stripBullet(line);
                if (stripped.empty()) continue;
                const size_t colon = stripped.find(':');
                if (colon == std::string::npos || colon == 0) {
                    unparsed.push_back(line);
                    continue;
                }
                const std::string name = trimCopy(stripped.substr(0, colon));
                const std::string rest = trimCopy(stripped.substr(colon + 1));
                if (name.empty() || rest.empty() || name.find(' ') != std::string::npos) {
                    unparsed.push_back(line);
                    continue;
                }
                json parsed = json::parse(rest, nullptr, false);
                value.properties.push_back({name, "", parsed.is_discarded() ? json(rest) : parsed});
            }
            return;
        }
        case TaskKind::DetectDifferences: {
            for (const auto& line : splitLines(rawText)) {
                const std::string stripped = stripBullet(line);
                if (stripped.empty()) continue;
                const std::string normalized = normalizeName(stripped);
                std::string kind;
                if (lineMentions(normalized, {"removed", "remov", "lacks", "lack", "missing",
                                              "deleted", "delet", "dropped"})) {
                    kind = "ClassRemoved";
                } else if (lineMentions(normalized, {"added", "add", "new", "introduc"})) {
                    kind = "ClassAdded";
                }
                const auto mentioned = pool.contained(stripped);
                if (kind.empty() || mentioned.empty()) {
                    unparsed.push_back(line);
                    continue;
                }
                for (const auto& name : mentioned) {
                    const DiffItem item{kind, name};
                    if (std::find(value.differences.begin(), value.differences.end(), item) ==
                        value.differences.end()) {
                        value.differences.push_back(item);
                    }
                }
            }
            return;
        }
        default:
            for (const auto& line : splitLines(rawText)) {
                if (!trimCopy(line).empty()) unparsed.push_back(line);
            }
    }
}

}  // namespace

NormalizedAnswer normalizeAnswer(const PromptTask& task, const BackendAnswer& answer,
                                 const model::Metamodel* mm) {
    NormalizedAnswer out;
    out.kind = task.kind;

    std::optional<json> structured = answer.structured;
    if (!structured) structured = extractStructured(answer.rawText);
    if (structured && fillFromStructured(task, *structured, out.value)) return out;

    NamePool pool(mm);
    heuristicLines(task, answer.rawText, pool, out.value, out.unparsedLines);
    return out;
}

std::optional<AnswerValue> answerValueFromJson(TaskKind kind, const nlohmann::json& root) {
    PromptTask probe;
    probe.kind = kind;
    if (kind == TaskKind::RelationChainQuery && root.is_object() && root.contains("subclasses")) {
        probe.arguments["subclassesOf"] = "";
    }
    AnswerValue value;
    if (!fillFromStructured(probe, root, value)) return std::nullopt;
    return value;
}

}  // namespace mbe::gateway
