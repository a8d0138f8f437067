#include "mbe/service.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "mbe/diff.hpp"
#include "mbe/ocl.hpp"
#include "mbe/query.hpp"

namespace mbe::service {

using nlohmann::json;
using nlohmann::ordered_json;

ServiceConfig ServiceConfig::fromEnv() {
    ServiceConfig config;
    if (const char* listen = std::getenv("MBE_LISTEN")) {
        const std::string text = listen;
        const size_t colon = text.rfind(':');
        if (colon != std::string::npos) {
            config.listenHost = text.substr(0, colon);
            try {
                config.listenPort = std::stoi(text.substr(colon + 1));
            } catch (...) {
            }
        }
    }
    if (auto remote = gateway::RemoteConfig::fromEnv()) {
        config.backend = std::make_shared<gateway::RemoteBackend>(*remote);
    }
    return config;
}

namespace {

int statusForCode(const std::string& code) {
    if (code == "UNKNOWN_ELEMENT") return 404;
    if (code == "NOT_CONFORMANT") return 409;
    if (code == "BACKEND_UNREACHABLE" || code == "BACKEND_REFUSED" ||
        code == "MOCK_NEEDS_CANONICAL" || code == "BAD_FREEFORM") {
        return 502;
    }
    return 400;
}

struct HandlerAbort {
    int status;
    ordered_json body;
};

[[noreturn]] void abortWith(int status, const std::string& code, const std::string& message,
                            ordered_json extra = ordered_json::object()) {
    ordered_json body;
    body["error"] = {{"code", code}, {"message", message}};
    for (auto it = extra.begin(); it != extra.end(); ++it) body[it.key()] = it.value();
    throw HandlerAbort{status, std::move(body)};
}

[[noreturn]] void abortWith(const Error& error) {
    abortWith(statusForCode(error.code()), error.code(), error.what());
}

HandledResponse respond(int status, const ordered_json& body) {
    return {status, body.dump(2) + "\n"};
}

ordered_json parseBody(const std::string& body) {
    ordered_json root = ordered_json::parse(body, nullptr, false);
    if (root.is_discarded() || !root.is_object()) {
        abortWith(400, "MALFORMED_BODY", "request body must be a JSON object");
    }
    return root;
}

gateway::DiagramPayload payloadField(const ordered_json& root, const char* key) {
    if (!root.contains(key)) {
        abortWith(400, "MISSING_FIELD", std::string("missing field '") + key + "'");
    }
    try {
        return gateway::DiagramPayload::fromJson(root[key]);
    } catch (const Error& error) {
        abortWith(400, error.code(), error.what());
    }
}

model::Metamodel metamodelField(const ordered_json& root, const char* key) {
    if (!root.contains(key)) {
        abortWith(400, "MISSING_FIELD", std::string("missing field '") + key + "'");
    }
    format::ParseOutcome outcome = format::parseModelDocument(root[key].dump());
    if (!outcome.document || !outcome.document->isMetamodel()) {
        abortWith(400, "BAD_PAYLOAD", std::string("field '") + key + "' must be a metamodel document");
    }
    if (!outcome.issues.empty()) {
        ordered_json issues = ordered_json::array();
        for (const auto& issue : outcome.issues) {
            issues.push_back({{"code", issue.code}, {"path", issue.path}, {"message", issue.message}});
        }
        abortWith(400, "INVALID_METAMODEL", "metamodel fails validation",
                  ordered_json{{"issues", issues}});
    }
    return outcome.document->metamodel();
}

// Canonical payloads resolve to (metamodel, instance); an instance payload
// needs the metamodel from its bundle or the request's sibling field.
struct Resolved {
    model::Metamodel mm;
    std::optional<model::Instance> inst;
};

Resolved resolveCanonical(const gateway::DiagramPayload& payload, const ordered_json& root) {
    Resolved out;
    if (payload.contextMetamodel) {
        out.mm = *payload.contextMetamodel;
        out.inst = payload.document->instance();
    } else if (payload.document->isMetamodel()) {
        out.mm = payload.document->metamodel();
    } else {
        if (!root.contains("metamodel")) {
            abortWith(400, "MISSING_FIELD",
                      "instance payload needs a 'metamodel' field (or bundle form)");
        }
        out.mm = metamodelField(root, "metamodel");
        out.inst = payload.document->instance();
    }
    const auto mmIssues = model::validateMetamodel(out.mm);
    if (!mmIssues.empty()) {
        abortWith(400, "INVALID_METAMODEL", "metamodel fails validation");
    }
    if (out.inst) {
        const auto issues = model::validateInstance(*out.inst, out.mm);
        if (!issues.empty()) {
            ordered_json rendered = ordered_json::array();
            for (const auto& issue : issues) {
                rendered.push_back(
                    {{"code", issue.code}, {"path", issue.path}, {"message", issue.message}});
            }
            abortWith(400, "INVALID_INSTANCE", "instance fails validation",
                      ordered_json{{"issues", rendered}});
        }
    }
    return out;
}

ordered_json scalarToJson(const model::ScalarValue& value) {
    using Kind = model::ScalarValue::Kind;
    switch (value.kind()) {
        case Kind::Int: return value.asInt();
        case Kind::Real: return value.asReal();
        case Kind::String: return value.asString();
        case Kind::Bool: return value.asBool();
        case Kind::Ref: return ordered_json{{"$ref", value.asRef().id}};
    }
    return nullptr;
}

ordered_json diffReportToJson(const diff::DiffReport& report) {
    return ordered_json::parse(report.renderJson());
}

ordered_json complianceToJson(const ocl::ComplianceResult& result) {
    ordered_json out;
    out["compliant"] = result.compliant;
    out["violations"] = ordered_json::array();
    for (const auto& violation : result.violations) {
        out["violations"].push_back({{"constraint", violation.constraintName},
                                     {"context", violation.contextClass},
                                     {"object", violation.objectId},
                                     {"message", violation.message},
                                     {"explanation", ocl::explainViolation(violation)}});
    }
    out["errors"] = ordered_json::array();
    for (const auto& error : result.errors) {
        out["errors"].push_back({{"constraint", error.constraintName},
                                 {"object", error.objectId},
                                 {"message", error.message}});
    }
    return out;
}

std::vector<ocl::Constraint> parseRulesOrAbort(const std::string& rules) {
    const ocl::ParseResult parsed = ocl::parseConstraints(rules);
    if (!parsed.ok()) {
        ordered_json errors = ordered_json::array();
        for (const auto& error : parsed.errors) {
            errors.push_back(
                {{"line", error.line}, {"column", error.column}, {"message", error.message}});
        }
        abortWith(400, "BAD_RULES", "OCL rules do not parse",
                  ordered_json{{"parseErrors", errors}});
    }
    return parsed.constraints;
}

gateway::Backend* requireBackend(const ServiceConfig& config) {
    if (!config.backend) {
        abortWith(502, "BACKEND_UNREACHABLE", "no MLLM backend configured for image payloads");
    }
    return config.backend.get();
}

gateway::NormalizedAnswer askBackend(const ServiceConfig& config, gateway::PromptTask task) {
    gateway::Backend* backend = requireBackend(config);
    try {
        const auto prompt = gateway::buildPrompt(task);
        const auto answer = gateway::sendToBackend(*backend, prompt);
        return gateway::normalizeAnswer(task, answer, nullptr);
    } catch (const Error& error) {
        abortWith(502, error.code(), error.what());
    }
}

}  // namespace

ModelService::ModelService(ServiceConfig config) : config_(std::move(config)) {}

HandledResponse ModelService::extractByRole(const std::string& body, const std::string& role,
                                            const std::string& resultKey) const {
    try {
        const ordered_json root = parseBody(body);
        const auto payload = payloadField(root, "diagram");
        ordered_json elements = ordered_json::array();
        if (payload.format == gateway::DiagramPayload::Format::ImagePngBase64) {
            gateway::PromptTask task;
            task.kind = gateway::TaskKind::ExtractRole;
            task.arguments["role"] = role;
            task.diagrams.push_back(payload);
            for (const auto& element : askBackend(config_, std::move(task)).value.elements) {
                elements.push_back({{"id", element.id}, {"class", element.className}});
            }
        } else {
            const Resolved resolved = resolveCanonical(payload, root);
            if (!resolved.inst) {
                abortWith(400, "KIND_MISMATCH", "element extraction needs an instance diagram");
            }
            if (!resolved.mm.findClass(role)) {
                // A model family without this role simply has no such elements.
                return respond(200, ordered_json{{resultKey, ordered_json::array()}});
            }
            for (const auto& id : query::extractByRole(resolved.mm, *resolved.inst, role)) {
                elements.push_back({{"id", id}, {"class", resolved.inst->findObject(id)->className}});
            }
        }
        return respond(200, ordered_json{{resultKey, elements}});
    } catch (const HandlerAbort& abort) {
        return respond(abort.status, abort.body);
    } catch (const Error& error) {
        return respond(statusForCode(error.code()),
                       ordered_json{{"error", {{"code", error.code()}, {"message", error.what()}}}});
    }
}

HandledResponse ModelService::extractSensors(const std::string& body) const {
    return extractByRole(body, "Sensor", "sensors");
}

HandledResponse ModelService::extractActuators(const std::string& body) const {
    return extractByRole(body, "Actuator", "actuators");
}

HandledResponse ModelService::extractElementProperties(const std::string& body) const {
    try {
        const ordered_json root = parseBody(body);
        if (!root.contains("elementName") || !root["elementName"].is_string()) {
            abortWith(400, "MISSING_FIELD", "missing field 'elementName'");
        }
        const std::string elementName = root["elementName"].get<std::string>();
        const auto payload = payloadField(root, "diagram");

        ordered_json properties = ordered_json::array();
        if (payload.format == gateway::DiagramPayload::Format::ImagePngBase64) {
            gateway::PromptTask task;
            task.kind = gateway::TaskKind::ElementProperties;
            task.arguments["elementName"] = elementName;
            task.diagrams.push_back(payload);
            for (const auto& prop : askBackend(config_, std::move(task)).value.properties) {
                properties.push_back({{"name", prop.name},
                                      {"type", prop.typeRef},
                                      {"value", ordered_json::parse(prop.value.dump())}});
            }
        } else {
            const Resolved resolved = resolveCanonical(payload, root);
            if (!resolved.inst) {
                abortWith(400, "KIND_MISMATCH", "element properties need an instance diagram");
            }
            for (const auto& prop :
                 query::elementProperties(resolved.mm, *resolved.inst, elementName)) {
                properties.push_back({{"name", prop.name},
                                      {"type", prop.typeRef},
                                      {"value", prop.value ? scalarToJson(*prop.value)
                                                           : ordered_json(nullptr)}});
            }
        }
        return respond(200, ordered_json{{"properties", properties}});
    } catch (const HandlerAbort& abort) {
        return respond(abort.status, abort.body);
    } catch (const Error& error) {
        return respond(statusForCode(error.code()),
                       ordered_json{{"error", {{"code", error.code()}, {"message", error.what()}}}});
    }
}

HandledResponse ModelService::detectDifferences(const std::string& body) const {
    try {
        const ordered_json root = parseBody(body);
        const auto current = payloadField(root, "currentDiagram");
        const auto updated = payloadField(root, "newDiagram");
        const bool currentImage = current.format == gateway::DiagramPayload::Format::ImagePngBase64;
        const bool updatedImage = updated.format == gateway::DiagramPayload::Format::ImagePngBase64;
        if (currentImage != updatedImage) {
            abortWith(400, "MIXED_FORMATS", "both diagrams must share the same format class");
        }

        if (currentImage) {
            gateway::PromptTask task;
            task.kind = gateway::TaskKind::DetectDifferences;
            task.diagrams = {current, updated};
            ordered_json entries = ordered_json::array();
            ordered_json summary = ordered_json::object();
            for (const auto& item : askBackend(config_, std::move(task)).value.differences) {
                entries.push_back({{"kind", item.kind},
                                   {"path", item.path},
                                   {"before", nullptr},
                                   {"after", nullptr}});
                summary[item.kind] = summary.value(item.kind, 0) + 1;
            }
            return respond(200, ordered_json{{"entries", entries}, {"summary", summary}});
        }

        const Resolved first = resolveCanonical(current, root);
        const Resolved second = resolveCanonical(updated, root);
        diff::DiffReport report;
        if (first.inst && second.inst) {
            report = diff::diffInstances(*first.inst, *second.inst, first.mm);
        } else if (!first.inst && !second.inst) {
            report = diff::diffMetamodels(first.mm, second.mm);
        } else {
            abortWith(400, "KIND_MISMATCH", "cannot diff a metamodel against an instance");
        }
        return respond(200, diffReportToJson(report));
    } catch (const HandlerAbort& abort) {
        return respond(abort.status, abort.body);
    } catch (const Error& error) {
        return respond(statusForCode(error.code()),
                       ordered_json{{"error", {{"code", error.code()}, {"message", error.what()}}}});
    }
}

HandledResponse ModelService::checkCompliance(const std::string& body) const {
    try {
        const ordered_json root = parseBody(body);
        const model::Metamodel mm = metamodelField(root, "metamodel");
        if (!root.contains("instance")) {
            abortWith(400, "MISSING_FIELD", "missing field 'instance'");
        }
        format::ParseOutcome outcome = format::parseModelDocument(root["instance"].dump());
        if (!outcome.document || !outcome.document->isInstance()) {
            abortWith(400, "BAD_PAYLOAD", "field 'instance' must be an instance document");
        }
        const model::Instance inst = outcome.document->instance();
        const auto issues = model::validateInstance(inst, mm);
        if (!issues.empty()) {
            ordered_json rendered = ordered_json::array();
            for (const auto& issue : issues) {
                rendered.push_back(
                    {{"code", issue.code}, {"path", issue.path}, {"message", issue.message}});
            }
            abortWith(400, "INVALID_INSTANCE", "instance fails validation",
                      ordered_json{{"issues", rendered}});
        }
        if (!root.contains("rules") || !root["rules"].is_string()) {
            abortWith(400, "MISSING_FIELD", "missing field 'rules'");
        }
        const auto constraints = parseRulesOrAbort(root["rules"].get<std::string>());
        const auto result = ocl::checkCompliance(mm, inst, constraints);
        return respond(200, complianceToJson(result));
    } catch (const HandlerAbort& abort) {
        return respond(abort.status, abort.body);
    } catch (const Error& error) {
        return respond(statusForCode(error.code()),
                       ordered_json{{"error", {{"code", error.code()}, {"message", error.what()}}}});
    }
}

namespace {

model::ScalarValue scalarFromJson(const json& node) {
    if (node.is_number_integer()) return model::ScalarValue(node.get<std::int64_t>());
    if (node.is_number_unsigned())
        return model::ScalarValue(static_cast<std::int64_t>(node.get<std::uint64_t>()));
    if (node.is_number_float()) return model::ScalarValue(node.get<double>());
    if (node.is_boolean()) return model::ScalarValue(node.get<bool>());
    if (node.is_string()) return model::ScalarValue(node.get<std::string>());
    if (node.is_object() && node.size() == 1 && node.contains("$ref") && node["$ref"].is_string()) {
        return model::ScalarValue(model::RefId{node["$ref"].get<std::string>()});
    }
    abortWith(400, "BAD_EDIT", "edit value must be a scalar");
}

void applyEdit(model::Instance& inst, const model::Metamodel& mm, const json& edit) {
    if (!edit.is_object() || !edit.contains("op") || !edit["op"].is_string()) {
        abortWith(400, "BAD_EDIT", "each edit needs an 'op' field");
    }
    const std::string op = edit["op"].get<std::string>();
    auto stringField = [&](const char* key) -> std::string {
        if (!edit.contains(key) || !edit[key].is_string()) {
            abortWith(400, "BAD_EDIT", "edit '" + op + "' needs string field '" + key + "'");
        }
        return edit[key].get<std::string>();
    };
    auto findObjectIndex = [&](const std::string& id) -> size_t {
        for (size_t i = 0; i < inst.objects.size(); ++i) {
            if (sameName(inst.objects[i].id, id)) return i;
        }
        abortWith(400, "BAD_EDIT", "edit references unknown object '" + id + "'");
    };

    if (op == "setSlot") {
        const std::string objectId = stringField("object");
        const std::string attribute = stringField("attribute");
        if (!edit.contains("value")) abortWith(400, "BAD_EDIT", "setSlot needs a 'value'");
        model::ModelObject& obj = inst.objects[findObjectIndex(objectId)];
        const auto attrs = model::allAttributesOf(mm, obj.className);
        const auto known = std::any_of(attrs.begin(), attrs.end(), [&](const auto& attr) {
            return sameName(attr.name, attribute);
        });
        if (!known) {
            abortWith(400, "BAD_EDIT", "object '" + obj.id + "' has no attribute '" + attribute + "'");
        }
        const model::ScalarValue value = scalarFromJson(edit["value"]);
        for (auto& [slotName, slotValue] : obj.slots) {
            if (sameName(slotName, attribute)) {
                slotValue = value;
                return;
            }
        }
        obj.slots.emplace_back(attribute, value);
    } else if (op == "addObject") {
        const std::string id = stringField("id");
        const std::string className = stringField("class");
        if (inst.findObject(id)) abortWith(400, "BAD_EDIT", "object id '" + id + "' already exists");
        if (!mm.findClass(className)) {
            abortWith(400, "BAD_EDIT", "unknown class '" + className + "'");
        }
        model::ModelObject obj;
        obj.id = id;
        obj.className = mm.findClass(className)->name;
        inst.objects.push_back(std::move(obj));
    } else if (op == "removeObject") {
        const std::string id = stringField("id");
        const size_t index = findObjectIndex(id);
        const std::string canonical = inst.objects[index].id;
        inst.objects.erase(inst.objects.begin() + static_cast<std::ptrdiff_t>(index));
        // Cascade: links pointing at the removed object disappear with it.
        for (auto& obj : inst.objects) {
            for (auto& [linkName, targets] : obj.links) {
                targets.erase(std::remove_if(targets.begin(), targets.end(),
                                             [&](const std::string& target) {
                                                 return sameName(target, canonical);
                                             }),
                              targets.end());
            }
        }
    } else if (op == "addLink") {
        const std::string objectId = stringField("object");
        const std::string relation = stringField("relation");
        const std::string target = stringField("target");
        model::ModelObject& obj = inst.objects[findObjectIndex(objectId)];
        if (!inst.findObject(target)) {
            abortWith(400, "BAD_EDIT", "link target '" + target + "' does not exist");
        }
        bool relationKnown = false;
        for (const model::MetaClass* cls : model::supertypeClosure(mm, obj.className)) {
            for (const auto& rel : mm.relations) {
                if (sameName(rel.name, relation) && sameName(rel.source, cls->name)) {
                    relationKnown = true;
                }
            }
        }
        if (!relationKnown) {
            abortWith(400, "BAD_EDIT",
                      "no relation '" + relation + "' reachable from '" + obj.className + "'");
        }
        for (auto& [linkName, targets] : obj.links) {
            if (sameName(linkName, relation)) {
                targets.push_back(target);
                return;
            }
        }
        obj.links.emplace_back(relation, std::vector<std::string>{target});
    } else if (op == "removeLink") {
        const std::string objectId = stringField("object");
        const std::string relation = stringField("relation");
        const std::string target = stringField("target");
        model::ModelObject& obj = inst.objects[findObjectIndex(objectId)];
        for (auto& [linkName, targets] : obj.links) {
            if (!sameName(linkName, relation)) continue;
            auto it = std::find_if(targets.begin(), targets.end(), [&](const std::string& t) {
                return sameName(t, target);
            });
            if (it == targets.end()) break;
            targets.erase(it);
            return;
        }
        abortWith(400, "BAD_EDIT",
                  "object '" + objectId + "' has no link " + relation + " -> " + target);
    } else {
        abortWith(400, "BAD_EDIT", "unknown edit op '" + op + "'");
    }
}

// Role buckets for the change plan, resolved against the metamodel when the
// corresponding classes exist in it.
std::string roleOf(const model::Metamodel& mm, const std::string& className) {
    static constexpr std::pair<const char*, const char*> kRoles[] = {
        {"Sensor", "sensors"},
        {"Actuator", "actuators"},
        {"ProcessingNode", "nodes"},
        {"ProcessingTask", "tasks"},
    };
    for (const auto& [roleClass, bucket] : kRoles) {
        if (mm.findClass(roleClass) && model::isKindOf(mm, className, roleClass)) return bucket;
    }
    return "other";
}

ordered_json changePlanFromDiff(const diff::DiffReport& report, const model::Instance& oldInst,
                                const model::Instance& newInst, const model::Metamodel& mm) {
    ordered_json plan;
    for (const char* bucket : {"sensors", "actuators", "nodes", "tasks", "other"}) {
        plan[bucket] = {{"added", ordered_json::array()},
                        {"removed", ordered_json::array()},
                        {"modified", ordered_json::array()}};
    }
    std::set<std::pair<std::string, std::string>> seen;  // (bucket+action, id)
    for (const auto& entry : report.entries) {
        const std::string id = entry.path.substr(0, entry.path.find('.'));
        const model::ModelObject* obj = newInst.findObject(id);
        if (!obj) obj = oldInst.findObject(id);
        const std::string bucket = obj ? roleOf(mm, obj->className) : "other";
        std::string action;
        switch (entry.kind) {
            case diff::DiffKind::ObjectAdded: action = "added"; break;
            case diff::DiffKind::ObjectRemoved: action = "removed"; break;
            default: action = "modified"; break;
        }
        if (seen.insert({bucket + "/" + action, id}).second) {
            plan[bucket][action].push_back(id);
        }
    }
    return plan;
}

}  // namespace

HandledResponse ModelService::applyChange(const std::string& body) const {
    try {
        const ordered_json root = parseBody(body);
        const std::string mode = root.value("mode", "");
        if (mode != "structured" && mode != "freeform") {
            abortWith(400, "BAD_MODE", "mode must be 'structured' or 'freeform'");
        }
        if (root.contains("structured") && root.contains("freeform")) {
            abortWith(400, "BAD_MODE", "exactly one of 'structured'/'freeform' may be present");
        }

        const auto payload = payloadField(root, "targetInstance");
        if (payload.format != gateway::DiagramPayload::Format::CcsJson) {
            abortWith(400, "BAD_PAYLOAD", "targetInstance must be a ccs-json payload");
        }
        const Resolved resolved = resolveCanonical(payload, root);
        if (!resolved.inst) {
            abortWith(400, "KIND_MISMATCH", "targetInstance must be an instance document");
        }
        const model::Metamodel& mm = resolved.mm;
        const model::Instance& original = *resolved.inst;

        json edits = json::array();
        if (mode == "structured") {
            if (!root.contains("structured") || !root["structured"].is_array()) {
                abortWith(400, "BAD_MODE", "structured mode needs a 'structured' edit array");
            }
            edits = root["structured"];
        } else {
            if (!root.contains("freeform") || !root["freeform"].is_string()) {
                abortWith(400, "BAD_MODE", "freeform mode needs a 'freeform' text field");
            }
            gateway::Backend* backend = requireBackend(config_);
            try {
                edits = backend->mapFreeformEdits(root["freeform"].get<std::string>());
            } catch (const Error& error) {
                abortWith(502, error.code(), error.what());
            }
        }

        model::Instance updated = original;
        for (const auto& edit : edits) applyEdit(updated, mm, edit);

        const auto issues = model::validateInstance(updated, mm);
        if (!issues.empty()) {
            ordered_json rendered = ordered_json::array();
            for (const auto& issue : issues) {
                rendered.push_back(
                    {{"code", issue.code}, {"path", issue.path}, {"message", issue.message}});
            }
            abortWith(409, "NOT_CONFORMANT", "edits produce a non-conformant instance",
                      ordered_json{{"issues", rendered}});
        }

        const auto report = diff::diffInstances(original, updated, mm);

        std::vector<ocl::Constraint> constraints;
        if (root.contains("rules") && root["rules"].is_string()) {
            constraints = parseRulesOrAbort(root["rules"].get<std::string>());
        }
        const auto compliance = ocl::checkCompliance(mm, updated, constraints);

        ordered_json feedback = ordered_json::array();
        for (const auto& violation : compliance.violations) {
            feedback.push_back(ocl::explainViolation(violation));
        }
        for (const auto& error : compliance.errors) {
            feedback.push_back("evaluation error in '" + error.constraintName + "' at '" +
                               error.objectId + "': " + error.message);
        }

        ordered_json out;
        out["updatedInstance"] =
            ordered_json::parse(format::emitModelDocument(format::ModelDocument{updated}));
        out["diff"] = diffReportToJson(report);
        out["compliance"] = complianceToJson(compliance);
        out["feedback"] = feedback;
        out["changePlan"] = changePlanFromDiff(report, original, updated, mm);
        return respond(200, out);
    } catch (const HandlerAbort& abort) {
        return respond(abort.status, abort.body);
    } catch (const Error& error) {
        return respond(statusForCode(error.code()),
                       ordered_json{{"error", {{"code", error.code()}, {"message", error.what()}}}});
    }
}

HandledResponse ModelService::health() const {
    return respond(200, ordered_json{{"status", "ok"},
                                     {"backendConfigured", config_.backend != nullptr}});
}

bool serve(const ServiceConfig& config) {
    ModelService service(config);
    httplib::Server server;

    auto route = [&server, &service](const char* path,
                                     HandledResponse (ModelService::*handler)(const std::string&)
                                         const) {
        server.Post(path, [&service, handler](const httplib::Request& req, httplib::Response& res) {
            const HandledResponse handled = (service.*handler)(req.body);
            res.status = handled.status;
            res.set_content(handled.body, "application/json");
        });
    };
    route("/extractSensors", &ModelService::extractSensors);
    route("/extractActuators", &ModelService::extractActuators);
    route("/extractElementProperties", &ModelService::extractElementProperties);
    route("/detectDifferences", &ModelService::detectDifferences);
    route("/checkCompliance", &ModelService::checkCompliance);
    route("/applyChange", &ModelService::applyChange);
    server.Get("/health", [&service](const httplib::Request&, httplib::Response& res) {
        const HandledResponse handled = service.health();
        res.status = handled.status;
        res.set_content(handled.body, "application/json");
    });

    return server.listen(config.listenHost, config.listenPort);
}

}  // namespace mbe::service
