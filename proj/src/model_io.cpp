#include "mbe/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mbe::format {

using nlohmann::ordered_json;
using json = nlohmann::ordered_json;
using model::Instance;
using model::Metamodel;
using model::ScalarValue;

namespace {

class Parser {
public:
    std::vector<ParseError> errors;

    void error(const std::string& path, std::string code, std::string message) {
        errors.push_back({path, std::move(code), std::move(message)});
    }

    bool requireObject(const json& node, const std::string& path) {
        if (!node.is_object()) {
            error(path, "WRONG_TYPE", "expected a JSON object");
            return false;
        }
        return true;
    }

    // Strict field access: records MISSING_FIELD / rejects later via checkNoExtras.
    const json* field(const json& node, const std::string& path, const char* key,
                      bool required = true) {
        auto it = node.find(key);
        if (it == node.end()) {
            if (required) error(path + "/" + key, "MISSING_FIELD", std::string("missing field '") + key + "'");
            return nullptr;
        }
        return &*it;
    }

    void checkNoExtras(const json& node, const std::string& path,
                       std::initializer_list<const char*> allowed) {
        for (auto it = node.begin(); it != node.end(); ++it) {
            bool known = false;
            for (const char* key : allowed) {
                if (it.key() == key) {
                    known = true;
                    break;
                }
            }
            if (!known) error(path + "/" + it.key(), "UNKNOWN_FIELD", "unknown field '" + it.key() + "'");
        }
    }

    std::string getString(const json& node, const std::string& path, const char* key,
                          bool required = true) {
        const json* v = field(node, path, key, required);
        if (!v) return {};
        if (!v->is_string()) {
            error(path + "/" + key, "WRONG_TYPE", std::string("field '") + key + "' must be a string");
            return {};
        }
        return v->get<std::string>();
    }

    bool getBool(const json& node, const std::string& path, const char* key) {
        const json* v = field(node, path, key);
        if (!v) return false;
        if (!v->is_boolean()) {
            error(path + "/" + key, "WRONG_TYPE", std::string("field '") + key + "' must be a boolean");
            return false;
        }
        return v->get<bool>();
    }

    std::optional<model::Multiplicity> parseMultiplicity(const std::string& text,
                                                         const std::string& path) {
        const auto sep = text.find("..");
        if (sep == std::string::npos) {
            error(path, "BAD_MULTIPLICITY", "multiplicity must be 'lower..upper': '" + text + "'");
            return std::nullopt;
        }
        const std::string lo = text.substr(0, sep);
        const std::string hi = text.substr(sep + 2);
        auto parseInt = [](const std::string& s) -> std::optional<std::int64_t> {
            if (s.empty() || !std::all_of(s.begin(), s.end(),
                                          [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
                return std::nullopt;
            try {
                return std::stoll(s);
            } catch (...) {
                return std::nullopt;
            }
        };
        model::Multiplicity mult;
        auto lower = parseInt(lo);
        if (!lower) {
            error(path, "BAD_MULTIPLICITY", "bad lower bound in '" + text + "'");
            return std::nullopt;
        }
        mult.lower = *lower;
        if (hi == "*") {
            mult.upper = std::nullopt;
        } else {
            auto upper = parseInt(hi);
            if (!upper) {
                error(path, "BAD_MULTIPLICITY", "bad upper bound in '" + text + "'");
                return std::nullopt;
            }
            mult.upper = *upper;
        }
        if (mult.upper && (*mult.upper < 1 || mult.lower > *mult.upper)) {
            error(path, "BAD_MULTIPLICITY", "bounds out of order in '" + text + "'");
            return std::nullopt;
        }
        return mult;
    }

    std::optional<ScalarValue> parseScalar(const json& node, const std::string& path) {
        if (node.is_number_integer()) return ScalarValue(node.get<std::int64_t>());
        if (node.is_number_unsigned()) return ScalarValue(static_cast<std::int64_t>(node.get<std::uint64_t>()));
        if (node.is_number_float()) {
            const double d = node.get<double>();
            if (!std::isfinite(d)) {
                error(path, "BAD_SCALAR", "real values must be finite");
                return std::nullopt;
            }
            return ScalarValue(d);
        }
        if (node.is_string()) return ScalarValue(node.get<std::string>());
        if (node.is_boolean()) return ScalarValue(node.get<bool>());
        if (node.is_object() && node.size() == 1 && node.contains("$ref") &&
            node["$ref"].is_string()) {
            return ScalarValue(model::RefId{node["$ref"].get<std::string>()});
        }
        error(path, "BAD_SCALAR", "slot values must be int, real, string, bool, or {\"$ref\": id}");
        return std::nullopt;
    }

    Metamodel parseMetamodel(const json& root) {
        Metamodel mm;
        checkNoExtras(root, "", {"kind", "name", "classes", "relations"});
        mm.name = getString(root, "", "name");

        const json* classes = field(root, "", "classes");
        if (classes) {
            if (!classes->is_array()) {
                error("/classes", "WRONG_TYPE", "'classes' must be an array");
            } else {
                for (size_t i = 0; i < classes->size(); ++i) {
                    const std::string path = "/classes/" + std::to_string(i);
                    const json& c = (*classes)[i];
                    if (!requireObject(c, path)) continue;
                    checkNoExtras(c, path, {"name", "abstract", "supertypes", "attributes", "operations"});
                    model::MetaClass cls;
                    cls.name = getString(c, path, "name");
                    cls.abstractFlag = getBool(c, path, "abstract");
                    if (const json* supers = field(c, path, "supertypes")) {
                        if (!supers->is_array()) {
                            error(path + "/supertypes", "WRONG_TYPE", "'supertypes' must be an array");
                        } else {
                            for (size_t j = 0; j < supers->size(); ++j) {
                                const json& s = (*supers)[j];
                                if (s.is_string()) {
                                    cls.supertypes.push_back(s.get<std::string>());
                                } else {
                                    error(path + "/supertypes/" + std::to_string(j), "WRONG_TYPE",
                                          "supertype names must be strings");
                                }
                            }
                        }
                    }
                    if (const json* attrs = field(c, path, "attributes")) {
                        if (!attrs->is_array()) {
                            error(path + "/attributes", "WRONG_TYPE", "'attributes' must be an array");
                        } else {
                            for (size_t j = 0; j < attrs->size(); ++j) {
                                const std::string apath = path + "/attributes/" + std::to_string(j);
                                const json& a = (*attrs)[j];
                                if (!requireObject(a, apath)) continue;
                                checkNoExtras(a, apath, {"name", "type"});
                                cls.attributes.push_back(
                                    {getString(a, apath, "name"), getString(a, apath, "type")});
                            }
                        }
                    }
                    if (const json* ops = field(c, path, "operations")) {
                        if (!ops->is_array()) {
                            error(path + "/operations", "WRONG_TYPE", "'operations' must be an array");
                        } else {
                            for (size_t j = 0; j < ops->size(); ++j) {
                                const std::string opath = path + "/operations/" + std::to_string(j);
                                const json& o = (*ops)[j];
                                if (!requireObject(o, opath)) continue;
                                checkNoExtras(o, opath, {"name", "params", "returns"});
                                model::OperationDef op;
                                op.name = getString(o, opath, "name");
                                if (const json* params = field(o, opath, "params")) {
                                    if (!params->is_array()) {
                                        error(opath + "/params", "WRONG_TYPE", "'params' must be an array");
                                    } else {
                                        for (size_t k = 0; k < params->size(); ++k) {
                                            const std::string ppath =
                                                opath + "/params/" + std::to_string(k);
                                            const json& p = (*params)[k];
                                            if (!requireObject(p, ppath)) continue;
                                            checkNoExtras(p, ppath, {"name", "type"});
                                            op.params.push_back({getString(p, ppath, "name"),
                                                                 getString(p, ppath, "type")});
                                        }
                                    }
                                }
                                if (const json* ret = field(o, opath, "returns")) {
                                    if (ret->is_null()) {
                                        op.returns = std::nullopt;
                                    } else if (ret->is_string()) {
                                        op.returns = ret->get<std::string>();
                                    } else {
                                        error(opath + "/returns", "WRONG_TYPE",
                                              "'returns' must be a string or null");
                                    }
                                }
                                cls.operations.push_back(std::move(op));
                            }
                        }
                    }
                    mm.classes.push_back(std::move(cls));
                }
            }
        }

        const json* relations = field(root, "", "relations");
        if (relations) {
            if (!relations->is_array()) {
                error("/relations", "WRONG_TYPE", "'relations' must be an array");
            } else {
                for (size_t i = 0; i < relations->size(); ++i) {
                    const std::string path = "/relations/" + std::to_string(i);
                    const json& r = (*relations)[i];
                    if (!requireObject(r, path)) continue;
                    checkNoExtras(r, path, {"kind", "name", "source", "target", "multiplicity"});
                    model::Relation rel;
                    const std::string kindText = getString(r, path, "kind");
                    if (auto kind = model::relationKindFromString(kindText)) {
                        rel.kind = *kind;
                    } else {
                        error(path + "/kind", "WRONG_TYPE",
                              "relation kind must be association|composition|aggregation");
                    }
                    rel.name = getString(r, path, "name");
                    rel.source = getString(r, path, "source");
                    rel.target = getString(r, path, "target");
                    const std::string multText = getString(r, path, "multiplicity");
                    if (auto mult = parseMultiplicity(multText, path + "/multiplicity")) {
                        rel.multiplicity = *mult;
                    }
                    mm.relations.push_back(std::move(rel));
                }
            }
        }
        return mm;
    }

    Instance parseInstance(const json& root) {
        Instance inst;
        checkNoExtras(root, "", {"kind", "metamodel", "objects"});
        inst.metamodelName = getString(root, "", "metamodel");
        const json* objects = field(root, "", "objects");
        if (objects) {
            if (!objects->is_array()) {
                error("/objects", "WRONG_TYPE", "'objects' must be an array");
            } else {
                for (size_t i = 0; i < objects->size(); ++i) {
                    const std::string path = "/objects/" + std::to_string(i);
                    const json& o = (*objects)[i];
                    if (!requireObject(o, path)) continue;
                    checkNoExtras(o, path, {"id", "class", "slots", "links"});
                    model::ModelObject obj;
                    obj.id = getString(o, path, "id");
                    obj.className = getString(o, path, "class");
                    if (const json* slots = field(o, path, "slots")) {
                        if (!slots->is_object()) {
                            error(path + "/slots", "WRONG_TYPE", "'slots' must be an object");
                        } else {
                            for (auto it = slots->begin(); it != slots->end(); ++it) {
                                const std::string spath = path + "/slots/" + it.key();
                                if (auto value = parseScalar(*it, spath)) {
                                    obj.slots.emplace_back(it.key(), std::move(*value));
                                }
                            }
                        }
                    }
                    if (const json* links = field(o, path, "links")) {
                        if (!links->is_object()) {
                            error(path + "/links", "WRONG_TYPE", "'links' must be an object");
                        } else {
                            for (auto it = links->begin(); it != links->end(); ++it) {
                                const std::string lpath = path + "/links/" + it.key();
                                if (!it->is_array()) {
                                    error(lpath, "WRONG_TYPE", "link targets must be an array of ids");
                                    continue;
                                }
                                std::vector<std::string> targets;
                                for (const json& t : *it) {
                                    if (t.is_string()) {
                                        targets.push_back(t.get<std::string>());
                                    } else {
                                        error(lpath, "WRONG_TYPE", "link targets must be strings");
                                    }
                                }
                                obj.links.emplace_back(it.key(), std::move(targets));
                            }
                        }
                    }
                    inst.objects.push_back(std::move(obj));
                }
            }
        }
        return inst;
    }
};

ordered_json scalarToJson(const ScalarValue& value) {
    using Kind = ScalarValue::Kind;
    switch (value.kind()) {
        case Kind::Int: return value.asInt();
        case Kind::Real: return value.asReal();
        case Kind::String: return value.asString();
        case Kind::Bool: return value.asBool();
        case Kind::Ref: return ordered_json{{"$ref", value.asRef().id}};
    }
    return nullptr;
}

ordered_json metamodelToJson(const Metamodel& mm) {
    ordered_json root;
    root["kind"] = "metamodel";
    root["name"] = mm.name;
    root["classes"] = ordered_json::array();
    for (const auto& cls : mm.classes) {
        ordered_json c;
        c["name"] = cls.name;
        c["abstract"] = cls.abstractFlag;
        c["supertypes"] = cls.supertypes;
        c["attributes"] = ordered_json::array();
        for (const auto& attr : cls.attributes) {
            c["attributes"].push_back({{"name", attr.name}, {"type", attr.typeRef}});
        }
        c["operations"] = ordered_json::array();
        for (const auto& op : cls.operations) {
            ordered_json o;
            o["name"] = op.name;
            o["params"] = ordered_json::array();
            for (const auto& param : op.params) {
                o["params"].push_back({{"name", param.name}, {"type", param.typeRef}});
            }
            o["returns"] = op.returns ? ordered_json(*op.returns) : ordered_json(nullptr);
            c["operations"].push_back(std::move(o));
        }
        root["classes"].push_back(std::move(c));
    }
    root["relations"] = ordered_json::array();
    for (const auto& rel : mm.relations) {
        root["relations"].push_back({{"kind", model::toString(rel.kind)},
                                     {"name", rel.name},
                                     {"source", rel.source},
                                     {"target", rel.target},
                                     {"multiplicity", rel.multiplicity.render()}});
    }
    return root;
}

ordered_json instanceToJson(const Instance& inst) {
    ordered_json root;
    root["kind"] = "instance";
    root["metamodel"] = inst.metamodelName;
    root["objects"] = ordered_json::array();
    for (const auto& obj : inst.objects) {
        ordered_json o;
        o["id"] = obj.id;
        o["class"] = obj.className;
        o["slots"] = ordered_json::object();
        for (const auto& [name, value] : obj.slots) o["slots"][name] = scalarToJson(value);
        o["links"] = ordered_json::object();
        for (const auto& [name, targets] : obj.links) o["links"][name] = targets;
        root["objects"].push_back(std::move(o));
    }
    return root;
}

}  // namespace

ParseOutcome parseModelDocument(std::string_view text) {
    ParseOutcome outcome;
    json root = json::parse(text, nullptr, false);
    if (root.is_discarded()) {
        outcome.errors.push_back({"", "MALFORMED_JSON", "input is not valid JSON"});
        return outcome;
    }
    Parser parser;
    if (!parser.requireObject(root, "")) {
        outcome.errors = std::move(parser.errors);
        return outcome;
    }
    const std::string kind = parser.getString(root, "", "kind");
    ModelDocument doc;
    if (kind == "metamodel") {
        doc.payload = parser.parseMetamodel(root);
    } else if (kind == "instance") {
        doc.payload = parser.parseInstance(root);
    } else if (parser.errors.empty()) {
        parser.error("/kind", "BAD_KIND", "kind must be 'metamodel' or 'instance'");
    }
    outcome.errors = std::move(parser.errors);
    if (!outcome.errors.empty()) return outcome;

    if (doc.isMetamodel()) {
        outcome.issues = model::validateMetamodel(doc.metamodel());
    } else {
        // Conformance to a metamodel is checked by callers that have one in
        // hand; only metamodel-free structural checks run here.
        outcome.issues = model::instanceStructureIssues(doc.instance());
    }
    outcome.document = std::move(doc);
    return outcome;
}

std::string emitModelDocument(const ModelDocument& doc) {
    const ordered_json root =
        doc.isMetamodel() ? metamodelToJson(doc.metamodel()) : instanceToJson(doc.instance());
    return root.dump(2) + "\n";
}

ModelDocument parseOrThrow(std::string_view text) {
    ParseOutcome outcome = parseModelDocument(text);
    if (!outcome.document) {
        std::string detail;
        for (const auto& e : outcome.errors) {
            if (!detail.empty()) detail += "; ";
            detail += e.code + " at '" + e.path + "': " + e.message;
        }
        throw Error("PARSE_ERROR", detail.empty() ? "unparseable document" : detail);
    }
    return std::move(*outcome.document);
}

ModelDocument loadDocumentFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("IO_ERROR", "cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parseOrThrow(buf.str());
}

}  // namespace mbe::format
