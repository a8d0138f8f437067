#ifndef MBE_MODEL_IO_HPP
#define MBE_MODEL_IO_HPP

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mbe/model.hpp"

namespace mbe::format {

struct ModelDocument {
    // kind tag is implied by the alternative held.
    std::variant<model::Metamodel, model::Instance> payload;

    bool isMetamodel() const { return payload.index() == 0; }
    bool isInstance() const { return payload.index() == 1; }
    const model::Metamodel& metamodel() const { return std::get<model::Metamodel>(payload); }
    const model::Instance& instance() const { return std::get<model::Instance>(payload); }

    bool operator==(const ModelDocument&) const = default;
};

struct ParseError {
    std::string path;  // JSON pointer into the input, e.g. "/classes/2/name"
    std::string code;  // MALFORMED_JSON, MISSING_FIELD, UNKNOWN_FIELD, WRONG_TYPE,
                       // BAD_KIND, BAD_MULTIPLICITY, BAD_SCALAR
    std::string message;
    bool operator==(const ParseError&) const = default;
};

struct ParseOutcome {
    std::optional<ModelDocument> document;        // present iff errors empty
    std::vector<ParseError> errors;               // schema-level problems
    std::vector<model::ValidationIssue> issues;   // model-core validation of the document

    bool ok() const { return document.has_value() && errors.empty() && issues.empty(); }
};

// Strict parse: unknown fields rejected, field order irrelevant.
ParseOutcome parseModelDocument(std::string_view text);

// Deterministic canonical serialization: fixed key order, two-space indent,
// elements in input order. parse(emit(x)) == x for valid documents.
std::string emitModelDocument(const ModelDocument& doc);

// Convenience wrappers used by tools and tests. Throw Error on parse failure.
ModelDocument parseOrThrow(std::string_view text);
ModelDocument loadDocumentFile(const std::string& path);

}  // namespace mbe::format

#endif  // MBE_MODEL_IO_HPP
