#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mbe/diff.hpp"
#include "mbe/harness.hpp"
#include "mbe/model_io.hpp"
#include "mbe/ocl.hpp"
#include "mbe/query.hpp"
#include "mbe/service.hpp"

namespace {

using mbe::format::loadDocumentFile;
using mbe::format::ModelDocument;

// 0 = success, 1 = domain error, 2 = usage error
constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kUsageError = 2;

struct Output {
    std::string path;  // empty = stdout

    int write(const std::string& text) const {
        if (path.empty()) {
            std::cout << text;
            return kOk;
        }
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot write " << path << "\n";
            return kDomainError;
        }
        out << text;
        return kOk;
    }
};

std::string readTextFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw mbe::Error("IO_ERROR", "cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string renderIssues(const std::vector<mbe::model::ValidationIssue>& issues) {
    std::ostringstream out;
    for (const auto& issue : issues) {
        out << issue.path << ": " << issue.code << " " << issue.message << "\n";
    }
    return out.str();
}

int runValidate(const std::string& modelPath, const std::string& metamodelPath,
                const Output& output) {
    const ModelDocument doc = loadDocumentFile(modelPath);
    std::vector<mbe::model::ValidationIssue> issues;
    if (doc.isMetamodel()) {
        issues = mbe::model::validateMetamodel(doc.metamodel());
    } else {
        if (metamodelPath.empty()) {
            throw mbe::Error("MISSING_METAMODEL",
                             "instance documents need --metamodel <file> for validation");
        }
        const ModelDocument mmDoc = loadDocumentFile(metamodelPath);
        if (!mmDoc.isMetamodel()) {
            throw mbe::Error("BAD_PAYLOAD", "--metamodel must point at a metamodel document");
        }
        issues = mbe::model::validateInstance(doc.instance(), mmDoc.metamodel());
    }
    if (issues.empty()) {
        return output.write("ok\n");
    }
    output.write(renderIssues(issues));
    return kDomainError;
}

int runQuery(const std::string& modelPath, const std::string& op,
             const std::vector<std::string>& args, bool transitive, const Output& output) {
    const ModelDocument doc = loadDocumentFile(modelPath);
    if (!doc.isMetamodel()) {
        throw mbe::Error("BAD_PAYLOAD", "query operations run on metamodel documents");
    }
    const auto& mm = doc.metamodel();
    auto needArgs = [&](size_t count, const char* usage) {
        if (args.size() != count) throw mbe::Error("USAGE", std::string("usage: ") + usage);
    };

    std::ostringstream out;
    if (op == "listClasses") {
        needArgs(0, "query <model> --op listClasses");
        for (const auto& name : mbe::query::listClasses(mm)) out << name << "\n";
    } else if (op == "members") {
        needArgs(1, "query <model> --op members <class>");
        const auto members = mbe::query::listMembers(mm, args[0]);
        out << "attributes:\n";
        for (const auto& attr : members.attributes) {
            out << "  " << attr.name << ": " << attr.typeRef << "\n";
        }
        out << "operations:\n";
        for (const auto& operation : members.operations) {
            out << "  " << operation.name << operation.signature() << "\n";
        }
    } else if (op == "kindof") {
        needArgs(2, "query <model> --op kindof <class> <ancestor>");
        out << (mbe::query::isKindOf(mm, args[0], args[1]) ? "true" : "false") << "\n";
    } else if (op == "chain") {
        needArgs(2, "query <model> --op chain <from> <to>");
        out << mbe::query::relationChain(mm, args[0], args[1]).render() << "\n";
    } else if (op == "subclasses") {
        needArgs(1, "query <model> --op subclasses <class>");
        for (const auto& name : mbe::query::subclassesOf(mm, args[0], !transitive)) {
            out << name << "\n";
        }
    } else {
        throw mbe::Error("USAGE", "unknown --op '" + op +
                                      "' (listClasses|members|kindof|chain|subclasses)");
    }
    return output.write(out.str());
}

int runDiff(const std::string& oldPath, const std::string& newPath, const Output& output) {
    const ModelDocument oldDoc = loadDocumentFile(oldPath);
    const ModelDocument newDoc = loadDocumentFile(newPath);
    mbe::diff::DiffReport report;
    if (oldDoc.isMetamodel() && newDoc.isMetamodel()) {
        report = mbe::diff::diffMetamodels(oldDoc.metamodel(), newDoc.metamodel());
    } else if (oldDoc.isInstance() && newDoc.isInstance()) {
        // Instance diffing is structural; no metamodel needed on the CLI path.
        mbe::model::Metamodel empty;
        report = mbe::diff::diffInstances(oldDoc.instance(), newDoc.instance(), empty);
    } else {
        throw mbe::Error("KIND_MISMATCH", "cannot diff a metamodel against an instance");
    }
    return output.write(report.renderJson());
}

int runCheck(const std::string& mmPath, const std::string& instPath, const std::string& rulesPath,
             bool strict, const Output& output) {
    const ModelDocument mmDoc = loadDocumentFile(mmPath);
    const ModelDocument instDoc = loadDocumentFile(instPath);
    if (!mmDoc.isMetamodel() || !instDoc.isInstance()) {
        throw mbe::Error("KIND_MISMATCH", "check needs <metamodel> <instance> <rules>");
    }
    const auto parsed = mbe::ocl::parseConstraints(readTextFile(rulesPath));
    if (!parsed.ok()) {
        std::ostringstream err;
        for (const auto& error : parsed.errors) {
            err << rulesPath << ":" << error.line << ":" << error.column << ": " << error.message
                << "\n";
        }
        std::cerr << err.str();
        return kDomainError;
    }
    const auto result =
        mbe::ocl::checkCompliance(mmDoc.metamodel(), instDoc.instance(), parsed.constraints);

    nlohmann::ordered_json body;
    body["compliant"] = result.compliant;
    body["violations"] = nlohmann::ordered_json::array();
    for (const auto& violation : result.violations) {
        body["violations"].push_back(mbe::ocl::explainViolation(violation));
    }
    body["errors"] = nlohmann::ordered_json::array();
    for (const auto& error : result.errors) {
        body["errors"].push_back("evaluation error in '" + error.constraintName + "' at '" +
                                 error.objectId + "': " + error.message);
    }
    const int rc = output.write(body.dump(2) + "\n");
    if (rc != kOk) return rc;
    return (strict && !result.compliant) ? kDomainError : kOk;
}

int runEval(const std::string& suiteDir, const std::string& backendName,
            const std::string& reportFormat, const Output& output) {
    std::unique_ptr<mbe::gateway::Backend> backend;
    if (backendName == "mock") {
        backend = std::make_unique<mbe::gateway::MockBackend>();
    } else if (backendName == "remote") {
        auto config = mbe::gateway::RemoteConfig::fromEnv();
        if (!config) {
            throw mbe::Error("BAD_CONFIG", "remote backend needs MBE_BACKEND_URL set");
        }
        backend = std::make_unique<mbe::gateway::RemoteBackend>(*config);
    } else {
        throw mbe::Error("USAGE", "--backend must be mock or remote");
    }

    const auto suite = mbe::harness::loadSuite(suiteDir);
    const auto report = mbe::harness::runSuite(*backend, suite);
    const auto format = reportFormat == "json" ? mbe::harness::ReportFormat::Json
                                               : mbe::harness::ReportFormat::MarkdownTable;
    return output.write(mbe::harness::renderReport({report}, format));
}

int runServe(const std::string& backendName) {
    mbe::service::ServiceConfig config = mbe::service::ServiceConfig::fromEnv();
    if (backendName == "mock") {
        config.backend = std::make_shared<mbe::gateway::MockBackend>();
    } else if (backendName == "none") {
        config.backend = nullptr;
    }  // "env": keep whatever fromEnv decided
    std::cerr << "listening on " << config.listenHost << ":" << config.listenPort << "\n";
    if (!mbe::service::serve(config)) {
        std::cerr << "error: failed to bind " << config.listenHost << ":" << config.listenPort
                  << "\n";
        return kDomainError;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model-based engineering analysis and compliance toolkit"};
    app.require_subcommand(1);

    std::string outputPath;
    app.add_option("-o,--output", outputPath, "Write output to a file instead of stdout");

    auto* validate = app.add_subcommand("validate", "Validate a model document");
    std::string validateModel, validateMetamodel;
    validate->add_option("model", validateModel, "Model document (JSON)")->required();
    validate->add_option("--metamodel", validateMetamodel,
                         "Metamodel document for instance validation");

    auto* query = app.add_subcommand("query", "Run a query operation on a metamodel");
    std::string queryModel, queryOp;
    std::vector<std::string> queryArgs;
    bool queryTransitive = false;
    query->add_option("model", queryModel, "Metamodel document (JSON)")->required();
    query->add_option("--op", queryOp, "listClasses|members|kindof|chain|subclasses")->required();
    query->add_option("args", queryArgs, "Operation arguments");
    query->add_flag("--transitive", queryTransitive,
                    "subclasses: transitive closure instead of direct");

    auto* diffCmd = app.add_subcommand("diff", "Structural diff of two model documents");
    std::string diffOld, diffNew;
    diffCmd->add_option("old", diffOld, "Old document")->required();
    diffCmd->add_option("new", diffNew, "New document")->required();

    auto* check = app.add_subcommand("check", "Check OCL compliance of an instance");
    std::string checkMm, checkInst, checkRules;
    bool checkStrict = false;
    check->add_option("metamodel", checkMm, "Metamodel document")->required();
    check->add_option("instance", checkInst, "Instance document")->required();
    check->add_option("rules", checkRules, "OCL rules file")->required();
    check->add_flag("--strict", checkStrict, "Exit 1 when not compliant");

    auto* eval = app.add_subcommand("eval", "Run the question suite against a backend");
    std::string evalSuite, evalBackend = "mock", evalReport = "md";
    eval->add_option("--suite", evalSuite, "Directory of ground-truth files")->required();
    eval->add_option("--backend", evalBackend, "mock|remote");
    eval->add_option("--report", evalReport, "md|json");

    auto* serve = app.add_subcommand("serve", "Start the REST service");
    std::string serveBackend = "env";
    serve->add_option("--backend", serveBackend, "env|mock|none (default: env)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << e.what() << "\n" << app.help();
        return kUsageError;
    }

    const Output output{outputPath};
    try {
        if (validate->parsed()) return runValidate(validateModel, validateMetamodel, output);
        if (query->parsed()) return runQuery(queryModel, queryOp, queryArgs, queryTransitive, output);
        if (diffCmd->parsed()) return runDiff(diffOld, diffNew, output);
        if (check->parsed()) return runCheck(checkMm, checkInst, checkRules, checkStrict, output);
        if (eval->parsed()) return runEval(evalSuite, evalBackend, evalReport, output);
        if (serve->parsed()) return runServe(serveBackend);
    } catch (const mbe::Error& error) {
        if (error.code() == "USAGE") {
            std::cerr << error.what() << "\n";
            return kUsageError;
        }
        std::cerr << "error [" << error.code() << "]: " << error.what() << "\n";
        return kDomainError;
    }
    return kUsageError;
}
