#ifndef MBE_SERVICE_HPP
#define MBE_SERVICE_HPP

#include <memory>
#include <string>

#include "mbe/gateway.hpp"

namespace mbe::service {

struct ServiceConfig {
    std::string listenHost = "127.0.0.1";
    int listenPort = 8080;
    std::shared_ptr<gateway::Backend> backend;  // null = no MLLM backend configured

    // MBE_LISTEN ("host:port", default 127.0.0.1:8080) plus the gateway env vars.
    static ServiceConfig fromEnv();
};

struct HandledResponse {
    int status = 200;
    std::string body;  // JSON
};

// Stateless request handlers behind the HTTP layer; exposed so tests can
// drive endpoints without sockets. Methods never throw; errors become
// {"error":{"code","message"}} bodies with the mapped status.
class ModelService {
public:
    explicit ModelService(ServiceConfig config);

    HandledResponse extractSensors(const std::string& body) const;
    HandledResponse extractActuators(const std::string& body) const;
    HandledResponse extractElementProperties(const std::string& body) const;
    HandledResponse detectDifferences(const std::string& body) const;
    HandledResponse checkCompliance(const std::string& body) const;
    HandledResponse applyChange(const std::string& body) const;
    HandledResponse health() const;

    const ServiceConfig& config() const { return config_; }

private:
    HandledResponse extractByRole(const std::string& body, const std::string& role,
                                  const std::string& resultKey) const;

    ServiceConfig config_;
};

// Blocking; serves until the process ends. Returns false if binding failed.
bool serve(const ServiceConfig& config);

}  // namespace mbe::service

#endif  // MBE_SERVICE_HPP
