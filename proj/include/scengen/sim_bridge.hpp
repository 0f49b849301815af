#ifndef SCENGEN_SIM_BRIDGE_HPP
#define SCENGEN_SIM_BRIDGE_HPP

#include <memory>
#include <string>

#include "scengen/evaluator.hpp"
#include "scengen/scenario.hpp"
#include "scengen/sim_builtin.hpp"
#include "scengen/trace.hpp"

namespace scengen {

/// A structurally bad reply from the remote simulator (not valid JSON, or
/// a trace violating its invariants). Still an evaluation failure from the
/// search's point of view; the raw payload is carried in the message.
class BridgeProtocolError : public EvaluationError {
public:
    using EvaluationError::EvaluationError;
};

struct BridgeConfig {
    /// "tcp:HOST:PORT" connects to a listening simulator; anything else is
    /// run as a subprocess command line speaking the protocol on stdio.
    std::string endpoint;
    double request_timeout_s = 60.0;
    int max_retries = 1;
};

namespace detail {
class LineChannel;
}

/// Newline-delimited JSON client for external simulators. One request line
/// per evaluation attempt:
///   {"cmd":"run","scenario":<scenario document>,"sim_config":{...}}
/// expecting a single response line
///   {"status":"ok","trace":{...}} or {"status":"error","message":"..."}.
/// Serialized: a single outstanding request at a time.
class BridgeClient : public SimulatorBackend {
public:
    BridgeClient(BridgeConfig cfg, SimConfig sim_cfg = {});
    ~BridgeClient() override;

    BridgeClient(const BridgeClient&) = delete;
    BridgeClient& operator=(const BridgeClient&) = delete;

    /// Throws EvaluationError on timeout or remote-reported error,
    /// BridgeProtocolError on malformed responses. Retries up to
    /// max_retries times on a fresh connection/process.
    SimulationTrace run(const ConcreteScenario& scenario) override;

    bool supports_concurrent_evaluation() const override { return false; }

private:
    SimulationTrace attempt(const std::string& request_line);

    BridgeConfig cfg_;
    SimConfig sim_cfg_;
    std::unique_ptr<detail::LineChannel> channel_;
};

std::string make_bridge_request(const ConcreteScenario& scenario, const SimConfig& sim_cfg);

} // namespace scengen

#endif
