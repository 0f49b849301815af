#ifndef SCENGEN_SIM_BUILTIN_HPP
#define SCENGEN_SIM_BUILTIN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "scengen/evaluator.hpp"
#include "scengen/scenario.hpp"
#include "scengen/trace.hpp"

namespace scengen {

/// Tuning constants of the builtin desk-scale world. Defaults are chosen so
/// the bundled crossing scenario is safe at clear weather and noon, and
/// collisions require searched combinations of degraded visibility, reduced
/// road friction and unlucky crossing timing.
struct SimConfig {
    double dt = 0.1;                        ///< seconds per step
    double cruise_speed = 10.0;             ///< m/s
    double max_decel = 6.0;                 ///< m/s^2, also the re-acceleration rate
    double detection_range = 30.0;          ///< m, clear conditions
    double detection_fov_half_width = 2.5;  ///< m, lateral corridor half-width
    double wetness_brake_penalty = 0.4;     ///< fraction of max_decel lost at wetness 1
    double weather_visibility_penalty = 0.6;///< fraction of range lost at rain+fog >= 1
    double night_visibility_penalty = 0.3;  ///< fraction of range lost at full darkness
    double ego_radius = 1.0;                ///< m
    double pedestrian_radius = 0.3;         ///< m
};

/// 0 during daylight (07:00-17:00), ramping linearly to 1 at 22:00 and
/// 02:00; full darkness through the night between them.
double darkness(double time_of_day);

double effective_detection_range(const SimConfig& cfg, const EnvironmentState& env);
double effective_deceleration(const SimConfig& cfg, const EnvironmentState& env);

/// Mutable per-agent simulation state.
struct AgentState {
    std::string id;
    AgentKind kind = AgentKind::pedestrian;
    double speed = 0.0;
    std::vector<Vec3> waypoints;
    std::size_t waypoint_index = 0; ///< next waypoint to head for
    Vec3 pos;
    Vec3 velocity; ///< current step's velocity, zero once the path is done
};

struct WorldState {
    Vec3 ego_pos;
    double ego_speed = 0.0;
    Vec3 ego_forward;  ///< unit ground-plane direction of travel
    Vec3 ego_destination;
    bool ego_halted = false; ///< permanently stopped after a collision
    std::vector<AgentState> agents;
    EnvironmentState env;
    int step_index = 0;
};

/// AEB policy: returns the commanded ego acceleration (m/s^2, negative =
/// brake). Brakes at the wetness-degraded deceleration when a pedestrian
/// within the visibility-degraded detection range ahead is inside the
/// lateral corridor or predicted to cross it before the ego passes;
/// otherwise accelerates toward / holds cruise speed.
double ego_policy_step(const WorldState& state, const SimConfig& cfg);

/// Advance one agent along its waypoints by speed*dt; on arrival within one
/// step it snaps to the waypoint and targets the next; after the last
/// waypoint it stands still.
void pedestrian_step(AgentState& agent, double dt);

/// Contacts this step: any pedestrian whose ground-plane distance to the
/// ego is below ego_radius + pedestrian_radius.
std::vector<CollisionEvent> detect_collisions(const WorldState& state, const SimConfig& cfg);

/// Run the scenario for ceil(duration/dt) steps. Pure function of its
/// inputs; the seed is reserved for stochastic extensions and unused by the
/// deterministic dynamics. The ego halts permanently on first collision
/// while agents and the clock continue.
SimulationTrace simulate(const ConcreteScenario& scenario, const SimConfig& cfg = {},
                         std::uint64_t seed = 0);

class BuiltinSimulator : public SimulatorBackend {
public:
    explicit BuiltinSimulator(SimConfig cfg = {}, std::uint64_t seed = 0)
        : cfg_(cfg), seed_(seed)
    {
    }

    SimulationTrace run(const ConcreteScenario& scenario) override
    {
        return simulate(scenario, cfg_, seed_);
    }

    bool supports_concurrent_evaluation() const override { return true; }

    const SimConfig& config() const { return cfg_; }

private:
    SimConfig cfg_;
    std::uint64_t seed_;
};

} // namespace scengen

#endif
