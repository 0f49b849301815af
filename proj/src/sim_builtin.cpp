#include "scengen/sim_builtin.hpp"

#include <algorithm>
#include <cmath>

namespace scengen {

namespace {

constexpr double kArrivalEpsilon = 1e-9;
constexpr double kMinPredictionSpeed = 0.1; ///< m/s floor for time-to-reach estimates

std::string agent_id_for(const AgentTemplate& agent, std::size_t index)
{
    return (agent.kind == AgentKind::pedestrian ? "ped" : "veh") + std::to_string(index);
}

struct GroundFrame {
    double fx, fz; ///< forward unit vector
    double rx, rz; ///< right unit vector
};

GroundFrame ego_frame(const WorldState& state)
{
    double fx = state.ego_destination.x - state.ego_pos.x;
    double fz = state.ego_destination.z - state.ego_pos.z;
    const double norm = std::hypot(fx, fz);
    if (norm < kArrivalEpsilon) {
        fx = state.ego_forward.x;
        fz = state.ego_forward.z;
    } else {
        fx /= norm;
        fz /= norm;
    }
    return {fx, fz, fz, -fx};
}

} // namespace

double darkness(double time_of_day)
{
    const double t = wrap_time_of_day(time_of_day);
    if (t >= 7.0 && t <= 17.0) {
        return 0.0;
    }
    if (t > 17.0 && t < 22.0) {
        return (t - 17.0) / 5.0;
    }
    if (t > 2.0 && t < 7.0) {
        return (7.0 - t) / 5.0;
    }
    return 1.0; // 22:00 through 02:00
}

double effective_detection_range(const SimConfig& cfg, const EnvironmentState& env)
{
    const double weather = std::clamp(env.rain + env.fog, 0.0, 1.0);
    return cfg.detection_range * (1.0 - cfg.weather_visibility_penalty * weather) *
           (1.0 - cfg.night_visibility_penalty * darkness(env.time_of_day));
}

double effective_deceleration(const SimConfig& cfg, const EnvironmentState& env)
{
    return cfg.max_decel * (1.0 - cfg.wetness_brake_penalty * env.wetness);
}

double ego_policy_step(const WorldState& state, const SimConfig& cfg)
{
    if (state.ego_halted) {
        return 0.0;
    }
    const GroundFrame frame = ego_frame(state);
    const double remaining = dist_xz(state.ego_pos, state.ego_destination);
    if (remaining < kArrivalEpsilon) {
        return 0.0;
    }

    const double range = effective_detection_range(cfg, state.env);
    bool threat = false;
    for (const AgentState& agent : state.agents) {
        if (agent.kind != AgentKind::pedestrian) {
            continue;
        }
        const double dx = agent.pos.x - state.ego_pos.x;
        const double dz = agent.pos.z - state.ego_pos.z;
        const double forward = dx * frame.fx + dz * frame.fz;
        if (forward <= 0.0 || forward > range) {
            continue;
        }
        const double lateral = dx * frame.rx + dz * frame.rz;
        const double lateral_vel = agent.velocity.x * frame.rx + agent.velocity.z * frame.rz;
        // Lateral offset the pedestrian will have when the ego reaches its
        // line, assuming both keep their current velocities. A pedestrian
        // inside the corridor now, or crossing it before the ego passes,
        // is a braking threat.
        const double time_to_reach = forward / std::max(state.ego_speed, kMinPredictionSpeed);
        const double lateral_then = lateral + lateral_vel * time_to_reach;
        double min_lateral;
        if (lateral == 0.0 || lateral_then == 0.0 || (lateral < 0.0) != (lateral_then < 0.0)) {
            min_lateral = 0.0; // crosses the path line before the ego passes
        } else {
            min_lateral = std::min(std::abs(lateral), std::abs(lateral_then));
        }
        if (min_lateral <= cfg.detection_fov_half_width) {
            threat = true;
            break;
        }
    }
    if (threat) {
        return -effective_deceleration(cfg, state.env);
    }
    if (state.ego_speed < cfg.cruise_speed) {
        return cfg.max_decel; // symmetric re-acceleration toward cruise
    }
    return 0.0;
}

void pedestrian_step(AgentState& agent, double dt)
{
    if (agent.waypoint_index >= agent.waypoints.size()) {
        agent.velocity = {};
        return;
    }
    const Vec3 target = agent.waypoints[agent.waypoint_index];
    const Vec3 delta = target - agent.pos;
    const double dist = euclid(target, agent.pos);
    const double step = agent.speed * dt;
    if (dist <= step || dist < kArrivalEpsilon) {
        agent.pos = target;
        agent.waypoint_index += 1;
        agent.velocity = dist < kArrivalEpsilon || dt <= 0.0 ? Vec3{} : delta * (1.0 / dt);
        return;
    }
    const Vec3 direction = delta * (1.0 / dist);
    agent.velocity = direction * agent.speed;
    agent.pos = agent.pos + direction * step;
}

std::vector<CollisionEvent> detect_collisions(const WorldState& state, const SimConfig& cfg)
{
    std::vector<CollisionEvent> contacts;
    const double threshold = cfg.ego_radius + cfg.pedestrian_radius;
    for (const AgentState& agent : state.agents) {
        if (agent.kind != AgentKind::pedestrian) {
            continue;
        }
        if (dist_xz(state.ego_pos, agent.pos) < threshold) {
            contacts.push_back({state.step_index, agent.id, state.ego_pos});
        }
    }
    return contacts;
}

SimulationTrace simulate(const ConcreteScenario& scenario, const SimConfig& cfg, std::uint64_t seed)
{
    (void)seed; // dynamics are deterministic; reserved for stochastic extensions

    const ScenarioTemplate& tmpl = scenario.realized;
    if (tmpl.agents.empty()) {
        // Legal scenario, nothing to collide with; the trace still records ego motion.
    }
    for (const AgentTemplate& agent : tmpl.agents) {
        if (agent.waypoints.empty()) {
            throw EvaluationError("agent has no waypoints");
        }
    }

    WorldState state;
    state.ego_pos = tmpl.ego_start;
    state.ego_speed = cfg.cruise_speed;
    state.ego_destination = tmpl.ego_destination;
    state.env = tmpl.environment;
    {
        double fx = std::cos(tmpl.ego_heading);
        double fz = std::sin(tmpl.ego_heading);
        const double dx = tmpl.ego_destination.x - tmpl.ego_start.x;
        const double dz = tmpl.ego_destination.z - tmpl.ego_start.z;
        const double norm = std::hypot(dx, dz);
        if (norm >= kArrivalEpsilon) {
            fx = dx / norm;
            fz = dz / norm;
        }
        state.ego_forward = {fx, 0.0, fz};
    }
    for (std::size_t i = 0; i < tmpl.agents.size(); ++i) {
        const AgentTemplate& spec = tmpl.agents[i];
        AgentState agent;
        agent.id = agent_id_for(spec, i);
        agent.kind = spec.kind;
        agent.speed = spec.speed;
        agent.waypoints = spec.waypoints;
        agent.pos = spec.waypoints.front();
        agent.waypoint_index = spec.waypoints.size() > 1 ? 1 : spec.waypoints.size();
        if (agent.waypoint_index < agent.waypoints.size()) {
            const Vec3 delta = agent.waypoints[agent.waypoint_index] - agent.pos;
            const double dist = euclid(agent.waypoints[agent.waypoint_index], agent.pos);
            agent.velocity = dist < kArrivalEpsilon ? Vec3{} : delta * (agent.speed / dist);
        }
        state.agents.push_back(std::move(agent));
    }

    const int total_steps = static_cast<int>(std::ceil(tmpl.duration_s / cfg.dt - 1e-9));
    SimulationTrace trace;
    trace.steps.reserve(static_cast<std::size_t>(total_steps));

    for (int step = 1; step <= total_steps; ++step) {
        const double accel = ego_policy_step(state, cfg);
        if (!state.ego_halted) {
            state.ego_speed = std::clamp(state.ego_speed + accel * cfg.dt, 0.0, cfg.cruise_speed);
            const double remaining = dist_xz(state.ego_pos, state.ego_destination);
            const double travel = state.ego_speed * cfg.dt;
            if (remaining < kArrivalEpsilon) {
                state.ego_speed = 0.0;
            } else if (travel >= remaining) {
                state.ego_pos.x = state.ego_destination.x;
                state.ego_pos.z = state.ego_destination.z;
                state.ego_speed = 0.0; // stop at destination
            } else if (travel > 0.0) {
                const GroundFrame frame = ego_frame(state);
                state.ego_pos.x += frame.fx * travel;
                state.ego_pos.z += frame.fz * travel;
            }
        }
        for (AgentState& agent : state.agents) {
            pedestrian_step(agent, cfg.dt);
        }
        state.step_index = step;

        const std::vector<CollisionEvent> contacts = detect_collisions(state, cfg);
        for (const CollisionEvent& contact : contacts) {
            trace.collisions.push_back(contact);
        }
        if (!contacts.empty() && !state.ego_halted) {
            state.ego_halted = true;
            state.ego_speed = 0.0;
        }

        Snapshot snap;
        snap.step_index = step;
        snap.ego_pos = state.ego_pos;
        snap.agent_positions.reserve(state.agents.size());
        for (const AgentState& agent : state.agents) {
            snap.agent_positions.emplace_back(agent.id, agent.pos);
        }
        trace.steps.push_back(std::move(snap));
    }
    return trace;
}

} // namespace scengen
