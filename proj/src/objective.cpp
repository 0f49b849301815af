#include "scengen/objective.hpp"

#include <algorithm>
#include <map>
#include <vector>

namespace scengen {

double ego_agents_distance(const SimulationTrace& trace)
{
    double total = 0.0;
    for (const Snapshot& snap : trace.steps) {
        for (const auto& [id, pos] : snap.agent_positions) {
            (void)id;
            total += euclid(snap.ego_pos, pos);
        }
    }
    return total;
}

double journey_distance(const SimulationTrace& trace)
{
    if (trace.steps.empty()) {
        return 0.0;
    }
    return euclid(trace.steps.front().ego_pos, trace.steps.back().ego_pos);
}

int count_accidents(const SimulationTrace& trace)
{
    // One accident per maximal run of consecutive contact steps per agent;
    // a lingering contact must not be counted once per step.
    std::map<std::string, std::vector<int>> steps_by_agent;
    for (const CollisionEvent& event : trace.collisions) {
        steps_by_agent[event.agent_id].push_back(event.step_index);
    }
    int accidents = 0;
    for (auto& [agent, steps] : steps_by_agent) {
        (void)agent;
        std::sort(steps.begin(), steps.end());
        steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
        for (std::size_t i = 0; i < steps.size(); ++i) {
            if (i == 0 || steps[i] != steps[i - 1] + 1) {
                ++accidents;
            }
        }
    }
    return accidents;
}

ObjectiveScore combined(double ego_agents_dist, double journey_dist, int acc,
                        const ObjectiveConfig& cfg)
{
    ObjectiveScore score;
    score.ego_agents_distance = ego_agents_dist;
    score.journey_distance = journey_dist;
    score.acc = acc;
    score.e_value = ego_agents_dist - journey_dist - cfg.accident_weight * acc;
    return score;
}

ObjectiveScore score_trace(const SimulationTrace& trace, const ObjectiveConfig& cfg)
{
    return combined(ego_agents_distance(trace), journey_distance(trace), count_accidents(trace),
                    cfg);
}

} // namespace scengen
