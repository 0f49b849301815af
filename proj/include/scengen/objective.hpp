#ifndef SCENGEN_OBJECTIVE_HPP
#define SCENGEN_OBJECTIVE_HPP

#include "scengen/trace.hpp"

namespace scengen {

struct ObjectiveConfig {
    double accident_weight = 1000.0;
};

/// The three safety-objective components and their combination
/// E = ego_agents_distance - journey_distance - weight * acc.
/// Lower E marks a more dangerous (more valuable) scenario.
struct ObjectiveScore {
    double ego_agents_distance = 0.0;
    double journey_distance = 0.0;
    int acc = 0;
    double e_value = 0.0;

    friend bool operator==(const ObjectiveScore&, const ObjectiveScore&) = default;
};

/// Sum over agents and steps of the ego-to-agent Euclidean distance.
double ego_agents_distance(const SimulationTrace& trace);

/// Straight-line displacement between the ego's first and final recorded
/// positions (endpoint-only, not path length).
double journey_distance(const SimulationTrace& trace);

/// Number of accidents after debouncing: one accident per maximal run of
/// consecutive contact steps with a given agent.
int count_accidents(const SimulationTrace& trace);

ObjectiveScore combined(double ego_agents_dist, double journey_dist, int acc,
                        const ObjectiveConfig& cfg = {});

ObjectiveScore score_trace(const SimulationTrace& trace, const ObjectiveConfig& cfg = {});

} // namespace scengen

#endif
