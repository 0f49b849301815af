#ifndef SCENGEN_TRACE_HPP
#define SCENGEN_TRACE_HPP

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "scengen/geometry.hpp"

namespace scengen {

class TraceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// World state at one simulation step. Agent order is identical across all
/// snapshots of a trace.
struct Snapshot {
    int step_index = 1; ///< 1-based, strictly increasing across the trace
    Vec3 ego_pos;
    std::vector<std::pair<std::string, Vec3>> agent_positions;

    friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

/// One step of contact between the ego and an agent.
struct CollisionEvent {
    int step_index = 0;
    std::string agent_id;
    Vec3 ego_pos;

    friend bool operator==(const CollisionEvent&, const CollisionEvent&) = default;
};

struct SimulationTrace {
    std::vector<Snapshot> steps;
    std::vector<CollisionEvent> collisions;

    friend bool operator==(const SimulationTrace&, const SimulationTrace&) = default;
};

/// Compact per-evaluation record of what the simulator produced.
struct TraceSummary {
    int step_count = 0;
    int collision_event_count = 0;

    friend bool operator==(const TraceSummary&, const TraceSummary&) = default;
};

TraceSummary summarize(const SimulationTrace& trace);

/// Throws TraceError unless the trace satisfies all invariants: non-empty
/// steps, 1-based strictly increasing step indices, identical agent id
/// lists per snapshot, collision steps within range and naming known agents.
void validate_trace(const SimulationTrace& trace);

/// Wire encoding used by the bridge protocol:
/// {"steps":[{"i":1,"ego":[x,y,z],"agents":[["ped0",x,y,z],...]},...],
///  "collisions":[{"i":...,"agent":"..."}]}
std::string trace_to_json(const SimulationTrace& trace);

/// Parses the wire encoding; validates invariants before returning.
/// Collision ego positions are recovered from the matching snapshot.
SimulationTrace trace_from_json(const std::string& json_text);

} // namespace scengen

#endif
