#include "scengen/trace.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

namespace scengen {

using nlohmann::json;

TraceSummary summarize(const SimulationTrace& trace)
{
    return {static_cast<int>(trace.steps.size()), static_cast<int>(trace.collisions.size())};
}

void validate_trace(const SimulationTrace& trace)
{
    if (trace.steps.empty()) {
        throw TraceError("trace has no steps");
    }
    const Snapshot& first = trace.steps.front();
    int previous_index = 0;
    for (const Snapshot& snap : trace.steps) {
        if (snap.step_index < 1) {
            throw TraceError("snapshot step_index " + std::to_string(snap.step_index) +
                             " is not >= 1");
        }
        if (snap.step_index <= previous_index) {
            throw TraceError("snapshot step indices must be strictly increasing (saw " +
                             std::to_string(snap.step_index) + " after " +
                             std::to_string(previous_index) + ")");
        }
        previous_index = snap.step_index;
        if (snap.agent_positions.size() != first.agent_positions.size()) {
            throw TraceError("snapshot " + std::to_string(snap.step_index) +
                             " lists a different agent count");
        }
        for (std::size_t i = 0; i < snap.agent_positions.size(); ++i) {
            if (snap.agent_positions[i].first != first.agent_positions[i].first) {
                throw TraceError("snapshot " + std::to_string(snap.step_index) +
                                 " lists agent id \"" + snap.agent_positions[i].first +
                                 "\" where \"" + first.agent_positions[i].first + "\" was expected");
            }
        }
    }
    std::set<std::string> known_ids;
    for (const auto& [id, pos] : first.agent_positions) {
        (void)pos;
        known_ids.insert(id);
    }
    const int last_index = trace.steps.back().step_index;
    for (const CollisionEvent& event : trace.collisions) {
        if (event.step_index < 1 || event.step_index > last_index) {
            throw TraceError("collision step " + std::to_string(event.step_index) +
                             " is outside the trace range");
        }
        if (known_ids.find(event.agent_id) == known_ids.end()) {
            throw TraceError("collision names unknown agent \"" + event.agent_id + "\"");
        }
    }
}

std::string trace_to_json(const SimulationTrace& trace)
{
    json steps = json::array();
    for (const Snapshot& snap : trace.steps) {
        json agents = json::array();
        for (const auto& [id, pos] : snap.agent_positions) {
            agents.push_back(json::array({id, pos.x, pos.y, pos.z}));
        }
        steps.push_back({{"i", snap.step_index},
                         {"ego", json::array({snap.ego_pos.x, snap.ego_pos.y, snap.ego_pos.z})},
                         {"agents", std::move(agents)}});
    }
    json collisions = json::array();
    for (const CollisionEvent& event : trace.collisions) {
        collisions.push_back({{"i", event.step_index}, {"agent", event.agent_id}});
    }
    return json{{"steps", std::move(steps)}, {"collisions", std::move(collisions)}}.dump();
}

SimulationTrace trace_from_json(const std::string& json_text)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw TraceError(std::string("trace is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("steps") || !doc["steps"].is_array()) {
        throw TraceError("trace.steps: missing or not an array");
    }

    SimulationTrace trace;
    for (const json& node : doc["steps"]) {
        Snapshot snap;
        if (!node.contains("i") || !node["i"].is_number_integer()) {
            throw TraceError("trace step: missing integer field \"i\"");
        }
        snap.step_index = node["i"].get<int>();
        const json& ego = node.contains("ego") ? node["ego"] : json();
        if (!ego.is_array() || ego.size() != 3 || !ego[0].is_number()) {
            throw TraceError("trace step " + std::to_string(snap.step_index) +
                             ": \"ego\" must be [x, y, z]");
        }
        snap.ego_pos = {ego[0].get<double>(), ego[1].get<double>(), ego[2].get<double>()};
        if (!node.contains("agents") || !node["agents"].is_array()) {
            throw TraceError("trace step " + std::to_string(snap.step_index) +
                             ": missing \"agents\" array");
        }
        for (const json& entry : node["agents"]) {
            if (!entry.is_array() || entry.size() != 4 || !entry[0].is_string()) {
                throw TraceError("trace step " + std::to_string(snap.step_index) +
                                 ": agent entries must be [id, x, y, z]");
            }
            snap.agent_positions.emplace_back(
                entry[0].get<std::string>(),
                Vec3{entry[1].get<double>(), entry[2].get<double>(), entry[3].get<double>()});
        }
        trace.steps.push_back(std::move(snap));
    }

    if (doc.contains("collisions")) {
        if (!doc["collisions"].is_array()) {
            throw TraceError("trace.collisions: not an array");
        }
        for (const json& node : doc["collisions"]) {
            if (!node.is_object() || !node.contains("i") || !node.contains("agent")) {
                throw TraceError("trace collision: expected {\"i\":..., \"agent\":...}");
            }
            CollisionEvent event;
            event.step_index = node["i"].get<int>();
            event.agent_id = node["agent"].get<std::string>();
            trace.collisions.push_back(std::move(event));
        }
    }

    validate_trace(trace);

    // The wire format omits the impact position; recover it from the snapshot.
    for (CollisionEvent& event : trace.collisions) {
        auto it = std::find_if(trace.steps.begin(), trace.steps.end(), [&](const Snapshot& s) {
            return s.step_index == event.step_index;
        });
        if (it != trace.steps.end()) {
            event.ego_pos = it->ego_pos;
        }
    }
    return trace;
}

} // namespace scengen
