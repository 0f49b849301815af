// Bridge-protocol test double. Reads one JSON request per line on stdin and
// answers on stdout. Modes:
//   builtin    run the request through the builtin simulator (default)
//   canned     reply a fixed valid 2-step trace derived from the scenario
//   hang       swallow requests and never reply
//   error      reply {"status":"error", ...}
//   malformed  reply a line that is not JSON
//   bad-ids    reply a trace whose snapshots disagree on agent ids
#include <chrono>
#include <iostream>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "scengen/scenario.hpp"
#include "scengen/sim_builtin.hpp"
#include "scengen/trace.hpp"

using nlohmann::json;

namespace {

scengen::SimConfig sim_config_from(const json& node)
{
    scengen::SimConfig cfg;
    if (!node.is_object()) {
        return cfg;
    }
    auto get = [&](const char* key, double fallback) {
        return node.contains(key) && node[key].is_number() ? node[key].get<double>() : fallback;
    };
    cfg.dt = get("dt", cfg.dt);
    cfg.cruise_speed = get("cruise_speed", cfg.cruise_speed);
    cfg.max_decel = get("max_decel", cfg.max_decel);
    cfg.detection_range = get("detection_range", cfg.detection_range);
    cfg.detection_fov_half_width = get("detection_fov_half_width", cfg.detection_fov_half_width);
    cfg.wetness_brake_penalty = get("wetness_brake_penalty", cfg.wetness_brake_penalty);
    cfg.weather_visibility_penalty =
        get("weather_visibility_penalty", cfg.weather_visibility_penalty);
    cfg.night_visibility_penalty = get("night_visibility_penalty", cfg.night_visibility_penalty);
    cfg.ego_radius = get("ego_radius", cfg.ego_radius);
    cfg.pedestrian_radius = get("pedestrian_radius", cfg.pedestrian_radius);
    return cfg;
}

json canned_trace(const scengen::ScenarioTemplate& tmpl, bool break_ids)
{
    json steps = json::array();
    for (int i = 1; i <= 2; ++i) {
        json agents = json::array();
        for (std::size_t a = 0; a < tmpl.agents.size(); ++a) {
            const auto& agent = tmpl.agents[a];
            std::string id = (agent.kind == scengen::AgentKind::pedestrian ? "ped" : "veh") +
                             std::to_string(a);
            if (break_ids && i == 2) {
                id += "_x";
            }
            const scengen::Vec3& wp = agent.waypoints.front();
            agents.push_back(json::array({id, wp.x, wp.y, wp.z}));
        }
        steps.push_back({{"i", i},
                         {"ego", json::array({tmpl.ego_start.x + i, tmpl.ego_start.y,
                                              tmpl.ego_start.z})},
                         {"agents", std::move(agents)}});
    }
    return json{{"steps", std::move(steps)}, {"collisions", json::array()}};
}

} // namespace

int main(int argc, char** argv)
{
    const std::string mode = argc > 1 ? argv[1] : "builtin";
    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.empty()) {
            continue;
        }
        if (mode == "hang") {
            std::this_thread::sleep_for(std::chrono::hours(24));
            continue;
        }
        if (mode == "malformed") {
            std::cout << "this is not json\n" << std::flush;
            continue;
        }
        if (mode == "error") {
            std::cout << json{{"status", "error"}, {"message", "injected failure"}}.dump() << "\n"
                      << std::flush;
            continue;
        }
        try {
            const json request = json::parse(line);
            const scengen::ScenarioTemplate tmpl =
                scengen::parse_template(request.at("scenario").dump());
            if (mode == "canned" || mode == "bad-ids") {
                std::cout << json{{"status", "ok"}, {"trace", canned_trace(tmpl, mode == "bad-ids")}}
                                 .dump()
                          << "\n"
                          << std::flush;
                continue;
            }
            const scengen::SimConfig cfg = sim_config_from(
                request.contains("sim_config") ? request["sim_config"] : json());
            scengen::ConcreteScenario scenario;
            scenario.realized = tmpl;
            const scengen::SimulationTrace trace = scengen::simulate(scenario, cfg);
            std::cout << json{{"status", "ok"},
                              {"trace", json::parse(scengen::trace_to_json(trace))}}
                             .dump()
                      << "\n"
                      << std::flush;
        } catch (const std::exception& e) {
            std::cout << json{{"status", "error"}, {"message", e.what()}}.dump() << "\n"
                      << std::flush;
        }
    }
    return 0;
}
