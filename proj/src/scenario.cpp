#include "scengen/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace scengen {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what)
{
    throw ScenarioError(path + ": " + what);
}

double require_number(const json& node, const std::string& path)
{
    if (!node.is_number()) {
        fail(path, "expected a number");
    }
    const double v = node.get<double>();
    if (!std::isfinite(v)) {
        fail(path, "expected a finite number");
    }
    return v;
}

const json& require_field(const json& obj, const char* key, const std::string& path)
{
    if (!obj.is_object() || !obj.contains(key)) {
        fail(path + "." + key, "missing required field");
    }
    return obj.at(key);
}

Vec3 parse_vec3(const json& node, const std::string& path)
{
    if (!node.is_array() || node.size() != 3) {
        fail(path, "expected an array of 3 numbers");
    }
    return {require_number(node[0], path + "[0]"), require_number(node[1], path + "[1]"),
            require_number(node[2], path + "[2]")};
}

json vec3_to_json(const Vec3& v)
{
    return json::array({v.x, v.y, v.z});
}

void validate_agent(const AgentTemplate& agent, const std::string& path)
{
    if (agent.speed < 0.0) {
        fail(path + ".speed", "must be >= 0");
    }
    for (int c = 0; c < 3; ++c) {
        if (agent.color[c] < 0.0 || agent.color[c] > 1.0) {
            fail(path + ".color[" + std::to_string(c) + "]", "channel must lie in [0,1]");
        }
    }
    if (agent.waypoints.empty()) {
        fail(path + ".waypoints", "agent needs at least one waypoint");
    }
}

void validate_template(const ScenarioTemplate& tmpl)
{
    if (tmpl.ego_start == tmpl.ego_destination) {
        fail("ego.destination", "must differ from ego.start");
    }
    if (!(tmpl.duration_s > 0.0)) {
        fail("duration_s", "must be > 0");
    }
    for (std::size_t i = 0; i < tmpl.agents.size(); ++i) {
        validate_agent(tmpl.agents[i], "agents[" + std::to_string(i) + "]");
    }
}

double clamp01(double v)
{
    return std::clamp(v, 0.0, 1.0);
}

// Single definition of the genotype layout: the same walk builds the
// parameter space and applies scaled values back onto a template.
struct ParameterSlot {
    std::string id;
    double base = 0.0;
    double range = 0.0;
    std::optional<double> hard_min;
    std::optional<double> hard_max;
    double* target = nullptr; ///< field of the realized template, when applying
    bool wrap_time = false;
};

std::vector<ParameterSlot> walk_parameters(ScenarioTemplate& tmpl, const NoiseConfig& cfg)
{
    std::vector<ParameterSlot> slots;
    for (std::size_t a = 0; a < tmpl.agents.size(); ++a) {
        AgentTemplate& agent = tmpl.agents[a];
        const std::string prefix = "agent" + std::to_string(a);
        if (cfg.pos_noise_range_xz > 0.0) {
            for (std::size_t w = 0; w < agent.waypoints.size(); ++w) {
                const std::string wp = prefix + ".waypoint" + std::to_string(w);
                slots.push_back({wp + ".x", agent.waypoints[w].x, cfg.pos_noise_range_xz,
                                 std::nullopt, std::nullopt, &agent.waypoints[w].x, false});
                slots.push_back({wp + ".z", agent.waypoints[w].z, cfg.pos_noise_range_xz,
                                 std::nullopt, std::nullopt, &agent.waypoints[w].z, false});
            }
        }
        if (cfg.color_noise_range_rgb > 0.0) {
            static constexpr const char* channels[3] = {"r", "g", "b"};
            for (int c = 0; c < 3; ++c) {
                slots.push_back({prefix + ".color." + channels[c], agent.color[c],
                                 cfg.color_noise_range_rgb, 0.0, 1.0, &agent.color[c], false});
            }
        }
        if (cfg.speed_max_noise > 0.0) {
            slots.push_back({prefix + ".speed", agent.speed, cfg.speed_max_noise, 0.0,
                             std::nullopt, &agent.speed, false});
        }
    }
    if (cfg.weather_noise_range > 0.0) {
        EnvironmentState& env = tmpl.environment;
        slots.push_back({"env.rain", env.rain, cfg.weather_noise_range, 0.0, 1.0, &env.rain, false});
        slots.push_back({"env.fog", env.fog, cfg.weather_noise_range, 0.0, 1.0, &env.fog, false});
        slots.push_back({"env.wetness", env.wetness, cfg.weather_noise_range, 0.0, 1.0,
                         &env.wetness, false});
        slots.push_back({"env.cloudiness", env.cloudiness, cfg.weather_noise_range, 0.0, 1.0,
                         &env.cloudiness, false});
        slots.push_back({"env.road_damage", env.road_damage, cfg.weather_noise_range, 0.0, 1.0,
                         &env.road_damage, false});
    }
    if (cfg.time_max_noise > 0.0) {
        slots.push_back({"env.time_of_day", tmpl.environment.time_of_day, cfg.time_max_noise,
                         std::nullopt, std::nullopt, &tmpl.environment.time_of_day, true});
    }
    return slots;
}

ParameterSpec spec_from_slot(const ParameterSlot& slot)
{
    ParameterSpec spec;
    spec.id = slot.id;
    spec.base_value = slot.base;
    spec.r_min = slot.base - slot.range;
    spec.r_max = slot.base + slot.range;
    spec.hard_min = slot.hard_min;
    spec.hard_max = slot.hard_max;
    if (spec.hard_min && spec.r_min < *spec.hard_min) {
        spec.r_min = *spec.hard_min;
    }
    if (spec.hard_max && spec.r_max > *spec.hard_max) {
        spec.r_max = *spec.hard_max;
    }
    return spec;
}

} // namespace

std::string to_string(AgentKind kind)
{
    return kind == AgentKind::pedestrian ? "pedestrian" : "vehicle";
}

AgentKind agent_kind_from_string(const std::string& s)
{
    if (s == "pedestrian") {
        return AgentKind::pedestrian;
    }
    if (s == "vehicle") {
        return AgentKind::vehicle;
    }
    throw ScenarioError("agents[].kind: unknown kind \"" + s + "\"");
}

double wrap_time_of_day(double hours)
{
    double t = std::fmod(hours, 24.0);
    if (t < 0.0) {
        t += 24.0;
    }
    return t;
}

EnvironmentState EnvironmentState::normalized(const EnvironmentState& raw)
{
    EnvironmentState env;
    env.time_of_day = wrap_time_of_day(raw.time_of_day);
    env.rain = clamp01(raw.rain);
    env.fog = clamp01(raw.fog);
    env.wetness = clamp01(raw.wetness);
    env.cloudiness = clamp01(raw.cloudiness);
    env.road_damage = clamp01(raw.road_damage);
    return env;
}

std::pair<ScenarioTemplate, std::optional<NoiseVector>> parse_scenario_document(const std::string& json_text)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(std::string("document: not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        fail("document", "top level must be an object");
    }

    ScenarioTemplate tmpl;
    const json& map = require_field(doc, "map", "document");
    if (!map.is_string()) {
        fail("map", "expected a string");
    }
    tmpl.map_name = map.get<std::string>();

    const json& ego = require_field(doc, "ego", "document");
    const json& start = require_field(ego, "start", "ego");
    if (!start.is_array() || start.size() != 4) {
        fail("ego.start", "expected [x, y, z, heading]");
    }
    tmpl.ego_start = {require_number(start[0], "ego.start[0]"), require_number(start[1], "ego.start[1]"),
                      require_number(start[2], "ego.start[2]")};
    tmpl.ego_heading = require_number(start[3], "ego.start[3]");
    tmpl.ego_destination = parse_vec3(require_field(ego, "destination", "ego"), "ego.destination");

    const json& agents = require_field(doc, "agents", "document");
    if (!agents.is_array()) {
        fail("agents", "expected an array");
    }
    for (std::size_t i = 0; i < agents.size(); ++i) {
        const std::string path = "agents[" + std::to_string(i) + "]";
        const json& node = agents[i];
        AgentTemplate agent;
        const json& kind = require_field(node, "kind", path);
        if (!kind.is_string()) {
            fail(path + ".kind", "expected a string");
        }
        agent.kind = agent_kind_from_string(kind.get<std::string>());
        const json& color = require_field(node, "color", path);
        if (!color.is_array() || color.size() != 3) {
            fail(path + ".color", "expected [r, g, b]");
        }
        for (int c = 0; c < 3; ++c) {
            agent.color[c] = require_number(color[c], path + ".color[" + std::to_string(c) + "]");
        }
        agent.speed = require_number(require_field(node, "speed", path), path + ".speed");
        const json& waypoints = require_field(node, "waypoints", path);
        if (!waypoints.is_array()) {
            fail(path + ".waypoints", "expected an array");
        }
        for (std::size_t w = 0; w < waypoints.size(); ++w) {
            agent.waypoints.push_back(
                parse_vec3(waypoints[w], path + ".waypoints[" + std::to_string(w) + "]"));
        }
        tmpl.agents.push_back(std::move(agent));
    }

    const json& env = require_field(doc, "environment", "document");
    EnvironmentState raw;
    raw.time_of_day = require_number(require_field(env, "time_of_day", "environment"), "environment.time_of_day");
    raw.rain = require_number(require_field(env, "rain", "environment"), "environment.rain");
    raw.fog = require_number(require_field(env, "fog", "environment"), "environment.fog");
    raw.wetness = require_number(require_field(env, "wetness", "environment"), "environment.wetness");
    raw.cloudiness = require_number(require_field(env, "cloudiness", "environment"), "environment.cloudiness");
    raw.road_damage = require_number(require_field(env, "road_damage", "environment"), "environment.road_damage");
    tmpl.environment = EnvironmentState::normalized(raw);

    tmpl.duration_s = require_number(require_field(doc, "duration_s", "document"), "duration_s");

    validate_template(tmpl);

    std::optional<NoiseVector> noise;
    if (doc.contains("noise_vector")) {
        const json& nv = doc.at("noise_vector");
        if (!nv.is_array()) {
            fail("noise_vector", "expected an array");
        }
        NoiseVector v;
        for (std::size_t i = 0; i < nv.size(); ++i) {
            v.values.push_back(require_number(nv[i], "noise_vector[" + std::to_string(i) + "]"));
        }
        noise = std::move(v);
    }
    return {std::move(tmpl), std::move(noise)};
}

ScenarioTemplate parse_template(const std::string& json_text)
{
    return parse_scenario_document(json_text).first;
}

ScenarioTemplate load_template_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError("cannot open scenario file: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_template(buffer.str());
}

ParameterSpace build_parameter_space(const ScenarioTemplate& tmpl, const NoiseConfig& cfg)
{
    ScenarioTemplate copy = tmpl;
    ParameterSpace space;
    for (const ParameterSlot& slot : walk_parameters(copy, cfg)) {
        space.specs.push_back(spec_from_slot(slot));
    }
    return space;
}

std::map<std::string, double> scale(const NoiseVector& v, const ParameterSpace& space)
{
    if (v.size() != space.dimension()) {
        throw ScenarioError("noise vector has dimension " + std::to_string(v.size()) +
                            ", parameter space expects " + std::to_string(space.dimension()));
    }
    std::map<std::string, double> values;
    for (std::size_t i = 0; i < space.specs.size(); ++i) {
        const double n = v.values[i];
        if (!(n >= -1.0 && n <= 1.0)) {
            throw ScenarioError("noise_vector[" + std::to_string(i) + "]: value " +
                                std::to_string(n) + " outside [-1, 1]");
        }
        const ParameterSpec& spec = space.specs[i];
        double s = (n + 1.0) * (spec.r_max - spec.r_min) / 2.0 + spec.r_min;
        if (spec.hard_min && s < *spec.hard_min) {
            s = *spec.hard_min;
        }
        if (spec.hard_max && s > *spec.hard_max) {
            s = *spec.hard_max;
        }
        values.emplace(spec.id, s);
    }
    return values;
}

ConcreteScenario apply(const ScenarioTemplate& tmpl, const std::map<std::string, double>& values,
                       const NoiseVector& provenance)
{
    ConcreteScenario out;
    out.realized = tmpl;
    out.provenance = provenance;

    // Rebuild the slot list against the copy so targets point into it.
    NoiseConfig all_families; // defaults are all > 0, so every family gets a slot
    std::vector<ParameterSlot> slots = walk_parameters(out.realized, all_families);

    std::size_t used = 0;
    for (ParameterSlot& slot : slots) {
        auto it = values.find(slot.id);
        if (it == values.end()) {
            continue;
        }
        double v = it->second;
        if (slot.wrap_time) {
            v = wrap_time_of_day(v);
        }
        if (slot.hard_min && v < *slot.hard_min) {
            v = *slot.hard_min;
        }
        if (slot.hard_max && v > *slot.hard_max) {
            v = *slot.hard_max;
        }
        *slot.target = v;
        out.applied_values.emplace(slot.id, v);
        ++used;
    }
    if (used != values.size()) {
        for (const auto& [id, value] : values) {
            (void)value;
            if (out.applied_values.find(id) == out.applied_values.end()) {
                throw ScenarioError("unknown parameter id \"" + id + "\"");
            }
        }
    }
    return out;
}

ConcreteScenario realize(const ScenarioTemplate& tmpl, const ParameterSpace& space, const NoiseVector& v)
{
    return apply(tmpl, scale(v, space), v);
}

std::string serialize_scenario(const ConcreteScenario& s)
{
    const ScenarioTemplate& tmpl = s.realized;
    json doc;
    doc["map"] = tmpl.map_name;
    doc["ego"] = {{"start", json::array({tmpl.ego_start.x, tmpl.ego_start.y, tmpl.ego_start.z,
                                         tmpl.ego_heading})},
                  {"destination", vec3_to_json(tmpl.ego_destination)}};
    json agents = json::array();
    for (const AgentTemplate& agent : tmpl.agents) {
        json waypoints = json::array();
        for (const Vec3& wp : agent.waypoints) {
            waypoints.push_back(vec3_to_json(wp));
        }
        agents.push_back({{"kind", to_string(agent.kind)},
                          {"color", json::array({agent.color[0], agent.color[1], agent.color[2]})},
                          {"speed", agent.speed},
                          {"waypoints", std::move(waypoints)}});
    }
    doc["agents"] = std::move(agents);
    doc["environment"] = {{"time_of_day", tmpl.environment.time_of_day},
                          {"rain", tmpl.environment.rain},
                          {"fog", tmpl.environment.fog},
                          {"wetness", tmpl.environment.wetness},
                          {"cloudiness", tmpl.environment.cloudiness},
                          {"road_damage", tmpl.environment.road_damage}};
    doc["duration_s"] = tmpl.duration_s;
    if (!s.provenance.values.empty()) {
        doc["noise_vector"] = s.provenance.values;
    }
    return doc.dump();
}

} // namespace scengen
