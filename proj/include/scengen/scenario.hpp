#ifndef SCENGEN_SCENARIO_HPP
#define SCENGEN_SCENARIO_HPP

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scengen/geometry.hpp"

namespace scengen {

/// Raised on scenario parsing/validation problems; the message names the
/// offending document path (e.g. "agents[0].speed").
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class AgentKind { pedestrian, vehicle };

std::string to_string(AgentKind kind);
AgentKind agent_kind_from_string(const std::string& s);

struct AgentTemplate {
    AgentKind kind = AgentKind::pedestrian;
    std::array<double, 3> color{0.5, 0.5, 0.5}; ///< RGB, each channel in [0,1]
    double speed = 0.0;                         ///< m/s, >= 0
    std::vector<Vec3> waypoints;                ///< ordered path, at least one

    friend bool operator==(const AgentTemplate&, const AgentTemplate&) = default;
};

/// Weather/time state. Intensities are clamped to [0,1] and time_of_day
/// wraps modulo 24 when constructed through normalized().
struct EnvironmentState {
    double time_of_day = 12.0; ///< hours in [0, 24)
    double rain = 0.0;
    double fog = 0.0;
    double wetness = 0.0;
    double cloudiness = 0.0;
    double road_damage = 0.0;

    static EnvironmentState normalized(const EnvironmentState& raw);

    friend bool operator==(const EnvironmentState&, const EnvironmentState&) = default;
};

/// Wrap an hour value into [0, 24).
double wrap_time_of_day(double hours);

struct ScenarioTemplate {
    std::string map_name;
    Vec3 ego_start;
    double ego_heading = 0.0; ///< radians, ground-plane direction of travel
    Vec3 ego_destination;
    std::vector<AgentTemplate> agents;
    EnvironmentState environment;
    double duration_s = 10.0;

    friend bool operator==(const ScenarioTemplate&, const ScenarioTemplate&) = default;
};

/// One perturbable scenario parameter with its concrete value range.
struct ParameterSpec {
    std::string id;           ///< stable key, e.g. "agent0.waypoint2.x"
    double base_value = 0.0;  ///< value in the base scenario
    double r_min = 0.0;       ///< lower bound of the concrete value
    double r_max = 0.0;       ///< upper bound of the concrete value
    std::optional<double> hard_min; ///< physical clamp, if any
    std::optional<double> hard_max;

    friend bool operator==(const ParameterSpec&, const ParameterSpec&) = default;
};

/// Ordered, deterministic list of perturbable parameters; index i in a
/// noise vector always addresses specs[i].
struct ParameterSpace {
    std::vector<ParameterSpec> specs;

    std::size_t dimension() const { return specs.size(); }
};

/// The genotype: length-m vector with every element in [-1, +1].
struct NoiseVector {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }

    friend bool operator==(const NoiseVector&, const NoiseVector&) = default;
};

/// Maximum |change| allowed per parameter family. A zero range excludes
/// that family from the search space.
struct NoiseConfig {
    double pos_noise_range_xz = 2.0;
    double color_noise_range_rgb = 0.25;
    double weather_noise_range = 0.55;
    double time_max_noise = 7.0;
    double speed_max_noise = 0.7;
};

/// A realized test scenario: the template with noise-scaled values applied.
struct ConcreteScenario {
    ScenarioTemplate realized;                  ///< template with values applied
    std::map<std::string, double> applied_values;
    NoiseVector provenance;                     ///< the noise vector that produced it
};

/// Parse and validate a scenario document (schema documented in README).
ScenarioTemplate parse_template(const std::string& json_text);

/// parse_template() plus the optional embedded noise vector, when present.
std::pair<ScenarioTemplate, std::optional<NoiseVector>> parse_scenario_document(const std::string& json_text);

ScenarioTemplate load_template_file(const std::filesystem::path& path);

/// Walk the template in declaration order and emit one spec per perturbable
/// parameter: per agent (waypoint x/z pairs, then color r/g/b, then speed),
/// then the five weather intensities, then time of day. Families whose
/// configured range is zero are omitted.
ParameterSpace build_parameter_space(const ScenarioTemplate& tmpl, const NoiseConfig& cfg);

/// Linear scaling from genotype to concrete values:
/// S_i = (N_i + 1) * (r_max - r_min) / 2 + r_min, clamped to the spec's
/// hard bounds where present.
std::map<std::string, double> scale(const NoiseVector& v, const ParameterSpace& space);

/// Produce the concrete scenario for the given values. `values` must cover
/// exactly the ids that build_parameter_space() emits for this template.
ConcreteScenario apply(const ScenarioTemplate& tmpl, const std::map<std::string, double>& values,
                       const NoiseVector& provenance);

/// scale() + apply() in one step.
ConcreteScenario realize(const ScenarioTemplate& tmpl, const ParameterSpace& space, const NoiseVector& v);

/// Serialize to the scenario JSON schema with the provenance vector
/// embedded; parse_template(serialize_scenario(s)) reproduces all fields
/// bit-exactly for finite doubles.
std::string serialize_scenario(const ConcreteScenario& s);

} // namespace scengen

#endif
