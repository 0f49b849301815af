#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "scengen/scenario.hpp"

using namespace scengen;

namespace {

std::string minimal_doc()
{
    return R"({
      "map": "desk_strip",
      "ego": {"start": [0, 0, 0, 0], "destination": [50, 0, 0]},
      "agents": [
        {"kind": "pedestrian", "color": [0.4, 0.4, 0.4], "speed": 1.5,
         "waypoints": [[30, 0, -7], [30, 0, 7]]}
      ],
      "environment": {"time_of_day": 12.0, "rain": 0, "fog": 0, "wetness": 0,
                      "cloudiness": 0, "road_damage": 0},
      "duration_s": 10.0
    })";
}

ScenarioTemplate two_agent_template()
{
    ScenarioTemplate tmpl;
    tmpl.map_name = "m";
    tmpl.ego_start = {0, 0, 0};
    tmpl.ego_destination = {50, 0, 0};
    for (int a = 0; a < 2; ++a) {
        AgentTemplate agent;
        agent.kind = a == 0 ? AgentKind::pedestrian : AgentKind::vehicle;
        agent.speed = 1.0 + a;
        agent.waypoints = {{10.0 + a, 0, -5}, {10.0 + a, 0, 0}, {10.0 + a, 0, 5}};
        tmpl.agents.push_back(agent);
    }
    return tmpl;
}

} // namespace

TEST(ParseTemplate, MinimalDocument)
{
    const ScenarioTemplate tmpl = parse_template(minimal_doc());
    EXPECT_EQ(tmpl.map_name, "desk_strip");
    EXPECT_EQ(tmpl.ego_destination, (Vec3{50, 0, 0}));
    ASSERT_EQ(tmpl.agents.size(), 1u);
    EXPECT_EQ(tmpl.agents[0].kind, AgentKind::pedestrian);
    EXPECT_EQ(tmpl.agents[0].waypoints.size(), 2u);
    EXPECT_DOUBLE_EQ(tmpl.duration_s, 10.0);
}

TEST(ParseTemplate, NegativeSpeedIsRejectedWithPath)
{
    std::string doc = minimal_doc();
    doc.replace(doc.find("\"speed\": 1.5"), 12, "\"speed\": -1");
    try {
        parse_template(doc);
        FAIL() << "expected ScenarioError";
    } catch (const ScenarioError& e) {
        EXPECT_NE(std::string(e.what()).find("agents[0].speed"), std::string::npos) << e.what();
    }
}

TEST(ParseTemplate, EmptyWaypointListIsRejected)
{
    std::string doc = minimal_doc();
    doc.replace(doc.find("[[30, 0, -7], [30, 0, 7]]"), 25, "[]");
    EXPECT_THROW(parse_template(doc), ScenarioError);
}

TEST(ParseTemplate, MissingFieldNamesThePath)
{
    try {
        parse_template(R"({"ego": {}})");
        FAIL() << "expected ScenarioError";
    } catch (const ScenarioError& e) {
        EXPECT_NE(std::string(e.what()).find("map"), std::string::npos);
    }
}

TEST(ParseTemplate, DestinationMustDifferFromStart)
{
    std::string doc = minimal_doc();
    doc.replace(doc.find("\"destination\": [50, 0, 0]"), 25, "\"destination\": [0, 0, 0]");
    EXPECT_THROW(parse_template(doc), ScenarioError);
}

TEST(ParseTemplate, OutOfRangeColorIsRejected)
{
    std::string doc = minimal_doc();
    doc.replace(doc.find("[0.4, 0.4, 0.4]"), 15, "[0.4, 1.4, 0.4]");
    EXPECT_THROW(parse_template(doc), ScenarioError);
}

TEST(ParseTemplate, EnvironmentIsNormalized)
{
    std::string doc = minimal_doc();
    doc.replace(doc.find("\"time_of_day\": 12.0"), 19, "\"time_of_day\": 25.5");
    doc.replace(doc.find("\"rain\": 0"), 9, "\"rain\": 1.7");
    const ScenarioTemplate tmpl = parse_template(doc);
    EXPECT_DOUBLE_EQ(tmpl.environment.time_of_day, 1.5);
    EXPECT_DOUBLE_EQ(tmpl.environment.rain, 1.0);
}

TEST(ParameterSpace, TwoAgentsThreeWaypointsYieldTwelveCoordinateSpecs)
{
    const ParameterSpace space = build_parameter_space(two_agent_template(), NoiseConfig{});
    int coord_specs = 0;
    for (const ParameterSpec& spec : space.specs) {
        if (spec.id.find(".waypoint") != std::string::npos) {
            ++coord_specs;
        }
    }
    EXPECT_EQ(coord_specs, 12);
}

TEST(ParameterSpace, WalkOrderIsTheDocumentedContract)
{
    ScenarioTemplate tmpl = two_agent_template();
    tmpl.agents.resize(1);
    const ParameterSpace space = build_parameter_space(tmpl, NoiseConfig{});
    // 1 agent, 3 waypoints: 3*2 + 3 + 1 + 5 + 1 = 16
    ASSERT_EQ(space.dimension(), 16u);
    const std::vector<std::string> expected = {
        "agent0.waypoint0.x", "agent0.waypoint0.z", "agent0.waypoint1.x", "agent0.waypoint1.z",
        "agent0.waypoint2.x", "agent0.waypoint2.z", "agent0.color.r",     "agent0.color.g",
        "agent0.color.b",     "agent0.speed",       "env.rain",           "env.fog",
        "env.wetness",        "env.cloudiness",     "env.road_damage",    "env.time_of_day"};
    for (std::size_t i = 0; i < expected.size(); ++i) {
        EXPECT_EQ(space.specs[i].id, expected[i]) << "index " << i;
    }
}

TEST(ParameterSpace, ZeroRangesOmitFamilies)
{
    NoiseConfig cfg;
    cfg.pos_noise_range_xz = 0.0;
    cfg.color_noise_range_rgb = 0.0;
    cfg.speed_max_noise = 0.0;
    ParameterSpace space = build_parameter_space(two_agent_template(), cfg);
    EXPECT_EQ(space.dimension(), 6u); // 5 weather + time

    cfg.weather_noise_range = 0.0;
    cfg.time_max_noise = 0.0;
    space = build_parameter_space(two_agent_template(), cfg);
    EXPECT_EQ(space.dimension(), 0u);
}

TEST(ParameterSpace, DeterministicAcrossCalls)
{
    const ParameterSpace a = build_parameter_space(two_agent_template(), NoiseConfig{});
    const ParameterSpace b = build_parameter_space(two_agent_template(), NoiseConfig{});
    ASSERT_EQ(a.dimension(), b.dimension());
    for (std::size_t i = 0; i < a.dimension(); ++i) {
        EXPECT_EQ(a.specs[i], b.specs[i]);
    }
}

TEST(ParameterSpace, TimeOfDayBoundsFromBaseAndRange)
{
    ScenarioTemplate tmpl = two_agent_template();
    tmpl.environment.time_of_day = 12.0;
    NoiseConfig cfg;
    cfg.time_max_noise = 5.0;
    const ParameterSpace space = build_parameter_space(tmpl, cfg);
    const ParameterSpec& spec = space.specs.back();
    ASSERT_EQ(spec.id, "env.time_of_day");
    EXPECT_DOUBLE_EQ(spec.r_min, 7.0);
    EXPECT_DOUBLE_EQ(spec.r_max, 17.0);
}

TEST(ParameterSpace, IntensityAndSpeedBoundsAreClamped)
{
    ScenarioTemplate tmpl = two_agent_template();
    tmpl.environment.wetness = 0.9;
    tmpl.agents[0].speed = 0.2;
    NoiseConfig cfg;
    cfg.weather_noise_range = 0.3;
    cfg.speed_max_noise = 1.0;
    const ParameterSpace space = build_parameter_space(tmpl, cfg);
    for (const ParameterSpec& spec : space.specs) {
        if (spec.id == "env.wetness") {
            EXPECT_DOUBLE_EQ(spec.r_min, 0.6);
            EXPECT_DOUBLE_EQ(spec.r_max, 1.0);
        }
        if (spec.id == "agent0.speed") {
            EXPECT_DOUBLE_EQ(spec.r_min, 0.0);
            EXPECT_DOUBLE_EQ(spec.r_max, 1.2);
        }
    }
}

TEST(Scale, ReproducesTheTimeOfDayWorkedExample)
{
    ParameterSpace space;
    space.specs.push_back({"env.time_of_day", 11.0, 5.0, 17.0, std::nullopt, std::nullopt});
    NoiseVector v{{0.5}};
    const auto values = scale(v, space);
    EXPECT_EQ(values.at("env.time_of_day"), 14.0); // exact
}

TEST(Scale, EndpointsAndMidpoint)
{
    ParameterSpace space;
    space.specs.push_back({"p", 4.0, 2.0, 6.0, std::nullopt, std::nullopt});
    EXPECT_DOUBLE_EQ(scale(NoiseVector{{-1.0}}, space).at("p"), 2.0);
    EXPECT_DOUBLE_EQ(scale(NoiseVector{{1.0}}, space).at("p"), 6.0);
    EXPECT_DOUBLE_EQ(scale(NoiseVector{{0.0}}, space).at("p"), 4.0);
}

TEST(Scale, QuarterPointExample)
{
    ParameterSpace space;
    space.specs.push_back({"p", 0.0, -2.0, 2.0, std::nullopt, std::nullopt});
    EXPECT_DOUBLE_EQ(scale(NoiseVector{{0.25}}, space).at("p"), 0.5);
}

TEST(Scale, RejectsDimensionMismatchAndOutOfRangeElements)
{
    ParameterSpace space;
    space.specs.push_back({"p", 0.0, -1.0, 1.0, std::nullopt, std::nullopt});
    EXPECT_THROW(scale(NoiseVector{{0.0, 0.0}}, space), ScenarioError);
    EXPECT_THROW(scale(NoiseVector{{1.5}}, space), ScenarioError);
}

TEST(Scale, ExactnessOnRandomSpecs)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> bound(-100.0, 100.0);
    for (int i = 0; i < 1000; ++i) {
        double a = bound(rng);
        double b = bound(rng);
        if (a > b) {
            std::swap(a, b);
        }
        if (b - a < 1e-6) {
            b = a + 1.0;
        }
        ParameterSpace space;
        space.specs.push_back({"p", (a + b) / 2, a, b, std::nullopt, std::nullopt});
        EXPECT_NEAR(scale(NoiseVector{{-1.0}}, space).at("p"), a, 1e-12);
        EXPECT_NEAR(scale(NoiseVector{{1.0}}, space).at("p"), b, 1e-12);
        EXPECT_NEAR(scale(NoiseVector{{0.0}}, space).at("p"), (a + b) / 2, 1e-12);
    }
}

TEST(Scale, StrictlyIncreasingInNoise)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> bound(-10.0, 10.0);
    for (int i = 0; i < 100; ++i) {
        double a = bound(rng);
        double b = a + 0.5 + std::abs(bound(rng));
        ParameterSpace space;
        space.specs.push_back({"p", (a + b) / 2, a, b, std::nullopt, std::nullopt});
        double previous = -std::numeric_limits<double>::infinity();
        for (double n = -1.0; n <= 1.0; n += 0.125) {
            const double s = scale(NoiseVector{{n}}, space).at("p");
            EXPECT_GT(s, previous);
            previous = s;
        }
    }
}

TEST(Apply, BaseValuesReproduceTheTemplateExactly)
{
    const ScenarioTemplate tmpl = two_agent_template();
    const ParameterSpace space = build_parameter_space(tmpl, NoiseConfig{});
    std::map<std::string, double> values;
    for (const ParameterSpec& spec : space.specs) {
        values[spec.id] = spec.base_value;
    }
    const ConcreteScenario scenario = apply(tmpl, values, NoiseVector{});
    EXPECT_EQ(scenario.realized, tmpl);
}

TEST(Apply, WaypointEndpointShift)
{
    const ScenarioTemplate tmpl = two_agent_template();
    NoiseConfig cfg;
    const ParameterSpace space = build_parameter_space(tmpl, cfg);
    NoiseVector v;
    v.values.assign(space.dimension(), 0.0);
    ASSERT_EQ(space.specs[0].id, "agent0.waypoint0.x");
    v.values[0] = 1.0;
    const ConcreteScenario scenario = realize(tmpl, space, v);
    EXPECT_DOUBLE_EQ(scenario.realized.agents[0].waypoints[0].x,
                     tmpl.agents[0].waypoints[0].x + cfg.pos_noise_range_xz);
}

TEST(Apply, WetnessHardClamp)
{
    ScenarioTemplate tmpl = two_agent_template();
    tmpl.environment.wetness = 0.9;
    NoiseConfig cfg;
    cfg.weather_noise_range = 0.3;
    const ParameterSpace space = build_parameter_space(tmpl, cfg);
    NoiseVector v;
    v.values.assign(space.dimension(), 0.0);
    for (std::size_t i = 0; i < space.specs.size(); ++i) {
        if (space.specs[i].id == "env.wetness") {
            v.values[i] = 1.0;
        }
    }
    const ConcreteScenario scenario = realize(tmpl, space, v);
    EXPECT_DOUBLE_EQ(scenario.realized.environment.wetness, 1.0);
}

TEST(Apply, UnknownIdIsRejected)
{
    const ScenarioTemplate tmpl = two_agent_template();
    std::map<std::string, double> values{{"agent9.speed", 1.0}};
    EXPECT_THROW(apply(tmpl, values, NoiseVector{}), ScenarioError);
}

TEST(Apply, TimeOfDayWrapsModulo24)
{
    ScenarioTemplate tmpl = two_agent_template();
    tmpl.environment.time_of_day = 23.0;
    NoiseConfig cfg;
    cfg.time_max_noise = 4.0;
    const ParameterSpace space = build_parameter_space(tmpl, cfg);
    NoiseVector v;
    v.values.assign(space.dimension(), 0.0);
    v.values.back() = 1.0; // time is the last spec
    const ConcreteScenario scenario = realize(tmpl, space, v);
    EXPECT_DOUBLE_EQ(scenario.realized.environment.time_of_day, 3.0);
}

TEST(Serialize, SerializeParseSerializeIsByteIdentical)
{
    const ScenarioTemplate tmpl = parse_template(minimal_doc());
    const ParameterSpace space = build_parameter_space(tmpl, NoiseConfig{});
    NoiseVector v;
    v.values.assign(space.dimension(), 0.25);
    const ConcreteScenario scenario = realize(tmpl, space, v);
    const std::string first = serialize_scenario(scenario);

    const auto [reparsed, noise] = parse_scenario_document(first);
    ASSERT_TRUE(noise.has_value());
    ConcreteScenario round;
    round.realized = reparsed;
    round.provenance = *noise;
    EXPECT_EQ(serialize_scenario(round), first);
}

TEST(Serialize, EmbedsProvenanceVector)
{
    const ScenarioTemplate tmpl = parse_template(minimal_doc());
    ConcreteScenario scenario;
    scenario.realized = tmpl;
    scenario.provenance.values = {0.5, -0.5, 1.0};
    const std::string text = serialize_scenario(scenario);
    EXPECT_NE(text.find("noise_vector"), std::string::npos);
    const auto [_, noise] = parse_scenario_document(text);
    ASSERT_TRUE(noise.has_value());
    EXPECT_EQ(noise->values, scenario.provenance.values);
}

TEST(Serialize, BundledScenarioGoldenRoundTrip)
{
    std::ifstream in(SCENGEN_SCENARIO_FILE);
    ASSERT_TRUE(in) << "missing " << SCENGEN_SCENARIO_FILE;
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const ScenarioTemplate tmpl = parse_template(buffer.str());

    ConcreteScenario identity;
    identity.realized = tmpl;
    const ScenarioTemplate reparsed = parse_template(serialize_scenario(identity));
    EXPECT_EQ(reparsed, tmpl);
}

TEST(Properties, ClampSafetyOverRandomNoise)
{
    ScenarioTemplate tmpl = two_agent_template();
    tmpl.environment = EnvironmentState{12.0, 0.9, 0.1, 0.85, 0.5, 0.05};
    tmpl.agents[0].speed = 0.3; // near the speed floor
    const ParameterSpace space = build_parameter_space(tmpl, NoiseConfig{});

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 10000; ++trial) {
        NoiseVector v;
        v.values.reserve(space.dimension());
        for (std::size_t i = 0; i < space.dimension(); ++i) {
            v.values.push_back(unit(rng));
        }
        const ConcreteScenario scenario = realize(tmpl, space, v);
        const EnvironmentState& env = scenario.realized.environment;
        for (double intensity : {env.rain, env.fog, env.wetness, env.cloudiness, env.road_damage}) {
            ASSERT_GE(intensity, 0.0);
            ASSERT_LE(intensity, 1.0);
        }
        ASSERT_GE(env.time_of_day, 0.0);
        ASSERT_LT(env.time_of_day, 24.0);
        for (const AgentTemplate& agent : scenario.realized.agents) {
            ASSERT_GE(agent.speed, 0.0);
            for (double channel : agent.color) {
                ASSERT_GE(channel, 0.0);
                ASSERT_LE(channel, 1.0);
            }
        }
    }
}

TEST(LoadTemplateFile, MissingFileIsReported)
{
    EXPECT_THROW(load_template_file("/nonexistent/scenario.json"), ScenarioError);
}
