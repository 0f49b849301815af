#include <gtest/gtest.h>

#include <cmath>

#include "scengen/objective.hpp"
#include "scengen/sim_builtin.hpp"

using namespace scengen;

namespace {

ScenarioTemplate crossing_template(double ped_x, double z0, double speed)
{
    ScenarioTemplate tmpl;
    tmpl.map_name = "m";
    tmpl.ego_start = {0, 0, 0};
    tmpl.ego_heading = 0.0;
    tmpl.ego_destination = {120, 0, 0};
    AgentTemplate ped;
    ped.kind = AgentKind::pedestrian;
    ped.speed = speed;
    ped.waypoints = {{ped_x, 0, -z0}, {ped_x, 0, z0}};
    tmpl.agents.push_back(ped);
    tmpl.environment = EnvironmentState{12.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    tmpl.duration_s = 10.0;
    return tmpl;
}

ConcreteScenario concrete(const ScenarioTemplate& tmpl)
{
    ConcreteScenario scenario;
    scenario.realized = tmpl;
    return scenario;
}

WorldState world_with_pedestrian(Vec3 ped_pos, Vec3 ped_velocity, const EnvironmentState& env)
{
    WorldState state;
    state.ego_pos = {0, 0, 0};
    state.ego_speed = 10.0;
    state.ego_forward = {1, 0, 0};
    state.ego_destination = {120, 0, 0};
    state.env = env;
    AgentState agent;
    agent.id = "ped0";
    agent.kind = AgentKind::pedestrian;
    agent.pos = ped_pos;
    agent.velocity = ped_velocity;
    state.agents.push_back(agent);
    return state;
}

} // namespace

TEST(Darkness, PiecewiseShape)
{
    EXPECT_DOUBLE_EQ(darkness(12.0), 0.0);
    EXPECT_DOUBLE_EQ(darkness(7.0), 0.0);
    EXPECT_DOUBLE_EQ(darkness(17.0), 0.0);
    EXPECT_DOUBLE_EQ(darkness(19.5), 0.5);
    EXPECT_DOUBLE_EQ(darkness(22.0), 1.0);
    EXPECT_DOUBLE_EQ(darkness(0.0), 1.0);
    EXPECT_DOUBLE_EQ(darkness(2.0), 1.0);
    EXPECT_DOUBLE_EQ(darkness(4.5), 0.5);
    EXPECT_DOUBLE_EQ(darkness(26.0), 1.0); // wraps to 02:00
}

TEST(EffectiveRange, DegradesWithWeatherAndNight)
{
    const SimConfig cfg;
    EnvironmentState env;
    EXPECT_DOUBLE_EQ(effective_detection_range(cfg, env), 30.0);
    env.rain = 1.0;
    env.fog = 1.0; // clamp(rain+fog) = 1
    EXPECT_DOUBLE_EQ(effective_detection_range(cfg, env), 12.0);
    env.time_of_day = 22.0;
    EXPECT_DOUBLE_EQ(effective_detection_range(cfg, env), 8.4);
}

TEST(EffectiveDeceleration, DegradesWithWetness)
{
    const SimConfig cfg;
    EnvironmentState env;
    EXPECT_DOUBLE_EQ(effective_deceleration(cfg, env), 6.0);
    env.wetness = 1.0;
    EXPECT_DOUBLE_EQ(effective_deceleration(cfg, env), 3.6);
    // monotone: more wetness never brakes harder
    double previous = 7.0;
    for (double w = 0.0; w <= 1.0; w += 0.05) {
        env.wetness = w;
        const double decel = effective_deceleration(cfg, env);
        EXPECT_LE(decel, previous);
        previous = decel;
    }
}

TEST(PedestrianStep, ZeroSpeedStaysPut)
{
    AgentState agent;
    agent.speed = 0.0;
    agent.pos = {0, 0, 0};
    agent.waypoints = {{0, 0, 0}, {5, 0, 0}};
    agent.waypoint_index = 1;
    pedestrian_step(agent, 0.1);
    EXPECT_EQ(agent.pos, (Vec3{0, 0, 0}));
}

TEST(PedestrianStep, MovesSpeedTimesDtAlongTheSegment)
{
    AgentState agent;
    agent.speed = 1.5;
    agent.pos = {0, 0, 0};
    agent.waypoints = {{0, 0, 0}, {1, 0, 0}};
    agent.waypoint_index = 1;
    pedestrian_step(agent, 0.1);
    EXPECT_NEAR(agent.pos.x, 0.15, 1e-12);
    EXPECT_NEAR(agent.velocity.x, 1.5, 1e-12);
}

TEST(PedestrianStep, SnapsToWaypointWithinOneStep)
{
    AgentState agent;
    agent.speed = 2.0;
    agent.pos = {0.9, 0, 0};
    agent.waypoints = {{0, 0, 0}, {1, 0, 0}, {1, 0, 5}};
    agent.waypoint_index = 1;
    pedestrian_step(agent, 0.1); // 0.2 step vs 0.1 remaining
    EXPECT_EQ(agent.pos, (Vec3{1, 0, 0}));
    EXPECT_EQ(agent.waypoint_index, 2u);
}

TEST(PedestrianStep, StandsStillAfterTheLastWaypoint)
{
    AgentState agent;
    agent.speed = 3.0;
    agent.pos = {1, 0, 5};
    agent.waypoints = {{0, 0, 0}, {1, 0, 5}};
    agent.waypoint_index = 2;
    for (int i = 0; i < 5; ++i) {
        pedestrian_step(agent, 0.1);
        EXPECT_EQ(agent.pos, (Vec3{1, 0, 5}));
        EXPECT_EQ(agent.velocity, (Vec3{}));
    }
}

TEST(EgoPolicy, CruisesWhenNothingConflicts)
{
    const SimConfig cfg;
    WorldState state = world_with_pedestrian({30, 0, 10}, {}, EnvironmentState{});
    EXPECT_DOUBLE_EQ(ego_policy_step(state, cfg), 0.0); // at cruise already
    state.ego_speed = 5.0;
    EXPECT_DOUBLE_EQ(ego_policy_step(state, cfg), cfg.max_decel); // accelerating back
}

TEST(EgoPolicy, BrakesForPedestrianDeadAhead)
{
    const SimConfig cfg;
    const WorldState state = world_with_pedestrian({5, 0, 0}, {}, EnvironmentState{});
    EXPECT_DOUBLE_EQ(ego_policy_step(state, cfg), -6.0);
}

TEST(EgoPolicy, BrakesForPedestrianOnCollisionCourse)
{
    const SimConfig cfg;
    // 6 m right of the path, walking toward it; ego reaches the line in 2 s.
    const WorldState state = world_with_pedestrian({20, 0, -6}, {0, 0, 3.0}, EnvironmentState{});
    EXPECT_DOUBLE_EQ(ego_policy_step(state, cfg), -6.0);
}

TEST(EgoPolicy, IgnoresPedestrianCrossingBehind)
{
    const SimConfig cfg;
    const WorldState state = world_with_pedestrian({-5, 0, -1}, {0, 0, 1.5}, EnvironmentState{});
    EXPECT_DOUBLE_EQ(ego_policy_step(state, cfg), 0.0);
}

TEST(EgoPolicy, DegradedVisibilityDelaysBraking)
{
    const SimConfig cfg;
    EnvironmentState clear;
    EnvironmentState storm;
    storm.rain = 1.0;
    storm.fog = 1.0; // effective range 12 m
    const WorldState near = world_with_pedestrian({15, 0, 0}, {}, clear);
    EXPECT_LT(ego_policy_step(near, cfg), 0.0);
    const WorldState hidden = world_with_pedestrian({15, 0, 0}, {}, storm);
    EXPECT_DOUBLE_EQ(ego_policy_step(hidden, cfg), 0.0);
    const WorldState visible = world_with_pedestrian({11, 0, 0}, {}, storm);
    EXPECT_LT(ego_policy_step(visible, cfg), 0.0);
}

TEST(EgoPolicy, WetnessWeakensTheBrakeCommand)
{
    const SimConfig cfg;
    EnvironmentState wet;
    wet.wetness = 1.0;
    const WorldState state = world_with_pedestrian({5, 0, 0}, {}, wet);
    EXPECT_DOUBLE_EQ(ego_policy_step(state, cfg), -3.6);
}

TEST(DetectCollisions, ThresholdAtSummedRadii)
{
    const SimConfig cfg; // threshold 1.3
    WorldState state = world_with_pedestrian({1.31, 0, 0}, {}, EnvironmentState{});
    state.step_index = 4;
    EXPECT_TRUE(detect_collisions(state, cfg).empty());
    state.agents[0].pos = {1.29, 0, 0};
    const auto contacts = detect_collisions(state, cfg);
    ASSERT_EQ(contacts.size(), 1u);
    EXPECT_EQ(contacts[0].agent_id, "ped0");
    EXPECT_EQ(contacts[0].step_index, 4);
    state.agents[0].pos = state.ego_pos;
    EXPECT_EQ(detect_collisions(state, cfg).size(), 1u);
}

TEST(DetectCollisions, VehiclesDoNotCount)
{
    const SimConfig cfg;
    WorldState state = world_with_pedestrian({0.5, 0, 0}, {}, EnvironmentState{});
    state.agents[0].kind = AgentKind::vehicle;
    EXPECT_TRUE(detect_collisions(state, cfg).empty());
}

TEST(Simulate, FarPedestrianMeansCleanRun)
{
    ScenarioTemplate tmpl = crossing_template(30, 7, 1.5);
    tmpl.agents[0].waypoints = {{30, 0, 40}, {30, 0, 45}}; // nowhere near the corridor
    const SimulationTrace trace = simulate(concrete(tmpl), SimConfig{});
    EXPECT_TRUE(trace.collisions.empty());
    ASSERT_EQ(trace.steps.size(), 100u);
    // Constant cruise, 1 m per step: journey spans steps 1..100.
    EXPECT_NEAR(journey_distance(trace), 99.0, 1e-9);
}

TEST(Simulate, UndetectablePedestrianGetsHit)
{
    ScenarioTemplate tmpl = crossing_template(30, 7, 1.5);
    tmpl.agents[0].waypoints = {{1.5, 0, 0}}; // standing on the path, right ahead
    SimConfig cfg;
    cfg.detection_range = 0.0; // blind ego
    const SimulationTrace trace = simulate(concrete(tmpl), cfg);
    ASSERT_FALSE(trace.collisions.empty());
    EXPECT_LE(trace.collisions.front().step_index, 3);
}

TEST(Simulate, DeterministicTraces)
{
    const ScenarioTemplate tmpl = crossing_template(30, 7, 2.0);
    const SimulationTrace a = simulate(concrete(tmpl), SimConfig{});
    const SimulationTrace b = simulate(concrete(tmpl), SimConfig{});
    EXPECT_EQ(a, b);
}

TEST(Simulate, StepCountIsCeilDurationOverDt)
{
    ScenarioTemplate tmpl = crossing_template(30, 7, 1.0);
    tmpl.duration_s = 1.0;
    EXPECT_EQ(simulate(concrete(tmpl), SimConfig{}).steps.size(), 10u);
    tmpl.duration_s = 0.95;
    EXPECT_EQ(simulate(concrete(tmpl), SimConfig{}).steps.size(), 10u);
    tmpl.duration_s = 1.05;
    EXPECT_EQ(simulate(concrete(tmpl), SimConfig{}).steps.size(), 11u);
}

TEST(Simulate, DisplacementPerStepIsBounded)
{
    // Brake-and-recover scenario exercises the speed dynamics.
    ScenarioTemplate tmpl = crossing_template(30, 7, 1.5);
    const SimConfig cfg;
    const SimulationTrace trace = simulate(concrete(tmpl), cfg);
    Vec3 previous = tmpl.ego_start;
    for (const Snapshot& snap : trace.steps) {
        EXPECT_LE(dist_xz(previous, snap.ego_pos), cfg.cruise_speed * cfg.dt + 1e-9);
        previous = snap.ego_pos;
    }
}

TEST(Simulate, EgoStopsAtTheDestination)
{
    ScenarioTemplate tmpl = crossing_template(30, 7, 1.5);
    tmpl.agents[0].waypoints = {{30, 0, 40}};
    tmpl.ego_destination = {5, 0, 0};
    const SimulationTrace trace = simulate(concrete(tmpl), SimConfig{});
    for (const Snapshot& snap : trace.steps) {
        EXPECT_LE(snap.ego_pos.x, 5.0 + 1e-9);
    }
    EXPECT_EQ(trace.steps.back().ego_pos, (Vec3{5, 0, 0}));
}

TEST(Simulate, CollisionHaltsTheEgoButNotTheClock)
{
    ScenarioTemplate tmpl = crossing_template(30, 7, 1.5);
    tmpl.agents[0].waypoints = {{10, 0, 0}}; // stands on the path
    SimConfig cfg;
    cfg.detection_range = 0.0;
    const SimulationTrace trace = simulate(concrete(tmpl), cfg);
    ASSERT_FALSE(trace.collisions.empty());
    const int impact = trace.collisions.front().step_index;
    EXPECT_EQ(trace.steps.size(), 100u); // clock ran to the end
    const Vec3 halt_pos = trace.steps[static_cast<std::size_t>(impact) - 1].ego_pos;
    for (std::size_t s = static_cast<std::size_t>(impact); s < trace.steps.size(); ++s) {
        EXPECT_EQ(trace.steps[s].ego_pos, halt_pos);
    }
}

TEST(Simulate, CollisionEventsSatisfyTheContactPredicate)
{
    ScenarioTemplate tmpl = crossing_template(30, 7, 2.3);
    tmpl.environment = EnvironmentState{23.0, 0.9, 0.9, 0.9, 0.5, 0.1}; // rainy night
    const SimConfig cfg;
    const SimulationTrace trace = simulate(concrete(tmpl), cfg);
    ASSERT_FALSE(trace.collisions.empty()) << "expected the rainy-night scenario to collide";
    for (const CollisionEvent& event : trace.collisions) {
        const Snapshot& snap = trace.steps[static_cast<std::size_t>(event.step_index) - 1];
        bool contact = false;
        for (const auto& [id, pos] : snap.agent_positions) {
            if (id == event.agent_id &&
                dist_xz(snap.ego_pos, pos) < cfg.ego_radius + cfg.pedestrian_radius) {
                contact = true;
            }
        }
        EXPECT_TRUE(contact) << "event at step " << event.step_index;
    }
}

TEST(Simulate, SafetyBaselineHoldsAtClearNoon)
{
    // A crossing pedestrian at walking speed, starting well ahead, is never
    // hit under clear weather at noon with default constants.
    int cases = 0;
    for (double ped_x = 25.0; ped_x <= 60.0; ped_x += 1.0) {
        for (double speed = 0.2; speed <= 1.5001; speed += 0.1) {
            for (double z0 = 4.0; z0 <= 10.0; z0 += 1.0) {
                ScenarioTemplate tmpl = crossing_template(ped_x, z0, speed);
                tmpl.duration_s = 12.0;
                const SimulationTrace trace = simulate(concrete(tmpl), SimConfig{});
                ASSERT_TRUE(trace.collisions.empty())
                    << "collision at ped_x=" << ped_x << " speed=" << speed << " z0=" << z0;
                ++cases;
            }
        }
    }
    EXPECT_GT(cases, 2000);
}

TEST(Simulate, WorstCaseDegradationOverwhelmsTheBrakes)
{
    // Full weather + night + wetness with an unlucky crossing: the failure
    // structure the search is meant to find.
    ScenarioTemplate tmpl = crossing_template(30, 7, 2.33);
    tmpl.environment = EnvironmentState{0.0, 1.0, 1.0, 1.0, 0.5, 0.1};
    const SimulationTrace trace = simulate(concrete(tmpl), SimConfig{});
    EXPECT_FALSE(trace.collisions.empty());
}

TEST(Simulate, AgentsWithoutWaypointsAreRejected)
{
    ScenarioTemplate tmpl = crossing_template(30, 7, 1.5);
    tmpl.agents[0].waypoints.clear();
    EXPECT_THROW(simulate(concrete(tmpl), SimConfig{}), EvaluationError);
}

TEST(BuiltinSimulator, DeclaresConcurrentEvaluation)
{
    BuiltinSimulator sim;
    EXPECT_TRUE(sim.supports_concurrent_evaluation());
}
