#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"

#include "scengen/analysis.hpp"
#include "scengen/evaluator.hpp"
#include "scengen/scenario.hpp"
#include "scengen/search.hpp"
#include "scengen/sim_bridge.hpp"
#include "scengen/sim_builtin.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitBackend = 2;

std::string format_double(double v)
{
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), v);
    return std::string(buffer, result.ptr);
}

struct CliConfig {
    std::string input;
    std::string action = "genetic_algorithm";
    std::string vector_text;
    std::uint64_t seed = 42;
    double steps = 0.0; ///< scenario duration override in seconds, 0 keeps the template's
    std::vector<double> des_forward_right;
    scengen::NoiseConfig noise;
    std::string backend = "builtin";
    std::string out_dir = "out";
    scengen::GAConfig ga;
    int repetitions = 1;
    double accident_weight = 1000.0;
};

scengen::NoiseVector parse_vector_flag(const std::string& text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
        throw scengen::ScenarioError("--vector must be a JSON array, e.g. \"[0, 0.5, -1]\"");
    }
    if (!doc.is_array()) {
        throw scengen::ScenarioError("--vector must be a JSON array, e.g. \"[0, 0.5, -1]\"");
    }
    scengen::NoiseVector v;
    for (const auto& value : doc) {
        if (!value.is_number()) {
            throw scengen::ScenarioError("--vector entries must be numbers");
        }
        v.values.push_back(value.get<double>());
    }
    return v;
}

std::unique_ptr<scengen::SimulatorBackend> make_backend(const CliConfig& cli)
{
    if (cli.backend == "builtin") {
        return std::make_unique<scengen::BuiltinSimulator>(scengen::SimConfig{}, cli.seed);
    }
    scengen::BridgeConfig bridge;
    bridge.endpoint = cli.backend;
    return std::make_unique<scengen::BridgeClient>(bridge, scengen::SimConfig{});
}

bool all_evaluations_failed(const scengen::SearchResult& result)
{
    if (result.evaluations.empty()) {
        return false;
    }
    for (const auto& outcome : result.evaluations) {
        if (!outcome.failed) {
            return false;
        }
    }
    return true;
}

void print_run_line(const scengen::StrategySummary& s)
{
    std::cout << s.strategy_name << " seed=" << s.seed << ": " << s.evaluations
              << " evaluations, " << s.failure_count << " failures, best E="
              << format_double(s.best_e_value) << "\n";
}

int run_replay(const CliConfig& cli, const scengen::ScenarioTemplate& tmpl,
               const scengen::ParameterSpace& space, scengen::SimulatorBackend& backend)
{
    scengen::NoiseVector vector;
    if (!cli.vector_text.empty()) {
        vector = parse_vector_flag(cli.vector_text);
        if (vector.size() != space.dimension()) {
            std::cerr << "error: --vector has " << vector.size() << " entries, scenario expects "
                      << space.dimension() << "\n";
            return kExitUsage;
        }
    } else {
        vector.values.assign(space.dimension(), 0.0);
    }

    try {
        const scengen::ConcreteScenario scenario = realize(tmpl, space, vector);
        scengen::SimulationTrace trace = backend.run(scenario);
        scengen::validate_trace(trace);
        const scengen::ObjectiveScore score =
            scengen::score_trace(trace, {cli.accident_weight});
        std::cout << "ego_agents_distance: " << format_double(score.ego_agents_distance) << "\n";
        std::cout << "journey_distance: " << format_double(score.journey_distance) << "\n";
        std::cout << "accidents: " << score.acc << "\n";
        std::cout << "e_value: " << format_double(score.e_value) << "\n";
        if (trace.collisions.empty()) {
            std::cout << "collisions: none\n";
        } else {
            for (const auto& event : trace.collisions) {
                std::cout << "collision: step " << event.step_index << " agent " << event.agent_id
                          << " ego at (" << format_double(event.ego_pos.x) << ", "
                          << format_double(event.ego_pos.y) << ", "
                          << format_double(event.ego_pos.z) << ")\n";
            }
        }
        return kExitOk;
    } catch (const scengen::EvaluationError& e) {
        std::cerr << "backend failure: " << e.what() << "\n";
        return kExitBackend;
    }
}

int run_search(const CliConfig& cli, scengen::Evaluator& evaluator,
               const scengen::ParameterSpace& space)
{
    scengen::SearchResult result;
    if (cli.action == "genetic_algorithm") {
        result = scengen::run_ga(space, evaluator, cli.ga);
    } else {
        result = scengen::run_random(space, evaluator, cli.ga.eval_budget, cli.ga.seed);
    }
    const scengen::StrategySummary summary = scengen::summarize_run(result);
    scengen::emit_reports({summary}, scengen::to_records(result), cli.out_dir);
    print_run_line(summary);
    std::cout << "reports written to " << cli.out_dir << "\n";
    if (all_evaluations_failed(result)) {
        std::cerr << "backend failure: every evaluation failed\n";
        return kExitBackend;
    }
    return kExitOk;
}

int run_compare(const CliConfig& cli, const scengen::ScenarioTemplate& tmpl,
                const scengen::ParameterSpace& space, scengen::SimulatorBackend& backend)
{
    std::vector<scengen::StrategySummary> summaries;
    std::vector<scengen::EvaluationRecord> records;
    int ga_failures = 0;
    int random_failures = 0;
    int ga_wins = 0;
    bool everything_failed = true;

    scengen::ScenarioEvaluator evaluator(tmpl, space, backend, {cli.accident_weight});
    for (int rep = 0; rep < cli.repetitions; ++rep) {
        scengen::GAConfig ga_cfg = cli.ga;
        ga_cfg.seed = cli.seed + 2 * static_cast<std::uint64_t>(rep);
        const std::uint64_t random_seed = ga_cfg.seed + 1;

        const scengen::SearchResult ga_run = scengen::run_ga(space, evaluator, ga_cfg);
        const scengen::SearchResult random_run =
            scengen::run_random(space, evaluator, cli.ga.eval_budget, random_seed);

        const scengen::ComparisonSummary comparison = scengen::compare_runs(ga_run, random_run);
        summaries.push_back(comparison.a);
        summaries.push_back(comparison.b);
        for (const auto& record : scengen::to_records(ga_run)) {
            records.push_back(record);
        }
        for (const auto& record : scengen::to_records(random_run)) {
            records.push_back(record);
        }
        ga_failures += comparison.a.failure_count;
        random_failures += comparison.b.failure_count;
        if (comparison.a.failure_count > comparison.b.failure_count) {
            ++ga_wins;
        }
        everything_failed =
            everything_failed && all_evaluations_failed(ga_run) && all_evaluations_failed(random_run);
        print_run_line(comparison.a);
        print_run_line(comparison.b);
    }

    scengen::emit_reports(summaries, records, cli.out_dir);
    std::cout << "pairs where GA found more failures: " << ga_wins << "/" << cli.repetitions
              << "\n";
    std::cout << "pooled failures: genetic_algorithm=" << ga_failures
              << " random=" << random_failures << "\n";
    std::cout << "reports written to " << cli.out_dir << "\n";
    if (everything_failed) {
        std::cerr << "backend failure: every evaluation failed\n";
        return kExitBackend;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CliConfig cli;
    CLI::App app{"Search-based generation of failure-revealing driving scenarios"};
    app.add_option("--input", cli.input, "Base scenario JSON file")->required();
    app.add_option("--action", cli.action,
                   "genetic_algorithm | random | compare | replay (default genetic_algorithm)");
    app.add_option("--vector", cli.vector_text,
                   "Noise vector as a JSON array; replay only. Zero noise maps every parameter "
                   "to the midpoint of its range, which equals the base value unless a hard "
                   "clamp made the range asymmetric");
    app.add_option("--seed", cli.seed, "Randomness seed (default 42)");
    app.add_option("--steps", cli.steps, "Scenario duration in seconds, overrides the template");
    app.add_option("--des-forward-right", cli.des_forward_right,
                   "Ego destination as forward,right offsets in meters from the start pose")
        ->expected(2);
    app.add_option("--pos-noise-range-xz", cli.noise.pos_noise_range_xz,
                   "Max change of each waypoint coordinate (x, z) in meters");
    app.add_option("--color-noise-range-rgb", cli.noise.color_noise_range_rgb,
                   "Max change of each agent color channel");
    app.add_option("--weather-noise-range", cli.noise.weather_noise_range,
                   "Max change of rain, fog, wetness, cloudiness, road damage");
    app.add_option("--time-max-noise", cli.noise.time_max_noise,
                   "Max change of the time of day in hours");
    app.add_option("--speed-max-noise", cli.noise.speed_max_noise,
                   "Max change of each agent speed in m/s");
    app.add_option("--backend", cli.backend,
                   "builtin, tcp:HOST:PORT, or a simulator command line speaking the bridge "
                   "protocol on stdio (default builtin)");
    app.add_option("--out-dir", cli.out_dir, "Report output directory (default out)");
    app.add_option("--population", cli.ga.population_size, "GA population size (default 10)");
    app.add_option("--generations", cli.ga.generations, "GA generations (default 20)");
    app.add_option("--mutation-rate", cli.ga.mutation_rate,
                   "Per-offspring mutation probability (default 0.95)");
    app.add_option("--eta", cli.ga.eta, "Mutation crowding degree (default 20)");
    app.add_option("--tournament-size", cli.ga.tournament_size, "Tournament size (default 2)");
    app.add_option("--budget", cli.ga.eval_budget,
                   "Evaluation budget per strategy run (default 200)");
    app.add_option("--repetitions", cli.repetitions,
                   "Paired repetitions for --action compare (default 1)");
    app.add_option("--accident-weight", cli.accident_weight,
                   "Weight of the accident count in the objective (default 1000)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    if (cli.action != "genetic_algorithm" && cli.action != "random" && cli.action != "compare" &&
        cli.action != "replay") {
        std::cerr << "usage error: unknown action \"" << cli.action
                  << "\" (expected genetic_algorithm, random, compare or replay)\n";
        return kExitUsage;
    }
    if (!cli.vector_text.empty() && cli.action != "replay") {
        std::cerr << "usage error: --vector is only valid with --action replay\n";
        return kExitUsage;
    }

    scengen::ScenarioTemplate tmpl;
    try {
        tmpl = scengen::load_template_file(cli.input);
    } catch (const scengen::ScenarioError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    if (cli.steps > 0.0) {
        tmpl.duration_s = cli.steps;
    }
    if (!cli.des_forward_right.empty()) {
        const double forward = cli.des_forward_right[0];
        const double right = cli.des_forward_right[1];
        const double fx = std::cos(tmpl.ego_heading);
        const double fz = std::sin(tmpl.ego_heading);
        tmpl.ego_destination = {tmpl.ego_start.x + fx * forward + fz * right, tmpl.ego_start.y,
                                tmpl.ego_start.z + fz * forward - fx * right};
    }

    const scengen::ParameterSpace space = scengen::build_parameter_space(tmpl, cli.noise);
    if (space.dimension() == 0) {
        std::cerr << "usage error: empty search space (all noise ranges are zero)\n";
        return kExitUsage;
    }

    std::unique_ptr<scengen::SimulatorBackend> backend;
    try {
        backend = make_backend(cli);
    } catch (const std::exception& e) {
        std::cerr << "backend failure: " << e.what() << "\n";
        return kExitBackend;
    }

    try {
        if (cli.action == "replay") {
            return run_replay(cli, tmpl, space, *backend);
        }
        if (cli.action == "compare") {
            return run_compare(cli, tmpl, space, *backend);
        }
        scengen::GAConfig ga_cfg = cli.ga;
        ga_cfg.seed = cli.seed;
        CliConfig search_cli = cli;
        search_cli.ga = ga_cfg;
        scengen::ScenarioEvaluator evaluator(tmpl, space, *backend, {cli.accident_weight});
        return run_search(search_cli, evaluator, space);
    } catch (const scengen::ScenarioError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBackend;
    }
}
