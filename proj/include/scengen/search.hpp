#ifndef SCENGEN_SEARCH_HPP
#define SCENGEN_SEARCH_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "scengen/evaluator.hpp"
#include "scengen/objective.hpp"
#include "scengen/scenario.hpp"
#include "scengen/trace.hpp"

namespace scengen {

using Rng = std::mt19937_64;

struct Individual {
    NoiseVector genotype;
    std::optional<ObjectiveScore> score;
    int eval_index = -1; ///< ordinal of this individual's evaluation

    bool evaluated() const { return score.has_value(); }
};

struct GAConfig {
    int population_size = 10;
    int generations = 20;
    double mutation_rate = 0.95; ///< per-gene probability inside the mutation operator
    double eta = 20.0;           ///< crowding degree; larger means smaller perturbations
    int tournament_size = 2;
    int eval_budget = 200;       ///< binding stop criterion, counts every evaluator call
    std::uint64_t seed = 0;
};

/// One evaluator call's outcome. `failed` marks evaluations that threw and
/// received the worst-case sentinel score (e_value = +infinity).
struct EvaluationOutcome {
    NoiseVector genotype;
    ObjectiveScore score;
    TraceSummary trace;
    bool failed = false;
};

struct SearchResult {
    std::string strategy_name;
    GAConfig config;
    std::vector<EvaluationOutcome> evaluations;
    Individual best; ///< minimal e_value over all evaluations, ties to the lowest eval_index
    double wall_time_s = 0.0;
};

/// `size` individuals with every gene drawn uniformly from [-1, +1].
std::vector<Individual> init_population(std::size_t m, int size, Rng& rng);

/// Draw `k` individuals uniformly with replacement and return the one with
/// the lowest e_value (ties broken by lowest eval_index). All individuals
/// must already be evaluated.
const Individual& tournament_select(const std::vector<Individual>& population, int k, Rng& rng);

/// Core of the bounded polynomial mutation on [-1, +1]: perturb gene x with
/// distribution parameter u in [0,1). u = 0.5 leaves x unchanged.
double mutate_gene(double x, double eta, double u);

/// Mutate each gene independently with probability gene_rate using the
/// bounded polynomial operator; the result never leaves [-1, +1].
NoiseVector polynomial_mutation(const NoiseVector& genotype, double gene_rate, double eta, Rng& rng);

/// Genetic algorithm: random initial population, then per generation
/// tournament selection with replacement plus polynomial mutation (each
/// offspring's genes mutate independently with probability mutation_rate);
/// offspring replace the population. No crossover. Stops when generations
/// or the evaluation budget are exhausted, whichever comes first.
SearchResult run_ga(const ParameterSpace& space, Evaluator& evaluator, const GAConfig& cfg);

/// Baseline: `budget` independent uniform genotypes, each evaluated once.
SearchResult run_random(const ParameterSpace& space, Evaluator& evaluator, int budget,
                        std::uint64_t seed);

} // namespace scengen

#endif
