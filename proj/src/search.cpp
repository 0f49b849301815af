#include "scengen/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace scengen {

namespace {

NoiseVector uniform_genotype(std::size_t m, Rng& rng)
{
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    NoiseVector v;
    v.values.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        v.values.push_back(unit(rng));
    }
    return v;
}

ObjectiveScore worst_score()
{
    ObjectiveScore score;
    score.e_value = std::numeric_limits<double>::infinity();
    return score;
}

/// Shared evaluation loop bookkeeping: budget accounting, worst-score
/// substitution on evaluator failure, best-so-far archive.
class RunState {
public:
    RunState(Evaluator& evaluator, int budget) : evaluator_(evaluator), budget_(budget) {}

    bool budget_left() const { return evals_ < budget_; }

    bool evaluate(Individual& individual, SearchResult& result)
    {
        if (!budget_left()) {
            return false;
        }
        individual.eval_index = evals_;
        EvaluationOutcome outcome;
        outcome.genotype = individual.genotype;
        try {
            Evaluation evaluation = evaluator_.evaluate(individual.genotype);
            individual.score = evaluation.score;
            outcome.score = evaluation.score;
            outcome.trace = summarize(evaluation.trace);
        } catch (const EvaluationError& e) {
            individual.score = worst_score();
            outcome.score = *individual.score;
            outcome.failed = true;
            std::cerr << "evaluation " << evals_ << " failed: " << e.what() << "\n";
        }
        ++evals_;
        result.evaluations.push_back(std::move(outcome));
        if (!best_ || individual.score->e_value < best_->score->e_value) {
            best_ = individual;
        }
        return true;
    }

    Individual best() const { return best_ ? *best_ : Individual{}; }

private:
    Evaluator& evaluator_;
    int budget_ = 0;
    int evals_ = 0;
    std::optional<Individual> best_;
};

void require_dimension(const ParameterSpace& space)
{
    if (space.dimension() == 0) {
        throw std::invalid_argument("empty search space (all noise ranges are zero?)");
    }
}

} // namespace

std::vector<Individual> init_population(std::size_t m, int size, Rng& rng)
{
    if (m == 0) {
        throw std::invalid_argument("empty search space (all noise ranges are zero?)");
    }
    std::vector<Individual> population;
    population.reserve(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) {
        Individual individual;
        individual.genotype = uniform_genotype(m, rng);
        population.push_back(std::move(individual));
    }
    return population;
}

const Individual& tournament_select(const std::vector<Individual>& population, int k, Rng& rng)
{
    if (population.empty()) {
        throw std::invalid_argument("tournament over an empty population");
    }
    for (const Individual& individual : population) {
        if (!individual.evaluated()) {
            throw std::logic_error("tournament_select requires an evaluated population");
        }
    }
    std::uniform_int_distribution<std::size_t> pick(0, population.size() - 1);
    const Individual* winner = nullptr;
    for (int i = 0; i < k; ++i) {
        const Individual& candidate = population[pick(rng)];
        if (winner == nullptr || candidate.score->e_value < winner->score->e_value ||
            (candidate.score->e_value == winner->score->e_value &&
             candidate.eval_index < winner->eval_index)) {
            winner = &candidate;
        }
    }
    return *winner;
}

double mutate_gene(double x, double eta, double u)
{
    constexpr double lb = -1.0;
    constexpr double ub = 1.0;
    constexpr double span = ub - lb;
    const double exponent = 1.0 / (eta + 1.0);
    double delta_q;
    if (u < 0.5) {
        const double delta1 = (x - lb) / span;
        const double value = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - delta1, eta + 1.0);
        delta_q = std::pow(value, exponent) - 1.0;
    } else {
        const double delta2 = (ub - x) / span;
        const double value =
            2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - delta2, eta + 1.0);
        delta_q = 1.0 - std::pow(value, exponent);
    }
    return std::clamp(x + delta_q * span, lb, ub);
}

NoiseVector polynomial_mutation(const NoiseVector& genotype, double gene_rate, double eta, Rng& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    NoiseVector mutant = genotype;
    for (double& gene : mutant.values) {
        if (unit(rng) < gene_rate) {
            gene = mutate_gene(gene, eta, unit(rng));
        }
    }
    return mutant;
}

SearchResult run_ga(const ParameterSpace& space, Evaluator& evaluator, const GAConfig& cfg)
{
    require_dimension(space);
    const auto start = std::chrono::steady_clock::now();

    SearchResult result;
    result.strategy_name = "genetic_algorithm";
    result.config = cfg;

    Rng rng(cfg.seed);
    RunState run(evaluator, cfg.eval_budget);

    std::vector<Individual> population = init_population(space.dimension(), cfg.population_size, rng);
    for (Individual& individual : population) {
        if (!run.evaluate(individual, result)) {
            break;
        }
    }

    for (int generation = 1; generation <= cfg.generations && run.budget_left(); ++generation) {
        std::vector<Individual> offspring;
        offspring.reserve(population.size());
        for (int i = 0; i < cfg.population_size && run.budget_left(); ++i) {
            Individual child;
            child.genotype = polynomial_mutation(
                tournament_select(population, cfg.tournament_size, rng).genotype,
                cfg.mutation_rate, cfg.eta, rng);
            run.evaluate(child, result);
            offspring.push_back(std::move(child));
        }
        if (!offspring.empty()) {
            population = std::move(offspring);
        }
    }

    result.best = run.best();
    result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

SearchResult run_random(const ParameterSpace& space, Evaluator& evaluator, int budget,
                        std::uint64_t seed)
{
    require_dimension(space);
    if (budget < 1) {
        throw std::invalid_argument("random search needs a budget of at least 1");
    }
    const auto start = std::chrono::steady_clock::now();

    SearchResult result;
    result.strategy_name = "random";
    result.config.eval_budget = budget;
    result.config.seed = seed;

    Rng rng(seed);
    RunState run(evaluator, budget);
    while (run.budget_left()) {
        Individual individual;
        individual.genotype = uniform_genotype(space.dimension(), rng);
        run.evaluate(individual, result);
    }

    result.best = run.best();
    result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

} // namespace scengen
