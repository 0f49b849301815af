#include "scengen/evaluator.hpp"

namespace scengen {

ScenarioEvaluator::ScenarioEvaluator(ScenarioTemplate tmpl, ParameterSpace space,
                                     SimulatorBackend& backend, ObjectiveConfig objective)
    : template_(std::move(tmpl)), space_(std::move(space)), backend_(backend), objective_(objective)
{
}

Evaluation ScenarioEvaluator::evaluate(const NoiseVector& genotype)
{
    const ConcreteScenario scenario = realize(template_, space_, genotype);
    SimulationTrace trace = backend_.run(scenario);
    validate_trace(trace);
    Evaluation evaluation;
    evaluation.score = score_trace(trace, objective_);
    evaluation.trace = std::move(trace);
    return evaluation;
}

bool ScenarioEvaluator::supports_concurrent_evaluation() const
{
    return backend_.supports_concurrent_evaluation();
}

} // namespace scengen
