#ifndef SCENGEN_EVALUATOR_HPP
#define SCENGEN_EVALUATOR_HPP

#include <stdexcept>
#include <string>

#include "scengen/objective.hpp"
#include "scengen/scenario.hpp"
#include "scengen/trace.hpp"

namespace scengen {

/// A failed evaluation attempt (simulator crash, timeout, bad response).
/// Search strategies substitute a worst-case score and keep running.
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Evaluation {
    ObjectiveScore score;
    SimulationTrace trace;
};

/// The runner side of the runner<->simulator seam: maps a genotype to a
/// scored simulation outcome.
class Evaluator {
public:
    virtual ~Evaluator() = default;

    /// Throws EvaluationError when the backend fails.
    virtual Evaluation evaluate(const NoiseVector& genotype) = 0;

    virtual bool supports_concurrent_evaluation() const = 0;
};

/// Executes one concrete scenario. Implemented by the builtin simulator
/// and by the bridge client for external simulators.
class SimulatorBackend {
public:
    virtual ~SimulatorBackend() = default;

    virtual SimulationTrace run(const ConcreteScenario& scenario) = 0;

    virtual bool supports_concurrent_evaluation() const = 0;
};

/// Standard pipeline: scale genotype -> concrete scenario -> simulate ->
/// validate trace -> objective score.
class ScenarioEvaluator : public Evaluator {
public:
    ScenarioEvaluator(ScenarioTemplate tmpl, ParameterSpace space, SimulatorBackend& backend,
                      ObjectiveConfig objective = {});

    Evaluation evaluate(const NoiseVector& genotype) override;

    bool supports_concurrent_evaluation() const override;

    const ParameterSpace& space() const { return space_; }

private:
    ScenarioTemplate template_;
    ParameterSpace space_;
    SimulatorBackend& backend_;
    ObjectiveConfig objective_;
};

} // namespace scengen

#endif
