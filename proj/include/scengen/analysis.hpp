#ifndef SCENGEN_ANALYSIS_HPP
#define SCENGEN_ANALYSIS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scengen/objective.hpp"
#include "scengen/scenario.hpp"
#include "scengen/search.hpp"

namespace scengen {

struct EvaluationRecord {
    int eval_index = 0;
    std::string strategy_name;
    NoiseVector genotype;
    ObjectiveScore score;
    bool is_failure = false; ///< score.acc >= 1

    friend bool operator==(const EvaluationRecord&, const EvaluationRecord&) = default;
};

/// Pairwise genotype-space Euclidean distances among failure-revealing
/// cases. `sufficient` is false with fewer than two failures, in which case
/// the other fields are empty.
struct DiversityStats {
    bool sufficient = false;
    std::vector<std::vector<double>> pairwise;  ///< symmetric, zero diagonal
    std::vector<double> avg_per_case;           ///< mean distance to the other cases
    double min_avg = 0.0;
    double max_avg = 0.0;
};

/// Per-run aggregates in the shape of the comparison report.
struct StrategySummary {
    std::string strategy_name;
    std::uint64_t seed = 0;
    int evaluations = 0;
    int failure_count = 0;
    double best_e_value = 0.0;
    double total_journey_distance = 0.0;     ///< over all evaluations
    double total_ego_agents_distance = 0.0;  ///< over all evaluations
    double avg_journey_failures = 0.0;       ///< over failure-revealing cases
    double avg_ego_agents_failures = 0.0;
    double avg_journey_all = 0.0;
    double avg_ego_agents_all = 0.0;
    std::optional<std::pair<double, double>> diversity_range; ///< absent when < 2 failures
};

struct ComparisonSummary {
    StrategySummary a;
    StrategySummary b;
};

std::vector<EvaluationRecord> to_records(const SearchResult& result);

/// The subset with acc >= 1, original order preserved.
std::vector<EvaluationRecord> detect_failures(const std::vector<EvaluationRecord>& records);

DiversityStats diversity(const std::vector<EvaluationRecord>& failures);
DiversityStats diversity_of(const std::vector<NoiseVector>& genotypes);

StrategySummary summarize_run(const SearchResult& result);

ComparisonSummary compare_runs(const SearchResult& run_a, const SearchResult& run_b);

/// Writes evaluations.jsonl, summary.json, diversity.csv and comparison.csv
/// into out_dir (created if missing). All numbers are emitted with
/// round-trip precision; identical inputs produce byte-identical files.
void emit_reports(const std::vector<StrategySummary>& summaries,
                  const std::vector<EvaluationRecord>& records,
                  const std::filesystem::path& out_dir);

std::string record_to_jsonl_line(const EvaluationRecord& record);
EvaluationRecord record_from_jsonl_line(const std::string& line);
std::vector<EvaluationRecord> parse_evaluations_jsonl(const std::string& text);

} // namespace scengen

#endif
