#include "scengen/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace scengen {

using nlohmann::json;

namespace {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v)
{
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), v);
    return std::string(buffer, result.ptr);
}

/// JSON has no infinity literal; non-finite values travel as strings.
json json_number(double v)
{
    if (std::isfinite(v)) {
        return v;
    }
    if (std::isnan(v)) {
        return "nan";
    }
    return v > 0 ? "inf" : "-inf";
}

double number_from_json(const json& node, const char* field)
{
    if (node.is_number()) {
        return node.get<double>();
    }
    if (node.is_string()) {
        const std::string s = node.get<std::string>();
        if (s == "inf") {
            return std::numeric_limits<double>::infinity();
        }
        if (s == "-inf") {
            return -std::numeric_limits<double>::infinity();
        }
        if (s == "nan") {
            return std::numeric_limits<double>::quiet_NaN();
        }
    }
    throw std::runtime_error(std::string("evaluation record: bad numeric field \"") + field + "\"");
}

std::ofstream open_for_write(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

} // namespace

std::vector<EvaluationRecord> to_records(const SearchResult& result)
{
    std::vector<EvaluationRecord> records;
    records.reserve(result.evaluations.size());
    for (std::size_t i = 0; i < result.evaluations.size(); ++i) {
        const EvaluationOutcome& outcome = result.evaluations[i];
        EvaluationRecord record;
        record.eval_index = static_cast<int>(i);
        record.strategy_name = result.strategy_name;
        record.genotype = outcome.genotype;
        record.score = outcome.score;
        record.is_failure = outcome.score.acc >= 1;
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<EvaluationRecord> detect_failures(const std::vector<EvaluationRecord>& records)
{
    std::vector<EvaluationRecord> failures;
    for (const EvaluationRecord& record : records) {
        if (record.score.acc >= 1) {
            failures.push_back(record);
        }
    }
    return failures;
}

DiversityStats diversity_of(const std::vector<NoiseVector>& genotypes)
{
    DiversityStats stats;
    const std::size_t n = genotypes.size();
    if (n < 2) {
        return stats; // insufficient failures: marker stays false
    }
    stats.sufficient = true;
    stats.pairwise.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double sum = 0.0;
            const auto& a = genotypes[i].values;
            const auto& b = genotypes[j].values;
            const std::size_t dims = std::min(a.size(), b.size());
            for (std::size_t d = 0; d < dims; ++d) {
                const double diff = a[d] - b[d];
                sum += diff * diff;
            }
            const double dist = std::sqrt(sum);
            stats.pairwise[i][j] = dist;
            stats.pairwise[j][i] = dist;
        }
    }
    stats.avg_per_case.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                sum += stats.pairwise[i][j];
            }
        }
        stats.avg_per_case[i] = sum / static_cast<double>(n - 1);
    }
    stats.min_avg = *std::min_element(stats.avg_per_case.begin(), stats.avg_per_case.end());
    stats.max_avg = *std::max_element(stats.avg_per_case.begin(), stats.avg_per_case.end());
    return stats;
}

DiversityStats diversity(const std::vector<EvaluationRecord>& failures)
{
    std::vector<NoiseVector> genotypes;
    genotypes.reserve(failures.size());
    for (const EvaluationRecord& record : failures) {
        genotypes.push_back(record.genotype);
    }
    return diversity_of(genotypes);
}

StrategySummary summarize_run(const SearchResult& result)
{
    StrategySummary summary;
    summary.strategy_name = result.strategy_name;
    summary.seed = result.config.seed;
    summary.evaluations = static_cast<int>(result.evaluations.size());
    summary.best_e_value = result.best.score ? result.best.score->e_value
                                             : std::numeric_limits<double>::infinity();

    const std::vector<EvaluationRecord> records = to_records(result);
    const std::vector<EvaluationRecord> failures = detect_failures(records);
    summary.failure_count = static_cast<int>(failures.size());

    int scored = 0;
    for (std::size_t i = 0; i < result.evaluations.size(); ++i) {
        const EvaluationOutcome& outcome = result.evaluations[i];
        if (outcome.failed) {
            continue; // no trace, nothing to aggregate
        }
        ++scored;
        summary.total_journey_distance += outcome.score.journey_distance;
        summary.total_ego_agents_distance += outcome.score.ego_agents_distance;
    }
    if (scored > 0) {
        summary.avg_journey_all = summary.total_journey_distance / scored;
        summary.avg_ego_agents_all = summary.total_ego_agents_distance / scored;
    }
    if (!failures.empty()) {
        double journey = 0.0;
        double ego_agents = 0.0;
        for (const EvaluationRecord& record : failures) {
            journey += record.score.journey_distance;
            ego_agents += record.score.ego_agents_distance;
        }
        summary.avg_journey_failures = journey / static_cast<double>(failures.size());
        summary.avg_ego_agents_failures = ego_agents / static_cast<double>(failures.size());
    }
    const DiversityStats stats = diversity(failures);
    if (stats.sufficient) {
        summary.diversity_range = std::make_pair(stats.min_avg, stats.max_avg);
    }
    return summary;
}

ComparisonSummary compare_runs(const SearchResult& run_a, const SearchResult& run_b)
{
    return {summarize_run(run_a), summarize_run(run_b)};
}

std::string record_to_jsonl_line(const EvaluationRecord& record)
{
    json doc;
    doc["eval_index"] = record.eval_index;
    doc["strategy"] = record.strategy_name;
    doc["genotype"] = record.genotype.values;
    doc["score"] = {{"ego_agents_distance", json_number(record.score.ego_agents_distance)},
                    {"journey_distance", json_number(record.score.journey_distance)},
                    {"acc", record.score.acc},
                    {"e_value", json_number(record.score.e_value)}};
    doc["is_failure"] = record.is_failure;
    return doc.dump();
}

EvaluationRecord record_from_jsonl_line(const std::string& line)
{
    json doc;
    try {
        doc = json::parse(line);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("evaluation record is not valid JSON: ") + e.what());
    }
    EvaluationRecord record;
    record.eval_index = doc.at("eval_index").get<int>();
    record.strategy_name = doc.at("strategy").get<std::string>();
    for (const json& value : doc.at("genotype")) {
        record.genotype.values.push_back(value.get<double>());
    }
    const json& score = doc.at("score");
    record.score.ego_agents_distance = number_from_json(score.at("ego_agents_distance"), "ego_agents_distance");
    record.score.journey_distance = number_from_json(score.at("journey_distance"), "journey_distance");
    record.score.acc = score.at("acc").get<int>();
    record.score.e_value = number_from_json(score.at("e_value"), "e_value");
    record.is_failure = doc.at("is_failure").get<bool>();
    return record;
}

std::vector<EvaluationRecord> parse_evaluations_jsonl(const std::string& text)
{
    std::vector<EvaluationRecord> records;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            records.push_back(record_from_jsonl_line(line));
        }
    }
    return records;
}

void emit_reports(const std::vector<StrategySummary>& summaries,
                  const std::vector<EvaluationRecord>& records,
                  const std::filesystem::path& out_dir)
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory " + out_dir.string() + ": " +
                                 ec.message());
    }

    {
        std::ofstream out = open_for_write(out_dir / "evaluations.jsonl");
        for (const EvaluationRecord& record : records) {
            out << record_to_jsonl_line(record) << "\n";
        }
    }

    {
        json doc;
        doc["strategies"] = json::array();
        for (const StrategySummary& s : summaries) {
            json node;
            node["strategy"] = s.strategy_name;
            node["seed"] = s.seed;
            node["evaluations"] = s.evaluations;
            node["detected_failures"] = s.failure_count;
            node["best_e_value"] = json_number(s.best_e_value);
            node["total_journey_distance"] = json_number(s.total_journey_distance);
            node["total_ego_agents_distance"] = json_number(s.total_ego_agents_distance);
            node["avg_journey_distance_failures"] = json_number(s.avg_journey_failures);
            node["avg_ego_agents_distance_failures"] = json_number(s.avg_ego_agents_failures);
            node["avg_journey_distance_all"] = json_number(s.avg_journey_all);
            node["avg_ego_agents_distance_all"] = json_number(s.avg_ego_agents_all);
            if (s.diversity_range) {
                node["diversity_avg_pairwise_min"] = json_number(s.diversity_range->first);
                node["diversity_avg_pairwise_max"] = json_number(s.diversity_range->second);
            } else {
                node["diversity_avg_pairwise_min"] = nullptr;
                node["diversity_avg_pairwise_max"] = nullptr;
            }
            doc["strategies"].push_back(std::move(node));
        }
        std::ofstream out = open_for_write(out_dir / "summary.json");
        out << doc.dump(2) << "\n";
    }

    {
        std::ofstream out = open_for_write(out_dir / "diversity.csv");
        out << "strategy,eval_index,avg_pairwise_distance\n";
        // Group failures per strategy, in order of first appearance.
        std::vector<std::string> strategy_order;
        for (const EvaluationRecord& record : records) {
            if (std::find(strategy_order.begin(), strategy_order.end(), record.strategy_name) ==
                strategy_order.end()) {
                strategy_order.push_back(record.strategy_name);
            }
        }
        for (const std::string& strategy : strategy_order) {
            std::vector<EvaluationRecord> group;
            for (const EvaluationRecord& record : records) {
                if (record.strategy_name == strategy && record.is_failure) {
                    group.push_back(record);
                }
            }
            const DiversityStats stats = diversity(group);
            for (std::size_t i = 0; i < group.size(); ++i) {
                out << strategy << "," << group[i].eval_index << ","
                    << (stats.sufficient ? format_double(stats.avg_per_case[i]) : "") << "\n";
            }
        }
    }

    {
        std::ofstream out = open_for_write(out_dir / "comparison.csv");
        out << "strategy,seed,evaluations,detected_failures,"
               "avg_journey_distance_failures,avg_ego_agents_distance_failures,"
               "avg_journey_distance_all,avg_ego_agents_distance_all,"
               "total_journey_distance,total_ego_agents_distance,"
               "diversity_avg_pairwise_min,diversity_avg_pairwise_max,best_e_value\n";
        for (const StrategySummary& s : summaries) {
            out << s.strategy_name << "," << s.seed << "," << s.evaluations << ","
                << s.failure_count << "," << format_double(s.avg_journey_failures) << ","
                << format_double(s.avg_ego_agents_failures) << ","
                << format_double(s.avg_journey_all) << "," << format_double(s.avg_ego_agents_all)
                << "," << format_double(s.total_journey_distance) << ","
                << format_double(s.total_ego_agents_distance) << ",";
            if (s.diversity_range) {
                out << format_double(s.diversity_range->first) << ","
                    << format_double(s.diversity_range->second);
            } else {
                out << ",";
            }
            out << "," << format_double(s.best_e_value) << "\n";
        }
    }
}

} // namespace scengen
