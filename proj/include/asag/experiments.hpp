#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asag/corpus.hpp"
#include "asag/embedding.hpp"
#include "asag/ensemble.hpp"
#include "asag/metrics.hpp"

namespace asag {

enum class Protocol { Baseline, AdvT1, AdvT2, Ensemble };

std::string_view to_string(Protocol p);
Protocol parse_protocol(std::string_view s);

struct ExperimentSpec {
    std::string name = "experiment";
    std::uint64_t seed = 42;
    double real_train_fraction = 0.7;
    double gaming_train_fraction = 0.7;
    // Share of the real training split held out of the index for threshold
    // and lambda selection.
    double validation_fraction = 0.2;
    StratifyBy stratify_by = StratifyBy::Provenance;
    std::set<Strategy> strategies_in_train = {Strategy::S1, Strategy::S2, Strategy::S3};
    std::set<Strategy> strategies_in_test = {Strategy::S1, Strategy::S2, Strategy::S3};
    // When set, every grader uses this threshold and calibration is skipped.
    std::optional<double> fixed_threshold;
    std::vector<double> threshold_grid = default_threshold_grid();
    // Base graders; the first one is the single grader reported by the
    // non-ensemble protocols.
    std::vector<EmbedderConfig> embedders = default_embedder_configs();
    Label tie_break = Label::Incorrect;
    // When unset, lambda is picked from lambda_grid on the validation slice.
    std::optional<double> ridge_lambda;
    std::vector<double> lambda_grid = default_lambda_grid();
    // Drop gaming responses that exactly match a real correct training response.
    bool drop_leaks = false;
    bool write_pca = true;

    void validate() const;
};

nlohmann::ordered_json to_json(const ExperimentSpec& spec);
ExperimentSpec experiment_spec_from_json(const nlohmann::json& j);

struct ConditionResult {
    std::string name;
    double threshold = kDefaultThreshold;
    std::size_t index_size = 0;
    std::size_t validation_size = 0;
    std::size_t test_size = 0;
    MetricsReport report;
};

struct EnsembleResult {
    std::string condition;
    std::vector<std::string> grader_names;
    std::vector<double> thresholds;
    std::vector<MetricsReport> base_reports;  // aligned with grader_names
    MetricsReport majority_vote;
    MetricsReport ridge;
    double ridge_lambda = 1.0;
};

struct ExperimentOutcome {
    Protocol protocol = Protocol::Baseline;
    std::optional<ConditionResult> baseline;
    std::optional<ConditionResult> advt1;
    std::vector<ConditionResult> advt2_folds;  // one per held-out strategy, S1..S3 order
    std::optional<MetricsReport> advt2_aggregate;  // fold reports summed
    std::vector<EnsembleResult> ensemble;  // "baseline", "advt1", "advt2" (folds summed)
    std::vector<LeakPair> leaks;
    std::vector<std::string> warnings;
    std::map<std::string, std::size_t> data_counts;
    // Fitted first grader, kept for the per-item PCA output.
    std::shared_ptr<const Embedder> primary_embedder;
};

// Real responses and gaming responses are both taken from `data`, split by
// provenance. Throws when a protocol needs a gaming strategy that is empty.
ExperimentOutcome run_experiment(const Corpus& data, const ExperimentSpec& spec, Protocol protocol);

MetricsReport run_baseline(const Corpus& data, const ExperimentSpec& spec);
MetricsReport run_advt1(const Corpus& data, const ExperimentSpec& spec);
std::vector<MetricsReport> run_advt2(const Corpus& data, const ExperimentSpec& spec);
// One result per condition: baseline, advt1, advt2.
std::vector<EnsembleResult> run_ensemble(const Corpus& data, const ExperimentSpec& spec);

nlohmann::ordered_json outcome_to_json(const ExperimentOutcome& outcome, const ExperimentSpec& spec);

struct RunInputs {
    std::filesystem::path corpus;
    std::vector<std::filesystem::path> gaming;  // response JSONL files
};

// Loads the corpus and appends the gaming response files.
Corpus load_run_data(const RunInputs& inputs);

// Writes report.json, tables/*.csv, pca/* and manifest.json under `dir`.
// The manifest records the spec and the git blob hash of every input.
void write_run(const std::filesystem::path& dir, const ExperimentOutcome& outcome,
               const ExperimentSpec& spec, const RunInputs& inputs, const Corpus& data);

struct RunManifest {
    std::string protocol;
    ExperimentSpec spec;
    RunInputs inputs;
    std::map<std::string, std::string> input_hashes;  // path -> git blob sha1
};

nlohmann::ordered_json manifest_json(const ExperimentSpec& spec, Protocol protocol, const RunInputs& inputs);
RunManifest load_manifest(const std::filesystem::path& path);

// Hashes the inputs named by a manifest and compares them with the recorded
// values; returns the paths whose content changed.
std::vector<std::string> changed_inputs(const RunManifest& manifest);

}  // namespace asag
