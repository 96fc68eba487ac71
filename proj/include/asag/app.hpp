#pragma once

#include <nlohmann/json.hpp>

// Command layer shared by the C API and the CLI. Each command takes one flat
// config object (see README for the keys) and returns a JSON summary.
// Unknown keys and ill-typed values raise InvalidArgument.
namespace asag::app {

// Reference corpus and external summaries: corpus.jsonl, summaries.jsonl.
nlohmann::ordered_json synth(const nlohmann::json& cfg);

// Gaming pools: s1.jsonl, s2.jsonl, s3.jsonl and manifest.json.
nlohmann::ordered_json generate(const nlohmann::json& cfg);

// "protocol" selects baseline, advt1, advt2 or ensemble. With "manifest" set
// the run is repeated from a previous manifest into "output_dir".
nlohmann::ordered_json experiment(const nlohmann::json& cfg);

nlohmann::ordered_json pca(const nlohmann::json& cfg);

nlohmann::ordered_json llm(const nlohmann::json& cfg);

// Reads report.json of one or more run directories and rebuilds the tables.
nlohmann::ordered_json report(const nlohmann::json& cfg);

}  // namespace asag::app
