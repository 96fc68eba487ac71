#pragma once

#include <cstdint>
#include <vector>

#include "asag/corpus.hpp"
#include "asag/gaming.hpp"

namespace asag::synthetic {

struct SyntheticConfig {
    std::uint64_t seed = 42;
    std::size_t items = 20;  // capped at the number of bundled vignettes
    std::size_t responses_per_item = 60;
    double correct_share = 0.6;
    // Share of responses that cite findings after the diagnosis.
    double verbose_share = 0.1;
    // Per-response probability of a transposed-letter typo.
    double typo_rate = 0.1;
    std::size_t summaries_per_item = 200;
    // Share of summaries that close with a differential naming the correct
    // diagnosis next to a distractor.
    double summary_differential_rate = 0.5;
    // Share of those differential summaries reduced to a one-line impression.
    double summary_impression_rate = 0.5;

    void validate() const;
};

struct ReferenceCorpus {
    Corpus corpus;
    // Stand-ins for externally produced case summaries, fed through the S2
    // ingestion path.
    std::vector<gaming::ExternalSummary> summaries;
};

std::size_t vignette_count();

// Templated vignettes with correct and distractor diagnoses. Item "item01"
// is the Guillain-Barré case.
ReferenceCorpus make_reference_corpus(const SyntheticConfig& cfg);

inline constexpr std::size_t kReferenceS1PerVariant = 400;
inline constexpr std::size_t kReferenceS3PerItem = 200;
inline constexpr double kReferenceSubsampleRate = 0.05;

struct ReferenceDataset {
    Corpus data;  // real responses followed by the subsampled gaming responses
    gaming::GamingPools pools;
};

// Reference corpus plus gaming pools generated and subsampled with `seed`.
ReferenceDataset make_reference_dataset(std::uint64_t seed = 42);

}  // namespace asag::synthetic
