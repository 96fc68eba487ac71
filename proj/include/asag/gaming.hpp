#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_set>
#include <vector>

#include "asag/corpus.hpp"

namespace asag::gaming {

struct GeneratorConfig {
    std::uint64_t seed = 0;
    int k_min = 2;
    int k_max = 12;
    int summary_sentence_count = 2;
    std::string mixed_separator = "; ";
    // Number of incorrect parts joined with the single correct part in S3.
    int mixed_incorrect_parts = 1;
    double subsample_rate = 0.05;

    void validate() const;
};

struct Lexicons {
    std::unordered_set<std::string> stop_words;
    std::unordered_set<std::string> medical_terms;

    bool is_stop_word(std::string_view token) const;
    bool is_medical_term(std::string_view token) const;
};

// Newline-delimited terms, '#' starts a comment. Entries are trimmed and case-folded.
std::unordered_set<std::string> load_lexicon(const std::filesystem::path& path);
std::unordered_set<std::string> parse_lexicon(std::string_view content);

const std::unordered_set<std::string>& default_stop_words();
const std::unordered_set<std::string>& default_medical_terms();
Lexicons default_lexicons();

struct GenerationResult {
    std::vector<Response> responses;
    std::vector<std::string> warnings;
};

// S1a: k distinct non-stop stem tokens, kept in stem order.
GenerationResult gen_s1_nonconsecutive(const Item& item, const GeneratorConfig& cfg,
                                       const Lexicons& lex, std::size_t n);

// S1b: contiguous k-token windows of the raw stem (stop words kept).
GenerationResult gen_s1_consecutive(const Item& item, const GeneratorConfig& cfg,
                                    const Lexicons& lex, std::size_t n);

// S1c: tokens drawn from stem ∩ medical_terms.
GenerationResult gen_s1_medical(const Item& item, const GeneratorConfig& cfg,
                                const Lexicons& lex, std::size_t n);

// S2: deterministic extractive summary of the stem.
Response gen_s2_summary(const Item& item, const GeneratorConfig& cfg, const Lexicons& lex);

// Per-sentence extractive scores, exposed for inspection and testing.
std::vector<double> summary_sentence_scores(const std::string& stem, const Lexicons& lex);

// S3: one correct answer plus sampled incorrect answers, order shuffled.
GenerationResult gen_s3_mixed(const Item& item, const std::vector<Response>& incorrect_pool,
                              const GeneratorConfig& cfg, std::size_t n);

// round(rate * N) responses, uniformly without replacement, input order kept.
std::vector<Response> subsample(const std::vector<Response>& responses, double rate,
                                std::uint64_t seed);

struct ExternalSummary {
    std::string item_id;
    std::string text;
};

// JSONL of {"item_id": str, "text": str}.
std::vector<ExternalSummary> load_external_summaries(const std::filesystem::path& path);
std::vector<ExternalSummary> parse_external_summaries(std::istream& in,
                                                      const std::string& source_name);
std::string external_summaries_to_jsonl(const std::vector<ExternalSummary>& summaries);

// Turns external summaries into S2 responses; every item_id must exist in the corpus.
std::vector<Response> summaries_to_responses(const Corpus& corpus,
                                             const std::vector<ExternalSummary>& summaries);

struct GenerationCounts {
    std::size_t s1_per_variant = 100;  // per item, for each of S1a/S1b/S1c
    std::size_t s3_per_item = 100;
    bool include_extractive_summary = true;
};

struct GamingPools {
    std::vector<Response> s1a, s1b, s1c, s2, s3;
    std::vector<std::string> warnings;

    std::vector<Response> strategy(Strategy s) const;
    std::vector<Response> all() const;
};

// Runs every generator over every item of the corpus. S3 draws its incorrect
// parts from the item's real incorrect responses.
GamingPools generate_all(const Corpus& corpus, const GeneratorConfig& cfg, const Lexicons& lex,
                         const GenerationCounts& counts,
                         const std::vector<ExternalSummary>& external_summaries = {});

// Applies subsample() per strategy family (S1 pooled, S2, S3).
GamingPools subsample_pools(const GamingPools& pools, double rate, std::uint64_t seed);

}  // namespace asag::gaming
