#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "asag/corpus.hpp"
#include "asag/metrics.hpp"

namespace asag::llm {

enum class PromptStrategy { P1_QuestionResponse, P2_QuestionExamplesResponse, P3_ExamplesOnlyResponse };

std::string_view to_string(PromptStrategy s);
PromptStrategy parse_prompt_strategy(std::string_view s);  // "p1" | "p2" | "p3"

// Placeholders: {stem} {lead_in} {correct_examples} {response}.
struct PromptTemplate {
    PromptStrategy strategy = PromptStrategy::P1_QuestionResponse;
    std::string text;

    // P1 must not use {correct_examples}; P3 must not use {stem} or {lead_in};
    // every placeholder the strategy needs must appear.
    void validate() const;
};

PromptTemplate default_template(PromptStrategy strategy);

std::string render_prompt(const PromptTemplate& t, const Item& item, const Response& response);

struct ParsedOutput {
    Label label = Label::Incorrect;
    std::string rationale;
    bool parse_failed = false;
};

// Accepts one "SCORE: correct|incorrect" line and an optional "RATIONALE: ..."
// line. Anything else, including conflicting or hedged scores, is a parse
// failure scored Incorrect. Never throws.
ParsedOutput parse_output(std::string_view raw) noexcept;

struct LlmVerdict {
    std::string response_id;
    Label label = Label::Incorrect;
    std::string rationale;
    std::string raw_output;
    bool cached = false;
    bool parse_failed = false;
};

enum class ApiStyle { Chat, Completion };

struct EndpointConfig {
    std::string url = "https://api.openai.com/v1/chat/completions";
    std::string model = "gpt-4";
    ApiStyle api_style = ApiStyle::Chat;
    double temperature = 0.0;
    int max_tokens = 256;
    std::string api_key_env = "OPENAI_API_KEY";
    int max_retries = 3;
    int backoff_initial_ms = 500;
    int timeout_seconds = 60;
    int max_in_flight = 4;
};

nlohmann::json to_json(const EndpointConfig& cfg);
EndpointConfig endpoint_config_from_json(const nlohmann::json& j);

// Sends one prompt and returns the model's raw text. Implementations throw
// asag::Error(Transport) on failure.
class Transport {
public:
    virtual ~Transport() = default;
    virtual std::string complete(const EndpointConfig& cfg, const std::string& prompt) = 0;
};

// JSON-over-HTTP(S) transport for OpenAI-style endpoints. The API key is read
// from the environment variable named in the config, when set.
class HttpTransport final : public Transport {
public:
    std::string complete(const EndpointConfig& cfg, const std::string& prompt) override;

    static nlohmann::json request_body(const EndpointConfig& cfg, const std::string& prompt);
    static std::string extract_text(const nlohmann::json& body);
};

// One JSON file per key under the cache directory. Writes go through a mutex
// and are renamed into place.
class ReplayCache {
public:
    explicit ReplayCache(std::filesystem::path dir);

    static std::string key(std::string_view model, std::string_view prompt);

    std::optional<std::string> lookup(const std::string& key) const;
    void store(const std::string& key, std::string_view model, std::string_view prompt,
               std::string_view raw_output);

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::mutex write_mutex_;
};

struct PromptRequest {
    std::string response_id;
    std::string prompt;
};

// Cache hits replay stored output; misses go to `transport` (null = offline,
// where a miss is a Transport error). Output order matches input order.
std::vector<LlmVerdict> score_batch(const std::vector<PromptRequest>& prompts,
                                    const EndpointConfig& endpoint, ReplayCache& cache,
                                    Transport* transport);

enum class RationaleTag {
    PatternMatch,
    KeywordTrigger,
    IrrelevantTolerated,
    SurfacePenalty,
    OverGeneralization,
    Other,
};

std::string_view to_string(RationaleTag tag);
RationaleTag parse_rationale_tag(std::string_view s);

struct KeywordRule {
    RationaleTag tag;
    std::vector<std::string> phrases;  // matched case-insensitively as substrings
};

const std::vector<KeywordRule>& default_rationale_rules();
std::vector<KeywordRule> rationale_rules_from_json(const nlohmann::json& j);

// One tag set per verdict, index-aligned. Parse failures and unmatched or
// empty rationales get Other.
std::vector<std::set<RationaleTag>> tag_rationales(const std::vector<LlmVerdict>& verdicts,
                                                   const std::vector<KeywordRule>& rules);

struct LlmRun {
    std::vector<LlmVerdict> verdicts;
    std::vector<std::set<RationaleTag>> tags;
    MetricsReport report;
};

// One prompt per corpus response, in corpus order.
std::vector<PromptRequest> build_prompts(const Corpus& corpus, const PromptTemplate& t);

LlmRun run_llm_judge(const Corpus& corpus, const PromptTemplate& t, const EndpointConfig& endpoint,
                     ReplayCache& cache, Transport* transport, const std::vector<KeywordRule>& rules);

// One record per verdict: response_id, label, parse_failed, cached, tags, rationale.
std::string verdicts_to_jsonl(const LlmRun& run);

// Confusion counts and rates per group plus tag counts over all verdicts.
nlohmann::ordered_json llm_metrics_json(const LlmRun& run);

}  // namespace asag::llm
