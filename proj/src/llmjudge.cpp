#include "asag/llmjudge.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "asag/error.hpp"
#include "asag/hashing.hpp"
#include "asag/text.hpp"

namespace asag::llm {

std::string_view to_string(PromptStrategy s) {
    switch (s) {
        case PromptStrategy::P1_QuestionResponse: return "p1";
        case PromptStrategy::P2_QuestionExamplesResponse: return "p2";
        case PromptStrategy::P3_ExamplesOnlyResponse: return "p3";
    }
    return "p1";
}

PromptStrategy parse_prompt_strategy(std::string_view s) {
    const auto v = text::casefold(s);
    if (v == "p1") return PromptStrategy::P1_QuestionResponse;
    if (v == "p2") return PromptStrategy::P2_QuestionExamplesResponse;
    if (v == "p3") return PromptStrategy::P3_ExamplesOnlyResponse;
    fail(ErrorCode::InvalidArgument, "unknown prompt strategy '" + std::string(s) + "' (p1|p2|p3)");
}

namespace {

constexpr std::string_view kStem = "{stem}";
constexpr std::string_view kLeadIn = "{lead_in}";
constexpr std::string_view kExamples = "{correct_examples}";
constexpr std::string_view kResponse = "{response}";

bool uses(const std::string& t, std::string_view placeholder) {
    return t.find(placeholder) != std::string::npos;
}

constexpr const char* kOutputContract =
    "Reply with exactly two lines and nothing else:\n"
    "SCORE: correct   (or SCORE: incorrect)\n"
    "RATIONALE: <one sentence explaining the score>\n";

}  // namespace

void PromptTemplate::validate() const {
    std::vector<std::string_view> required = {kResponse};
    switch (strategy) {
        case PromptStrategy::P1_QuestionResponse:
            if (uses(text, kExamples)) fail(ErrorCode::InvalidArgument, "p1 template must not use {correct_examples}");
            required.insert(required.end(), {kStem, kLeadIn});
            break;
        case PromptStrategy::P2_QuestionExamplesResponse:
            required.insert(required.end(), {kStem, kLeadIn, kExamples});
            break;
        case PromptStrategy::P3_ExamplesOnlyResponse:
            if (uses(text, kStem) || uses(text, kLeadIn)) {
                fail(ErrorCode::InvalidArgument, "p3 template must not use {stem} or {lead_in}");
            }
            required.push_back(kExamples);
            break;
    }
    for (auto p : required) {
        if (!uses(text, p)) {
            fail(ErrorCode::InvalidArgument, std::string(to_string(strategy)) +
                                                 " template is missing " + std::string(p));
        }
    }
}

PromptTemplate default_template(PromptStrategy strategy) {
    std::string body = "You are scoring an examinee's answer to a short-answer question from a "
                       "medical examination.\n\n";
    switch (strategy) {
        case PromptStrategy::P1_QuestionResponse:
            body += "Clinical vignette:\n{stem}\n\nQuestion:\n{lead_in}\n\n"
                    "Examinee response:\n{response}\n\n"
                    "Score the response, given the question. ";
            break;
        case PromptStrategy::P2_QuestionExamplesResponse:
            body += "Clinical vignette:\n{stem}\n\nQuestion:\n{lead_in}\n\n"
                    "Examples of correct answers:\n{correct_examples}\n\n"
                    "Examinee response:\n{response}\n\n"
                    "Score the examinee's response. ";
            break;
        case PromptStrategy::P3_ExamplesOnlyResponse:
            body += "Examples of correct answers:\n{correct_examples}\n\n"
                    "Examinee response:\n{response}\n\n"
                    "Score the examinee's response. ";
            break;
    }
    body += kOutputContract;
    return PromptTemplate{strategy, body};
}

std::string render_prompt(const PromptTemplate& t, const Item& item, const Response& response) {
    t.validate();
    if (text::trim(response.text).empty()) {
        fail(ErrorCode::InvalidArgument, "render_prompt: response " + response.response_id + " is empty");
    }
    auto need = [&](std::string_view placeholder, const std::string& value) {
        if (uses(t.text, placeholder) && text::trim(value).empty()) {
            fail(ErrorCode::InvalidArgument, "render_prompt: item " + item.item_id + " has no data for " +
                                                 std::string(placeholder));
        }
    };
    need(kStem, item.stem);
    need(kLeadIn, item.lead_in);
    std::string examples;
    for (const auto& a : item.correct_answers) examples += "- " + text::trim(a) + "\n";
    if (!examples.empty()) examples.pop_back();
    need(kExamples, examples);

    // Single left-to-right pass so substituted text is never re-expanded.
    std::string out;
    out.reserve(t.text.size() + item.stem.size() + response.text.size());
    std::size_t i = 0;
    while (i < t.text.size()) {
        if (t.text[i] == '{') {
            const std::string_view rest(t.text.data() + i, t.text.size() - i);
            const std::pair<std::string_view, const std::string*> subs[] = {
                {kStem, &item.stem}, {kLeadIn, &item.lead_in}, {kExamples, &examples}};
            bool replaced = false;
            for (const auto& [ph, value] : subs) {
                if (rest.substr(0, ph.size()) == ph) {
                    out += text::trim(*value);
                    i += ph.size();
                    replaced = true;
                    break;
                }
            }
            if (!replaced && rest.substr(0, kResponse.size()) == kResponse) {
                out += text::trim(response.text);
                i += kResponse.size();
                replaced = true;
            }
            if (replaced) continue;
        }
        out.push_back(t.text[i++]);
    }
    return out;
}

namespace {

// Markdown and quoting around a line; closing punctuation too unless keep_punct.
std::string strip_decoration(std::string_view s, bool keep_punct = false) {
    std::string t = text::trim(s);
    std::size_t b = 0;
    while (b < t.size() && std::string_view("*#>`_- \t\"'").find(t[b]) != std::string_view::npos) ++b;
    const std::string_view tail = keep_punct ? "*`_ \t\"'" : "*`_ \t\"'.!";
    std::size_t e = t.size();
    while (e > b && tail.find(t[e - 1]) != std::string_view::npos) --e;
    return t.substr(b, e - b);
}

// Returns the text after "<key>:" (or "<key>=") when the line starts with key.
std::optional<std::string> field_value(const std::string& line, std::string_view key) {
    const std::string folded = text::casefold(line);
    if (folded.compare(0, key.size(), key) != 0) return std::nullopt;
    std::size_t i = key.size();
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '*')) ++i;
    if (i >= line.size() || (line[i] != ':' && line[i] != '=')) return std::nullopt;
    return text::trim(std::string_view(line).substr(i + 1));
}

ParsedOutput parse_output_impl(std::string_view raw) {
    ParsedOutput out;
    std::optional<Label> score;
    bool conflict = false;
    bool rationale_open = false;
    std::vector<std::string> rationale_lines;

    std::size_t pos = 0;
    while (pos <= raw.size()) {
        auto nl = raw.find('\n', pos);
        std::string_view line = raw.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? raw.size() + 1 : nl + 1;
        const std::string clean = strip_decoration(line);
        if (clean.empty()) continue;

        if (auto value = field_value(clean, "score")) {
            rationale_open = false;
            std::string v = *value;
            // Tolerate "SCORE: correct RATIONALE: ..." on one line.
            const auto folded = text::casefold(v);
            if (auto r = folded.find("rationale"); r != std::string::npos) {
                if (auto rv = field_value(v.substr(r), "rationale")) rationale_lines.push_back(*rv);
                v = v.substr(0, r);
            }
            const std::string verdict = text::casefold(strip_decoration(v));
            std::optional<Label> this_score;
            if (verdict == "correct") this_score = Label::Correct;
            else if (verdict == "incorrect") this_score = Label::Incorrect;
            if (!this_score || (score && *score != *this_score)) conflict = true;
            if (this_score && !score) score = this_score;
            continue;
        }
        if (auto value = field_value(strip_decoration(line, true), "rationale")) {
            rationale_open = true;
            if (!value->empty()) rationale_lines.push_back(*value);
            continue;
        }
        if (rationale_open) rationale_lines.push_back(text::trim(line));
    }
    out.rationale = text::join(rationale_lines, " ");
    if (!score || conflict) {
        out.parse_failed = true;
        out.label = Label::Incorrect;
    } else {
        out.label = *score;
    }
    return out;
}

}  // namespace

ParsedOutput parse_output(std::string_view raw) noexcept {
    try {
        return parse_output_impl(raw);
    } catch (...) {
        ParsedOutput failed;
        failed.parse_failed = true;
        return failed;
    }
}

nlohmann::json to_json(const EndpointConfig& c) {
    return {{"url", c.url},
            {"model", c.model},
            {"api_style", c.api_style == ApiStyle::Chat ? "chat" : "completion"},
            {"temperature", c.temperature},
            {"max_tokens", c.max_tokens},
            {"api_key_env", c.api_key_env},
            {"max_retries", c.max_retries},
            {"backoff_initial_ms", c.backoff_initial_ms},
            {"timeout_seconds", c.timeout_seconds},
            {"max_in_flight", c.max_in_flight}};
}

EndpointConfig endpoint_config_from_json(const nlohmann::json& j) {
    EndpointConfig c;
    c.url = j.value("url", c.url);
    c.model = j.value("model", c.model);
    const auto style = j.value("api_style", std::string("chat"));
    if (style == "chat") c.api_style = ApiStyle::Chat;
    else if (style == "completion") c.api_style = ApiStyle::Completion;
    else fail(ErrorCode::InvalidArgument, "api_style must be chat or completion");
    c.temperature = j.value("temperature", c.temperature);
    c.max_tokens = j.value("max_tokens", c.max_tokens);
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.backoff_initial_ms = j.value("backoff_initial_ms", c.backoff_initial_ms);
    c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    if (c.max_in_flight < 1) fail(ErrorCode::InvalidArgument, "max_in_flight must be >= 1");
    if (c.max_retries < 0) fail(ErrorCode::InvalidArgument, "max_retries must be >= 0");
    return c;
}

nlohmann::json HttpTransport::request_body(const EndpointConfig& cfg, const std::string& prompt) {
    nlohmann::json body;
    body["model"] = cfg.model;
    if (cfg.api_style == ApiStyle::Chat) {
        body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", prompt}}});
    } else {
        body["prompt"] = prompt;
    }
    body["temperature"] = cfg.temperature;
    body["max_tokens"] = cfg.max_tokens;
    return body;
}

std::string HttpTransport::extract_text(const nlohmann::json& body) {
    if (body.contains("choices") && body["choices"].is_array() && !body["choices"].empty()) {
        const auto& choice = body["choices"][0];
        if (choice.contains("message") && choice["message"].contains("content") &&
            choice["message"]["content"].is_string()) {
            return choice["message"]["content"].get<std::string>();
        }
        if (choice.contains("text") && choice["text"].is_string()) return choice["text"].get<std::string>();
    }
    if (body.contains("content") && body["content"].is_string()) return body["content"].get<std::string>();
    fail(ErrorCode::Transport, "endpoint response has no completion text");
}

std::string HttpTransport::complete(const EndpointConfig& cfg, const std::string& prompt) {
    const auto scheme_end = cfg.url.find("://");
    if (scheme_end == std::string::npos) fail(ErrorCode::InvalidArgument, "endpoint url needs a scheme: " + cfg.url);
    const auto path_start = cfg.url.find('/', scheme_end + 3);
    const std::string origin = cfg.url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : cfg.url.substr(path_start);

    httplib::Client client(origin);
    client.set_connection_timeout(cfg.timeout_seconds, 0);
    client.set_read_timeout(cfg.timeout_seconds, 0);
    httplib::Headers headers;
    if (!cfg.api_key_env.empty()) {
        if (const char* key = std::getenv(cfg.api_key_env.c_str()); key != nullptr && *key != '\0') {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }
    auto res = client.Post(path, headers, request_body(cfg, prompt).dump(), "application/json");
    if (!res) {
        fail(ErrorCode::Transport, "request to " + cfg.url + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        fail(ErrorCode::Transport, "endpoint returned HTTP " + std::to_string(res->status));
    }
    try {
        return extract_text(nlohmann::json::parse(res->body));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Transport, std::string("endpoint returned malformed JSON: ") + e.what());
    }
}

ReplayCache::ReplayCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::string ReplayCache::key(std::string_view model, std::string_view prompt) {
    std::string material(model);
    material.push_back('\0');
    material.append(prompt);
    return sha256_hex(material);
}

std::optional<std::string> ReplayCache::lookup(const std::string& key) const {
    const auto path = dir_ / (key + ".json");
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    try {
        const auto j = nlohmann::json::parse(read_file(path));
        return j.at("raw_output").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, "corrupt cache entry " + path.string() + ": " + e.what());
    }
}

void ReplayCache::store(const std::string& key, std::string_view model, std::string_view prompt,
                        std::string_view raw_output) {
    nlohmann::ordered_json j;
    j["key"] = key;
    j["model"] = model;
    j["prompt"] = prompt;
    j["raw_output"] = raw_output;
    std::lock_guard<std::mutex> lock(write_mutex_);
    const auto final_path = dir_ / (key + ".json");
    const auto tmp_path = dir_ / (key + ".json.tmp");
    write_file(tmp_path, j.dump(2) + "\n");
    std::filesystem::rename(tmp_path, final_path);
}

std::vector<LlmVerdict> score_batch(const std::vector<PromptRequest>& prompts,
                                    const EndpointConfig& endpoint, ReplayCache& cache,
                                    Transport* transport) {
    std::vector<LlmVerdict> verdicts(prompts.size());
    std::vector<std::string> keys(prompts.size());
    std::vector<std::size_t> misses;
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        keys[i] = ReplayCache::key(endpoint.model, prompts[i].prompt);
        verdicts[i].response_id = prompts[i].response_id;
        if (auto hit = cache.lookup(keys[i])) {
            verdicts[i].raw_output = std::move(*hit);
            verdicts[i].cached = true;
        } else {
            misses.push_back(i);
        }
    }
    if (!misses.empty() && transport == nullptr) {
        fail(ErrorCode::Transport, std::to_string(misses.size()) +
                                       " prompt(s) are not cached and no endpoint is available");
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::optional<Error> first_error;
    auto worker = [&] {
        while (true) {
            const std::size_t slot = next.fetch_add(1);
            if (slot >= misses.size()) return;
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error) return;
            }
            const std::size_t i = misses[slot];
            int delay_ms = endpoint.backoff_initial_ms;
            for (int attempt = 0;; ++attempt) {
                try {
                    std::string raw = transport->complete(endpoint, prompts[i].prompt);
                    cache.store(keys[i], endpoint.model, prompts[i].prompt, raw);
                    verdicts[i].raw_output = std::move(raw);
                    break;
                } catch (const std::exception& e) {
                    if (attempt >= endpoint.max_retries) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) {
                            first_error.emplace(ErrorCode::Transport,
                                                "prompt for " + prompts[i].response_id + " failed after " +
                                                    std::to_string(attempt + 1) + " attempt(s): " + e.what());
                        }
                        return;
                    }
                    std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
                    delay_ms *= 2;
                }
            }
        }
    };
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(endpoint.max_in_flight), misses.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) throw *first_error;

    for (auto& v : verdicts) {
        const auto parsed = parse_output(v.raw_output);
        v.label = parsed.label;
        v.rationale = parsed.rationale;
        v.parse_failed = parsed.parse_failed;
    }
    return verdicts;
}

std::string_view to_string(RationaleTag tag) {
    switch (tag) {
        case RationaleTag::PatternMatch: return "PatternMatch";
        case RationaleTag::KeywordTrigger: return "KeywordTrigger";
        case RationaleTag::IrrelevantTolerated: return "IrrelevantTolerated";
        case RationaleTag::SurfacePenalty: return "SurfacePenalty";
        case RationaleTag::OverGeneralization: return "OverGeneralization";
        case RationaleTag::Other: return "Other";
    }
    return "Other";
}

RationaleTag parse_rationale_tag(std::string_view s) {
    for (auto t : {RationaleTag::PatternMatch, RationaleTag::KeywordTrigger, RationaleTag::IrrelevantTolerated,
                   RationaleTag::SurfacePenalty, RationaleTag::OverGeneralization, RationaleTag::Other}) {
        if (to_string(t) == s) return t;
    }
    fail(ErrorCode::InvalidArgument, "unknown rationale tag '" + std::string(s) + "'");
}

const std::vector<KeywordRule>& default_rationale_rules() {
    static const std::vector<KeywordRule> rules = {
        {RationaleTag::PatternMatch,
         {"matches the expected", "aligns with the intended", "expected correct", "matches the correct",
          "consistent with the expected", "expected pattern", "expected diagnosis"}},
        {RationaleTag::KeywordTrigger,
         {"keyword", "key term", "presence of", "key descriptor", "mentions", "contains the term"}},
        {RationaleTag::IrrelevantTolerated,
         {"irrelevant", "do not negate", "does not negate", "extra information", "alongside",
          "additional diagnos"}},
        {RationaleTag::SurfacePenalty, {"misspell", "spelling", "typo", "grammatical"}},
        {RationaleTag::OverGeneralization,
         {"vague", "too general", "general category", "broad", "encompasses", "nonspecific", "non-specific"}},
    };
    return rules;
}

std::vector<KeywordRule> rationale_rules_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.empty()) fail(ErrorCode::InvalidArgument, "rationale rules must be a non-empty object");
    std::vector<KeywordRule> rules;
    for (const auto& [name, phrases] : j.items()) {
        KeywordRule rule{parse_rationale_tag(name), {}};
        for (const auto& p : phrases) rule.phrases.push_back(text::casefold(p.get<std::string>()));
        rules.push_back(std::move(rule));
    }
    return rules;
}

std::vector<std::set<RationaleTag>> tag_rationales(const std::vector<LlmVerdict>& verdicts,
                                                   const std::vector<KeywordRule>& rules) {
    if (rules.empty()) fail(ErrorCode::InvalidArgument, "tag_rationales: empty rule table");
    std::vector<std::set<RationaleTag>> out;
    out.reserve(verdicts.size());
    for (const auto& v : verdicts) {
        std::set<RationaleTag> tags;
        const std::string folded = text::casefold(v.rationale);
        if (!v.parse_failed && !text::trim(folded).empty()) {
            for (const auto& rule : rules) {
                for (const auto& phrase : rule.phrases) {
                    if (folded.find(text::casefold(phrase)) != std::string::npos) {
                        tags.insert(rule.tag);
                        break;
                    }
                }
            }
        }
        if (tags.empty()) tags.insert(RationaleTag::Other);
        out.push_back(std::move(tags));
    }
    return out;
}

std::vector<PromptRequest> build_prompts(const Corpus& corpus, const PromptTemplate& t) {
    t.validate();
    std::vector<PromptRequest> out;
    out.reserve(corpus.responses().size());
    for (const auto& r : corpus.responses()) {
        out.push_back({r.response_id, render_prompt(t, corpus.item(r.item_id), r)});
    }
    return out;
}

LlmRun run_llm_judge(const Corpus& corpus, const PromptTemplate& t, const EndpointConfig& endpoint,
                     ReplayCache& cache, Transport* transport, const std::vector<KeywordRule>& rules) {
    LlmRun run;
    run.verdicts = score_batch(build_prompts(corpus, t), endpoint, cache, transport);
    run.tags = tag_rationales(run.verdicts, rules);
    std::vector<Label> labels;
    labels.reserve(run.verdicts.size());
    for (const auto& v : run.verdicts) labels.push_back(v.label);
    run.report = confusion_from_labels(corpus.responses(), labels);
    return run;
}

namespace {

nlohmann::ordered_json tag_list(const std::set<RationaleTag>& tags) {
    auto out = nlohmann::ordered_json::array();
    for (auto t : tags) out.push_back(std::string(to_string(t)));
    return out;
}

}  // namespace

std::string verdicts_to_jsonl(const LlmRun& run) {
    std::string out;
    for (std::size_t i = 0; i < run.verdicts.size(); ++i) {
        const auto& v = run.verdicts[i];
        nlohmann::ordered_json j;
        j["response_id"] = v.response_id;
        j["label"] = std::string(to_string(v.label));
        j["parse_failed"] = v.parse_failed;
        j["cached"] = v.cached;
        j["tags"] = tag_list(run.tags[i]);
        j["rationale"] = v.rationale;
        out += j.dump() + "\n";
    }
    return out;
}

nlohmann::ordered_json llm_metrics_json(const LlmRun& run) {
    nlohmann::ordered_json out;
    out["responses"] = run.verdicts.size();
    std::size_t failures = 0;
    for (const auto& v : run.verdicts) failures += v.parse_failed ? 1 : 0;
    out["parse_failures"] = failures;
    out["groups"] = nlohmann::ordered_json::parse(to_json(run.report).dump());
    std::map<std::string, std::size_t> counts;
    for (auto t : {RationaleTag::PatternMatch, RationaleTag::KeywordTrigger, RationaleTag::IrrelevantTolerated,
                   RationaleTag::SurfacePenalty, RationaleTag::OverGeneralization, RationaleTag::Other}) {
        counts[std::string(to_string(t))] = 0;
    }
    for (const auto& tags : run.tags) {
        for (auto t : tags) ++counts[std::string(to_string(t))];
    }
    out["tag_counts"] = counts;
    return out;
}

}  // namespace asag::llm
