#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "asag/error.hpp"
#include "asag/hashing.hpp"
#include "asag/llmjudge.hpp"
#include "oracles.hpp"

using namespace asag;
using namespace asag::llm;
using nlohmann::json;

namespace {

const Item kItem = {"gbs", "A man has weakness.", "What is the most likely diagnosis?",
                    {"Guillain-Barré syndrome", " GBS "}};

Response resp(const std::string& id, const std::string& text) {
    return {id, "gbs", text, Label::Incorrect, Provenance::Real};
}

// Returns canned replies keyed by prompt; the first `failures` calls per
// prompt throw.
class FakeTransport : public Transport {
public:
    explicit FakeTransport(int failures) : failures_(failures) {}

    std::string complete(const EndpointConfig&, const std::string& prompt) override {
        std::lock_guard<std::mutex> lock(mu_);
        ++calls_[prompt];
        if (calls_[prompt] <= failures_) throw Error(ErrorCode::Transport, "simulated outage");
        return "SCORE: " + std::string(prompt.find("right") != std::string::npos ? "correct" : "incorrect") +
               "\nRATIONALE: reply for " + prompt.substr(prompt.size() - 8);
    }
    int calls(const std::string& prompt) {
        std::lock_guard<std::mutex> lock(mu_);
        return calls_[prompt];
    }
    int total() {
        std::lock_guard<std::mutex> lock(mu_);
        int n = 0;
        for (const auto& [p, c] : calls_) n += c;
        return n;
    }

private:
    int failures_;
    std::mutex mu_;
    std::map<std::string, int> calls_;
};

EndpointConfig fast_endpoint() {
    EndpointConfig e;
    e.backoff_initial_ms = 1;
    e.max_retries = 2;
    return e;
}

}  // namespace

TEST(LlmParse, AcceptsContractForms) {
    auto p = parse_output("SCORE: correct\nRATIONALE: Names the diagnosis.");
    EXPECT_EQ(p.label, Label::Correct);
    EXPECT_FALSE(p.parse_failed);
    EXPECT_EQ(p.rationale, "Names the diagnosis.");

    p = parse_output("**Score:** Incorrect\n\n**Rationale:**\nToo vague\nto accept.");
    EXPECT_EQ(p.label, Label::Incorrect);
    EXPECT_FALSE(p.parse_failed);
    EXPECT_EQ(p.rationale, "Too vague to accept.");

    p = parse_output("SCORE: correct RATIONALE: one line");
    EXPECT_EQ(p.label, Label::Correct);
    EXPECT_EQ(p.rationale, "one line");

    p = parse_output("score = correct\r\nrationale: crlf\r\n");
    EXPECT_EQ(p.label, Label::Correct);
    EXPECT_EQ(p.rationale, "crlf");
}

TEST(LlmParse, FailuresScoreIncorrect) {
    for (const char* raw : {"", "correct", "SCORE: maybe correct", "SCORE: correct\nSCORE: incorrect",
                            "SCORE: partially correct", "RATIONALE: no score", "SCORES: correct"}) {
        const auto p = parse_output(raw);
        EXPECT_TRUE(p.parse_failed) << raw;
        EXPECT_EQ(p.label, Label::Incorrect) << raw;
    }
    // A repeated identical score is not a conflict.
    EXPECT_FALSE(parse_output("SCORE: correct\nSCORE: correct").parse_failed);
}

TEST(LlmParse, AdversarialFixture) {
    std::ifstream in(std::string(ASAG_FIXTURES) + "/llm/adversarial.jsonl");
    ASSERT_TRUE(in);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto rec = json::parse(line);
        const auto p = parse_output(rec["raw"].get<std::string>());
        EXPECT_EQ(p.parse_failed, rec["parse_failed"].get<bool>()) << line;
        EXPECT_EQ(std::string(to_string(p.label)), rec["label"].get<std::string>()) << line;
        ++n;
    }
    EXPECT_EQ(n, 50);
}

TEST(LlmPrompt, TemplatesValidateAndRender) {
    for (auto s : {PromptStrategy::P1_QuestionResponse, PromptStrategy::P2_QuestionExamplesResponse,
                   PromptStrategy::P3_ExamplesOnlyResponse}) {
        EXPECT_NO_THROW(default_template(s).validate());
        EXPECT_EQ(parse_prompt_strategy(to_string(s)), s);
    }
    EXPECT_THROW(parse_prompt_strategy("p4"), Error);
    EXPECT_THROW((PromptTemplate{PromptStrategy::P1_QuestionResponse, "{stem}{lead_in}{response}{correct_examples}"}.validate()),
                 Error);
    EXPECT_THROW((PromptTemplate{PromptStrategy::P3_ExamplesOnlyResponse, "{stem}{correct_examples}{response}"}.validate()),
                 Error);
    EXPECT_THROW((PromptTemplate{PromptStrategy::P2_QuestionExamplesResponse, "{stem}{lead_in}{response}"}.validate()),
                 Error);

    const PromptTemplate t{PromptStrategy::P2_QuestionExamplesResponse, "S={stem}|Q={lead_in}|E={correct_examples}|R={response}"};
    EXPECT_EQ(render_prompt(t, kItem, resp("r", "  {stem} literally ")),
              "S=A man has weakness.|Q=What is the most likely diagnosis?|E=- Guillain-Barré syndrome\n- GBS|R={stem} literally");
    EXPECT_THROW(render_prompt(t, kItem, resp("r", "   ")), Error);
}

TEST(LlmCache, KeysAreDistinctAndStable) {
    std::set<std::string> keys;
    for (int i = 0; i < 10000; ++i) keys.insert(ReplayCache::key("gpt-4", "prompt " + std::to_string(i)));
    EXPECT_EQ(keys.size(), 10000u);
    // The separator keeps (model, prompt) boundaries unambiguous.
    EXPECT_NE(ReplayCache::key("ab", "c"), ReplayCache::key("a", "bc"));
    EXPECT_EQ(ReplayCache::key("m", "p"), sha256_hex(std::string("m\0p", 3)));
}

TEST(LlmCache, StoreAndLookup) {
    oracle::TempDir tmp("cache");
    ReplayCache cache(tmp.path());
    const auto k = ReplayCache::key("m", "p");
    EXPECT_FALSE(cache.lookup(k));
    cache.store(k, "m", "p", "SCORE: correct");
    EXPECT_EQ(cache.lookup(k), "SCORE: correct");
    write_file(tmp.path() / (ReplayCache::key("m", "bad") + ".json"), "{oops");
    EXPECT_THROW(cache.lookup(ReplayCache::key("m", "bad")), Error);
}

TEST(LlmBatch, OfflineMissIsTransportError) {
    oracle::TempDir tmp("offline");
    ReplayCache cache(tmp.path());
    try {
        score_batch({{"r1", "p1"}}, EndpointConfig{}, cache, nullptr);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Transport);
    }
}

TEST(LlmBatch, RetriesKeepOrderAndFillCache) {
    oracle::TempDir tmp("batch");
    ReplayCache cache(tmp.path());
    std::vector<PromptRequest> prompts;
    for (int i = 0; i < 40; ++i) {
        prompts.push_back({"r" + std::to_string(i), (i % 3 ? "wrong #" : "right #") + std::to_string(1000000 + i)});
    }
    FakeTransport flaky(2);
    const auto first = score_batch(prompts, fast_endpoint(), cache, &flaky);
    ASSERT_EQ(first.size(), prompts.size());
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        EXPECT_EQ(first[i].response_id, prompts[i].response_id);
        EXPECT_FALSE(first[i].cached);
        EXPECT_EQ(first[i].label, i % 3 ? Label::Incorrect : Label::Correct);
        EXPECT_EQ(first[i].rationale, "reply for #" + std::to_string(1000000 + i));
        EXPECT_EQ(flaky.calls(prompts[i].prompt), 3);
    }

    // Second pass replays from the cache without touching the transport.
    FakeTransport untouched(0);
    const auto second = score_batch(prompts, fast_endpoint(), cache, &untouched);
    EXPECT_EQ(untouched.total(), 0);
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        EXPECT_TRUE(second[i].cached);
        EXPECT_EQ(second[i].raw_output, first[i].raw_output);
    }
}

TEST(LlmBatch, GivesUpAfterMaxRetries) {
    oracle::TempDir tmp("giveup");
    ReplayCache cache(tmp.path());
    FakeTransport down(100);
    try {
        score_batch({{"r1", "wrong 12345678"}}, fast_endpoint(), cache, &down);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Transport);
    }
    EXPECT_EQ(down.calls("wrong 12345678"), 3);  // one try plus two retries
}

TEST(LlmTags, RulesAndFallback) {
    std::vector<LlmVerdict> v(4);
    v[0].rationale = "The presence of keywords matches the expected answer.";
    v[1].rationale = "Contains a spelling error.";
    v[2].rationale = "";
    v[3].rationale = "matches the expected answer";
    v[3].parse_failed = true;
    const auto tags = tag_rationales(v, default_rationale_rules());
    EXPECT_EQ(tags[0], (std::set<RationaleTag>{RationaleTag::PatternMatch, RationaleTag::KeywordTrigger}));
    EXPECT_EQ(tags[1], (std::set<RationaleTag>{RationaleTag::SurfacePenalty}));
    EXPECT_EQ(tags[2], (std::set<RationaleTag>{RationaleTag::Other}));
    EXPECT_EQ(tags[3], (std::set<RationaleTag>{RationaleTag::Other}));

    const auto custom = rationale_rules_from_json(json::parse(R"({"OverGeneralization": ["ERROR"]})"));
    EXPECT_EQ(tag_rationales(v, custom)[1], (std::set<RationaleTag>{RationaleTag::OverGeneralization}));
    EXPECT_THROW(rationale_rules_from_json(json::parse(R"({"Nope": ["x"]})")), Error);
    EXPECT_THROW(tag_rationales(v, {}), Error);
}

TEST(LlmEndpoint, JsonRoundTripAndValidation) {
    EndpointConfig e;
    e.model = "m";
    e.api_style = ApiStyle::Completion;
    const auto back = endpoint_config_from_json(to_json(e));
    EXPECT_EQ(to_json(back), to_json(e));
    EXPECT_THROW(endpoint_config_from_json(json::parse(R"({"api_style":"grpc"})")), Error);
    EXPECT_THROW(endpoint_config_from_json(json::parse(R"({"max_in_flight":0})")), Error);
}

TEST(LlmHttp, TalksToOpenAiStyleEndpoint) {
    httplib::Server server;
    std::atomic<int> hits{0};
    std::string seen_auth;
    json seen_body;
    std::mutex mu;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        if (hits.fetch_add(1) == 0) {
            res.status = 503;
            return;
        }
        std::lock_guard<std::mutex> lock(mu);
        seen_auth = req.get_header_value("Authorization");
        seen_body = json::parse(req.body);
        res.set_content(R"({"choices":[{"message":{"content":"SCORE: correct\nRATIONALE: ok"}}]})", "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    setenv("ASAG_TEST_KEY", "sekrit", 1);
    EndpointConfig e = fast_endpoint();
    e.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    e.api_key_env = "ASAG_TEST_KEY";
    e.timeout_seconds = 5;
    oracle::TempDir tmp("http");
    ReplayCache cache(tmp.path());
    HttpTransport http;
    const auto out = score_batch({{"r1", "the prompt"}}, e, cache, &http);
    server.stop();
    th.join();

    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].label, Label::Correct);
    EXPECT_EQ(hits.load(), 2);  // 503 then success
    EXPECT_EQ(seen_auth, "Bearer sekrit");
    EXPECT_EQ(seen_body["messages"][0]["content"], "the prompt");
    EXPECT_EQ(seen_body["model"], "gpt-4");
    EXPECT_EQ(seen_body["temperature"], 0.0);
}

TEST(LlmHttp, ExtractText) {
    EXPECT_EQ(HttpTransport::extract_text(json::parse(R"({"choices":[{"text":"x"}]})")), "x");
    EXPECT_EQ(HttpTransport::extract_text(json::parse(R"({"content":"y"})")), "y");
    EXPECT_THROW(HttpTransport::extract_text(json::parse(R"({"choices":[]})")), Error);
    EndpointConfig e;
    e.api_style = ApiStyle::Completion;
    EXPECT_EQ(HttpTransport::request_body(e, "p")["prompt"], "p");
}

TEST(LlmRun, FixtureReproducesConfusionCounts) {
    const auto corpus = load_corpus(std::string(ASAG_FIXTURES) + "/llm/corpus.jsonl");
    ReplayCache cache(std::string(ASAG_FIXTURES) + "/llm/cache");
    const auto run = run_llm_judge(corpus, default_template(PromptStrategy::P1_QuestionResponse), EndpointConfig{},
                                   cache, nullptr, default_rationale_rules());
    ASSERT_EQ(run.verdicts.size(), 400u);
    for (const auto& v : run.verdicts) {
        EXPECT_TRUE(v.cached);
        EXPECT_FALSE(v.parse_failed) << v.raw_output;
    }
    EXPECT_EQ(*run.report.group("real"), (Confusion{62, 2, 31, 5}));
    EXPECT_EQ(*run.report.group("s1"), (Confusion{0, 11, 89, 0}));
    EXPECT_EQ(*run.report.group("s2"), (Confusion{0, 3, 97, 0}));
    EXPECT_EQ(*run.report.group("s3"), (Confusion{0, 1, 99, 0}));
    const auto m = llm_metrics_json(run);
    EXPECT_EQ(m["responses"], 400);
    EXPECT_EQ(m["parse_failures"], 0);
    EXPECT_GT(m["tag_counts"]["KeywordTrigger"].get<int>(), 0);
    EXPECT_GT(m["tag_counts"]["IrrelevantTolerated"].get<int>(), 0);
}
