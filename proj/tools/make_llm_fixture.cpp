// Builds the offline LLM-judge fixture: a 400-response corpus (100 real, 100
// per gaming strategy) and a replay cache whose raw outputs encode a fixed
// confusion matrix per group.
//
//   make_llm_fixture <out_dir>
//
// Group     sampled        scored correct
// real      67 correct     62 (5 false negatives)
//           33 incorrect    2 (false positives)
// s1        100            11
// s2        100             3
// s3        100             1
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "asag/corpus.hpp"
#include "asag/error.hpp"
#include "asag/llmjudge.hpp"
#include "asag/rng.hpp"
#include "asag/synthetic.hpp"

namespace fs = std::filesystem;
using namespace asag;

namespace {

// n responses whose (item, text) pair is not in `seen`, so every fixture
// prompt has its own cache entry.
std::vector<Response> draw(const std::vector<Response>& pool, std::size_t n, std::uint64_t seed,
                           std::set<std::pair<std::string, std::string>>& seen) {
    std::vector<std::size_t> order(pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<std::size_t> chosen;
    for (auto i : order) {
        if (chosen.size() == n) break;
        if (seen.insert({pool[i].item_id, pool[i].text}).second) chosen.push_back(i);
    }
    if (chosen.size() < n) fail(ErrorCode::Validation, "fixture pool has too few distinct responses");
    std::sort(chosen.begin(), chosen.end());
    std::vector<Response> out;
    for (auto i : chosen) out.push_back(pool[i]);
    return out;
}

const char* pick(const std::vector<const char*>& v, std::size_t i) { return v[i % v.size()]; }

// Layouts a chat model plausibly returns; every one parses to the intended label.
std::string render(bool correct, const std::string& rationale, std::size_t variant) {
    const std::string s = correct ? "correct" : "incorrect";
    switch (variant % 5) {
        case 0: return "SCORE: " + s + "\nRATIONALE: " + rationale;
        case 1: return "**SCORE:** " + s + "\n**RATIONALE:** " + rationale;
        case 2: return "Score: " + std::string(correct ? "Correct" : "Incorrect") + "\nRationale: " + rationale;
        case 3: return "SCORE: " + s + "\n\nRATIONALE:\n" + rationale;
        default: return "SCORE: " + s + " RATIONALE: " + rationale;
    }
}

const std::vector<const char*> kTruePositive = {
    "The response names the expected diagnosis.",
    "The answer matches the expected correct response.",
    "The response identifies the correct diagnosis; minor misspellings do not change its meaning.",
    "The diagnosis given is the intended one, and the extra findings cited are irrelevant parts that do not negate it.",
};
const std::vector<const char*> kFalseNegative = {
    "The response contains a spelling error in the diagnosis name, so it cannot be accepted.",
    "The answer is too vague to confirm the intended diagnosis.",
};
const std::vector<const char*> kRealFalsePositive = {
    "The response aligns with the intended correct pattern for this presentation.",
    "The response is broadly consistent with the expected diagnosis.",
};
const std::vector<const char*> kRealTrueNegative = {
    "The response names a different diagnosis than the one supported by the vignette.",
    "The stated diagnosis does not account for the key findings.",
};
const std::vector<const char*> kS1FalsePositive = {
    "The presence of specific keywords from the vignette matches key descriptors of the correct answer.",
    "The listed terms match the expected correct response pattern.",
};
const std::vector<const char*> kS1TrueNegative = {
    "The response copies words from the vignette and does not state a diagnosis.",
    "No diagnosis is given; the response is a fragment of the case description.",
};
const std::vector<const char*> kS2FalsePositive = {
    "The summary lists all the symptoms of the disease and aligns with the intended correct pattern.",
};
const std::vector<const char*> kS2TrueNegative = {
    "The response summarizes the case but does not commit to a diagnosis.",
    "A restatement of the clinical findings is not an answer to the question.",
};
const std::vector<const char*> kS3FalsePositive = {
    "The correct diagnosis is present and the additional diagnoses are irrelevant parts that do not negate it.",
};
const std::vector<const char*> kS3TrueNegative = {
    "The response lists several diagnoses; only one of them is correct, so it is scored incorrect.",
    "Multiple competing answers are given, which does not show the intended reasoning.",
};

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_llm_fixture <out_dir>\n";
        return 2;
    }
    try {
        const fs::path out = argv[1];
        const auto ref = synthetic::make_reference_dataset(42);
        const auto& data = ref.data;

        std::vector<Response> real_correct, real_incorrect;
        for (const auto& r : data.responses()) {
            if (r.provenance != Provenance::Real) continue;
            (r.gold_label == Label::Correct ? real_correct : real_incorrect).push_back(r);
        }
        std::set<std::pair<std::string, std::string>> seen;
        const auto rc = draw(real_correct, 67, 101, seen);
        const auto ri = draw(real_incorrect, 33, 102, seen);
        const auto s1 = draw(ref.pools.strategy(Strategy::S1), 100, 103, seen);
        const auto s2 = draw(ref.pools.s2, 100, 104, seen);
        const auto s3 = draw(ref.pools.s3, 100, 105, seen);

        struct Planned {
            Response response;
            bool scored_correct;
            std::string rationale;
        };
        std::vector<Planned> plan;
        auto add = [&](const std::vector<Response>& group, std::size_t n_correct,
                       const std::vector<const char*>& yes, const std::vector<const char*>& no) {
            // The first n_correct responses of each group are the ones scored correct.
            for (std::size_t i = 0; i < group.size(); ++i) {
                const bool scored = i < n_correct;
                plan.push_back({group[i], scored, scored ? pick(yes, i) : pick(no, i)});
            }
        };
        add(rc, 62, kTruePositive, kFalseNegative);
        add(ri, 2, kRealFalsePositive, kRealTrueNegative);
        add(s1, 11, kS1FalsePositive, kS1TrueNegative);
        add(s2, 3, kS2FalsePositive, kS2TrueNegative);
        add(s3, 1, kS3FalsePositive, kS3TrueNegative);

        std::vector<Response> responses;
        for (const auto& p : plan) responses.push_back(p.response);
        const Corpus fixture(data.items(), responses);
        fs::create_directories(out);
        save_corpus(fixture, out / "corpus.jsonl");

        const llm::EndpointConfig endpoint;
        llm::ReplayCache cache(out / "cache");
        const auto prompts = llm::build_prompts(fixture, llm::default_template(llm::PromptStrategy::P1_QuestionResponse));
        for (std::size_t i = 0; i < plan.size(); ++i) {
            const auto raw = render(plan[i].scored_correct, plan[i].rationale, i);
            cache.store(llm::ReplayCache::key(endpoint.model, prompts[i].prompt), endpoint.model, prompts[i].prompt,
                        raw);
        }
        std::printf("wrote %zu responses and cache entries to %s\n", plan.size(), out.string().c_str());
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "make_llm_fixture: " << e.what() << "\n";
        return 1;
    }
}
