#include <gtest/gtest.h>

#include <cctype>
#include <cmath>
#include <sstream>
#include <map>
#include <set>

#include "asag/error.hpp"
#include "asag/gaming.hpp"
#include "asag/synthetic.hpp"
#include "asag/text.hpp"

using namespace asag;
using namespace asag::gaming;

namespace {

const Item kItem = {"gbs",
                    "A 26-year-old man has tingling in his fingers and toes. He had an upper respiratory "
                    "infection 2 weeks ago.  Examination shows weakness and areflexia of all extremities.",
                    "What is the most likely diagnosis?",
                    {"Guillain-Barré syndrome", "GBS"}};

Lexicons lex() {
    Lexicons l;
    l.stop_words = {"a", "the", "of", "and", "in", "his", "he", "has", "had", "all", "an", "is"};
    l.medical_terms = {"tingling", "infection", "weakness", "areflexia", "respiratory", "guillain-barré"};
    return l;
}

std::string squash(const std::string& s) {
    std::string out;
    bool gap = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            gap = true;
            continue;
        }
        if (gap && !out.empty()) out.push_back(' ');
        gap = false;
        out.push_back(c);
    }
    return out;
}

}  // namespace

TEST(Gaming, S1NonConsecutiveInvariants) {
    const auto l = lex();
    GeneratorConfig cfg;
    cfg.seed = 1;
    const auto stem_tokens = text::tokenize(kItem.stem, &l.medical_terms);
    const auto out = gen_s1_nonconsecutive(kItem, cfg, l, 300);
    ASSERT_EQ(out.responses.size(), 300u);
    for (const auto& r : out.responses) {
        EXPECT_EQ(r.provenance, Provenance::GamingS1a);
        EXPECT_EQ(r.gold_label, Label::Incorrect);
        const auto toks = text::tokenize(r.text, &l.medical_terms);
        ASSERT_GE(toks.size(), 2u);
        ASSERT_LE(toks.size(), 12u);
        std::set<std::string> distinct(toks.begin(), toks.end());
        EXPECT_EQ(distinct.size(), toks.size()) << r.text;
        // Each token is a non-stop stem token, and first occurrences keep stem order.
        std::size_t last = 0;
        for (const auto& t : toks) {
            EXPECT_EQ(l.stop_words.count(t), 0u) << t;
            auto it = std::find(stem_tokens.begin(), stem_tokens.end(), t);
            ASSERT_NE(it, stem_tokens.end()) << t;
            const auto pos = static_cast<std::size_t>(it - stem_tokens.begin());
            EXPECT_GE(pos, last);
            last = pos;
        }
    }
}

TEST(Gaming, S1ConsecutiveIsContiguousStemWindow) {
    const auto l = lex();
    GeneratorConfig cfg;
    cfg.seed = 2;
    const auto stem = squash(kItem.stem);
    const auto stem_tokens = text::tokenize(kItem.stem, &l.medical_terms);
    for (const auto& r : gen_s1_consecutive(kItem, cfg, l, 300).responses) {
        EXPECT_NE(stem.find(r.text), std::string::npos) << r.text;
        const auto toks = text::tokenize(r.text, &l.medical_terms);
        ASSERT_GE(toks.size(), 2u);
        ASSERT_LE(toks.size(), 12u);
        EXPECT_NE(std::search(stem_tokens.begin(), stem_tokens.end(), toks.begin(), toks.end()), stem_tokens.end());
    }
}

TEST(Gaming, S1MedicalUsesOnlyListedStemTerms) {
    const auto l = lex();
    GeneratorConfig cfg;
    cfg.seed = 3;
    const auto out = gen_s1_medical(kItem, cfg, l, 200);
    ASSERT_EQ(out.responses.size(), 200u);
    std::set<std::string> used;
    for (const auto& r : out.responses) {
        const auto toks = text::tokenize(r.text, &l.medical_terms);
        ASSERT_FALSE(toks.empty());
        ASSERT_LE(toks.size(), 5u);  // only five listed terms occur in the stem
        for (const auto& t : toks) {
            EXPECT_EQ(l.medical_terms.count(t), 1u) << t;
            EXPECT_NE(t, "guillain-barré");
            used.insert(t);
        }
    }
    EXPECT_EQ(used.size(), 5u);
}

TEST(Gaming, S1WarnsWhenStemIsTooShort) {
    Lexicons l;
    l.medical_terms = {"sepsis"};
    Item tiny = {"tiny", "Fever.", "Dx?", {"flu"}};
    GeneratorConfig cfg;
    EXPECT_TRUE(gen_s1_nonconsecutive(tiny, cfg, l, 5).responses.empty());
    EXPECT_EQ(gen_s1_nonconsecutive(tiny, cfg, l, 5).warnings.size(), 1u);
    EXPECT_TRUE(gen_s1_consecutive(tiny, cfg, l, 5).responses.empty());
    EXPECT_TRUE(gen_s1_medical(tiny, cfg, l, 5).responses.empty());
}

TEST(Gaming, SummaryPicksTopScoringSentencesInStemOrder) {
    Lexicons l;
    const Item item = {"x", "Fever fever cough. Rash. Fever cough rash.", "Dx?", {"y"}};
    const auto scores = summary_sentence_scores(item.stem, l);
    ASSERT_EQ(scores.size(), 3u);
    EXPECT_DOUBLE_EQ(scores[0], 8.0 / 3.0);
    EXPECT_DOUBLE_EQ(scores[1], 2.0);
    EXPECT_DOUBLE_EQ(scores[2], 7.0 / 3.0);
    GeneratorConfig cfg;
    const auto r = gen_s2_summary(item, cfg, l);
    EXPECT_EQ(r.text, "Fever fever cough. Fever cough rash.");
    EXPECT_EQ(r.provenance, Provenance::GamingS2);
    cfg.summary_sentence_count = 10;
    EXPECT_EQ(gen_s2_summary(item, cfg, l).text, item.stem);
}

TEST(Gaming, MixedResponsesHoldOneCorrectAndOneIncorrectPart) {
    std::vector<Response> pool;
    for (int i = 0; i < 5; ++i) {
        pool.push_back({"inc" + std::to_string(i), "gbs", "  wrong answer " + std::to_string(i) + " ",
                        Label::Incorrect, Provenance::Real});
    }
    GeneratorConfig cfg;
    cfg.seed = 4;
    std::size_t correct_first = 0;
    const auto out = gen_s3_mixed(kItem, pool, cfg, 400);
    ASSERT_EQ(out.responses.size(), 400u);
    for (const auto& r : out.responses) {
        bool ok = false;
        for (const auto& c : kItem.correct_answers) {
            for (const auto& p : pool) {
                const auto inc = text::trim(p.text);
                if (r.text == c + "; " + inc) {
                    ok = true;
                    ++correct_first;
                }
                if (r.text == inc + "; " + c) ok = true;
            }
        }
        EXPECT_TRUE(ok) << r.text;
    }
    // The order shuffle puts the correct part first about half the time.
    EXPECT_GT(correct_first, 150u);
    EXPECT_LT(correct_first, 250u);

    cfg.mixed_incorrect_parts = 3;
    for (const auto& r : gen_s3_mixed(kItem, pool, cfg, 50).responses) {
        std::size_t parts = 1, at = 0;
        while ((at = r.text.find("; ", at)) != std::string::npos) {
            ++parts;
            at += 2;
        }
        EXPECT_EQ(parts, 4u) << r.text;
    }
    EXPECT_EQ(gen_s3_mixed(kItem, {}, cfg, 5).warnings.size(), 1u);
}

TEST(Gaming, SubsampleSizeAndOrder) {
    std::vector<Response> rs;
    for (int i = 0; i < 999; ++i) rs.push_back({"r" + std::to_string(i), "a", "t", Label::Incorrect, Provenance::GamingS1a});
    for (double rate : {0.05, 0.1, 0.5, 0.0015, 1.0}) {
        const auto s = subsample(rs, rate, 11);
        EXPECT_EQ(s.size(), static_cast<std::size_t>(std::llround(rate * 999.0))) << rate;
        std::size_t last = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto idx = std::stoul(s[i].response_id.substr(1));
            if (i > 0) EXPECT_GT(idx, last);
            last = idx;
        }
    }
    EXPECT_EQ(subsample(rs, 0.1, 11), subsample(rs, 0.1, 11));
    EXPECT_NE(subsample(rs, 0.1, 11), subsample(rs, 0.1, 12));
    EXPECT_THROW(subsample(rs, 0.0, 1), Error);
    EXPECT_THROW(subsample(rs, 1.5, 1), Error);
}

TEST(Gaming, GenerateAllAndSubsamplePools) {
    const auto ref = synthetic::make_reference_corpus({});
    GeneratorConfig cfg;
    cfg.seed = 42;
    GenerationCounts counts;
    counts.s1_per_variant = 20;
    counts.s3_per_item = 10;
    const auto pools = generate_all(ref.corpus, cfg, default_lexicons(), counts, ref.summaries);
    const auto n_items = ref.corpus.items().size();
    EXPECT_EQ(pools.s1a.size(), 20 * n_items);
    EXPECT_EQ(pools.s1b.size(), 20 * n_items);
    EXPECT_EQ(pools.s1c.size(), 20 * n_items);
    EXPECT_EQ(pools.s3.size(), 10 * n_items);
    EXPECT_EQ(pools.s2.size(), n_items + ref.summaries.size());
    std::set<std::string> ids;
    for (const auto& r : pools.all()) {
        EXPECT_EQ(r.gold_label, Label::Incorrect);
        EXPECT_TRUE(ids.insert(r.response_id).second) << r.response_id;
    }

    const auto sub = subsample_pools(pools, 0.05, 42);
    const auto s1 = pools.strategy(Strategy::S1).size();
    EXPECT_EQ(sub.strategy(Strategy::S1).size(), static_cast<std::size_t>(std::llround(0.05 * static_cast<double>(s1))));
    EXPECT_EQ(sub.s2.size(), static_cast<std::size_t>(std::llround(0.05 * static_cast<double>(pools.s2.size()))));
    EXPECT_EQ(sub.s3.size(), static_cast<std::size_t>(std::llround(0.05 * static_cast<double>(pools.s3.size()))));
}

TEST(Gaming, ExternalSummariesRoundTripAndValidate) {
    const std::vector<ExternalSummary> in = {{"gbs", "Young man with ascending weakness."}, {"gbs", "  "}};
    std::istringstream s(external_summaries_to_jsonl(in));
    const auto back = parse_external_summaries(s, "x");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].text, in[0].text);
    const Corpus c({kItem}, {});
    const auto rs = summaries_to_responses(c, back);
    ASSERT_EQ(rs.size(), 1u);  // the blank summary is skipped
    EXPECT_EQ(rs[0].provenance, Provenance::GamingS2);
    EXPECT_THROW(summaries_to_responses(c, {{"nope", "text"}}), Error);
    std::istringstream bad("{\"item_id\": 3}\n");
    EXPECT_THROW(parse_external_summaries(bad, "x"), Error);
}

TEST(Gaming, LexiconParsing) {
    const auto l = parse_lexicon("# header\nThe \n  AND # trailing\n\n");
    EXPECT_EQ(l, (std::unordered_set<std::string>{"the", "and"}));
    EXPECT_FALSE(default_stop_words().empty());
    EXPECT_FALSE(default_medical_terms().empty());
}
