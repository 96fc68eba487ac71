#include "asag/gaming.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "asag/error.hpp"
#include "asag/hashing.hpp"
#include "asag/rng.hpp"
#include "asag/text.hpp"

namespace asag::gaming {

namespace {

std::string response_id(const Item& item, std::string_view tag, std::size_t i) {
    return item.item_id + "/" + std::string(tag) + "/" + std::to_string(i);
}

Response make_response(const Item& item, std::string id, std::string text_value, Provenance p) {
    Response r;
    r.response_id = std::move(id);
    r.item_id = item.item_id;
    r.text = std::move(text_value);
    r.gold_label = Label::Incorrect;
    r.provenance = p;
    return r;
}

// Collapses whitespace runs inside a raw stem slice, keeping the original case.
std::string squash_whitespace(std::string_view s) {
    std::string out;
    bool gap = false;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            gap = true;
            continue;
        }
        if (gap && !out.empty()) out.push_back(' ');
        gap = false;
        out.push_back(c);
    }
    return out;
}

// First occurrence of each distinct token satisfying `keep`, in stem order.
template <typename Pred>
std::vector<text::Token> distinct_tokens(const std::string& stem, const Lexicons& lex, Pred keep) {
    std::vector<text::Token> out;
    std::unordered_set<std::string> seen;
    for (auto& tok : text::tokenize_spans(stem, &lex.medical_terms)) {
        if (!keep(tok.text)) continue;
        if (!seen.insert(tok.text).second) continue;
        out.push_back(std::move(tok));
    }
    return out;
}

std::size_t draw_k(Rng& rng, const GeneratorConfig& cfg, std::size_t available) {
    const auto lo = std::min<std::size_t>(static_cast<std::size_t>(cfg.k_min), available);
    const auto hi = std::min<std::size_t>(static_cast<std::size_t>(cfg.k_max), available);
    return static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(lo),
                                                static_cast<std::int64_t>(hi)));
}

GenerationResult sample_token_sets(const Item& item, const GeneratorConfig& cfg, std::size_t n,
                                   const std::vector<text::Token>& pool, std::string_view tag,
                                   Provenance provenance) {
    GenerationResult result;
    Rng rng(derive_seed(cfg.seed, std::string(tag) + "/" + item.item_id));
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = draw_k(rng, cfg, pool.size());
        std::vector<std::string> words;
        for (auto idx : rng.sample_indices(pool.size(), k)) {
            const auto& tok = pool[idx];
            words.push_back(item.stem.substr(tok.begin, tok.end - tok.begin));
        }
        result.responses.push_back(make_response(item, response_id(item, tag, i),
                                                 text::join(words, " "), provenance));
    }
    return result;
}

}  // namespace

void GeneratorConfig::validate() const {
    if (k_min < 1 || k_max < 1) fail(ErrorCode::InvalidArgument, "k_min and k_max must be positive");
    if (k_min > k_max) fail(ErrorCode::InvalidArgument, "k_min must not exceed k_max");
    if (summary_sentence_count < 1) {
        fail(ErrorCode::InvalidArgument, "summary_sentence_count must be positive");
    }
    if (mixed_incorrect_parts < 1) {
        fail(ErrorCode::InvalidArgument, "mixed_incorrect_parts must be positive");
    }
    if (!(subsample_rate > 0.0 && subsample_rate <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "subsample_rate must lie in (0,1]");
    }
}

bool Lexicons::is_stop_word(std::string_view token) const {
    return stop_words.count(text::casefold(token)) != 0;
}

bool Lexicons::is_medical_term(std::string_view token) const {
    return medical_terms.count(text::casefold(token)) != 0;
}

std::unordered_set<std::string> parse_lexicon(std::string_view content) {
    std::unordered_set<std::string> out;
    std::istringstream in{std::string(content)};
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string term = text::casefold(text::trim(line));
        if (!term.empty()) out.insert(std::move(term));
    }
    return out;
}

std::unordered_set<std::string> load_lexicon(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) fail(ErrorCode::Io, "lexicon file not found: " + path.string());
    return parse_lexicon(read_file(path));
}

GenerationResult gen_s1_nonconsecutive(const Item& item, const GeneratorConfig& cfg,
                                       const Lexicons& lex, std::size_t n) {
    cfg.validate();
    auto pool = distinct_tokens(item.stem, lex, [&](const std::string& t) {
        return lex.stop_words.count(t) == 0;
    });
    if (pool.size() < static_cast<std::size_t>(cfg.k_min)) {
        return {{}, {"item " + item.item_id + ": stem has " + std::to_string(pool.size()) +
                     " non-stop tokens, fewer than k_min; no S1a responses"}};
    }
    return sample_token_sets(item, cfg, n, pool, "s1a", Provenance::GamingS1a);
}

GenerationResult gen_s1_consecutive(const Item& item, const GeneratorConfig& cfg,
                                    const Lexicons& lex, std::size_t n) {
    cfg.validate();
    const auto tokens = text::tokenize_spans(item.stem, &lex.medical_terms);
    GenerationResult result;
    if (tokens.size() < static_cast<std::size_t>(cfg.k_min)) {
        result.warnings.push_back("item " + item.item_id + ": stem has " +
                                  std::to_string(tokens.size()) +
                                  " tokens, fewer than k_min; no S1b responses");
        return result;
    }
    Rng rng(derive_seed(cfg.seed, "s1b/" + item.item_id));
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = draw_k(rng, cfg, tokens.size());
        const std::size_t start = static_cast<std::size_t>(rng.index(tokens.size() - k + 1));
        const auto& first = tokens[start];
        const auto& last = tokens[start + k - 1];
        std::string window =
            squash_whitespace(std::string_view(item.stem).substr(first.begin, last.end - first.begin));
        result.responses.push_back(make_response(item, response_id(item, "s1b", i),
                                                 std::move(window), Provenance::GamingS1b));
    }
    return result;
}

GenerationResult gen_s1_medical(const Item& item, const GeneratorConfig& cfg, const Lexicons& lex,
                                std::size_t n) {
    cfg.validate();
    auto pool = distinct_tokens(item.stem, lex, [&](const std::string& t) {
        return lex.medical_terms.count(t) != 0;
    });
    if (pool.empty()) {
        return {{}, {"item " + item.item_id +
                     ": no stem token appears in the medical term list; no S1c responses"}};
    }
    return sample_token_sets(item, cfg, n, pool, "s1c", Provenance::GamingS1c);
}

std::vector<double> summary_sentence_scores(const std::string& stem, const Lexicons& lex) {
    std::map<std::string, double> tf;
    for (const auto& tok : text::tokenize(stem, &lex.medical_terms)) {
        if (lex.stop_words.count(tok) == 0) tf[tok] += 1.0;
    }
    std::vector<double> scores;
    for (const auto& sentence : text::split_sentences(stem)) {
        const auto tokens = text::tokenize(sentence, &lex.medical_terms);
        double sum = 0.0;
        for (const auto& tok : tokens) {
            if (lex.stop_words.count(tok) == 0) sum += tf[tok];
        }
        scores.push_back(tokens.empty() ? 0.0 : sum / static_cast<double>(tokens.size()));
    }
    return scores;
}

Response gen_s2_summary(const Item& item, const GeneratorConfig& cfg, const Lexicons& lex) {
    cfg.validate();
    const auto sentences = text::split_sentences(item.stem);
    if (sentences.empty()) fail(ErrorCode::InvalidArgument, "item " + item.item_id + ": empty stem");
    const auto scores = summary_sentence_scores(item.stem, lex);

    std::vector<std::size_t> order(sentences.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const auto keep = std::min<std::size_t>(static_cast<std::size_t>(cfg.summary_sentence_count),
                                            sentences.size());
    order.resize(keep);
    std::sort(order.begin(), order.end());

    std::vector<std::string> chosen;
    for (auto i : order) chosen.push_back(sentences[i]);
    return make_response(item, item.item_id + "/s2/extractive", text::join(chosen, " "),
                         Provenance::GamingS2);
}

GenerationResult gen_s3_mixed(const Item& item, const std::vector<Response>& incorrect_pool,
                              const GeneratorConfig& cfg, std::size_t n) {
    cfg.validate();
    GenerationResult result;
    if (item.correct_answers.empty()) {
        result.warnings.push_back("item " + item.item_id + ": no correct answers; no S3 responses");
        return result;
    }
    if (incorrect_pool.empty()) {
        result.warnings.push_back("item " + item.item_id +
                                  ": no real incorrect responses to mix; no S3 responses");
        return result;
    }
    const auto parts = std::min<std::size_t>(static_cast<std::size_t>(cfg.mixed_incorrect_parts),
                                             incorrect_pool.size());
    Rng rng(derive_seed(cfg.seed, "s3/" + item.item_id));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> pieces;
        pieces.push_back(text::trim(rng.pick(item.correct_answers)));
        for (auto idx : rng.sample_indices(incorrect_pool.size(), parts)) {
            pieces.push_back(text::trim(incorrect_pool[idx].text));
        }
        rng.shuffle(pieces);
        result.responses.push_back(make_response(item, response_id(item, "s3", i),
                                                 text::join(pieces, cfg.mixed_separator),
                                                 Provenance::GamingS3));
    }
    return result;
}

std::vector<Response> subsample(const std::vector<Response>& responses, double rate,
                                std::uint64_t seed) {
    if (!(rate > 0.0 && rate <= 1.0)) fail(ErrorCode::InvalidArgument, "subsample rate must lie in (0,1]");
    const auto k = static_cast<std::size_t>(
        std::llround(rate * static_cast<double>(responses.size())));
    Rng rng(derive_seed(seed, "subsample"));
    std::vector<Response> out;
    out.reserve(k);
    for (auto idx : rng.sample_indices(responses.size(), k)) out.push_back(responses[idx]);
    return out;
}

std::vector<ExternalSummary> parse_external_summaries(std::istream& in,
                                                      const std::string& source_name) {
    std::vector<ExternalSummary> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const auto where = source_name + ":" + std::to_string(line_no);
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            fail(ErrorCode::Parse, where + ": malformed JSON (" + e.what() + ")");
        }
        if (!rec.is_object() || !rec.contains("item_id") || !rec["item_id"].is_string() ||
            !rec.contains("text") || !rec["text"].is_string()) {
            fail(ErrorCode::Parse, where + ": expected {\"item_id\": str, \"text\": str}");
        }
        out.push_back({rec["item_id"].get<std::string>(), rec["text"].get<std::string>()});
    }
    return out;
}

std::vector<ExternalSummary> load_external_summaries(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open summaries file " + path.string());
    return parse_external_summaries(in, path.string());
}

std::string external_summaries_to_jsonl(const std::vector<ExternalSummary>& summaries) {
    std::string out;
    for (const auto& s : summaries) {
        nlohmann::ordered_json rec;
        rec["item_id"] = s.item_id;
        rec["text"] = s.text;
        out += rec.dump();
        out += '\n';
    }
    return out;
}

std::vector<Response> summaries_to_responses(const Corpus& corpus,
                                             const std::vector<ExternalSummary>& summaries) {
    std::map<std::string, std::size_t> per_item;
    std::vector<Response> out;
    for (const auto& s : summaries) {
        const Item& item = corpus.item(s.item_id);
        if (text::trim(s.text).empty()) continue;
        const auto n = per_item[s.item_id]++;
        out.push_back(make_response(item, item.item_id + "/s2/ext" + std::to_string(n),
                                    text::trim(s.text), Provenance::GamingS2));
    }
    return out;
}

std::vector<Response> GamingPools::strategy(Strategy s) const {
    switch (s) {
        case Strategy::S1: {
            std::vector<Response> out = s1a;
            out.insert(out.end(), s1b.begin(), s1b.end());
            out.insert(out.end(), s1c.begin(), s1c.end());
            return out;
        }
        case Strategy::S2: return s2;
        case Strategy::S3: return s3;
    }
    return {};
}

std::vector<Response> GamingPools::all() const {
    std::vector<Response> out = strategy(Strategy::S1);
    out.insert(out.end(), s2.begin(), s2.end());
    out.insert(out.end(), s3.begin(), s3.end());
    return out;
}

GamingPools generate_all(const Corpus& corpus, const GeneratorConfig& cfg, const Lexicons& lex,
                         const GenerationCounts& counts,
                         const std::vector<ExternalSummary>& external_summaries) {
    cfg.validate();
    GamingPools pools;
    auto absorb = [&](std::vector<Response>& into, GenerationResult&& r) {
        into.insert(into.end(), std::make_move_iterator(r.responses.begin()),
                    std::make_move_iterator(r.responses.end()));
        pools.warnings.insert(pools.warnings.end(), r.warnings.begin(), r.warnings.end());
    };

    std::map<std::string, std::vector<Response>> incorrect_by_item;
    for (const auto& r : corpus.responses()) {
        if (r.provenance == Provenance::Real && r.gold_label == Label::Incorrect) {
            incorrect_by_item[r.item_id].push_back(r);
        }
    }

    for (const auto& item : corpus.items()) {
        absorb(pools.s1a, gen_s1_nonconsecutive(item, cfg, lex, counts.s1_per_variant));
        absorb(pools.s1b, gen_s1_consecutive(item, cfg, lex, counts.s1_per_variant));
        absorb(pools.s1c, gen_s1_medical(item, cfg, lex, counts.s1_per_variant));
        if (counts.include_extractive_summary) pools.s2.push_back(gen_s2_summary(item, cfg, lex));
        absorb(pools.s3, gen_s3_mixed(item, incorrect_by_item[item.item_id], cfg, counts.s3_per_item));
    }
    auto external = summaries_to_responses(corpus, external_summaries);
    pools.s2.insert(pools.s2.end(), external.begin(), external.end());
    return pools;
}

GamingPools subsample_pools(const GamingPools& pools, double rate, std::uint64_t seed) {
    GamingPools out;
    out.warnings = pools.warnings;
    for (auto s : {Strategy::S1, Strategy::S2, Strategy::S3}) {
        auto kept = subsample(pools.strategy(s), rate, derive_seed(seed, to_string(s)));
        for (auto& r : kept) {
            switch (r.provenance) {
                case Provenance::GamingS1a: out.s1a.push_back(std::move(r)); break;
                case Provenance::GamingS1b: out.s1b.push_back(std::move(r)); break;
                case Provenance::GamingS1c: out.s1c.push_back(std::move(r)); break;
                case Provenance::GamingS2: out.s2.push_back(std::move(r)); break;
                case Provenance::GamingS3: out.s3.push_back(std::move(r)); break;
                case Provenance::Real: break;
            }
        }
    }
    return out;
}

}  // namespace asag::gaming
