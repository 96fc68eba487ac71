#include "asag/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "asag/error.hpp"
#include "asag/hashing.hpp"
#include "asag/rng.hpp"
#include "asag/text.hpp"

namespace asag {

using ojson = nlohmann::ordered_json;

std::string_view to_string(Label label) {
    return label == Label::Correct ? "correct" : "incorrect";
}

std::string_view to_string(Provenance provenance) {
    switch (provenance) {
        case Provenance::Real: return "real";
        case Provenance::GamingS1a: return "s1a";
        case Provenance::GamingS1b: return "s1b";
        case Provenance::GamingS1c: return "s1c";
        case Provenance::GamingS2: return "s2";
        case Provenance::GamingS3: return "s3";
    }
    return "real";
}

std::string_view to_string(Strategy strategy) {
    switch (strategy) {
        case Strategy::S1: return "s1";
        case Strategy::S2: return "s2";
        case Strategy::S3: return "s3";
    }
    return "s1";
}

Label parse_label(std::string_view s) {
    if (s == "correct") return Label::Correct;
    if (s == "incorrect") return Label::Incorrect;
    fail(ErrorCode::Parse, "unknown gold_label '" + std::string(s) + "'");
}

Provenance parse_provenance(std::string_view s) {
    if (s == "real") return Provenance::Real;
    if (s == "s1a") return Provenance::GamingS1a;
    if (s == "s1b") return Provenance::GamingS1b;
    if (s == "s1c") return Provenance::GamingS1c;
    if (s == "s2") return Provenance::GamingS2;
    if (s == "s3") return Provenance::GamingS3;
    fail(ErrorCode::Parse, "unknown provenance '" + std::string(s) + "'");
}

Strategy parse_strategy(std::string_view s) {
    if (s == "s1") return Strategy::S1;
    if (s == "s2") return Strategy::S2;
    if (s == "s3") return Strategy::S3;
    fail(ErrorCode::Parse, "unknown strategy '" + std::string(s) + "'");
}

std::optional<Strategy> strategy_of(Provenance provenance) {
    switch (provenance) {
        case Provenance::Real: return std::nullopt;
        case Provenance::GamingS1a:
        case Provenance::GamingS1b:
        case Provenance::GamingS1c: return Strategy::S1;
        case Provenance::GamingS2: return Strategy::S2;
        case Provenance::GamingS3: return Strategy::S3;
    }
    return std::nullopt;
}

void validate_item(const Item& item) {
    if (item.item_id.empty()) fail(ErrorCode::Validation, "item with empty item_id");
    if (text::trim(item.stem).empty()) {
        fail(ErrorCode::Validation, "item " + item.item_id + " has an empty stem");
    }
    if (item.correct_answers.empty()) {
        fail(ErrorCode::Validation, "item " + item.item_id + " has no correct answers");
    }
    for (const auto& answer : item.correct_answers) {
        if (text::trim(answer).empty()) {
            fail(ErrorCode::Validation, "item " + item.item_id + " has a blank correct answer");
        }
    }
}

void validate_response(const Response& r) {
    if (r.response_id.empty()) fail(ErrorCode::Validation, "response with empty response_id");
    if (text::trim(r.text).empty()) {
        fail(ErrorCode::Validation, "response " + r.response_id + " has empty text");
    }
    if (is_gaming(r.provenance) && r.gold_label == Label::Correct) {
        fail(ErrorCode::Validation, "gaming response " + r.response_id + " (" +
                                        std::string(to_string(r.provenance)) +
                                        ") is labeled correct");
    }
}

Corpus::Corpus(std::vector<Item> items, std::vector<Response> responses)
    : items_(std::move(items)), responses_(std::move(responses)) {
    for (std::size_t i = 0; i < items_.size(); ++i) {
        validate_item(items_[i]);
        if (!item_index_.emplace(items_[i].item_id, i).second) {
            fail(ErrorCode::Validation, "duplicate item_id " + items_[i].item_id);
        }
    }
    std::set<std::string_view> seen;
    for (const auto& r : responses_) {
        validate_response(r);
        if (!seen.insert(r.response_id).second) {
            fail(ErrorCode::Validation, "duplicate response_id " + r.response_id);
        }
        if (item_index_.count(r.item_id) == 0) {
            fail(ErrorCode::Validation, "response " + r.response_id +
                                            " references unknown item_id " + r.item_id);
        }
    }
}

const Item* Corpus::find_item(std::string_view item_id) const {
    auto it = item_index_.find(std::string(item_id));
    return it == item_index_.end() ? nullptr : &items_[it->second];
}

const Item& Corpus::item(std::string_view item_id) const {
    const Item* item = find_item(item_id);
    if (item == nullptr) fail(ErrorCode::NotFound, "unknown item_id " + std::string(item_id));
    return *item;
}

std::vector<Response> Corpus::responses_with(Provenance provenance) const {
    std::vector<Response> out;
    for (const auto& r : responses_) {
        if (r.provenance == provenance) out.push_back(r);
    }
    return out;
}

namespace {

std::string require_string(const ojson& rec, const char* field, const std::string& where) {
    auto it = rec.find(field);
    if (it == rec.end() || !it->is_string()) {
        fail(ErrorCode::Parse, where + ": missing or non-string field \"" + field + "\"");
    }
    return it->get<std::string>();
}

Response response_from_json(const ojson& rec, const std::string& where) {
    Response r;
    r.response_id = require_string(rec, "response_id", where);
    r.item_id = require_string(rec, "item_id", where);
    r.text = require_string(rec, "text", where);
    try {
        r.gold_label = parse_label(require_string(rec, "gold_label", where));
        r.provenance = parse_provenance(require_string(rec, "provenance", where));
    } catch (const Error& e) {
        fail(ErrorCode::Parse, where + ": " + e.what());
    }
    return r;
}

ojson response_to_json(const Response& r) {
    ojson rec;
    rec["kind"] = "response";
    rec["response_id"] = r.response_id;
    rec["item_id"] = r.item_id;
    rec["text"] = r.text;
    rec["gold_label"] = to_string(r.gold_label);
    rec["provenance"] = to_string(r.provenance);
    return rec;
}

template <typename OnRecord>
void for_each_record(std::istream& in, const std::string& source_name, OnRecord&& on_record) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const std::string where = source_name + ":" + std::to_string(line_no);
        ojson rec;
        try {
            rec = ojson::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            fail(ErrorCode::Parse, where + ": malformed JSON (" + e.what() + ")");
        }
        if (!rec.is_object()) fail(ErrorCode::Parse, where + ": record is not a JSON object");
        on_record(rec, where);
    }
}

}  // namespace

Corpus parse_corpus(std::istream& in, const std::string& source_name) {
    std::vector<Item> items;
    std::vector<Response> responses;
    for_each_record(in, source_name, [&](const ojson& rec, const std::string& where) {
        const std::string kind = require_string(rec, "kind", where);
        if (kind == "item") {
            Item item;
            item.item_id = require_string(rec, "item_id", where);
            item.stem = require_string(rec, "stem", where);
            item.lead_in = require_string(rec, "lead_in", where);
            auto answers = rec.find("correct_answers");
            if (answers == rec.end() || !answers->is_array()) {
                fail(ErrorCode::Parse, where + ": correct_answers must be a list of strings");
            }
            for (const auto& a : *answers) {
                if (!a.is_string()) {
                    fail(ErrorCode::Parse, where + ": correct_answers must be a list of strings");
                }
                item.correct_answers.push_back(a.get<std::string>());
            }
            items.push_back(std::move(item));
        } else if (kind == "response") {
            responses.push_back(response_from_json(rec, where));
        } else {
            fail(ErrorCode::Parse, where + ": unknown kind \"" + kind + "\"");
        }
    });
    return Corpus(std::move(items), std::move(responses));
}

Corpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open corpus " + path.string());
    return parse_corpus(in, path.string());
}

std::string corpus_to_jsonl(const Corpus& corpus) {
    std::string out;
    for (const auto& item : corpus.items()) {
        ojson rec;
        rec["kind"] = "item";
        rec["item_id"] = item.item_id;
        rec["stem"] = item.stem;
        rec["lead_in"] = item.lead_in;
        rec["correct_answers"] = item.correct_answers;
        out += rec.dump();
        out += '\n';
    }
    out += responses_to_jsonl(corpus.responses());
    return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    write_file(path, corpus_to_jsonl(corpus));
}

std::string responses_to_jsonl(const std::vector<Response>& responses) {
    std::string out;
    for (const auto& r : responses) {
        out += response_to_json(r).dump();
        out += '\n';
    }
    return out;
}

std::vector<Response> parse_responses(std::istream& in, const std::string& source_name) {
    std::vector<Response> out;
    for_each_record(in, source_name, [&](const ojson& rec, const std::string& where) {
        auto kind = rec.find("kind");
        if (kind != rec.end() && (!kind->is_string() || *kind != "response")) {
            fail(ErrorCode::Parse, where + ": expected a response record");
        }
        Response r = response_from_json(rec, where);
        validate_response(r);
        out.push_back(std::move(r));
    });
    return out;
}

SplitResult split(const std::vector<Response>& responses, const SplitPlan& plan) {
    if (responses.empty()) fail(ErrorCode::InvalidArgument, "split: no responses");
    if (!(plan.train_fraction > 0.0 && plan.train_fraction < 1.0)) {
        fail(ErrorCode::InvalidArgument, "split: train_fraction must lie in (0,1)");
    }
    std::map<std::string, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < responses.size(); ++i) {
        const auto& r = responses[i];
        std::string key = plan.stratify_by == StratifyBy::Provenance
                              ? std::string(to_string(r.provenance))
                              : r.item_id;
        strata[key].push_back(i);
    }

    SplitResult result;
    std::vector<bool> in_train(responses.size(), false);
    for (const auto& [key, members] : strata) {
        if (members.size() < 2) {
            result.warnings.push_back("stratum '" + key + "' has " +
                                      std::to_string(members.size()) +
                                      " response(s); placed wholly in train");
            for (auto i : members) in_train[i] = true;
            continue;
        }
        auto n_train = static_cast<std::size_t>(
            std::llround(plan.train_fraction * static_cast<double>(members.size())));
        Rng rng(derive_seed(plan.seed, "split/" + key));
        for (auto pos : rng.sample_indices(members.size(), n_train)) in_train[members[pos]] = true;
    }
    for (std::size_t i = 0; i < responses.size(); ++i) {
        (in_train[i] ? result.train : result.test).push_back(responses[i]);
    }
    return result;
}

std::vector<LeakPair> leak_check(const std::vector<Response>& gaming,
                                 const std::vector<Response>& reference_correct) {
    std::unordered_map<std::string, std::vector<const Response*>> by_text;
    for (const auto& r : reference_correct) {
        by_text[text::casefold(text::trim(r.text))].push_back(&r);
    }
    std::vector<LeakPair> pairs;
    for (const auto& g : gaming) {
        auto it = by_text.find(text::casefold(text::trim(g.text)));
        if (it == by_text.end()) continue;
        for (const Response* match : it->second) pairs.push_back({g.response_id, match->response_id});
    }
    return pairs;
}

}  // namespace asag
