#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace asag {

enum class Label { Correct, Incorrect };

enum class Provenance { Real, GamingS1a, GamingS1b, GamingS1c, GamingS2, GamingS3 };

// The three reporting families; S1 pools the three stem-sampling variants.
enum class Strategy { S1, S2, S3 };

std::string_view to_string(Label label);
std::string_view to_string(Provenance provenance);
std::string_view to_string(Strategy strategy);
Label parse_label(std::string_view s);
Provenance parse_provenance(std::string_view s);
Strategy parse_strategy(std::string_view s);

std::optional<Strategy> strategy_of(Provenance provenance);
inline bool is_gaming(Provenance p) { return p != Provenance::Real; }

struct Item {
    std::string item_id;
    std::string stem;
    std::string lead_in;
    std::vector<std::string> correct_answers;

    bool operator==(const Item&) const = default;
};

struct Response {
    std::string response_id;
    std::string item_id;
    std::string text;
    Label gold_label = Label::Incorrect;
    Provenance provenance = Provenance::Real;

    bool operator==(const Response&) const = default;
};

// Validated item/response collection. Immutable once constructed.
class Corpus {
public:
    Corpus() = default;
    // Throws asag::Error (Validation) when an invariant is violated.
    Corpus(std::vector<Item> items, std::vector<Response> responses);

    const std::vector<Item>& items() const { return items_; }
    const std::vector<Response>& responses() const { return responses_; }

    const Item* find_item(std::string_view item_id) const;
    const Item& item(std::string_view item_id) const;

    std::vector<Response> responses_with(Provenance provenance) const;

private:
    std::vector<Item> items_;
    std::vector<Response> responses_;
    std::unordered_map<std::string, std::size_t> item_index_;
};

// Checks record-level invariants shared by the loader and the generators.
void validate_item(const Item& item);
void validate_response(const Response& response);

Corpus parse_corpus(std::istream& in, const std::string& source_name = "<stream>");
Corpus load_corpus(const std::filesystem::path& path);

std::string corpus_to_jsonl(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

// Response-only JSONL (records carry "kind":"response").
std::string responses_to_jsonl(const std::vector<Response>& responses);
std::vector<Response> parse_responses(std::istream& in, const std::string& source_name = "<stream>");

enum class StratifyBy { Provenance, Item };

struct SplitPlan {
    std::uint64_t seed = 0;
    double train_fraction = 0.7;
    StratifyBy stratify_by = StratifyBy::Provenance;
};

struct SplitResult {
    std::vector<Response> train;
    std::vector<Response> test;
    std::vector<std::string> warnings;
};

// Per-stratum seeded partition. Both sides keep the input order.
SplitResult split(const std::vector<Response>& responses, const SplitPlan& plan);

struct LeakPair {
    std::string gaming_id;
    std::string matched_id;

    bool operator==(const LeakPair&) const = default;
};

// Pairs whose texts match after trimming and case-folding.
std::vector<LeakPair> leak_check(const std::vector<Response>& gaming,
                                 const std::vector<Response>& reference_correct);

}  // namespace asag
