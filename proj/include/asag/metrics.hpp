#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "asag/corpus.hpp"
#include "asag/grader.hpp"

namespace asag {

// Positive class is Correct everywhere: a false positive is a gold-Incorrect
// response scored Correct.
struct Confusion {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    void add(Label predicted, Label gold);
    Confusion& operator+=(const Confusion& other);

    // Rates are absent when their denominator is zero.
    std::optional<double> precision() const;
    std::optional<double> recall() const;
    std::optional<double> f1() const;
    std::optional<double> accuracy() const;
    std::optional<double> fpr() const;
    std::optional<double> tnr() const;

    bool operator==(const Confusion&) const = default;
};

// Group keys: "real", "s1a", "s1b", "s1c", "s1" (pooled), "s2", "s3",
// "gaming" (all artificial) and "overall". Groups with no responses are omitted.
struct MetricsReport {
    std::map<std::string, Confusion> groups;

    const Confusion* group(const std::string& key) const;
};

MetricsReport confusion(const std::vector<Prediction>& preds, const std::vector<Response>& gold);

// Same as confusion() for bare (response, predicted label) pairs.
MetricsReport confusion_from_labels(const std::vector<Response>& gold,
                                    const std::vector<Label>& predicted);

struct GroupDelta {
    std::optional<double> fpr_before;
    std::optional<double> fpr_after;
    std::optional<double> absolute;  // after - before
    std::optional<double> relative;  // (after - before) / before
    bool fpr_increased = false;
};

struct DeltaReport {
    std::map<std::string, GroupDelta> groups;
};

DeltaReport compare_reports(const MetricsReport& before, const MetricsReport& after);

nlohmann::json to_json(const Confusion& c);
nlohmann::json to_json(const MetricsReport& report);
nlohmann::json to_json(const DeltaReport& delta);
MetricsReport metrics_report_from_json(const nlohmann::json& j);

// Strategy-row table. One row per strategy key, one column per named condition,
// each cell the FPR of that strategy under that condition (blank when absent).
std::string fpr_table_csv(const std::vector<std::pair<std::string, const MetricsReport*>>& conditions,
                          const std::vector<std::string>& strategy_keys = {"s1", "s2", "s3"});

// Accuracy / TNR / FPR per strategy row.
std::string accuracy_table_csv(const MetricsReport& report,
                               const std::vector<std::string>& strategy_keys = {"s1", "s2", "s3"});

std::string strategy_display_name(const std::string& key);

}  // namespace asag
