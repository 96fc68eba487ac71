#include "asag/metrics.hpp"

#include <cstdio>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "asag/error.hpp"

namespace asag {

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

nlohmann::json opt(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string cell(const std::optional<double>& v) {
    if (!v) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return buf;
}

std::vector<std::string> group_keys(const Response& r) {
    std::vector<std::string> keys = {"overall"};
    if (r.provenance == Provenance::Real) {
        keys.emplace_back("real");
        return keys;
    }
    keys.emplace_back("gaming");
    keys.emplace_back(to_string(r.provenance));
    if (auto s = strategy_of(r.provenance); s && *s == Strategy::S1) keys.emplace_back("s1");
    return keys;
}

}  // namespace

void Confusion::add(Label predicted, Label gold) {
    const bool p = predicted == Label::Correct;
    const bool g = gold == Label::Correct;
    if (p && g) ++tp;
    else if (p) ++fp;
    else if (g) ++fn;
    else ++tn;
}

Confusion& Confusion::operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
}

// Precision, recall and F1 are absent for groups without gold positives
// (every gaming group), even when some of them were scored Correct.
std::optional<double> Confusion::precision() const {
    if (tp + fn == 0) return std::nullopt;
    return ratio(tp, tp + fp);
}
std::optional<double> Confusion::recall() const { return ratio(tp, tp + fn); }
std::optional<double> Confusion::f1() const {
    if (tp + fn == 0) return std::nullopt;
    return ratio(2 * tp, 2 * tp + fp + fn);
}
std::optional<double> Confusion::accuracy() const { return ratio(tp + tn, total()); }
std::optional<double> Confusion::fpr() const { return ratio(fp, fp + tn); }
std::optional<double> Confusion::tnr() const { return ratio(tn, fp + tn); }

const Confusion* MetricsReport::group(const std::string& key) const {
    auto it = groups.find(key);
    return it == groups.end() ? nullptr : &it->second;
}

MetricsReport confusion_from_labels(const std::vector<Response>& gold,
                                    const std::vector<Label>& predicted) {
    if (gold.size() != predicted.size()) {
        fail(ErrorCode::InvalidArgument, "confusion: prediction and gold counts differ");
    }
    MetricsReport report;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        for (const auto& key : group_keys(gold[i])) report.groups[key].add(predicted[i], gold[i].gold_label);
    }
    return report;
}

MetricsReport confusion(const std::vector<Prediction>& preds, const std::vector<Response>& gold) {
    std::unordered_map<std::string, const Response*> by_id;
    for (const auto& r : gold) by_id.emplace(r.response_id, &r);
    std::vector<Response> matched;
    std::vector<Label> labels;
    matched.reserve(preds.size());
    for (const auto& p : preds) {
        auto it = by_id.find(p.response_id);
        if (it == by_id.end()) {
            fail(ErrorCode::NotFound, "confusion: prediction for unknown response " + p.response_id);
        }
        matched.push_back(*it->second);
        labels.push_back(p.predicted_label);
    }
    return confusion_from_labels(matched, labels);
}

DeltaReport compare_reports(const MetricsReport& before, const MetricsReport& after) {
    DeltaReport out;
    for (const auto& [key, b] : before.groups) {
        if (after.groups.count(key) == 0) fail(ErrorCode::InvalidArgument, "compare_reports: group '" + key + "' missing after");
    }
    for (const auto& [key, a] : after.groups) {
        auto bit = before.groups.find(key);
        if (bit == before.groups.end()) fail(ErrorCode::InvalidArgument, "compare_reports: group '" + key + "' missing before");
        GroupDelta d;
        d.fpr_before = bit->second.fpr();
        d.fpr_after = a.fpr();
        if (d.fpr_before && d.fpr_after) {
            d.absolute = *d.fpr_after - *d.fpr_before;
            if (*d.fpr_before > 0.0) d.relative = *d.absolute / *d.fpr_before;
            d.fpr_increased = *d.fpr_after > *d.fpr_before;
        }
        out.groups.emplace(key, d);
    }
    return out;
}

nlohmann::json to_json(const Confusion& c) {
    nlohmann::json j;
    j["tp"] = c.tp;
    j["fp"] = c.fp;
    j["tn"] = c.tn;
    j["fn"] = c.fn;
    j["n"] = c.total();
    j["precision"] = opt(c.precision());
    j["recall"] = opt(c.recall());
    j["f1"] = opt(c.f1());
    j["accuracy"] = opt(c.accuracy());
    j["fpr"] = opt(c.fpr());
    j["tnr"] = opt(c.tnr());
    return j;
}

nlohmann::json to_json(const MetricsReport& report) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [key, c] : report.groups) j[key] = to_json(c);
    return j;
}

nlohmann::json to_json(const DeltaReport& delta) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [key, d] : delta.groups) {
        j[key] = {{"fpr_before", opt(d.fpr_before)},
                  {"fpr_after", opt(d.fpr_after)},
                  {"absolute", opt(d.absolute)},
                  {"relative", opt(d.relative)},
                  {"fpr_increased", d.fpr_increased}};
    }
    return j;
}

MetricsReport metrics_report_from_json(const nlohmann::json& j) {
    MetricsReport r;
    for (const auto& [key, g] : j.items()) {
        Confusion c;
        c.tp = g.at("tp").get<std::size_t>();
        c.fp = g.at("fp").get<std::size_t>();
        c.tn = g.at("tn").get<std::size_t>();
        c.fn = g.at("fn").get<std::size_t>();
        r.groups.emplace(key, c);
    }
    return r;
}

std::string strategy_display_name(const std::string& key) {
    if (key == "s1") return "Information from stem";
    if (key == "s1a") return "Stem words (non-consecutive)";
    if (key == "s1b") return "Stem words (consecutive)";
    if (key == "s1c") return "Stem medical terms";
    if (key == "s2") return "Clinical case summary";
    if (key == "s3") return "Mixed responses";
    if (key == "real") return "Real responses";
    return key;
}

std::string fpr_table_csv(const std::vector<std::pair<std::string, const MetricsReport*>>& conditions,
                          const std::vector<std::string>& strategy_keys) {
    std::string out = "strategy";
    for (const auto& [name, report] : conditions) out += ",FPR (" + name + ")";
    out += '\n';
    for (const auto& key : strategy_keys) {
        out += strategy_display_name(key);
        for (const auto& [name, report] : conditions) {
            out += ',';
            const Confusion* c = report ? report->group(key) : nullptr;
            if (c) out += cell(c->fpr());
        }
        out += '\n';
    }
    return out;
}

std::string accuracy_table_csv(const MetricsReport& report, const std::vector<std::string>& strategy_keys) {
    std::string out = "strategy,Accuracy,TNR,FPR\n";
    for (const auto& key : strategy_keys) {
        out += strategy_display_name(key);
        const Confusion* c = report.group(key);
        out += ',' + (c ? cell(c->accuracy()) : "");
        out += ',' + (c ? cell(c->tnr()) : "");
        out += ',' + (c ? cell(c->fpr()) : "");
        out += '\n';
    }
    return out;
}

}  // namespace asag
