#include "asag/experiments.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <future>
#include <unordered_set>

#include "asag/diagnostics.hpp"
#include "asag/error.hpp"
#include "asag/grader.hpp"
#include "asag/hashing.hpp"
#include "asag/rng.hpp"

namespace asag {

namespace {

constexpr std::array<Strategy, 3> kStrategies = {Strategy::S1, Strategy::S2, Strategy::S3};

std::string key_of(Strategy s) { return std::string(to_string(s)); }

void append(std::vector<Response>& into, const std::vector<Response>& from) {
    into.insert(into.end(), from.begin(), from.end());
}

std::string_view to_string(StratifyBy s) { return s == StratifyBy::Item ? "item" : "provenance"; }

StratifyBy parse_stratify(const std::string& s) {
    if (s == "provenance") return StratifyBy::Provenance;
    if (s == "item") return StratifyBy::Item;
    fail(ErrorCode::InvalidArgument, "stratify_by must be provenance or item, got '" + s + "'");
}

struct ThreeWay {
    std::vector<Response> index, validation, test;
};

struct Partition {
    ThreeWay real;
    std::map<Strategy, SplitResult> gaming;
    std::map<Strategy, std::vector<Response>> gaming_all;
};

ThreeWay three_way(const std::vector<Response>& pool, double train_fraction, double validation_fraction,
                   StratifyBy by, std::uint64_t seed, const std::string& label,
                   std::vector<std::string>& warnings) {
    ThreeWay out;
    if (pool.empty()) return out;
    auto outer = split(pool, SplitPlan{derive_seed(seed, label), train_fraction, by});
    auto inner = split(outer.train, SplitPlan{derive_seed(seed, label + "/validation"),
                                              1.0 - validation_fraction, by});
    for (auto* w : {&outer.warnings, &inner.warnings}) {
        for (auto& msg : *w) warnings.push_back(label + ": " + msg);
    }
    out.index = std::move(inner.train);
    out.validation = std::move(inner.test);
    out.test = std::move(outer.test);
    return out;
}

// A fully specified train/validation/test layout for one protocol cell.
struct Condition {
    std::string name;
    std::vector<Response> real_index;
    std::vector<Response> gaming_index;
    std::vector<Response> validation;
    std::vector<Response> test;
};

void assert_no_leakage(const Condition& c) {
    std::unordered_set<std::string> train;
    for (const auto* side : {&c.real_index, &c.gaming_index, &c.validation}) {
        for (const auto& r : *side) train.insert(r.response_id);
    }
    for (const auto& r : c.test) {
        if (train.count(r.response_id) != 0) {
            fail(ErrorCode::Internal, c.name + ": response " + r.response_id + " is in both train and test");
        }
    }
}

Condition baseline_condition(const Partition& p, const ExperimentSpec& spec) {
    Condition c{"baseline", p.real.index, {}, p.real.validation, p.real.test};
    for (auto s : spec.strategies_in_test) append(c.test, p.gaming_all.at(s));
    return c;
}

Condition advt1_condition(const Partition& p, const ExperimentSpec& spec) {
    Condition c{"advt1", p.real.index, {}, p.real.validation, p.real.test};
    for (auto s : spec.strategies_in_train) append(c.gaming_index, p.gaming.at(s).train);
    for (auto s : spec.strategies_in_test) append(c.test, p.gaming.at(s).test);
    return c;
}

Condition advt2_condition(const Partition& p, Strategy held_out) {
    Condition c{"advt2/" + key_of(held_out), p.real.index, {}, p.real.validation, p.real.test};
    for (auto s : kStrategies) {
        if (s != held_out) append(c.gaming_index, p.gaming.at(s).train);
    }
    append(c.test, p.gaming_all.at(held_out));
    return c;
}

struct GraderRun {
    double threshold = kDefaultThreshold;
    std::vector<Prediction> test;
    std::vector<Prediction> train_loo;   // index responses scored without themselves
    std::vector<Prediction> validation;
};

GraderRun run_grader(const Condition& c, const std::shared_ptr<const Embedder>& embedder,
                     const ExperimentSpec& spec, bool stacker_features) {
    auto index = augment(build_index(c.real_index, embedder, kDefaultThreshold, embedder->config().name),
                         c.gaming_index);
    GraderRun run;
    if (spec.fixed_threshold) {
        run.threshold = *spec.fixed_threshold;
    } else {
        run.threshold = calibrate_threshold(index, c.validation, spec.threshold_grid);
    }
    index = index.with_threshold(run.threshold);
    run.test.reserve(c.test.size());
    for (const auto& r : c.test) run.test.push_back(predict(index, r));
    if (stacker_features) {
        for (const auto* side : {&c.real_index, &c.gaming_index}) {
            for (const auto& r : *side) {
                run.train_loo.push_back(
                    predict_with_vector(index, r, embedder->embed(r.response_id, r.text), &r.response_id));
            }
        }
        for (const auto& r : c.validation) run.validation.push_back(predict(index, r));
    }
    return run;
}

struct ConditionEval {
    std::vector<GraderRun> graders;
    std::optional<EnsembleResult> ensemble;
};

Eigen::MatrixXd feature_matrix(const VotePanel& panel, const std::vector<GraderRun>& graders,
                               std::vector<Prediction> GraderRun::*side) {
    const std::size_t rows = (graders.front().*side).size();
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(2 * graders.size()));
    std::vector<Prediction> row_preds(graders.size());
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t g = 0; g < graders.size(); ++g) row_preds[g] = (graders[g].*side)[i];
        const auto f = stacker_features(panel, row_preds);
        for (std::size_t j = 0; j < f.size(); ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f[j];
    }
    return x;
}

Eigen::VectorXd target_vector(const std::vector<const std::vector<Response>*>& sides) {
    std::vector<double> y;
    for (const auto* side : sides) {
        for (const auto& r : *side) y.push_back(r.gold_label == Label::Correct ? 1.0 : 0.0);
    }
    return Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
}

ConditionEval evaluate(const Condition& c, const std::vector<std::shared_ptr<const Embedder>>& embedders,
                       const ExperimentSpec& spec, bool with_ensemble) {
    assert_no_leakage(c);
    if (c.validation.empty() && !spec.fixed_threshold) {
        fail(ErrorCode::Validation, c.name + ": validation slice is empty; lower validation_fraction or fix the threshold");
    }
    std::vector<std::future<GraderRun>> jobs;
    for (const auto& e : embedders) {
        jobs.push_back(std::async(std::launch::async, [&c, e, &spec, with_ensemble] {
            return run_grader(c, e, spec, with_ensemble);
        }));
    }
    ConditionEval eval;
    for (auto& j : jobs) eval.graders.push_back(j.get());
    if (!with_ensemble) return eval;

    EnsembleResult ens;
    ens.condition = c.name;
    VotePanel panel;
    panel.tie_break = spec.tie_break;
    for (std::size_t g = 0; g < embedders.size(); ++g) {
        ens.grader_names.push_back(embedders[g]->config().name);
        panel.classifier_ids.push_back(embedders[g]->config().name);
        ens.thresholds.push_back(eval.graders[g].threshold);
        ens.base_reports.push_back(confusion(eval.graders[g].test, c.test));
    }
    panel.validate();

    std::vector<Label> vote_labels, ridge_labels;
    std::vector<Prediction> row(embedders.size());
    const auto x_train = feature_matrix(panel, eval.graders, &GraderRun::train_loo);
    const auto y_train = target_vector({&c.real_index, &c.gaming_index});
    if (spec.ridge_lambda) {
        ens.ridge_lambda = *spec.ridge_lambda;
    } else {
        const auto x_val = feature_matrix(panel, eval.graders, &GraderRun::validation);
        ens.ridge_lambda = select_lambda(x_train, y_train, x_val, target_vector({&c.validation}),
                                         spec.lambda_grid);
    }
    auto model = fit_ridge(x_train, y_train, ens.ridge_lambda);
    model.classifier_ids = panel.classifier_ids;
    for (std::size_t i = 0; i < c.test.size(); ++i) {
        for (std::size_t g = 0; g < embedders.size(); ++g) row[g] = eval.graders[g].test[i];
        vote_labels.push_back(majority_vote(panel, row));
        ridge_labels.push_back(predict_ridge(model, stacker_features(panel, row)).label);
    }
    ens.majority_vote = confusion_from_labels(c.test, vote_labels);
    ens.ridge = confusion_from_labels(c.test, ridge_labels);
    eval.ensemble = std::move(ens);
    return eval;
}

ConditionResult single_result(const Condition& c, const ConditionEval& eval) {
    ConditionResult r;
    r.name = c.name;
    r.threshold = eval.graders.front().threshold;
    r.index_size = c.real_index.size() + c.gaming_index.size();
    r.validation_size = c.validation.size();
    r.test_size = c.test.size();
    r.report = confusion(eval.graders.front().test, c.test);
    return r;
}

MetricsReport sum_reports(const std::vector<const MetricsReport*>& reports) {
    MetricsReport out;
    for (const auto* r : reports) {
        for (const auto& [k, c] : r->groups) out.groups[k] += c;
    }
    return out;
}

EnsembleResult sum_ensembles(const std::vector<EnsembleResult>& folds) {
    EnsembleResult out;
    out.condition = "advt2";
    out.grader_names = folds.front().grader_names;
    out.base_reports.resize(out.grader_names.size());
    out.thresholds.assign(out.grader_names.size(), 0.0);
    std::vector<const MetricsReport*> mv, rr;
    for (const auto& f : folds) {
        mv.push_back(&f.majority_vote);
        rr.push_back(&f.ridge);
    }
    for (std::size_t g = 0; g < out.grader_names.size(); ++g) {
        std::vector<const MetricsReport*> parts;
        for (const auto& f : folds) parts.push_back(&f.base_reports[g]);
        out.base_reports[g] = sum_reports(parts);
    }
    out.majority_vote = sum_reports(mv);
    out.ridge = sum_reports(rr);
    // Per-fold thresholds and lambdas live in the fold entries.
    out.thresholds.clear();
    out.ridge_lambda = 0.0;
    return out;
}

bool needs(Protocol p, Protocol step) {
    if (step == Protocol::Baseline) return true;
    return p == step || p == Protocol::Ensemble;
}

}  // namespace

std::string_view to_string(Protocol p) {
    switch (p) {
        case Protocol::Baseline: return "baseline";
        case Protocol::AdvT1: return "advt1";
        case Protocol::AdvT2: return "advt2";
        case Protocol::Ensemble: return "ensemble";
    }
    return "baseline";
}

Protocol parse_protocol(std::string_view s) {
    for (auto p : {Protocol::Baseline, Protocol::AdvT1, Protocol::AdvT2, Protocol::Ensemble}) {
        if (to_string(p) == s) return p;
    }
    fail(ErrorCode::InvalidArgument, "unknown experiment '" + std::string(s) + "' (baseline|advt1|advt2|ensemble)");
}

void ExperimentSpec::validate() const {
    auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (name.empty()) fail(ErrorCode::InvalidArgument, "experiment name must not be empty");
    if (!open_unit(real_train_fraction)) fail(ErrorCode::InvalidArgument, "real_train_fraction must lie in (0,1)");
    if (!open_unit(gaming_train_fraction)) fail(ErrorCode::InvalidArgument, "gaming_train_fraction must lie in (0,1)");
    if (!open_unit(validation_fraction)) fail(ErrorCode::InvalidArgument, "validation_fraction must lie in (0,1)");
    if (strategies_in_test.empty()) fail(ErrorCode::InvalidArgument, "strategies_in_test must not be empty");
    if (embedders.empty()) fail(ErrorCode::InvalidArgument, "at least one embedder is required");
    std::set<std::string> names;
    for (const auto& e : embedders) {
        e.validate();
        if (!names.insert(e.name).second) fail(ErrorCode::InvalidArgument, "duplicate embedder name '" + e.name + "'");
    }
    if (!fixed_threshold && threshold_grid.empty()) fail(ErrorCode::InvalidArgument, "threshold_grid is empty");
    if (fixed_threshold && !(*fixed_threshold >= -1.0 && *fixed_threshold <= 1.01)) {
        fail(ErrorCode::InvalidArgument, "threshold must lie in [-1, 1.01]");
    }
    if (ridge_lambda && !(*ridge_lambda >= 0.0)) fail(ErrorCode::InvalidArgument, "ridge_lambda must be >= 0");
    if (!ridge_lambda && lambda_grid.empty()) fail(ErrorCode::InvalidArgument, "lambda_grid is empty");
}

nlohmann::ordered_json to_json(const ExperimentSpec& spec) {
    nlohmann::ordered_json j;
    j["name"] = spec.name;
    j["seed"] = spec.seed;
    j["real_train_fraction"] = spec.real_train_fraction;
    j["gaming_train_fraction"] = spec.gaming_train_fraction;
    j["validation_fraction"] = spec.validation_fraction;
    j["stratify_by"] = to_string(spec.stratify_by);
    auto strategies = [](const std::set<Strategy>& s) {
        auto arr = nlohmann::ordered_json::array();
        for (auto x : s) arr.push_back(to_string(x));
        return arr;
    };
    j["strategies_in_train"] = strategies(spec.strategies_in_train);
    j["strategies_in_test"] = strategies(spec.strategies_in_test);
    j["threshold"] = spec.fixed_threshold ? nlohmann::ordered_json(*spec.fixed_threshold) : nlohmann::ordered_json();
    j["threshold_grid"] = spec.threshold_grid;
    auto emb = nlohmann::ordered_json::array();
    for (const auto& e : spec.embedders) emb.push_back(nlohmann::ordered_json::parse(to_json(e).dump()));
    j["embedders"] = emb;
    j["tie_break"] = to_string(spec.tie_break);
    j["ridge_lambda"] = spec.ridge_lambda ? nlohmann::ordered_json(*spec.ridge_lambda) : nlohmann::ordered_json();
    j["lambda_grid"] = spec.lambda_grid;
    j["drop_leaks"] = spec.drop_leaks;
    j["write_pca"] = spec.write_pca;
    return j;
}

ExperimentSpec experiment_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) fail(ErrorCode::InvalidArgument, "experiment spec must be an object");
    static const std::set<std::string> known = {
        "name", "seed", "real_train_fraction", "gaming_train_fraction", "validation_fraction", "stratify_by",
        "strategies_in_train", "strategies_in_test", "threshold", "threshold_grid", "embedders", "tie_break",
        "ridge_lambda", "lambda_grid", "drop_leaks", "write_pca"};
    for (const auto& [k, v] : j.items()) {
        if (known.count(k) == 0) fail(ErrorCode::InvalidArgument, "unknown experiment setting '" + k + "'");
    }
    ExperimentSpec s;
    try {
        s.name = j.value("name", s.name);
        s.seed = j.value("seed", s.seed);
        s.real_train_fraction = j.value("real_train_fraction", s.real_train_fraction);
        s.gaming_train_fraction = j.value("gaming_train_fraction", s.gaming_train_fraction);
        s.validation_fraction = j.value("validation_fraction", s.validation_fraction);
        if (j.contains("stratify_by")) s.stratify_by = parse_stratify(j["stratify_by"].get<std::string>());
        auto strategies = [](const nlohmann::json& arr) {
            std::set<Strategy> out;
            for (const auto& x : arr) out.insert(parse_strategy(x.get<std::string>()));
            return out;
        };
        if (j.contains("strategies_in_train")) s.strategies_in_train = strategies(j["strategies_in_train"]);
        if (j.contains("strategies_in_test")) s.strategies_in_test = strategies(j["strategies_in_test"]);
        if (j.contains("threshold") && !j["threshold"].is_null()) s.fixed_threshold = j["threshold"].get<double>();
        if (j.contains("threshold_grid")) s.threshold_grid = j["threshold_grid"].get<std::vector<double>>();
        if (j.contains("embedders")) {
            s.embedders.clear();
            for (const auto& e : j["embedders"]) s.embedders.push_back(embedder_config_from_json(e));
        }
        if (j.contains("tie_break")) s.tie_break = parse_label(j["tie_break"].get<std::string>());
        if (j.contains("ridge_lambda") && !j["ridge_lambda"].is_null()) s.ridge_lambda = j["ridge_lambda"].get<double>();
        if (j.contains("lambda_grid")) s.lambda_grid = j["lambda_grid"].get<std::vector<double>>();
        s.drop_leaks = j.value("drop_leaks", s.drop_leaks);
        s.write_pca = j.value("write_pca", s.write_pca);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("experiment spec: ") + e.what());
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Parse) throw;
        fail(ErrorCode::InvalidArgument, std::string("experiment spec: ") + e.what());
    }
    s.validate();
    return s;
}

ExperimentOutcome run_experiment(const Corpus& data, const ExperimentSpec& spec, Protocol protocol) {
    spec.validate();
    ExperimentOutcome out;
    out.protocol = protocol;

    std::vector<Response> real;
    std::map<Strategy, std::vector<Response>> pools;
    for (auto s : kStrategies) pools[s];
    for (const auto& r : data.responses()) {
        ++out.data_counts[std::string(to_string(r.provenance))];
        if (auto s = strategy_of(r.provenance)) pools[*s].push_back(r);
        else real.push_back(r);
    }
    if (real.empty()) fail(ErrorCode::Validation, "experiment: corpus has no real responses");

    Partition part;
    part.real = three_way(real, spec.real_train_fraction, spec.validation_fraction, spec.stratify_by,
                          spec.seed, "real", out.warnings);
    if (part.real.index.empty()) fail(ErrorCode::Validation, "experiment: real training split is empty");

    std::vector<Response> train_correct;
    for (const auto* side : {&part.real.index, &part.real.validation}) {
        for (const auto& r : *side) {
            if (r.gold_label == Label::Correct) train_correct.push_back(r);
        }
    }
    std::vector<Response> all_gaming;
    for (auto s : kStrategies) append(all_gaming, pools[s]);
    out.leaks = leak_check(all_gaming, train_correct);
    if (spec.drop_leaks && !out.leaks.empty()) {
        std::unordered_set<std::string> drop;
        for (const auto& l : out.leaks) drop.insert(l.gaming_id);
        for (auto& [s, pool] : pools) {
            pool.erase(std::remove_if(pool.begin(), pool.end(),
                                      [&](const Response& r) { return drop.count(r.response_id) != 0; }),
                       pool.end());
        }
    }
    for (auto s : kStrategies) {
        part.gaming_all[s] = pools[s];
        if (pools[s].empty()) {
            part.gaming[s] = SplitResult{};
            continue;
        }
        auto g = split(pools[s], SplitPlan{derive_seed(spec.seed, "gaming/" + key_of(s)),
                                           spec.gaming_train_fraction, StratifyBy::Provenance});
        for (auto& msg : g.warnings) out.warnings.push_back("gaming/" + key_of(s) + ": " + msg);
        part.gaming[s] = std::move(g);
    }

    auto require = [&](Strategy s, const char* why) {
        if (pools[s].empty()) {
            fail(ErrorCode::Validation, std::string(why) + ": no " + key_of(s) + " gaming responses");
        }
    };
    if (needs(protocol, Protocol::AdvT1)) {
        for (auto s : spec.strategies_in_train) require(s, "advt1");
    }
    if (needs(protocol, Protocol::AdvT2)) {
        for (auto s : kStrategies) require(s, "advt2");
    }

    const bool ensemble = protocol == Protocol::Ensemble;
    const std::size_t n_graders = ensemble ? spec.embedders.size() : 1;
    if (ensemble && n_graders < 2) fail(ErrorCode::InvalidArgument, "ensemble needs at least 2 base graders");
    std::vector<std::string> fit_texts;
    for (const auto* side : {&part.real.index, &part.real.validation}) {
        for (const auto& r : *side) fit_texts.push_back(r.text);
    }
    std::vector<std::shared_ptr<const Embedder>> embedders;
    for (std::size_t i = 0; i < n_graders; ++i) embedders.push_back(fit_embedder(spec.embedders[i], fit_texts));
    out.primary_embedder = embedders.front();

    {
        const auto c = baseline_condition(part, spec);
        const auto eval = evaluate(c, embedders, spec, ensemble);
        out.baseline = single_result(c, eval);
        if (eval.ensemble) out.ensemble.push_back(*eval.ensemble);
    }
    if (needs(protocol, Protocol::AdvT1)) {
        const auto c = advt1_condition(part, spec);
        const auto eval = evaluate(c, embedders, spec, ensemble);
        out.advt1 = single_result(c, eval);
        if (eval.ensemble) out.ensemble.push_back(*eval.ensemble);
    }
    if (needs(protocol, Protocol::AdvT2)) {
        std::vector<EnsembleResult> fold_ensembles;
        std::vector<const MetricsReport*> fold_reports;
        for (auto s : kStrategies) {
            const auto c = advt2_condition(part, s);
            const auto eval = evaluate(c, embedders, spec, ensemble);
            out.advt2_folds.push_back(single_result(c, eval));
            if (eval.ensemble) fold_ensembles.push_back(*eval.ensemble);
        }
        for (const auto& f : out.advt2_folds) fold_reports.push_back(&f.report);
        out.advt2_aggregate = sum_reports(fold_reports);
        if (!fold_ensembles.empty()) {
            out.ensemble.push_back(sum_ensembles(fold_ensembles));
            for (auto& f : fold_ensembles) out.ensemble.push_back(std::move(f));
        }
    }
    return out;
}

MetricsReport run_baseline(const Corpus& data, const ExperimentSpec& spec) {
    return run_experiment(data, spec, Protocol::Baseline).baseline->report;
}

MetricsReport run_advt1(const Corpus& data, const ExperimentSpec& spec) {
    return run_experiment(data, spec, Protocol::AdvT1).advt1->report;
}

std::vector<MetricsReport> run_advt2(const Corpus& data, const ExperimentSpec& spec) {
    std::vector<MetricsReport> out;
    for (auto& f : run_experiment(data, spec, Protocol::AdvT2).advt2_folds) out.push_back(std::move(f.report));
    return out;
}

std::vector<EnsembleResult> run_ensemble(const Corpus& data, const ExperimentSpec& spec) {
    auto all = run_experiment(data, spec, Protocol::Ensemble).ensemble;
    std::vector<EnsembleResult> out;
    for (auto& e : all) {
        if (e.condition == "baseline" || e.condition == "advt1" || e.condition == "advt2") out.push_back(std::move(e));
    }
    return out;
}

namespace {

nlohmann::ordered_json ordered(const nlohmann::json& j) { return nlohmann::ordered_json::parse(j.dump()); }

nlohmann::ordered_json condition_json(const ConditionResult& c) {
    nlohmann::ordered_json j;
    j["threshold"] = c.threshold;
    j["sizes"] = {{"index", c.index_size}, {"validation", c.validation_size}, {"test", c.test_size}};
    j["metrics"] = ordered(to_json(c.report));
    return j;
}

// compare_reports() needs matching keys; restrict both sides to the shared ones.
DeltaReport delta_on_shared(const MetricsReport& before, const MetricsReport& after) {
    MetricsReport b, a;
    for (const auto& [k, c] : before.groups) {
        if (after.groups.count(k) != 0) {
            b.groups.emplace(k, c);
            a.groups.emplace(k, after.groups.at(k));
        }
    }
    return compare_reports(b, a);
}

nlohmann::ordered_json ensemble_json(const EnsembleResult& e) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json base;
    for (std::size_t g = 0; g < e.grader_names.size(); ++g) {
        nlohmann::ordered_json entry;
        if (g < e.thresholds.size()) entry["threshold"] = e.thresholds[g];
        entry["metrics"] = ordered(to_json(e.base_reports[g]));
        base[e.grader_names[g]] = entry;
    }
    if (e.condition != "advt2") j["ridge_lambda"] = e.ridge_lambda;
    j["base"] = base;
    j["majority_vote"] = ordered(to_json(e.majority_vote));
    j["ridge"] = ordered(to_json(e.ridge));
    return j;
}

const std::vector<std::string>& strategy_rows() {
    static const std::vector<std::string> rows = {"s1", "s2", "s3"};
    return rows;
}

std::string fmt(const std::optional<double>& v) {
    if (!v) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return buf;
}

}  // namespace

nlohmann::ordered_json outcome_to_json(const ExperimentOutcome& o, const ExperimentSpec& spec) {
    nlohmann::ordered_json j;
    j["name"] = spec.name;
    j["protocol"] = to_string(o.protocol);
    j["seed"] = spec.seed;
    j["spec"] = to_json(spec);
    j["data"] = o.data_counts;
    auto leaks = nlohmann::ordered_json::array();
    for (const auto& l : o.leaks) leaks.push_back({{"gaming_id", l.gaming_id}, {"matched_id", l.matched_id}});
    j["leaks"] = leaks;
    j["warnings"] = o.warnings;

    nlohmann::ordered_json conditions;
    if (o.baseline) conditions["baseline"] = condition_json(*o.baseline);
    if (o.advt1) {
        auto c = condition_json(*o.advt1);
        c["delta_vs_baseline"] = ordered(to_json(delta_on_shared(o.baseline->report, o.advt1->report)));
        conditions["advt1"] = c;
    }
    if (!o.advt2_folds.empty()) {
        nlohmann::ordered_json folds;
        for (std::size_t i = 0; i < o.advt2_folds.size(); ++i) {
            folds[key_of(kStrategies[i])] = condition_json(o.advt2_folds[i]);
        }
        nlohmann::ordered_json advt2;
        advt2["folds"] = folds;
        advt2["aggregate"] = ordered(to_json(*o.advt2_aggregate));
        advt2["delta_vs_baseline"] = ordered(to_json(delta_on_shared(o.baseline->report, *o.advt2_aggregate)));
        conditions["advt2"] = advt2;
    }
    j["conditions"] = conditions;
    if (!o.ensemble.empty()) {
        nlohmann::ordered_json ens;
        for (const auto& e : o.ensemble) ens[e.condition] = ensemble_json(e);
        j["ensemble"] = ens;
    }
    return j;
}

Corpus load_run_data(const RunInputs& inputs) {
    const Corpus base = load_corpus(inputs.corpus);
    auto responses = base.responses();
    for (const auto& path : inputs.gaming) {
        std::ifstream in(path);
        if (!in) fail(ErrorCode::Io, "cannot open gaming file " + path.string());
        auto extra = parse_responses(in, path.string());
        for (const auto& r : extra) {
            if (!is_gaming(r.provenance)) {
                fail(ErrorCode::Validation, path.string() + ": response " + r.response_id + " is not a gaming response");
            }
        }
        append(responses, extra);
    }
    return Corpus(base.items(), std::move(responses));
}

namespace {

std::string abs_string(const std::filesystem::path& p) {
    return std::filesystem::weakly_canonical(std::filesystem::absolute(p)).string();
}

}  // namespace

nlohmann::ordered_json manifest_json(const ExperimentSpec& spec, Protocol protocol, const RunInputs& inputs) {
    nlohmann::ordered_json j;
    j["format"] = "asag-run-manifest/1";
    j["name"] = spec.name;
    j["protocol"] = to_string(protocol);
    j["seed"] = spec.seed;
    j["spec"] = to_json(spec);
    auto files = nlohmann::ordered_json::array();
    auto add = [&](const char* role, const std::filesystem::path& p) {
        files.push_back({{"role", role}, {"path", abs_string(p)}, {"git_blob_sha1", git_blob_sha1(read_file(p))}});
    };
    add("corpus", inputs.corpus);
    for (const auto& g : inputs.gaming) add("gaming", g);
    j["inputs"] = files;
    return j;
}

RunManifest load_manifest(const std::filesystem::path& path) {
    RunManifest m;
    try {
        const auto j = nlohmann::json::parse(read_file(path));
        if (j.value("format", std::string()) != "asag-run-manifest/1") {
            fail(ErrorCode::Parse, path.string() + ": not a run manifest");
        }
        m.protocol = j.at("protocol").get<std::string>();
        m.spec = experiment_spec_from_json(j.at("spec"));
        for (const auto& f : j.at("inputs")) {
            const auto role = f.at("role").get<std::string>();
            const auto p = f.at("path").get<std::string>();
            if (role == "corpus") m.inputs.corpus = p;
            else if (role == "gaming") m.inputs.gaming.emplace_back(p);
            else fail(ErrorCode::Parse, path.string() + ": unknown input role '" + role + "'");
            m.input_hashes[p] = f.at("git_blob_sha1").get<std::string>();
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, path.string() + ": " + e.what());
    }
    if (m.inputs.corpus.empty()) fail(ErrorCode::Parse, path.string() + ": manifest names no corpus");
    return m;
}

std::vector<std::string> changed_inputs(const RunManifest& manifest) {
    std::vector<std::string> changed;
    for (const auto& [path, sha] : manifest.input_hashes) {
        std::error_code ec;
        if (!std::filesystem::exists(path, ec) || git_blob_sha1(read_file(path)) != sha) changed.push_back(path);
    }
    return changed;
}

void write_run(const std::filesystem::path& dir, const ExperimentOutcome& o, const ExperimentSpec& spec,
               const RunInputs& inputs, const Corpus& data) {
    write_file(dir / "report.json", outcome_to_json(o, spec).dump(2) + "\n");
    write_file(dir / "config.json", to_json(spec).dump(2) + "\n");

    std::vector<std::pair<std::string, const MetricsReport*>> conds;
    if (o.baseline) conds.emplace_back("NoAdvT", &o.baseline->report);
    if (o.advt1) conds.emplace_back("AdvT1", &o.advt1->report);
    if (o.advt2_aggregate) conds.emplace_back("AdvT2", &*o.advt2_aggregate);
    write_file(dir / "tables" / "fpr.csv", fpr_table_csv(conds, strategy_rows()));

    std::string real = "condition,n,precision,recall,f1,accuracy\n";
    for (const auto& [name, report] : conds) {
        const Confusion* c = report->group("real");
        if (c == nullptr) continue;
        real += name + "," + std::to_string(c->total()) + "," + fmt(c->precision()) + "," + fmt(c->recall()) +
                "," + fmt(c->f1()) + "," + fmt(c->accuracy()) + "\n";
    }
    write_file(dir / "tables" / "real.csv", real);

    std::string delta = "strategy,condition,fpr_before,fpr_after,absolute,relative\n";
    for (const auto& [name, report] : conds) {
        if (name == "NoAdvT") continue;
        const auto d = delta_on_shared(o.baseline->report, *report);
        for (const auto& k : strategy_rows()) {
            auto it = d.groups.find(k);
            if (it == d.groups.end()) continue;
            delta += strategy_display_name(k) + "," + name + "," + fmt(it->second.fpr_before) + "," +
                     fmt(it->second.fpr_after) + "," + fmt(it->second.absolute) + "," + fmt(it->second.relative) +
                     "\n";
        }
    }
    if (conds.size() > 1) write_file(dir / "tables" / "delta.csv", delta);

    if (!o.ensemble.empty()) {
        const std::map<std::string, std::string> label = {
            {"baseline", "NoAdvT"}, {"advt1", "AdvT1"}, {"advt2", "AdvT2"}};
        std::vector<std::pair<std::string, const MetricsReport*>> ens_cols, base_cols;
        for (const char* method : {"Majority Vote", "Ridge Regression"}) {
            for (const auto& e : o.ensemble) {
                auto it = label.find(e.condition);
                if (it == label.end()) continue;
                ens_cols.emplace_back(std::string(method) + " " + it->second,
                                      std::string(method) == "Majority Vote" ? &e.majority_vote : &e.ridge);
            }
        }
        write_file(dir / "tables" / "ensemble_fpr.csv", fpr_table_csv(ens_cols, strategy_rows()));
        for (const auto& e : o.ensemble) {
            auto it = label.find(e.condition);
            if (it == label.end()) continue;
            for (std::size_t g = 0; g < e.grader_names.size(); ++g) {
                base_cols.emplace_back(e.grader_names[g] + " " + it->second, &e.base_reports[g]);
            }
        }
        write_file(dir / "tables" / "base_fpr.csv", fpr_table_csv(base_cols, strategy_rows()));
    }

    if (spec.write_pca && o.primary_embedder) {
        write_item_pcas(data.responses(), *o.primary_embedder, {}, dir / "pca");
    }

    auto manifest = manifest_json(spec, o.protocol, inputs);
    manifest["outputs"] = {{"report.json", sha256_hex(read_file(dir / "report.json"))}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace asag
