// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asag/app.hpp"
#include "asag/corpus.hpp"
#include "asag/diagnostics.hpp"
#include "asag/ensemble.hpp"
#include "asag/experiments.hpp"
#include "asag/gaming.hpp"
#include "asag/hashing.hpp"
#include "asag/llmjudge.hpp"
#include "asag/metrics.hpp"
#include "asag/rng.hpp"
#include "asag/synthetic.hpp"
#include "asag/text.hpp"
#include "metric_cases.hpp"
#include "oracles.hpp"

using namespace asag;
using nlohmann::json;

namespace {

const std::string kFixtures = ASAG_FIXTURES;

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Records the first few failures of a check.
struct Checker {
    std::size_t failures = 0;
    std::string first;
    void expect(bool ok, const std::string& what) {
        if (ok) return;
        if (failures++ == 0) first = what;
    }
    Outcome done(const std::string& summary) const {
        if (failures == 0) return {true, summary};
        return {false, std::to_string(failures) + " violation(s), first: " + first};
    }
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

std::string num(double v, int prec = 4) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

double fpr_of(const MetricsReport& r, const std::string& group) {
    const Confusion* c = r.group(group);
    if (c == nullptr || !c->fpr()) throw std::runtime_error("no FPR for group " + group);
    return *c->fpr();
}

const synthetic::ReferenceDataset& reference() {
    static const auto d = synthetic::make_reference_dataset(42);
    return d;
}

// ---- 1 ----
Outcome ridge_oracle() {
    std::mt19937_64 gen(20240601);
    std::normal_distribution<double> nd(0, 1);
    std::uniform_real_distribution<double> ul(0.01, 10.0);
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t p = 1 + gen() % 10;
        const std::size_t n = 1 + gen() % 50;
        oracle::Matrix x(n, std::vector<double>(p));
        std::vector<double> y(n);
        Eigen::MatrixXd ex(n, p);
        Eigen::VectorXd ey(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < p; ++j) ex(i, j) = x[i][j] = nd(gen);
            ey(i) = y[i] = nd(gen);
        }
        const double lambda = ul(gen);
        const auto model = fit_ridge(ex, ey, lambda, RidgeOptions{false, false});
        const auto want = oracle::ridge_normal_equations(x, y, lambda);
        for (std::size_t j = 0; j < p; ++j) worst = std::max(worst, std::fabs(model.weights[j] - want[j]));
    }
    if (!(worst < 1e-8)) return {false, "max |dw| = " + sci(worst)};
    return {true, "100 instances, max |dw| = " + sci(worst)};
}

// ---- 2 ----
Outcome vote_truth_table() {
    Checker ck;
    for (unsigned mask = 0; mask < 32; ++mask) {
        std::vector<Label> votes;
        int correct = 0;
        for (int b = 0; b < 5; ++b) {
            const bool c = (mask >> b) & 1u;
            correct += c ? 1 : 0;
            votes.push_back(c ? Label::Correct : Label::Incorrect);
        }
        const Label want = correct >= 3 ? Label::Correct : Label::Incorrect;
        for (Label tb : {Label::Correct, Label::Incorrect}) {
            ck.expect(majority_vote(votes, tb) == want, "5-panel pattern " + std::to_string(mask));
        }
    }
    for (std::size_t n : {2u, 4u, 6u}) {
        std::vector<Label> votes(n, Label::Correct);
        std::fill(votes.begin() + static_cast<std::ptrdiff_t>(n / 2), votes.end(), Label::Incorrect);
        for (Label tb : {Label::Correct, Label::Incorrect}) {
            ck.expect(majority_vote(votes, tb) == tb, "tie on " + std::to_string(n) + "-panel");
        }
    }
    return ck.done("32 patterns x 2 tie-breaks, ties on 2/4/6 panels");
}

// ---- 3 ----
Outcome pca_oracle() {
    std::mt19937_64 gen(77);
    std::normal_distribution<double> nd(0, 1);
    double worst = 0;
    for (int t = 0; t < 20; ++t) {
        const std::size_t d = 2 + gen() % 3, n = 3 + gen() % 6;
        oracle::Matrix rows(n, std::vector<double>(d));
        std::vector<EmbeddingVector> vecs;
        for (auto& r : rows) {
            for (auto& v : r) v = nd(gen);
            vecs.push_back({r});
        }
        const auto m = pca_fit(vecs);
        const auto cov = oracle::covariance(rows);
        const auto eig = oracle::jacobi_eigen(cov);
        double trace = 0;
        for (std::size_t j = 0; j < d; ++j) trace += cov[j][j];
        for (std::size_t c = 0; c < 2; ++c) {
            worst = std::max(worst, std::fabs(m.explained_variance_ratio[c] - std::max(eig.values[c], 0.0) / trace));
            const auto want = oracle::sign_fix(eig.vectors[c]);
            for (std::size_t j = 0; j < d; ++j) worst = std::max(worst, std::fabs(m.components[c][j] - want[j]));
        }
        double dot = 0, n0 = 0, n1 = 0;
        for (std::size_t j = 0; j < d; ++j) {
            dot += m.components[0][j] * m.components[1][j];
            n0 += m.components[0][j] * m.components[0][j];
            n1 += m.components[1][j] * m.components[1][j];
        }
        worst = std::max({worst, std::fabs(dot), std::fabs(n0 - 1), std::fabs(n1 - 1)});
    }
    if (!(worst < 1e-8)) return {false, "max deviation " + sci(worst)};
    const auto col = pca_fit({{{1, 2, 3, 4}}, {{2, 4, 6, 8}}, {{-1, -2, -3, -4}}, {{0.5, 1, 1.5, 2}}});
    const double r0 = col.explained_variance_ratio[0], r1 = col.explained_variance_ratio[1];
    if (!(std::fabs(r0 - 1.0) < 1e-9 && std::fabs(r1) < 1e-9)) {
        return {false, "collinear ratios " + sci(r0) + ", " + sci(r1)};
    }
    return {true, "20 datasets, max deviation " + sci(worst) + ", collinear ratios (1, 0)"};
}

// ---- 4 ----
Outcome metric_identities() {
    Checker ck;
    auto check = [&](const std::optional<double>& got, double want, const std::string& what) {
        if (std::isnan(want)) {
            ck.expect(!got.has_value(), what + " should be absent");
        } else {
            ck.expect(got.has_value() && std::fabs(*got - want) < 1e-12, what);
        }
    };
    for (const auto& m : fixtures::kMetricCases) {
        const Confusion c{m.tp, m.fp, m.tn, m.fn};
        const std::string n = m.name;
        check(c.precision(), m.precision, n + " precision");
        check(c.recall(), m.recall, n + " recall");
        check(c.f1(), m.f1, n + " f1");
        check(c.accuracy(), m.accuracy, n + " accuracy");
        check(c.fpr(), m.fpr, n + " fpr");
        check(c.tnr(), m.tnr, n + " tnr");
        if (c.fpr()) ck.expect(std::fabs(*c.fpr() + *c.tnr() - 1.0) < 1e-12, n + " fpr+tnr");
    }
    // Reference LLM-judge rows: accuracy / TNR / FPR.
    const struct { Confusion c; double acc, tnr, fpr; } table[] = {
        {{0, 11, 89, 0}, 0.89, 0.89, 0.11}, {{0, 3, 97, 0}, 0.97, 0.97, 0.03}, {{0, 1, 99, 0}, 0.99, 0.99, 0.01}};
    for (const auto& row : table) {
        check(row.c.accuracy(), row.acc, "table accuracy");
        check(row.c.tnr(), row.tnr, "table tnr");
        check(row.c.fpr(), row.fpr, "table fpr");
    }
    return ck.done("10 fixture cases and 3 table rows at 1e-12");
}

// ---- 5 ----
std::string squash(const std::string& s) {
    std::istringstream in(s);
    std::string w, out;
    while (in >> w) out += (out.empty() ? "" : " ") + w;
    return out;
}

Outcome generator_invariants() {
    const auto ref = synthetic::make_reference_corpus(synthetic::SyntheticConfig{});
    const auto lex = gaming::default_lexicons();
    const auto* keep = &lex.medical_terms;
    constexpr std::size_t kPer = 125;
    Checker ck;
    std::size_t generated = 0;
    std::vector<Response> everything;
    for (const auto& item : ref.corpus.items()) {
        gaming::GeneratorConfig cfg;
        cfg.seed = derive_seed(42, "acceptance/" + item.item_id);
        const auto stem_tokens = text::tokenize(item.stem, keep);
        const std::set<std::string> stem_set(stem_tokens.begin(), stem_tokens.end());
        const auto stem_flat = squash(item.stem);
        auto size_ok = [&](std::size_t k, std::size_t avail) {
            return k >= std::min<std::size_t>(cfg.k_min, avail) && k <= std::min<std::size_t>(cfg.k_max, avail);
        };

        const auto s1a = gaming::gen_s1_nonconsecutive(item, cfg, lex, kPer).responses;
        std::set<std::string> content;
        for (const auto& t : stem_tokens) {
            if (!lex.is_stop_word(t)) content.insert(t);
        }
        for (const auto& r : s1a) {
            const auto toks = text::tokenize(r.text, keep);
            const std::set<std::string> uniq(toks.begin(), toks.end());
            ck.expect(uniq.size() == toks.size(), "s1a repeated token: " + r.text);
            ck.expect(size_ok(toks.size(), content.size()), "s1a size: " + r.text);
            for (const auto& t : toks) ck.expect(content.count(t) == 1, "s1a token not in stem: " + t);
        }

        const auto s1b = gaming::gen_s1_consecutive(item, cfg, lex, kPer).responses;
        for (const auto& r : s1b) {
            ck.expect(stem_flat.find(r.text) != std::string::npos, "s1b not a stem substring: " + r.text);
            const auto toks = text::tokenize(r.text, keep);
            ck.expect(std::search(stem_tokens.begin(), stem_tokens.end(), toks.begin(), toks.end()) !=
                          stem_tokens.end(),
                      "s1b not contiguous: " + r.text);
        }

        const auto s1c = gaming::gen_s1_medical(item, cfg, lex, kPer).responses;
        std::set<std::string> med;
        for (const auto& t : stem_tokens) {
            if (lex.is_medical_term(t)) med.insert(t);
        }
        for (const auto& r : s1c) {
            const auto toks = text::tokenize(r.text, keep);
            ck.expect(size_ok(toks.size(), med.size()), "s1c size: " + r.text);
            for (const auto& t : toks) ck.expect(med.count(t) == 1, "s1c token not a stem medical term: " + t);
        }

        std::vector<Response> incorrect;
        std::set<std::string> incorrect_texts;
        for (const auto& r : ref.corpus.responses()) {
            if (r.item_id == item.item_id && r.gold_label == Label::Incorrect) {
                incorrect.push_back(r);
                incorrect_texts.insert(text::trim(r.text));
            }
        }
        const std::set<std::string> correct(item.correct_answers.begin(), item.correct_answers.end());
        const auto s3 = gaming::gen_s3_mixed(item, incorrect, cfg, kPer).responses;
        for (const auto& r : s3) {
            std::size_t n_correct = 0, n_incorrect = 0, pieces = 0, start = 0;
            while (true) {
                const auto pos = r.text.find(cfg.mixed_separator, start);
                const auto piece = r.text.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
                ++pieces;
                if (correct.count(piece)) ++n_correct;
                else if (incorrect_texts.count(piece)) ++n_incorrect;
                if (pos == std::string::npos) break;
                start = pos + cfg.mixed_separator.size();
            }
            ck.expect(n_correct == 1 && n_incorrect == static_cast<std::size_t>(cfg.mixed_incorrect_parts) &&
                          pieces == n_correct + n_incorrect,
                      "s3 composition: " + r.text);
        }

        for (const auto* pool : {&s1a, &s1b, &s1c, &s3}) {
            ck.expect(pool->size() == kPer, item.item_id + " pool size " + std::to_string(pool->size()));
            generated += pool->size();
            everything.insert(everything.end(), pool->begin(), pool->end());
        }
    }
    ck.expect(generated >= 10000, "only " + std::to_string(generated) + " responses");
    for (const auto& r : everything) ck.expect(r.gold_label == Label::Incorrect, "gold label of " + r.response_id);

    std::mt19937_64 gen(3);
    for (int t = 0; t < 50; ++t) {
        const double rate = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
        const std::size_t n = gen() % everything.size();
        const std::vector<Response> pool(everything.begin(), everything.begin() + static_cast<std::ptrdiff_t>(n));
        const auto sub = gaming::subsample(pool, rate, gen());
        ck.expect(sub.size() == static_cast<std::size_t>(std::llround(rate * static_cast<double>(n))),
                  "subsample size at rate " + std::to_string(rate));
    }
    const auto& pools = reference().pools;
    ck.expect(pools.s1a.size() + pools.s1b.size() + pools.s1c.size() == 1200, "reference S1 pool size");
    return ck.done(std::to_string(generated) + " responses, 0 violations, 50 subsample sizes");
}

// ---- 6, 7, 8 ----
ExperimentSpec reference_spec() { return ExperimentSpec{}; }

Outcome advt1_direction() {
    const auto spec = reference_spec();
    const auto o = run_experiment(reference().data, spec, Protocol::AdvT1);
    Checker ck;
    double rel_sum = 0;
    std::string detail;
    for (const char* g : {"s1", "s2", "s3"}) {
        const double before = fpr_of(o.baseline->report, g), after = fpr_of(o.advt1->report, g);
        ck.expect(after < before, std::string(g) + " FPR " + num(before) + " -> " + num(after));
        const double rel = before > 0 ? (before - after) / before : 0.0;
        rel_sum += rel;
        detail += std::string(g) + " " + num(before) + "->" + num(after) + ", ";
    }
    const double mean_rel = rel_sum / 3;
    ck.expect(mean_rel >= 0.5, "mean relative reduction " + num(mean_rel));
    const double f1_before = *o.baseline->report.group("real")->f1(), f1_after = *o.advt1->report.group("real")->f1();
    ck.expect(f1_before - f1_after < 0.02, "real F1 " + num(f1_before) + " -> " + num(f1_after));
    return ck.done(detail + "mean reduction " + num(mean_rel) + ", real F1 " + num(f1_before) + "->" + num(f1_after));
}

Outcome advt2_direction() {
    const auto spec = reference_spec();
    const auto o = run_experiment(reference().data, spec, Protocol::AdvT2);
    const auto base = run_experiment(reference().data, spec, Protocol::Baseline);
    Checker ck;
    std::string detail;
    const char* groups[] = {"s1", "s2", "s3"};
    for (std::size_t f = 0; f < 3; ++f) {
        const double before = fpr_of(base.baseline->report, groups[f]);
        const double fold = fpr_of(o.advt2_folds.at(f).report, groups[f]);
        const bool ok = f == 0 ? fold <= 1.5 * before : fold < before;
        ck.expect(ok, std::string(groups[f]) + " held out: " + num(fold) + " vs baseline " + num(before));
        detail += std::string(groups[f]) + " " + num(before) + "->" + num(fold) + (f < 2 ? ", " : "");
    }
    return ck.done(detail);
}

Outcome ensemble_direction() {
    const auto spec = reference_spec();
    const auto o = run_experiment(reference().data, spec, Protocol::Ensemble);
    const EnsembleResult* e = nullptr;
    for (const auto& r : o.ensemble) {
        if (r.condition == "advt1") e = &r;
    }
    if (e == nullptr) return {false, "no advt1 ensemble result"};
    int wins = 0;
    std::string detail;
    for (const char* g : {"s1", "s2", "s3"}) {
        const double mv = fpr_of(e->majority_vote, g), ridge = fpr_of(e->ridge, g);
        wins += ridge <= mv ? 1 : 0;
        detail += std::string(g) + " ridge " + num(ridge) + " vs vote " + num(mv) + ", ";
    }
    Outcome out{wins >= 2, detail + std::to_string(wins) + "/3 strategies"};
    return out;
}

// ---- 9 ----
Outcome llm_replay() {
    oracle::TempDir tmp("acc_llm");
    Checker ck;
    auto run = [&](const std::string& sub) {
        app::llm({{"corpus", kFixtures + "/llm/corpus.jsonl"},
                  {"cache_dir", kFixtures + "/llm/cache"},
                  {"offline", true},
                  {"output_dir", (tmp.path() / sub).string()}});
        return read_file(tmp.path() / sub / "metrics.json");
    };
    const auto a = run("a"), b = run("b");
    ck.expect(a == b, "metrics.json differs between runs");
    const auto m = json::parse(a);
    const auto report = metrics_report_from_json(m.at("groups"));
    const struct { const char* g; double acc, tnr, fpr; } table[] = {
        {"s1", 0.89, 0.89, 0.11}, {"s2", 0.97, 0.97, 0.03}, {"s3", 0.99, 0.99, 0.01}};
    for (const auto& row : table) {
        const Confusion* c = report.group(row.g);
        ck.expect(c != nullptr && std::fabs(*c->accuracy() - row.acc) < 1e-12 &&
                      std::fabs(*c->tnr() - row.tnr) < 1e-12 && std::fabs(*c->fpr() - row.fpr) < 1e-12,
                  std::string("table row ") + row.g);
    }
    const Confusion* real = report.group("real");
    ck.expect(real != nullptr && std::fabs(*real->accuracy() - 0.93) < 1e-12 &&
                  std::fabs(*real->precision() - 0.97) < 0.005 && std::fabs(*real->fpr() - 0.06) < 0.005,
              "real accuracy/precision/FPR");

    std::ifstream in(kFixtures + "/llm/adversarial.jsonl");
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto rec = json::parse(line);
        try {
            const auto p = llm::parse_output(rec.at("raw").get<std::string>());
            ck.expect(p.parse_failed == rec.at("parse_failed").get<bool>() &&
                          std::string(to_string(p.label)) == rec.at("label").get<std::string>(),
                      "adversarial line " + std::to_string(n + 1));
        } catch (const std::exception& e) {
            ck.expect(false, std::string("parse threw: ") + e.what());
        }
        ++n;
    }
    ck.expect(n == 50, "expected 50 adversarial outputs, read " + std::to_string(n));
    return ck.done("two offline runs byte-identical, table rows exact, 50 adversarial outputs parsed");
}

// ---- 10 ----
Outcome manifest_determinism() {
    oracle::TempDir tmp("acc_manifest");
    const auto& data = reference().data;
    std::vector<Response> real, gaming;
    for (const auto& r : data.responses()) (is_gaming(r.provenance) ? gaming : real).push_back(r);
    const auto corpus = tmp.path() / "corpus.jsonl", pool = tmp.path() / "gaming.jsonl";
    save_corpus(Corpus(data.items(), real), corpus);
    write_file(pool, responses_to_jsonl(gaming));
    Checker ck;
    for (const char* protocol : {"advt1", "advt2"}) {
        const auto first = tmp.path() / (std::string(protocol) + "_a");
        const auto second = tmp.path() / (std::string(protocol) + "_b");
        app::experiment({{"corpus", corpus.string()},
                         {"gaming", {pool.string()}},
                         {"protocol", protocol},
                         {"output_dir", first.string()}});
        app::experiment({{"manifest", (first / "manifest.json").string()}, {"output_dir", second.string()}});
        ck.expect(read_file(first / "report.json") == read_file(second / "report.json"),
                  std::string(protocol) + " report.json differs");
    }
    return ck.done("advt1 and advt2 reruns from manifest byte-identical");
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_s;
        std::function<Outcome()> fn;
    };
    const std::vector<Criterion> criteria = {
        {1, "ridge oracle equivalence", 5, ridge_oracle},
        {2, "majority-vote truth table", 1, vote_truth_table},
        {3, "PCA correctness", 5, pca_oracle},
        {4, "metric identities", 0, metric_identities},
        {5, "generator invariants", 10, generator_invariants},
        {6, "adversarial training lowers FPR", 60, advt1_direction},
        {7, "cross-strategy transfer", 120, advt2_direction},
        {8, "ridge stacker vs majority vote", 120, ensemble_direction},
        {9, "LLM judge replay", 0, llm_replay},
        {10, "manifest rerun determinism", 0, manifest_determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome out;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            out = c.fn();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit_s > 0 && secs >= c.limit_s) {
            out.pass = false;
            out.detail += "; runtime over " + num(c.limit_s, 0) + " s";
        }
        std::printf("%s criterion %d: %s (%s; %.2f s)\n", out.pass ? "PASS" : "FAIL", c.id, c.name,
                    out.detail.c_str(), secs);
        std::fflush(stdout);
        failed += out.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
