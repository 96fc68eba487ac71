#include "asag/app.hpp"

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "asag/corpus.hpp"
#include "asag/diagnostics.hpp"
#include "asag/error.hpp"
#include "asag/experiments.hpp"
#include "asag/gaming.hpp"
#include "asag/hashing.hpp"
#include "asag/llmjudge.hpp"
#include "asag/synthetic.hpp"

namespace asag::app {

namespace fs = std::filesystem;
using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

void check_keys(const json& cfg, const std::set<std::string>& allowed, const std::string& cmd) {
    if (!cfg.is_object()) fail(ErrorCode::InvalidArgument, cmd + ": config must be an object");
    for (const auto& [k, v] : cfg.items()) {
        if (allowed.count(k) == 0) fail(ErrorCode::InvalidArgument, cmd + ": unknown setting '" + k + "'");
    }
}

std::string required_path(const json& cfg, const char* key, const std::string& cmd) {
    if (!cfg.contains(key)) fail(ErrorCode::InvalidArgument, cmd + ": missing '" + key + "'");
    return cfg[key].get<std::string>();
}

std::vector<fs::path> path_list(const json& cfg, const char* key) {
    std::vector<fs::path> out;
    if (!cfg.contains(key)) return out;
    const auto& v = cfg[key];
    if (v.is_string()) {
        out.emplace_back(v.get<std::string>());
    } else {
        for (const auto& p : v) out.emplace_back(p.get<std::string>());
    }
    return out;
}

// Runs `body`, turning json type errors into InvalidArgument.
template <typename F>
ojson guarded(const std::string& cmd, F&& body) {
    try {
        return body();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidArgument, cmd + ": " + e.what());
    }
}

ojson file_entry(const fs::path& dir, const std::string& name) {
    ojson f;
    f["file"] = name;
    f["git_blob_sha1"] = git_blob_sha1(read_file(dir / name));
    return f;
}

std::string fmt(const std::optional<double>& v) {
    if (!v) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return buf;
}

}  // namespace

ojson synth(const json& cfg) {
    return guarded("synth", [&] {
        check_keys(cfg, {"seed", "output_dir", "items", "responses_per_item", "correct_share", "verbose_share",
                         "typo_rate", "summaries_per_item", "summary_differential_rate", "summary_impression_rate"},
                   "synth");
        synthetic::SyntheticConfig sc;
        sc.seed = cfg.value("seed", sc.seed);
        sc.items = cfg.value("items", sc.items);
        sc.responses_per_item = cfg.value("responses_per_item", sc.responses_per_item);
        sc.correct_share = cfg.value("correct_share", sc.correct_share);
        sc.verbose_share = cfg.value("verbose_share", sc.verbose_share);
        sc.typo_rate = cfg.value("typo_rate", sc.typo_rate);
        sc.summaries_per_item = cfg.value("summaries_per_item", sc.summaries_per_item);
        sc.summary_differential_rate = cfg.value("summary_differential_rate", sc.summary_differential_rate);
        sc.summary_impression_rate = cfg.value("summary_impression_rate", sc.summary_impression_rate);
        const fs::path dir = required_path(cfg, "output_dir", "synth");

        const auto ref = synthetic::make_reference_corpus(sc);
        save_corpus(ref.corpus, dir / "corpus.jsonl");
        write_file(dir / "summaries.jsonl", gaming::external_summaries_to_jsonl(ref.summaries));
        ojson out;
        out["seed"] = sc.seed;
        out["items"] = ref.corpus.items().size();
        out["responses"] = ref.corpus.responses().size();
        out["summaries"] = ref.summaries.size();
        out["files"] = ojson::array({file_entry(dir, "corpus.jsonl"), file_entry(dir, "summaries.jsonl")});
        return out;
    });
}

ojson generate(const json& cfg) {
    return guarded("generate", [&] {
        check_keys(cfg, {"seed", "corpus", "gaming", "output_dir", "rate", "s1_per_variant", "s3_per_item",
                         "include_extractive_summary", "external_summaries", "stop_words", "medical_terms", "k_min",
                         "k_max", "summary_sentence_count", "mixed_separator", "mixed_incorrect_parts"},
                   "generate");
        gaming::GeneratorConfig gc;
        gc.seed = cfg.value("seed", std::uint64_t{42});
        gc.k_min = cfg.value("k_min", gc.k_min);
        gc.k_max = cfg.value("k_max", gc.k_max);
        gc.summary_sentence_count = cfg.value("summary_sentence_count", gc.summary_sentence_count);
        gc.mixed_separator = cfg.value("mixed_separator", gc.mixed_separator);
        gc.mixed_incorrect_parts = cfg.value("mixed_incorrect_parts", gc.mixed_incorrect_parts);
        gc.subsample_rate = cfg.value("rate", synthetic::kReferenceSubsampleRate);
        gc.validate();
        gaming::GenerationCounts counts;
        counts.s1_per_variant = cfg.value("s1_per_variant", synthetic::kReferenceS1PerVariant);
        counts.s3_per_item = cfg.value("s3_per_item", synthetic::kReferenceS3PerItem);
        counts.include_extractive_summary = cfg.value("include_extractive_summary", true);

        auto lex = gaming::default_lexicons();
        if (cfg.contains("stop_words")) lex.stop_words = gaming::load_lexicon(cfg["stop_words"].get<std::string>());
        if (cfg.contains("medical_terms")) {
            lex.medical_terms = gaming::load_lexicon(cfg["medical_terms"].get<std::string>());
        }
        std::vector<gaming::ExternalSummary> summaries;
        if (cfg.contains("external_summaries")) {
            summaries = gaming::load_external_summaries(cfg["external_summaries"].get<std::string>());
        }
        const Corpus corpus = load_corpus(required_path(cfg, "corpus", "generate"));
        const fs::path dir = required_path(cfg, "output_dir", "generate");

        const auto full = gaming::generate_all(corpus, gc, lex, counts, summaries);
        const auto kept = gaming::subsample_pools(full, gc.subsample_rate, gc.seed);
        write_file(dir / "s1.jsonl", responses_to_jsonl(kept.strategy(Strategy::S1)));
        write_file(dir / "s2.jsonl", responses_to_jsonl(kept.s2));
        write_file(dir / "s3.jsonl", responses_to_jsonl(kept.s3));

        ojson m;
        m["format"] = "asag-gaming-manifest/1";
        m["seed"] = gc.seed;
        m["rate"] = gc.subsample_rate;
        m["corpus"] = {{"path", cfg["corpus"].get<std::string>()},
                       {"git_blob_sha1", git_blob_sha1(read_file(cfg["corpus"].get<std::string>()))}};
        ojson c;
        auto count = [&](const char* key, const std::vector<Response>& before, const std::vector<Response>& after) {
            c[key] = {{"generated", before.size()}, {"kept", after.size()}};
        };
        count("s1a", full.s1a, kept.s1a);
        count("s1b", full.s1b, kept.s1b);
        count("s1c", full.s1c, kept.s1c);
        count("s1", full.strategy(Strategy::S1), kept.strategy(Strategy::S1));
        count("s2", full.s2, kept.s2);
        count("s3", full.s3, kept.s3);
        m["counts"] = c;
        auto files = ojson::array();
        for (const char* s : {"s1", "s2", "s3"}) {
            auto f = file_entry(dir, std::string(s) + ".jsonl");
            f["strategy"] = s;
            f["responses"] = c[s]["kept"];
            files.push_back(f);
        }
        m["files"] = files;
        m["warnings"] = kept.warnings;
        write_file(dir / "manifest.json", m.dump(2) + "\n");
        return m;
    });
}

ojson experiment(const json& cfg) {
    return guarded("experiment", [&] {
        if (!cfg.is_object()) fail(ErrorCode::InvalidArgument, "experiment: config must be an object");
        static const std::set<std::string> io_keys = {"corpus", "gaming", "output_dir", "protocol", "manifest"};
        ExperimentSpec spec;
        RunInputs inputs;
        Protocol protocol = Protocol::Baseline;
        fs::path dir;
        if (cfg.contains("manifest")) {
            for (const auto& [k, v] : cfg.items()) {
                if (k != "manifest" && k != "output_dir") {
                    fail(ErrorCode::InvalidArgument, "experiment: '" + k + "' cannot be combined with a manifest");
                }
            }
            const auto m = load_manifest(cfg["manifest"].get<std::string>());
            const auto changed = changed_inputs(m);
            if (!changed.empty()) {
                std::string list;
                for (const auto& p : changed) list += (list.empty() ? "" : ", ") + p;
                fail(ErrorCode::Validation, "experiment: inputs changed since the manifest was written: " + list);
            }
            spec = m.spec;
            inputs = m.inputs;
            protocol = parse_protocol(m.protocol);
            dir = required_path(cfg, "output_dir", "experiment");
        } else {
            json spec_json = json::object();
            for (const auto& [k, v] : cfg.items()) {
                if (io_keys.count(k) == 0) spec_json[k] = v;
            }
            spec = experiment_spec_from_json(spec_json);
            inputs.corpus = required_path(cfg, "corpus", "experiment");
            inputs.gaming = path_list(cfg, "gaming");
            protocol = parse_protocol(cfg.value("protocol", std::string("baseline")));
            dir = cfg.contains("output_dir") ? fs::path(cfg["output_dir"].get<std::string>())
                                             : fs::path("runs") / spec.name;
        }
        const Corpus data = load_run_data(inputs);
        const auto outcome = run_experiment(data, spec, protocol);
        write_run(dir, outcome, spec, inputs, data);

        ojson out;
        out["run_dir"] = dir.string();
        out["protocol"] = to_string(protocol);
        out["report_sha256"] = sha256_hex(read_file(dir / "report.json"));
        out["fpr_table"] = read_file(dir / "tables" / "fpr.csv");
        out["warnings"] = outcome.warnings;
        return out;
    });
}

ojson pca(const json& cfg) {
    return guarded("pca", [&] {
        check_keys(cfg, {"seed", "corpus", "gaming", "output_dir", "items", "embedder"}, "pca");
        RunInputs inputs;
        inputs.corpus = required_path(cfg, "corpus", "pca");
        inputs.gaming = path_list(cfg, "gaming");
        const Corpus data = load_run_data(inputs);
        const auto ecfg = cfg.contains("embedder") ? embedder_config_from_json(cfg["embedder"])
                                                   : default_embedder_configs().front();
        std::vector<std::string> texts;
        for (const auto& r : data.responses()) {
            if (!is_gaming(r.provenance)) texts.push_back(r.text);
        }
        const auto embedder = fit_embedder(ecfg, texts);
        std::vector<std::string> items;
        if (cfg.contains("items")) items = cfg["items"].get<std::vector<std::string>>();
        const fs::path dir = required_path(cfg, "output_dir", "pca");
        const auto summaries = write_item_pcas(data.responses(), *embedder, items, dir);
        ojson out;
        out["output_dir"] = dir.string();
        auto list = ojson::array();
        for (const auto& s : summaries) {
            ojson e;
            e["item_id"] = s.item_id;
            e["points"] = s.points;
            e["explained_variance_ratio"] = {s.explained_variance_ratio[0], s.explained_variance_ratio[1]};
            e["overlap_index"] = s.overlap ? ojson(*s.overlap) : ojson(nullptr);
            list.push_back(e);
        }
        out["items"] = list;
        return out;
    });
}

namespace {

std::string llm_table_csv(const MetricsReport& report) {
    std::string out = "group,n,accuracy,precision,tnr,fpr\n";
    for (const char* key : {"real", "s1", "s2", "s3"}) {
        const Confusion* c = report.group(key);
        if (c == nullptr) continue;
        const bool real = std::string(key) == "real";
        out += std::string(real ? "Real responses" : strategy_display_name(key)) + "," + std::to_string(c->total()) +
               "," + fmt(c->accuracy()) + "," + (real ? fmt(c->precision()) : "") + "," + fmt(c->tnr()) + "," +
               fmt(c->fpr()) + "\n";
    }
    return out;
}

}  // namespace

ojson llm(const json& cfg) {
    return guarded("llm", [&] {
        check_keys(cfg, {"seed", "corpus", "gaming", "output_dir", "cache_dir", "strategy", "offline", "template",
                         "endpoint", "rationale_rules"},
                   "llm");
        RunInputs inputs;
        inputs.corpus = required_path(cfg, "corpus", "llm");
        inputs.gaming = path_list(cfg, "gaming");
        const Corpus data = load_run_data(inputs);
        const auto strategy = llm::parse_prompt_strategy(cfg.value("strategy", std::string("p1")));
        llm::PromptTemplate tmpl = llm::default_template(strategy);
        if (cfg.contains("template")) tmpl.text = read_file(cfg["template"].get<std::string>());
        tmpl.validate();
        const auto endpoint = cfg.contains("endpoint") ? llm::endpoint_config_from_json(cfg["endpoint"])
                                                       : llm::EndpointConfig{};
        std::vector<llm::KeywordRule> rules = llm::default_rationale_rules();
        if (cfg.contains("rationale_rules")) {
            rules = llm::rationale_rules_from_json(json::parse(read_file(cfg["rationale_rules"].get<std::string>())));
        }
        llm::ReplayCache cache(required_path(cfg, "cache_dir", "llm"));
        const bool offline = cfg.value("offline", false);
        llm::HttpTransport http;
        const auto run = llm::run_llm_judge(data, tmpl, endpoint, cache, offline ? nullptr : &http, rules);

        const fs::path dir = required_path(cfg, "output_dir", "llm");
        const auto metrics = llm::llm_metrics_json(run);
        write_file(dir / "verdicts.jsonl", llm::verdicts_to_jsonl(run));
        write_file(dir / "metrics.json", metrics.dump(2) + "\n");
        write_file(dir / "tables" / "llm.csv", llm_table_csv(run.report));

        ojson m;
        m["format"] = "asag-llm-manifest/1";
        m["strategy"] = llm::to_string(strategy);
        m["endpoint"] = ojson::parse(llm::to_json(endpoint).dump());
        m["template_sha256"] = sha256_hex(tmpl.text);
        auto files = ojson::array();
        files.push_back({{"role", "corpus"}, {"path", inputs.corpus.string()},
                         {"git_blob_sha1", git_blob_sha1(read_file(inputs.corpus))}});
        for (const auto& g : inputs.gaming) {
            files.push_back({{"role", "gaming"}, {"path", g.string()}, {"git_blob_sha1", git_blob_sha1(read_file(g))}});
        }
        m["inputs"] = files;
        m["outputs"] = {{"metrics.json", sha256_hex(read_file(dir / "metrics.json"))},
                        {"verdicts.jsonl", sha256_hex(read_file(dir / "verdicts.jsonl"))}};
        write_file(dir / "manifest.json", m.dump(2) + "\n");

        std::size_t hits = 0;
        for (const auto& v : run.verdicts) hits += v.cached ? 1 : 0;
        ojson out;
        out["output_dir"] = dir.string();
        out["verdicts"] = run.verdicts.size();
        out["cache_hits"] = hits;
        out["metrics_sha256"] = m["outputs"]["metrics.json"];
        out["table"] = read_file(dir / "tables" / "llm.csv");
        return out;
    });
}

ojson report(const json& cfg) {
    return guarded("report", [&] {
        check_keys(cfg, {"seed", "run_dir", "run_dirs"}, "report");
        std::vector<fs::path> dirs = path_list(cfg, "run_dirs");
        for (const auto& d : path_list(cfg, "run_dir")) dirs.push_back(d);
        if (dirs.empty()) fail(ErrorCode::InvalidArgument, "report: give run_dir or run_dirs");

        std::vector<std::pair<std::string, MetricsReport>> columns;
        for (const auto& d : dirs) {
            json r;
            try {
                r = json::parse(read_file(d / "report.json"));
            } catch (const nlohmann::json::parse_error& e) {
                fail(ErrorCode::Parse, (d / "report.json").string() + ": " + e.what());
            }
            const std::string prefix = dirs.size() > 1 ? r.at("name").get<std::string>() + " " : "";
            const auto& c = r.at("conditions");
            if (c.contains("baseline")) {
                columns.emplace_back(prefix + "NoAdvT", metrics_report_from_json(c["baseline"].at("metrics")));
            }
            if (c.contains("advt1")) {
                columns.emplace_back(prefix + "AdvT1", metrics_report_from_json(c["advt1"].at("metrics")));
            }
            if (c.contains("advt2")) {
                columns.emplace_back(prefix + "AdvT2", metrics_report_from_json(c["advt2"].at("aggregate")));
            }
        }
        std::vector<std::pair<std::string, const MetricsReport*>> refs;
        for (const auto& [name, rep] : columns) refs.emplace_back(name, &rep);
        std::string real = "condition,n,precision,recall,f1,accuracy\n";
        for (const auto& [name, rep] : columns) {
            const Confusion* c = rep.group("real");
            if (c == nullptr) continue;
            real += name + "," + std::to_string(c->total()) + "," + fmt(c->precision()) + "," + fmt(c->recall()) +
                    "," + fmt(c->f1()) + "," + fmt(c->accuracy()) + "\n";
        }
        ojson out;
        out["fpr_table"] = fpr_table_csv(refs);
        out["real_table"] = real;
        return out;
    });
}

}  // namespace asag::app
