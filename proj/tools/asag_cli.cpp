// asag: command-line front end over the C API.
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "asag/asag.h"

namespace {

using nlohmann::json;

using CommandFn = asag_status (*)(const char*, char**);

// Top-level config keys each subcommand inherits when its own section does
// not set them.
const std::map<std::string, std::set<std::string>>& shared_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"synth", {"seed"}},
        {"generate", {"seed", "corpus"}},
        {"experiment", {"seed", "corpus", "gaming"}},
        {"pca", {"corpus", "gaming"}},
        {"llm", {"corpus", "gaming"}},
        {"report", {}},
    };
    return keys;
}

struct Failure {
    int exit_code;
    std::string message;
};

json take_string(char* s) {
    json j = json::parse(s);
    asag_string_free(s);
    return j;
}

int exit_code_for(asag_status st) { return st == ASAG_ERR_INVALID_ARGUMENT ? 2 : 1; }

json load_file_config(const std::string& path, const std::string& command) {
    json cfg = json::object();
    if (path.empty()) return cfg;
    char* out = nullptr;
    const asag_status st = asag_config_load(path.c_str(), &out);
    if (st != ASAG_OK) throw Failure{exit_code_for(st), asag_last_error()};
    const json file = take_string(out);
    for (const auto& key : shared_keys().at(command)) {
        if (file.contains(key) && !file[key].is_object()) cfg[key] = file[key];
    }
    if (file.contains(command)) {
        if (!file[command].is_object()) throw Failure{2, "config section [" + command + "] must be a table"};
        for (const auto& [k, v] : file[command].items()) cfg[k] = v;
    }
    return cfg;
}

// "key=value"; value is read as JSON when it parses, as a string otherwise.
void apply_set(json& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw Failure{2, "--set expects key=value, got '" + assignment + "'"};
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    json* node = &cfg;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (dot == std::string::npos) {
            (*node)[part] = value;
            break;
        }
        node = &(*node)[part];
        if (!node->is_object()) *node = json::object();
        start = dot + 1;
    }
}

int run(CommandFn fn, const json& cfg, bool print_tables) {
    char* out = nullptr;
    const std::string text = cfg.dump();
    const asag_status st = fn(text.c_str(), &out);
    if (st != ASAG_OK) {
        std::cerr << "asag: " << asag_status_string(st) << ": " << asag_last_error() << "\n";
        return exit_code_for(st);
    }
    const json result = take_string(out);
    if (print_tables) {
        for (const char* key : {"fpr_table", "real_table", "table"}) {
            if (result.contains(key)) std::cout << result[key].get<std::string>() << "\n";
        }
    } else {
        std::cout << result.dump(2) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"asag: gameability measurement and hardening for similarity-based short-answer graders"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(asag_version()));

    std::string config_path;
    std::vector<std::string> sets;
    app.add_option("-c,--config", config_path, "TOML or JSON config file")->check(CLI::ExistingFile);
    app.add_option("--set", sets, "Override a config key (key=value, dots for nesting)");

    std::optional<std::uint64_t> seed;
    std::optional<std::string> corpus, output_dir;
    std::vector<std::string> gaming;

    auto* synth = app.add_subcommand("synth", "Write the bundled reference corpus and case summaries");
    synth->add_option("--seed", seed);
    synth->add_option("-o,--output-dir", output_dir);

    std::optional<double> rate;
    std::optional<std::string> summaries, stop_words, medical_terms;
    std::optional<std::size_t> s1_per_variant, s3_per_item;
    auto* generate = app.add_subcommand("generate", "Generate and subsample gaming responses");
    generate->add_option("--seed", seed);
    generate->add_option("--corpus", corpus)->check(CLI::ExistingFile);
    generate->add_option("-o,--output-dir", output_dir);
    generate->add_option("--rate", rate, "Subsample rate per strategy");
    generate->add_option("--summaries", summaries, "External summaries JSONL")->check(CLI::ExistingFile);
    generate->add_option("--stop-words", stop_words)->check(CLI::ExistingFile);
    generate->add_option("--medical-terms", medical_terms)->check(CLI::ExistingFile);
    generate->add_option("--s1-per-variant", s1_per_variant);
    generate->add_option("--s3-per-item", s3_per_item);

    std::string protocol;
    std::optional<std::string> manifest, name;
    std::optional<double> threshold;
    bool drop_leaks = false;
    auto* experiment = app.add_subcommand("experiment", "Run baseline, advt1, advt2 or ensemble");
    experiment->add_option("protocol", protocol, "baseline | advt1 | advt2 | ensemble")
        ->check(CLI::IsMember({"baseline", "advt1", "advt2", "ensemble"}));
    experiment->add_option("--seed", seed);
    experiment->add_option("--corpus", corpus)->check(CLI::ExistingFile);
    experiment->add_option("--gaming", gaming, "Gaming response JSONL files")->check(CLI::ExistingFile);
    experiment->add_option("-o,--output-dir", output_dir);
    experiment->add_option("--name", name);
    experiment->add_option("--threshold", threshold, "Fixed threshold; skips calibration");
    experiment->add_flag("--drop-leaks", drop_leaks, "Drop gaming responses equal to a correct training answer");
    experiment->add_option("--manifest", manifest, "Repeat a run from its manifest.json")->check(CLI::ExistingFile);

    std::vector<std::string> items;
    auto* pca = app.add_subcommand("pca", "Per-item PCA projections of response embeddings");
    pca->add_option("--corpus", corpus)->check(CLI::ExistingFile);
    pca->add_option("--gaming", gaming)->check(CLI::ExistingFile);
    pca->add_option("-o,--output-dir", output_dir);
    pca->add_option("--item", items, "Item ids (default: all)");

    std::optional<std::string> strategy;
    bool offline = false;
    std::optional<std::string> cache_dir, template_path, endpoint_url, model;
    auto* llm = app.add_subcommand("llm", "Score responses with an LLM judge through the replay cache");
    llm->add_option("--corpus", corpus)->check(CLI::ExistingFile);
    llm->add_option("--gaming", gaming)->check(CLI::ExistingFile);
    llm->add_option("-o,--output-dir", output_dir);
    llm->add_option("--cache-dir", cache_dir);
    llm->add_option("--strategy", strategy, "p1 (default) | p2 | p3")->check(CLI::IsMember({"p1", "p2", "p3"}));
    llm->add_flag("--offline", offline, "Never contact the endpoint; cache misses fail");
    llm->add_option("--template", template_path)->check(CLI::ExistingFile);
    llm->add_option("--endpoint-url", endpoint_url);
    llm->add_option("--model", model);

    std::vector<std::string> run_dirs;
    auto* report = app.add_subcommand("report", "Rebuild result tables from run directories");
    report->add_option("run_dirs", run_dirs, "Run directories")->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        const std::string command = sub->get_name();
        json cfg = load_file_config(config_path, command);

        json flags = json::object();
        if (seed) flags["seed"] = *seed;
        if (corpus) flags["corpus"] = *corpus;
        if (output_dir) flags["output_dir"] = *output_dir;
        if (!gaming.empty()) flags["gaming"] = gaming;
        CommandFn fn = nullptr;
        bool tables = false;
        if (command == "synth") {
            fn = asag_cmd_synth;
        } else if (command == "generate") {
            fn = asag_cmd_generate;
            if (rate) flags["rate"] = *rate;
            if (summaries) flags["external_summaries"] = *summaries;
            if (stop_words) flags["stop_words"] = *stop_words;
            if (medical_terms) flags["medical_terms"] = *medical_terms;
            if (s1_per_variant) flags["s1_per_variant"] = *s1_per_variant;
            if (s3_per_item) flags["s3_per_item"] = *s3_per_item;
        } else if (command == "experiment") {
            fn = asag_cmd_experiment;
            if (manifest) {
                if (!protocol.empty() || corpus || !gaming.empty() || name || threshold || drop_leaks || seed) {
                    throw Failure{2, "--manifest only combines with --output-dir"};
                }
                cfg = json::object();
                flags["manifest"] = *manifest;
            } else {
                if (protocol.empty()) throw Failure{2, "experiment needs a protocol or --manifest"};
                flags["protocol"] = protocol;
                if (name) flags["name"] = *name;
                if (threshold) flags["threshold"] = *threshold;
                if (drop_leaks) flags["drop_leaks"] = true;
            }
        } else if (command == "pca") {
            fn = asag_cmd_pca;
            if (!items.empty()) flags["items"] = items;
        } else if (command == "llm") {
            fn = asag_cmd_llm;
            if (strategy) flags["strategy"] = *strategy;
            if (offline) flags["offline"] = true;
            if (cache_dir) flags["cache_dir"] = *cache_dir;
            if (template_path) flags["template"] = *template_path;
            if (endpoint_url) flags["endpoint"]["url"] = *endpoint_url;
            if (model) flags["endpoint"]["model"] = *model;
        } else {
            fn = asag_cmd_report;
            tables = true;
            if (!run_dirs.empty()) flags["run_dirs"] = run_dirs;
        }
        for (const auto& s : sets) apply_set(flags, s);

        char* merged = nullptr;
        const std::string base = cfg.dump(), over = flags.dump();
        const asag_status st = asag_config_merge(base.c_str(), over.c_str(), &merged);
        if (st != ASAG_OK) throw Failure{exit_code_for(st), asag_last_error()};
        return run(fn, take_string(merged), tables);
    } catch (const Failure& f) {
        std::cerr << "asag: " << f.message << "\n";
        return f.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "asag: " << e.what() << "\n";
        return 1;
    }
}
