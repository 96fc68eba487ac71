#include "asag/asag.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asag/app.hpp"
#include "asag/config.hpp"
#include "asag/corpus.hpp"
#include "asag/embedding.hpp"
#include "asag/ensemble.hpp"
#include "asag/error.hpp"
#include "asag/grader.hpp"
#include "asag/llmjudge.hpp"
#include "asag/metrics.hpp"
#include "asag/synthetic.hpp"

struct asag_corpus {
    asag::Corpus corpus;
};

struct asag_embedder {
    std::shared_ptr<const asag::Embedder> embedder;
};

struct asag_grader {
    asag::ReferenceIndex index;
};

namespace {

thread_local std::string g_last_error;

asag_status set_error(asag_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

template <typename F>
asag_status guard(F&& body) {
    try {
        g_last_error.clear();
        body();
        return ASAG_OK;
    } catch (const asag::Error& e) {
        return set_error(static_cast<asag_status>(e.code()), e.what());
    } catch (const nlohmann::json::exception& e) {
        return set_error(ASAG_ERR_PARSE, e.what());
    } catch (const std::bad_alloc&) {
        return set_error(ASAG_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(ASAG_ERR_INTERNAL, e.what());
    } catch (...) {
        return set_error(ASAG_ERR_INTERNAL, "unknown error");
    }
}

void require(bool ok, const char* what) {
    if (!ok) asag::fail(asag::ErrorCode::InvalidArgument, what);
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

nlohmann::json parse_json(const char* text, const char* what) {
    require(text != nullptr, what);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        asag::fail(asag::ErrorCode::InvalidArgument, std::string(what) + ": " + e.what());
    }
}

template <typename Cmd>
asag_status run_command(Cmd cmd, const char* config_json, char** result_json) {
    return guard([&] {
        require(result_json != nullptr, "result_json must not be null");
        *result_json = nullptr;
        const auto cfg = parse_json(config_json, "config_json");
        *result_json = dup_string(cmd(cfg).dump(2));
    });
}

asag_label to_c(asag::Label l) { return l == asag::Label::Correct ? ASAG_LABEL_CORRECT : ASAG_LABEL_INCORRECT; }

asag::Label from_c(asag_label l) {
    require(l == ASAG_LABEL_CORRECT || l == ASAG_LABEL_INCORRECT, "label out of range");
    return l == ASAG_LABEL_CORRECT ? asag::Label::Correct : asag::Label::Incorrect;
}

}  // namespace

extern "C" {

const char* asag_version(void) { return "0.1.0"; }

const char* asag_status_string(asag_status status) {
    switch (status) {
        case ASAG_OK: return "ok";
        case ASAG_ERR_INVALID_ARGUMENT: return "invalid argument";
        case ASAG_ERR_IO: return "i/o error";
        case ASAG_ERR_PARSE: return "parse error";
        case ASAG_ERR_VALIDATION: return "validation error";
        case ASAG_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
        case ASAG_ERR_NOT_FOUND: return "not found";
        case ASAG_ERR_TRANSPORT: return "transport error";
        case ASAG_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* asag_last_error(void) { return g_last_error.c_str(); }

void asag_string_free(char* s) { std::free(s); }

asag_status asag_config_load(const char* path, char** out_json) {
    return guard([&] {
        require(path != nullptr && out_json != nullptr, "path and out_json must not be null");
        *out_json = nullptr;
        *out_json = dup_string(asag::load_config(path).dump());
    });
}

asag_status asag_config_merge(const char* base_json, const char* overrides_json, char** out_json) {
    return guard([&] {
        require(out_json != nullptr, "out_json must not be null");
        *out_json = nullptr;
        auto base = parse_json(base_json, "base_json");
        asag::merge_config(base, parse_json(overrides_json, "overrides_json"));
        *out_json = dup_string(base.dump());
    });
}

asag_status asag_cmd_synth(const char* c, char** r) { return run_command(asag::app::synth, c, r); }
asag_status asag_cmd_generate(const char* c, char** r) { return run_command(asag::app::generate, c, r); }
asag_status asag_cmd_experiment(const char* c, char** r) { return run_command(asag::app::experiment, c, r); }
asag_status asag_cmd_pca(const char* c, char** r) { return run_command(asag::app::pca, c, r); }
asag_status asag_cmd_llm(const char* c, char** r) { return run_command(asag::app::llm, c, r); }
asag_status asag_cmd_report(const char* c, char** r) { return run_command(asag::app::report, c, r); }

asag_status asag_corpus_load(const char* path, asag_corpus** out) {
    return guard([&] {
        require(path != nullptr && out != nullptr, "path and out must not be null");
        *out = nullptr;
        *out = new asag_corpus{asag::load_corpus(path)};
    });
}

asag_status asag_corpus_reference(uint64_t seed, asag_corpus** out) {
    return guard([&] {
        require(out != nullptr, "out must not be null");
        *out = nullptr;
        *out = new asag_corpus{asag::synthetic::make_reference_dataset(seed).data};
    });
}

size_t asag_corpus_item_count(const asag_corpus* c) { return c ? c->corpus.items().size() : 0; }

size_t asag_corpus_response_count(const asag_corpus* c) { return c ? c->corpus.responses().size() : 0; }

asag_status asag_corpus_save(const asag_corpus* c, const char* path) {
    return guard([&] {
        require(c != nullptr && path != nullptr, "corpus and path must not be null");
        asag::save_corpus(c->corpus, path);
    });
}

void asag_corpus_free(asag_corpus* c) { delete c; }

asag_status asag_embedder_fit(const char* config_json, const asag_corpus* corpus, asag_embedder** out) {
    return guard([&] {
        require(corpus != nullptr && out != nullptr, "corpus and out must not be null");
        *out = nullptr;
        const auto j = parse_json(config_json, "config_json");
        const auto cfg = j.empty() ? asag::default_embedder_configs().front() : asag::embedder_config_from_json(j);
        std::vector<std::string> texts;
        for (const auto& r : corpus->corpus.responses()) {
            if (!asag::is_gaming(r.provenance)) texts.push_back(r.text);
        }
        *out = new asag_embedder{asag::fit_embedder(cfg, texts)};
    });
}

size_t asag_embedder_dimension(const asag_embedder* e) { return e ? e->embedder->dimension() : 0; }

asag_status asag_embedder_embed(const asag_embedder* e, const char* text, double* out) {
    return guard([&] {
        require(e != nullptr && text != nullptr && out != nullptr, "embedder, text and out must not be null");
        const auto v = e->embedder->embed("", text);
        std::copy(v.values.begin(), v.values.end(), out);
    });
}

asag_status asag_embedder_similarity(const asag_embedder* e, const char* a, const char* b, double* out) {
    return guard([&] {
        require(e != nullptr && a != nullptr && b != nullptr && out != nullptr, "null argument");
        *out = asag::cosine(e->embedder->embed("", a), e->embedder->embed("", b));
    });
}

void asag_embedder_free(asag_embedder* e) { delete e; }

asag_status asag_grader_build(const asag_embedder* e, const asag_corpus* corpus, double threshold,
                              asag_grader** out) {
    return guard([&] {
        require(e != nullptr && corpus != nullptr && out != nullptr, "null argument");
        *out = nullptr;
        std::vector<asag::Response> real;
        for (const auto& r : corpus->corpus.responses()) {
            if (!asag::is_gaming(r.provenance)) real.push_back(r);
        }
        *out = new asag_grader{asag::build_index(real, e->embedder, threshold, e->embedder->config().name)};
    });
}

asag_status asag_grader_score(const asag_grader* g, const char* item_id, const char* text, asag_label* label,
                              double* similarity) {
    return guard([&] {
        require(g != nullptr && item_id != nullptr && text != nullptr && label != nullptr, "null argument");
        asag::Response r;
        r.response_id = "query";
        r.item_id = item_id;
        r.text = text;
        if (g->index.entries_for(r.item_id) == nullptr) {
            asag::fail(asag::ErrorCode::NotFound, std::string("no references for item '") + item_id + "'");
        }
        const auto p = asag::predict(g->index, r);
        *label = to_c(p.predicted_label);
        if (similarity != nullptr) *similarity = p.max_similarity;
    });
}

void asag_grader_free(asag_grader* g) { delete g; }

asag_status asag_ridge_fit(const double* x, size_t n, size_t p, const double* y, double lambda,
                           double* weights_out) {
    return guard([&] {
        require(x != nullptr && y != nullptr && weights_out != nullptr, "null argument");
        require(n > 0 && p > 0, "empty design matrix");
        Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
        Eigen::VectorXd Y(static_cast<Eigen::Index>(n));
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = 0; j < p; ++j) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x[i * p + j];
            Y(static_cast<Eigen::Index>(i)) = y[i];
        }
        asag::RidgeOptions opts;
        opts.standardize = false;
        opts.fit_intercept = false;
        const auto model = asag::fit_ridge(X, Y, lambda, opts);
        std::copy(model.weights.begin(), model.weights.end(), weights_out);
    });
}

asag_status asag_majority_vote(const asag_label* votes, size_t n, asag_label tie_break, asag_label* out) {
    return guard([&] {
        require(votes != nullptr && out != nullptr, "null argument");
        std::vector<asag::Label> v;
        v.reserve(n);
        for (size_t i = 0; i < n; ++i) v.push_back(from_c(votes[i]));
        *out = to_c(asag::majority_vote(v, from_c(tie_break)));
    });
}

asag_status asag_rates(size_t tp, size_t fp, size_t tn, size_t fn, double* precision, double* recall, double* f1,
                       double* accuracy, double* fpr, double* tnr) {
    return guard([&] {
        const asag::Confusion c{tp, fp, tn, fn};
        require(c.total() > 0, "empty confusion matrix");
        const double nan = std::numeric_limits<double>::quiet_NaN();
        auto put = [&](double* dst, const std::optional<double>& v) {
            if (dst != nullptr) *dst = v.value_or(nan);
        };
        put(precision, c.precision());
        put(recall, c.recall());
        put(f1, c.f1());
        put(accuracy, c.accuracy());
        put(fpr, c.fpr());
        put(tnr, c.tnr());
    });
}

asag_status asag_llm_parse(const char* raw, asag_label* label, int* parse_failed, char** rationale) {
    return guard([&] {
        require(raw != nullptr && label != nullptr, "raw and label must not be null");
        const auto parsed = asag::llm::parse_output(raw);
        *label = to_c(parsed.label);
        if (parse_failed != nullptr) *parse_failed = parsed.parse_failed ? 1 : 0;
        if (rationale != nullptr) *rationale = dup_string(parsed.rationale);
    });
}

}  // extern "C"
