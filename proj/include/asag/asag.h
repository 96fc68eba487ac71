/* C interface to the asag grading-robustness toolkit. */
#ifndef ASAG_ASAG_H
#define ASAG_ASAG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define ASAG_API __declspec(dllexport)
#else
#  define ASAG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum asag_status {
    ASAG_OK = 0,
    ASAG_ERR_INVALID_ARGUMENT = 1,
    ASAG_ERR_IO = 2,
    ASAG_ERR_PARSE = 3,
    ASAG_ERR_VALIDATION = 4,
    ASAG_ERR_DIMENSION_MISMATCH = 5,
    ASAG_ERR_NOT_FOUND = 6,
    ASAG_ERR_TRANSPORT = 7,
    ASAG_ERR_INTERNAL = 8
} asag_status;

typedef enum asag_label { ASAG_LABEL_CORRECT = 0, ASAG_LABEL_INCORRECT = 1 } asag_label;

typedef struct asag_corpus asag_corpus;
typedef struct asag_embedder asag_embedder;
typedef struct asag_grader asag_grader;

ASAG_API const char* asag_version(void);
ASAG_API const char* asag_status_string(asag_status status);
/* Message of the last failed call on this thread; "" when none. */
ASAG_API const char* asag_last_error(void);
/* Frees strings returned through char** out-parameters. */
ASAG_API void asag_string_free(char* s);

/* ---- configuration ---- */

/* Parses a .toml or .json file into a JSON string. */
ASAG_API asag_status asag_config_load(const char* path, char** out_json);
/* Recursive merge of two JSON objects; keys of `overrides_json` win. */
ASAG_API asag_status asag_config_merge(const char* base_json, const char* overrides_json, char** out_json);

/* ---- commands; config and result are JSON objects ---- */

ASAG_API asag_status asag_cmd_synth(const char* config_json, char** result_json);
ASAG_API asag_status asag_cmd_generate(const char* config_json, char** result_json);
ASAG_API asag_status asag_cmd_experiment(const char* config_json, char** result_json);
ASAG_API asag_status asag_cmd_pca(const char* config_json, char** result_json);
ASAG_API asag_status asag_cmd_llm(const char* config_json, char** result_json);
ASAG_API asag_status asag_cmd_report(const char* config_json, char** result_json);

/* ---- corpus ---- */

ASAG_API asag_status asag_corpus_load(const char* path, asag_corpus** out);
/* Bundled reference corpus: real responses plus subsampled gaming pools. */
ASAG_API asag_status asag_corpus_reference(uint64_t seed, asag_corpus** out);
ASAG_API size_t asag_corpus_item_count(const asag_corpus* corpus);
ASAG_API size_t asag_corpus_response_count(const asag_corpus* corpus);
ASAG_API asag_status asag_corpus_save(const asag_corpus* corpus, const char* path);
ASAG_API void asag_corpus_free(asag_corpus* corpus);

/* ---- embedding and grading ---- */

/* `config_json` is an embedder config ("{}" for the default); IDF statistics
   come from the real responses of `corpus`. */
ASAG_API asag_status asag_embedder_fit(const char* config_json, const asag_corpus* corpus, asag_embedder** out);
ASAG_API size_t asag_embedder_dimension(const asag_embedder* embedder);
/* Writes asag_embedder_dimension() doubles to `out`. */
ASAG_API asag_status asag_embedder_embed(const asag_embedder* embedder, const char* text, double* out);
ASAG_API asag_status asag_embedder_similarity(const asag_embedder* embedder, const char* a, const char* b,
                                              double* out);
ASAG_API void asag_embedder_free(asag_embedder* embedder);

/* Indexes the real responses of `corpus` under the given threshold. */
ASAG_API asag_status asag_grader_build(const asag_embedder* embedder, const asag_corpus* corpus, double threshold,
                                       asag_grader** out);
ASAG_API asag_status asag_grader_score(const asag_grader* grader, const char* item_id, const char* text,
                                       asag_label* label, double* similarity);
ASAG_API void asag_grader_free(asag_grader* grader);

/* ---- numerical primitives ---- */

/* Row-major x (n by p). Plain ridge without intercept or scaling:
   w = (X'X + lambda I)^-1 X'y. */
ASAG_API asag_status asag_ridge_fit(const double* x, size_t n, size_t p, const double* y, double lambda,
                                    double* weights_out);
ASAG_API asag_status asag_majority_vote(const asag_label* votes, size_t n, asag_label tie_break, asag_label* out);
/* Counts must describe a non-empty confusion matrix. Absent rates are NaN. */
ASAG_API asag_status asag_rates(size_t tp, size_t fp, size_t tn, size_t fn, double* precision, double* recall,
                                double* f1, double* accuracy, double* fpr, double* tnr);

/* ---- LLM judge ---- */

/* Parses a raw model output; `rationale` may be NULL. */
ASAG_API asag_status asag_llm_parse(const char* raw, asag_label* label, int* parse_failed, char** rationale);

#ifdef __cplusplus
}
#endif

#endif
