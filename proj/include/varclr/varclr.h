// Copyright 2026 The varclr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/*
 * C interface to the varclr library: identifier tokenization, rename-pair
 * mining, contrastive encoder training, benchmark scoring and similarity
 * search.
 *
 * Every fallible call returns a varclr_status; on failure the message is
 * available from varclr_last_error() on the calling thread until its next
 * failing call. Objects are opaque handles released with the matching
 * *_free function (passing NULL is allowed). Strings are UTF-8 and
 * NUL-terminated.
 */
#ifndef VARCLR_VARCLR_H_
#define VARCLR_VARCLR_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(VARCLR_BUILDING_LIBRARY)
#    define VARCLR_API __declspec(dllexport)
#  else
#    define VARCLR_API __declspec(dllimport)
#  endif
#else
#  define VARCLR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum varclr_status {
  VARCLR_OK = 0,
  VARCLR_ERR_INVALID_ARGUMENT = 1,
  VARCLR_ERR_INVALID_NAME = 2,
  VARCLR_ERR_PARSE = 3,
  VARCLR_ERR_IO = 4,
  VARCLR_ERR_NUMERIC = 5,
  VARCLR_ERR_SHAPE = 6,
  VARCLR_ERR_UNDEFINED = 7,
  VARCLR_ERR_BUFFER_TOO_SMALL = 8,
  VARCLR_ERR_INTERNAL = 9
} varclr_status;

typedef enum varclr_encoder_kind {
  VARCLR_ENCODER_AVG = 0,
  VARCLR_ENCODER_LSTM = 1
} varclr_encoder_kind;

typedef struct varclr_vocab varclr_vocab;
typedef struct varclr_model varclr_model;
typedef struct varclr_index varclr_index;

VARCLR_API const char* varclr_version(void);
VARCLR_API uint32_t varclr_checkpoint_format_version(void);
VARCLR_API const char* varclr_last_error(void);
VARCLR_API const char* varclr_status_name(varclr_status status);

/* Six significant digits, locale independent ("1.0", "0.123457"). */
VARCLR_API varclr_status varclr_format_number(double value, char* out, size_t out_size, size_t* written);

/* 64-bit FNV-1a of a file's bytes. */
VARCLR_API varclr_status varclr_file_fingerprint(const char* path, uint64_t* out);

/* ---- Tokenizer ---------------------------------------------------------- */

/* Output strings are written to `out` (capacity `out_size`, NUL included).
 * `written` (optional) receives the length needed including the NUL; when
 * the buffer is too small VARCLR_ERR_BUFFER_TOO_SMALL is returned. */

/* Space-joined canonical word tokens of `name`. */
VARCLR_API varclr_status varclr_canonicalize(const char* name, char* out, size_t out_size,
                                             size_t* written);

/* Trains a vocabulary. The corpus file holds identifiers: each line is split
 * on tabs and its first two fields are used, so both name lists and mined
 * pair files work. Names that fail to canonicalize are counted in
 * `skipped` (optional). */
VARCLR_API varclr_status varclr_vocab_train_file(const char* corpus_path, size_t vocab_size,
                                                 size_t min_pair_frequency, varclr_vocab** out,
                                                 size_t* skipped);
VARCLR_API varclr_status varclr_vocab_load(const char* path, varclr_vocab** out);
VARCLR_API varclr_status varclr_vocab_save(const varclr_vocab* vocab, const char* path);
VARCLR_API size_t varclr_vocab_size(const varclr_vocab* vocab);
VARCLR_API size_t varclr_vocab_merge_count(const varclr_vocab* vocab);
/* Space-joined subwords of `name` ("send ##msg"). */
VARCLR_API varclr_status varclr_vocab_tokenize(const varclr_vocab* vocab, const char* name, char* out,
                                               size_t out_size, size_t* written);
VARCLR_API void varclr_vocab_free(varclr_vocab* vocab);

/* ---- Mining ------------------------------------------------------------- */

typedef struct varclr_mine_stats {
  size_t files_skipped;
  size_t commits;
  size_t pairs;
} varclr_mine_stats;

typedef void (*varclr_message_callback)(const char* message, void* user);

/* Mines rename pairs from every diff file under `dir` and writes the TSV
 * "before<TAB>after<TAB>commit_id". Files that fail to parse are reported
 * through `on_skip` (optional) and skipped. */
VARCLR_API varclr_status varclr_mine_directory(const char* dir, size_t max_lines, const char* out_tsv,
                                               varclr_message_callback on_skip, void* user,
                                               varclr_mine_stats* stats);

/* ---- Training ----------------------------------------------------------- */

typedef struct varclr_train_config {
  size_t batch_size;
  double temperature;
  double learning_rate;
  double beta1;
  double beta2;
  double epsilon;
  double clip_bound;
  size_t max_epochs;
  size_t patience;
  double validation_fraction;
  double data_fraction;
  uint64_t seed;
  size_t embedding_dim;
  size_t hidden;
  size_t output_dim;
  double embedding_dropout;
  size_t workers;
} varclr_train_config;

/* Fills in the library defaults. */
VARCLR_API void varclr_train_config_init(varclr_train_config* config);

typedef struct varclr_epoch_log {
  size_t epoch;
  double train_loss;
  double validation_loss;
  double seconds;
} varclr_epoch_log;

typedef void (*varclr_epoch_callback)(const varclr_epoch_log* log, void* user);

/* Trains on a pairs TSV. `init_embeddings_path` and `on_epoch` may be NULL;
 * `imported` (optional) receives the number of embedding rows copied from
 * the initialization file. */
VARCLR_API varclr_status varclr_train_file(const char* pairs_tsv, const varclr_vocab* vocab,
                                           varclr_encoder_kind kind, const varclr_train_config* config,
                                           const char* init_embeddings_path, varclr_epoch_callback on_epoch,
                                           void* user, varclr_model** out, size_t* imported);

/* ---- Models ------------------------------------------------------------- */

typedef struct varclr_training_info {
  int64_t epochs_run;
  int64_t best_epoch;
  double validation_loss;
  uint64_t seed;
  size_t train_pairs;
  size_t validation_pairs;
} varclr_training_info;

VARCLR_API varclr_status varclr_model_load(const char* path, varclr_model** out);
VARCLR_API varclr_status varclr_model_save(const varclr_model* model, const char* path);
VARCLR_API void varclr_model_free(varclr_model* model);
VARCLR_API size_t varclr_model_dim(const varclr_model* model);
VARCLR_API varclr_encoder_kind varclr_model_kind(const varclr_model* model);
VARCLR_API uint64_t varclr_model_fingerprint(const varclr_model* model);
VARCLR_API varclr_status varclr_model_training_info(const varclr_model* model, varclr_training_info* info);
/* Unnormalized encoding; `dim` must equal varclr_model_dim(). */
VARCLR_API varclr_status varclr_model_encode(const varclr_model* model, const char* name, double* out,
                                             size_t dim);
/* Cosine similarity of the two encodings. */
VARCLR_API varclr_status varclr_model_similarity(const varclr_model* model, const char* a, const char* b,
                                                 double* out);
VARCLR_API varclr_status varclr_model_export_embeddings(const varclr_model* model, const char* path);
VARCLR_API varclr_status varclr_model_import_embeddings(varclr_model* model, const char* path,
                                                        size_t* matched);

/* ---- Evaluation --------------------------------------------------------- */

typedef enum varclr_scorer {
  VARCLR_SCORER_MODEL = 0,
  VARCLR_SCORER_LEVENSHTEIN = 1
} varclr_scorer;

typedef struct varclr_score_report {
  size_t pairs;
  size_t dropped;
  int has_similarity;
  double similarity;
  int has_relatedness;
  double relatedness;
} varclr_score_report;

/* Spearman correlation of scorer output against the benchmark CSV's human
 * columns. `model` may be NULL for the Levenshtein scorer. */
VARCLR_API varclr_status varclr_evaluate_benchmark(const varclr_model* model, const char* csv_path,
                                                   varclr_scorer scorer, varclr_score_report* report);
VARCLR_API varclr_status varclr_spearman(const double* xs, const double* ys, size_t n, double* out);
VARCLR_API size_t varclr_levenshtein(const char* a, const char* b);
VARCLR_API double varclr_levenshtein_score(const char* a, const char* b);

/* ---- Retrieval ---------------------------------------------------------- */

/* Builds an index over a pool file (one identifier per line). Names that do
 * not tokenize are counted in `dropped` (optional). */
VARCLR_API varclr_status varclr_index_build_file(const varclr_model* model, const char* pool_path,
                                                 size_t workers, varclr_index** out, size_t* dropped);
/* `checkpoint_path` is recorded so later searches can find the encoder. */
VARCLR_API varclr_status varclr_index_save(const varclr_index* index, const char* path,
                                           const char* checkpoint_path);
VARCLR_API varclr_status varclr_index_load(const char* path, varclr_index** out);
VARCLR_API const char* varclr_index_checkpoint_path(const varclr_index* index);
VARCLR_API size_t varclr_index_size(const varclr_index* index);
VARCLR_API uint64_t varclr_index_fingerprint(const varclr_index* index);
VARCLR_API void varclr_index_free(varclr_index* index);

typedef struct varclr_hit {
  const char* name; /* owned by the index */
  double score;
} varclr_hit;

/* Writes the top `k` hits into `hits` (capacity k). The model must be the
 * one the index was built with. */
VARCLR_API varclr_status varclr_index_search(const varclr_index* index, const varclr_model* model,
                                             const char* query, size_t k, int exclude_query, varclr_hit* hits);

typedef struct varclr_hitk_options {
  int exclude_query;           /* drop a pooled query from its own candidates */
  double similarity_threshold; /* benchmark CSV input: keep similarity > this */
  int both_directions;         /* benchmark CSV input: query both ways */
} varclr_hitk_options;

VARCLR_API void varclr_hitk_options_init(varclr_hitk_options* options);

/* Hit@k for every cutoff in `ks` (written to `rates` in ascending-k order,
 * after deduplication; `n_rates` receives the count). The pairs file is
 * either a TSV "query<TAB>target" or, when it ends in ".csv", a benchmark
 * CSV filtered by similarity. */
VARCLR_API varclr_status varclr_index_hit_at_k_file(const varclr_index* index, const varclr_model* model,
                                                    const char* pairs_path, const size_t* ks, size_t n_ks,
                                                    const varclr_hitk_options* options, size_t* ks_out,
                                                    double* rates, size_t* n_rates, size_t* queries);

/* ---- Typo generation ---------------------------------------------------- */

/* Writes `count` keyboard-typo pairs "misspelled<TAB>correct" sampled from
 * the pool file. */
VARCLR_API varclr_status varclr_typo_gen_file(const char* pool_path, size_t count, uint64_t seed,
                                              const char* out_tsv);

#ifdef __cplusplus
}
#endif

#endif /* VARCLR_VARCLR_H_ */
