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

#include "varclr/varclr.h"

#include <cstring>
#include <string>

#include "varclr/checkpoint.hpp"
#include "varclr/contrastive.hpp"
#include "varclr/eval.hpp"
#include "varclr/io.hpp"
#include "varclr/mining.hpp"
#include "varclr/retrieval.hpp"
#include "varclr/tokenizer.hpp"

struct varclr_vocab {
  varclr::BpeVocab vocab;
};

struct varclr_model {
  varclr::Checkpoint ckpt;
};

struct varclr_index {
  varclr::SearchIndex index;
  std::string checkpoint_path;
};

namespace {

thread_local std::string g_last_error;

varclr_status to_status(varclr::ErrorCode code) {
  using varclr::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return VARCLR_ERR_INVALID_ARGUMENT;
    case ErrorCode::kInvalidName: return VARCLR_ERR_INVALID_NAME;
    case ErrorCode::kParse: return VARCLR_ERR_PARSE;
    case ErrorCode::kIo: return VARCLR_ERR_IO;
    case ErrorCode::kNumeric: return VARCLR_ERR_NUMERIC;
    case ErrorCode::kShape: return VARCLR_ERR_SHAPE;
    case ErrorCode::kUndefined: return VARCLR_ERR_UNDEFINED;
  }
  return VARCLR_ERR_INTERNAL;
}

varclr_status fail(varclr_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename Fn>
varclr_status guarded(Fn&& fn) {
  try {
    fn();
    return VARCLR_OK;
  } catch (const varclr::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(VARCLR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(VARCLR_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(VARCLR_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (!p) throw varclr::Error(varclr::ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

varclr_status copy_out(const std::string& s, char* out, size_t out_size, size_t* written) {
  if (written) *written = s.size() + 1;
  if (!out || out_size < s.size() + 1)
    return fail(VARCLR_ERR_BUFFER_TOO_SMALL, "output buffer needs " + std::to_string(s.size() + 1) + " bytes");
  std::memcpy(out, s.c_str(), s.size() + 1);
  return VARCLR_OK;
}

std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) s.push_back(' ');
    s += parts[i];
  }
  return s;
}

void check_same_encoder(const varclr_index* index, const varclr_model* model) {
  if (index->index.fingerprint() != model->ckpt.fingerprint())
    throw varclr::Error(varclr::ErrorCode::kInvalidArgument, "index was built with a different checkpoint");
}

}  // namespace

extern "C" {

const char* varclr_version(void) { return varclr::kVersion; }

uint32_t varclr_checkpoint_format_version(void) { return varclr::kCheckpointVersion; }

const char* varclr_last_error(void) { return g_last_error.c_str(); }

const char* varclr_status_name(varclr_status status) {
  switch (status) {
    case VARCLR_OK: return "ok";
    case VARCLR_ERR_INVALID_ARGUMENT: return "invalid argument";
    case VARCLR_ERR_INVALID_NAME: return "invalid name";
    case VARCLR_ERR_PARSE: return "parse error";
    case VARCLR_ERR_IO: return "i/o error";
    case VARCLR_ERR_NUMERIC: return "numeric error";
    case VARCLR_ERR_SHAPE: return "shape mismatch";
    case VARCLR_ERR_UNDEFINED: return "undefined result";
    case VARCLR_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case VARCLR_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

varclr_status varclr_format_number(double value, char* out, size_t out_size, size_t* written) {
  return copy_out(varclr::format_number(value), out, out_size, written);
}

varclr_status varclr_file_fingerprint(const char* path, uint64_t* out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = varclr::fnv1a(varclr::io::read_file(path));
  });
}

varclr_status varclr_canonicalize(const char* name, char* out, size_t out_size, size_t* written) {
  std::string joined;
  auto st = guarded([&] {
    require(name, "name");
    joined = join(varclr::canonicalize(name));
  });
  return st == VARCLR_OK ? copy_out(joined, out, out_size, written) : st;
}

varclr_status varclr_vocab_train_file(const char* corpus_path, size_t vocab_size, size_t min_pair_frequency,
                                      varclr_vocab** out, size_t* skipped) {
  return guarded([&] {
    require(corpus_path, "corpus_path");
    require(out, "out");
    const std::string text = varclr::io::read_file(corpus_path);
    std::vector<varclr::CanonicalTokens> corpus;
    size_t bad = 0;
    for (auto line : varclr::io::lines(text)) {
      auto cols = varclr::io::split(line, '\t');
      for (std::size_t c = 0; c < cols.size() && c < 2; ++c) {
        auto name = varclr::io::trim(cols[c]);
        if (name.empty()) continue;
        try {
          corpus.push_back(varclr::canonicalize(name));
        } catch (const varclr::Error&) {
          ++bad;
        }
      }
    }
    varclr::BpeTrainOptions opts{vocab_size, min_pair_frequency};
    *out = new varclr_vocab{varclr::train_bpe(corpus, opts)};
    if (skipped) *skipped = bad;
  });
}

varclr_status varclr_vocab_load(const char* path, varclr_vocab** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new varclr_vocab{varclr::BpeVocab::parse(varclr::io::read_file(path))};
  });
}

varclr_status varclr_vocab_save(const varclr_vocab* vocab, const char* path) {
  return guarded([&] {
    require(vocab, "vocab");
    require(path, "path");
    varclr::io::write_file_atomic(path, vocab->vocab.serialize());
  });
}

size_t varclr_vocab_size(const varclr_vocab* vocab) { return vocab ? vocab->vocab.size() : 0; }

size_t varclr_vocab_merge_count(const varclr_vocab* vocab) { return vocab ? vocab->vocab.merges().size() : 0; }

varclr_status varclr_vocab_tokenize(const varclr_vocab* vocab, const char* name, char* out, size_t out_size,
                                    size_t* written) {
  std::string joined;
  auto st = guarded([&] {
    require(vocab, "vocab");
    require(name, "name");
    joined = join(varclr::tokenize(name, vocab->vocab).surface);
  });
  return st == VARCLR_OK ? copy_out(joined, out, out_size, written) : st;
}

void varclr_vocab_free(varclr_vocab* vocab) { delete vocab; }

varclr_status varclr_mine_directory(const char* dir, size_t max_lines, const char* out_tsv,
                                    varclr_message_callback on_skip, void* user, varclr_mine_stats* stats) {
  return guarded([&] {
    require(dir, "dir");
    require(out_tsv, "out_tsv");
    if (max_lines == 0) throw varclr::Error(varclr::ErrorCode::kInvalidArgument, "max_lines must be > 0");
    auto result = varclr::mine_directory(dir, max_lines);
    varclr::io::write_file_atomic(out_tsv, varclr::write_pairs_tsv(result.pairs));
    if (on_skip)
      for (const auto& msg : result.skipped) on_skip(msg.c_str(), user);
    if (stats) *stats = {result.skipped.size(), result.commits, result.pairs.size()};
  });
}

void varclr_train_config_init(varclr_train_config* config) {
  if (!config) return;
  const varclr::TrainConfig d;
  *config = {d.batch_size,      d.temperature,   d.learning_rate,       d.beta1,         d.beta2,
             d.epsilon,         d.clip_bound,    d.max_epochs,          d.patience,      d.validation_fraction,
             d.data_fraction,   d.seed,          d.embedding_dim,       d.hidden,        d.output_dim,
             d.embedding_dropout, d.workers};
}

varclr_status varclr_train_file(const char* pairs_tsv, const varclr_vocab* vocab, varclr_encoder_kind kind,
                                const varclr_train_config* config, const char* init_embeddings_path,
                                varclr_epoch_callback on_epoch, void* user, varclr_model** out, size_t* imported) {
  return guarded([&] {
    require(pairs_tsv, "pairs_tsv");
    require(vocab, "vocab");
    require(config, "config");
    require(out, "out");
    if (kind != VARCLR_ENCODER_AVG && kind != VARCLR_ENCODER_LSTM)
      throw varclr::Error(varclr::ErrorCode::kInvalidArgument, "unknown encoder kind");
    varclr::TrainConfig c;
    c.batch_size = config->batch_size;
    c.temperature = config->temperature;
    c.learning_rate = config->learning_rate;
    c.beta1 = config->beta1;
    c.beta2 = config->beta2;
    c.epsilon = config->epsilon;
    c.clip_bound = config->clip_bound;
    c.max_epochs = config->max_epochs;
    c.patience = config->patience;
    c.validation_fraction = config->validation_fraction;
    c.data_fraction = config->data_fraction;
    c.seed = config->seed;
    c.embedding_dim = config->embedding_dim;
    c.hidden = config->hidden;
    c.output_dim = config->output_dim;
    c.embedding_dropout = config->embedding_dropout;
    c.workers = config->workers;

    const auto pairs = varclr::parse_pairs_tsv(varclr::io::read_file(pairs_tsv));
    std::optional<std::string> init_text;
    if (init_embeddings_path) init_text = varclr::io::read_file(init_embeddings_path);
    std::function<void(const varclr::EpochLog&)> cb;
    if (on_epoch)
      cb = [&](const varclr::EpochLog& l) {
        const varclr_epoch_log log{l.epoch, l.train_loss, l.validation_loss, l.seconds};
        on_epoch(&log, user);
      };
    auto result = varclr::train(pairs, vocab->vocab, static_cast<varclr::EncoderKind>(kind), c,
                                init_text ? std::optional<std::string_view>(*init_text) : std::nullopt, cb);
    if (imported) *imported = result.imported_embeddings;
    *out = new varclr_model{std::move(result.checkpoint)};
  });
}

varclr_status varclr_model_load(const char* path, varclr_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new varclr_model{varclr::load_checkpoint(path)};
  });
}

varclr_status varclr_model_save(const varclr_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    varclr::save_checkpoint(model->ckpt, path);
  });
}

void varclr_model_free(varclr_model* model) { delete model; }

size_t varclr_model_dim(const varclr_model* model) { return model ? model->ckpt.encoder.output_dim() : 0; }

varclr_encoder_kind varclr_model_kind(const varclr_model* model) {
  return model && model->ckpt.encoder.kind == varclr::EncoderKind::kLstm ? VARCLR_ENCODER_LSTM
                                                                          : VARCLR_ENCODER_AVG;
}

uint64_t varclr_model_fingerprint(const varclr_model* model) { return model ? model->ckpt.fingerprint() : 0; }

varclr_status varclr_model_training_info(const varclr_model* model, varclr_training_info* info) {
  return guarded([&] {
    require(model, "model");
    require(info, "info");
    const auto& m = model->ckpt.meta;
    *info = {m.epochs_run, m.best_epoch, m.validation_loss, m.seed, static_cast<size_t>(m.train_pairs),
             static_cast<size_t>(m.validation_pairs)};
  });
}

varclr_status varclr_model_encode(const varclr_model* model, const char* name, double* out, size_t dim) {
  return guarded([&] {
    require(model, "model");
    require(name, "name");
    require(out, "out");
    if (dim != model->ckpt.encoder.output_dim())
      throw varclr::Error(varclr::ErrorCode::kShape, "output buffer dimension does not match the model");
    const auto v = model->ckpt.embed(name);
    std::copy(v.begin(), v.end(), out);
  });
}

varclr_status varclr_model_similarity(const varclr_model* model, const char* a, const char* b, double* out) {
  return guarded([&] {
    require(model, "model");
    require(a, "a");
    require(b, "b");
    require(out, "out");
    *out = varclr::similarity_score(a, b, model->ckpt);
  });
}

varclr_status varclr_model_export_embeddings(const varclr_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    varclr::io::write_file_atomic(path, varclr::export_embeddings(model->ckpt.encoder.embeddings, model->ckpt.vocab));
  });
}

varclr_status varclr_model_import_embeddings(varclr_model* model, const char* path, size_t* matched) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    const auto n = varclr::import_embeddings(varclr::io::read_file(path), model->ckpt.vocab,
                                             model->ckpt.encoder.embeddings);
    if (matched) *matched = n;
  });
}

varclr_status varclr_evaluate_benchmark(const varclr_model* model, const char* csv_path, varclr_scorer scorer,
                                        varclr_score_report* report) {
  return guarded([&] {
    require(csv_path, "csv_path");
    require(report, "report");
    const auto pairs = varclr::parse_benchmark_csv(varclr::io::read_file(csv_path));
    varclr::ScoreReport r;
    if (scorer == VARCLR_SCORER_LEVENSHTEIN) {
      r = varclr::evaluate_benchmark(
          pairs, [](std::string_view a, std::string_view b) { return varclr::levenshtein_score(a, b); },
          "levenshtein");
    } else if (scorer == VARCLR_SCORER_MODEL) {
      require(model, "model");
      r = varclr::evaluate_benchmark(pairs, model->ckpt);
    } else {
      throw varclr::Error(varclr::ErrorCode::kInvalidArgument, "unknown scorer");
    }
    *report = {r.pairs, r.dropped, r.similarity.has_value(), r.similarity.value_or(0.0),
               r.relatedness.has_value(), r.relatedness.value_or(0.0)};
  });
}

varclr_status varclr_spearman(const double* xs, const double* ys, size_t n, double* out) {
  return guarded([&] {
    require(xs, "xs");
    require(ys, "ys");
    require(out, "out");
    *out = varclr::spearman({xs, n}, {ys, n});
  });
}

size_t varclr_levenshtein(const char* a, const char* b) {
  return varclr::levenshtein(a ? a : "", b ? b : "");
}

double varclr_levenshtein_score(const char* a, const char* b) {
  return varclr::levenshtein_score(a ? a : "", b ? b : "");
}

varclr_status varclr_index_build_file(const varclr_model* model, const char* pool_path, size_t workers,
                                      varclr_index** out, size_t* dropped) {
  return guarded([&] {
    require(model, "model");
    require(pool_path, "pool_path");
    require(out, "out");
    const auto names = varclr::io::read_name_list(pool_path);
    auto built = varclr::build_index(names, varclr::checkpoint_embedder(model->ckpt), model->ckpt.fingerprint(),
                                     workers == 0 ? 1 : workers);
    if (dropped) *dropped = built.dropped;
    *out = new varclr_index{std::move(built.index), {}};
  });
}

varclr_status varclr_index_save(const varclr_index* index, const char* path, const char* checkpoint_path) {
  return guarded([&] {
    require(index, "index");
    require(path, "path");
    varclr::io::write_file_atomic(path, index->index.serialize(checkpoint_path ? checkpoint_path : ""));
  });
}

varclr_status varclr_index_load(const char* path, varclr_index** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    std::string ckpt;
    auto index = varclr::SearchIndex::parse(varclr::io::read_file(path), &ckpt);
    *out = new varclr_index{std::move(index), std::move(ckpt)};
  });
}

const char* varclr_index_checkpoint_path(const varclr_index* index) {
  return index ? index->checkpoint_path.c_str() : "";
}

size_t varclr_index_size(const varclr_index* index) { return index ? index->index.size() : 0; }

uint64_t varclr_index_fingerprint(const varclr_index* index) { return index ? index->index.fingerprint() : 0; }

void varclr_index_free(varclr_index* index) { delete index; }

varclr_status varclr_index_search(const varclr_index* index, const varclr_model* model, const char* query,
                                  size_t k, int exclude_query, varclr_hit* hits) {
  return guarded([&] {
    require(index, "index");
    require(model, "model");
    require(query, "query");
    require(hits, "hits");
    check_same_encoder(index, model);
    const auto found = varclr::search(index->index, varclr::checkpoint_embedder(model->ckpt), query, k,
                                      exclude_query != 0);
    for (std::size_t i = 0; i < found.size(); ++i) {
      const auto pos = index->index.find(found[i].name);
      hits[i] = {index->index.names()[*pos].c_str(), found[i].score};
    }
  });
}

void varclr_hitk_options_init(varclr_hitk_options* options) {
  if (options) *options = {0, 0.4, 0};
}

varclr_status varclr_index_hit_at_k_file(const varclr_index* index, const varclr_model* model, const char* pairs_path,
                                         const size_t* ks, size_t n_ks, const varclr_hitk_options* options,
                                         size_t* ks_out, double* rates, size_t* n_rates, size_t* queries) {
  return guarded([&] {
    require(index, "index");
    require(model, "model");
    require(pairs_path, "pairs_path");
    require(ks, "ks");
    require(rates, "rates");
    check_same_encoder(index, model);
    varclr_hitk_options opts;
    varclr_hitk_options_init(&opts);
    if (options) opts = *options;

    const std::string path = pairs_path;
    const std::string text = varclr::io::read_file(path);
    std::vector<varclr::QueryTarget> qs;
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
      qs = varclr::filter_similar_pairs(varclr::parse_benchmark_csv(text), opts.similarity_threshold,
                                        opts.both_directions != 0);
    } else {
      for (const auto& p : varclr::parse_pairs_tsv(text)) qs.push_back({p.before, p.after});
    }
    const auto curve = varclr::hit_at_k(index->index, qs, {ks, n_ks}, varclr::checkpoint_embedder(model->ckpt),
                                        opts.exclude_query != 0);
    for (std::size_t i = 0; i < curve.ks.size(); ++i) {
      rates[i] = curve.hits[i];
      if (ks_out) ks_out[i] = curve.ks[i];
    }
    if (n_rates) *n_rates = curve.ks.size();
    if (queries) *queries = curve.queries;
  });
}

varclr_status varclr_typo_gen_file(const char* pool_path, size_t count, uint64_t seed, const char* out_tsv) {
  return guarded([&] {
    require(pool_path, "pool_path");
    require(out_tsv, "out_tsv");
    const auto names = varclr::io::read_name_list(pool_path);
    std::string out;
    for (const auto& t : varclr::make_typos(names, count, seed)) out += t.misspelled + "\t" + t.correct + "\n";
    varclr::io::write_file_atomic(out_tsv, out);
  });
}

}  // extern "C"
