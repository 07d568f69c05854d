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

// varclr command-line tool. Every subcommand goes through the C API in
// varclr/varclr.h.
//
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <algorithm>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "varclr/varclr.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct DomainError {
  std::string message;
};

void check(varclr_status st, const std::string& context) {
  if (st != VARCLR_OK) throw DomainError{context + ": " + varclr_last_error()};
}

std::string fmt(double v) {
  char buf[64];
  size_t n = 0;
  check(varclr_format_number(v, buf, sizeof buf, &n), "format");
  return buf;
}

std::string hex(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct VocabDeleter {
  void operator()(varclr_vocab* v) const { varclr_vocab_free(v); }
};
struct ModelDeleter {
  void operator()(varclr_model* m) const { varclr_model_free(m); }
};
struct IndexDeleter {
  void operator()(varclr_index* i) const { varclr_index_free(i); }
};
using VocabPtr = std::unique_ptr<varclr_vocab, VocabDeleter>;
using ModelPtr = std::unique_ptr<varclr_model, ModelDeleter>;
using IndexPtr = std::unique_ptr<varclr_index, IndexDeleter>;

VocabPtr load_vocab(const std::string& path) {
  varclr_vocab* v = nullptr;
  check(varclr_vocab_load(path.c_str(), &v), "loading vocab '" + path + "'");
  return VocabPtr(v);
}

ModelPtr load_model(const std::string& path) {
  varclr_model* m = nullptr;
  check(varclr_model_load(path.c_str(), &m), "loading checkpoint '" + path + "'");
  return ModelPtr(m);
}

IndexPtr load_index(const std::string& path) {
  varclr_index* i = nullptr;
  check(varclr_index_load(path.c_str(), &i), "loading index '" + path + "'");
  return IndexPtr(i);
}

// Records what produced an artifact: "<out>.manifest.json".
class Manifest {
 public:
  explicit Manifest(std::string command) : start_(std::chrono::steady_clock::now()) {
    doc_["command"] = std::move(command);
    doc_["tool_version"] = varclr_version();
    doc_["checkpoint_format"] = varclr_checkpoint_format_version();
    doc_["config"] = nlohmann::json::object();
    doc_["inputs"] = nlohmann::json::object();
  }

  template <typename T>
  void config(const std::string& key, const T& value) {
    doc_["config"][key] = value;
  }
  void seed(uint64_t s) { doc_["seed"] = s; }

  void input(const std::string& path) {
    namespace fs = std::filesystem;
    if (fs::is_directory(path)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::recursive_directory_iterator(path))
        if (e.is_regular_file()) files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) input(f.string());
      return;
    }
    uint64_t h = 0;
    check(varclr_file_fingerprint(path.c_str(), &h), "hashing '" + path + "'");
    doc_["inputs"][path] = hex(h);
  }

  void write(const std::string& out) {
    doc_["outputs"] = {out};
    doc_["duration_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::ofstream f(out + ".manifest.json");
    f << doc_.dump(2) << "\n";
    if (!f) throw DomainError{"cannot write manifest for '" + out + "'"};
  }

 private:
  nlohmann::json doc_;
  std::chrono::steady_clock::time_point start_;
};

template <typename Fn>
std::string string_out(Fn&& fn, const std::string& context) {
  size_t needed = 0;
  std::string buf(256, '\0');
  varclr_status st = fn(buf.data(), buf.size(), &needed);
  if (st == VARCLR_ERR_BUFFER_TOO_SMALL) {
    buf.assign(needed, '\0');
    st = fn(buf.data(), buf.size(), &needed);
  }
  check(st, context);
  buf.resize(needed ? needed - 1 : 0);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"varclr: contrastive representations of variable names"};
  app.set_version_flag("--version",
                       std::string("varclr ") + varclr_version() + " (checkpoint format " +
                           std::to_string(varclr_checkpoint_format_version()) + ")");
  app.require_subcommand(1);

  // mine
  std::string diffs_dir, mine_out;
  std::size_t max_lines = 6;
  auto* mine = app.add_subcommand("mine", "Extract rename pairs from unified diffs");
  mine->add_option("--diffs", diffs_dir, "Directory of diff files")->required();
  mine->add_option("--max-lines", max_lines, "Commits must change fewer lines than this")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  mine->add_option("--out", mine_out, "Output pairs TSV")->required();

  // train-bpe
  std::string corpus, bpe_out;
  std::size_t vocab_size = 8000, min_freq = 2;
  auto* train_bpe = app.add_subcommand("train-bpe", "Train a subword vocabulary");
  train_bpe->add_option("--corpus", corpus, "Identifier list or pairs TSV")->required();
  train_bpe->add_option("--vocab-size", vocab_size, "Target vocabulary size")->capture_default_str();
  train_bpe->add_option("--min-freq", min_freq, "Minimum pair frequency for a merge")->capture_default_str();
  train_bpe->add_option("--out", bpe_out, "Output vocab file")->required();

  // tokenize
  std::string tok_vocab;
  std::vector<std::string> tok_names;
  auto* tokenize = app.add_subcommand("tokenize", "Print the subwords of identifiers");
  tokenize->add_option("--vocab", tok_vocab, "Vocab file")->required();
  tokenize->add_option("names", tok_names, "Identifiers")->required();

  // train
  std::string tr_pairs, tr_vocab, tr_encoder = "avg", tr_init, tr_out, tr_log;
  varclr_train_config cfg;
  varclr_train_config_init(&cfg);
  cfg.max_epochs = 20;
  auto* train = app.add_subcommand("train", "Contrastively train an encoder");
  train->add_option("--pairs", tr_pairs, "Pairs TSV")->required();
  train->add_option("--vocab", tr_vocab, "Vocab file")->required();
  train->add_option("--encoder", tr_encoder, "Encoder kind")
      ->capture_default_str()
      ->check(CLI::IsMember({"avg", "lstm"}));
  train->add_option("--dim", cfg.embedding_dim, "Embedding dimension")->capture_default_str();
  train->add_option("--hidden", cfg.hidden, "LSTM hidden size per direction")->capture_default_str();
  train->add_option("--out-dim", cfg.output_dim, "LSTM output dimension")->capture_default_str();
  train->add_option("--batch", cfg.batch_size, "Batch size")->capture_default_str();
  train->add_option("--tau", cfg.temperature, "Temperature")->capture_default_str();
  train->add_option("--lr", cfg.learning_rate, "Learning rate")->capture_default_str();
  train->add_option("--clip", cfg.clip_bound, "Gradient norm bound")->capture_default_str();
  train->add_option("--epochs", cfg.max_epochs, "Maximum epochs")->capture_default_str();
  train->add_option("--patience", cfg.patience, "Early-stopping patience")->capture_default_str();
  train->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  train->add_option("--val-fraction", cfg.validation_fraction, "Validation fraction")->capture_default_str();
  train->add_option("--data-fraction", cfg.data_fraction, "Fraction of training pairs used")->capture_default_str();
  train->add_option("--dropout", cfg.embedding_dropout, "LSTM embedding dropout")->capture_default_str();
  train->add_option("--workers", cfg.workers, "Worker threads")->capture_default_str();
  train->add_option("--init-embeddings", tr_init, "Embedding text file for initialization");
  train->add_option("--log", tr_log, "Also write the epoch CSV log here");
  train->add_option("--out", tr_out, "Output checkpoint")->required();

  // score
  std::string sc_ckpt;
  std::vector<std::string> sc_names;
  auto* score = app.add_subcommand("score", "Cosine similarity of two identifiers");
  score->add_option("--ckpt", sc_ckpt, "Checkpoint")->required();
  score->add_option("names", sc_names, "VAR1 VAR2")->required()->expected(2);

  // eval
  std::string ev_ckpt, ev_bench, ev_baseline;
  auto* eval = app.add_subcommand("eval", "Spearman correlation against a benchmark CSV");
  eval->add_option("--ckpt", ev_ckpt, "Checkpoint");
  eval->add_option("--benchmark", ev_bench, "Benchmark CSV")->required();
  eval->add_option("--baseline", ev_baseline, "Score with a baseline instead of a checkpoint")
      ->check(CLI::IsMember({"levenshtein"}));

  // index
  std::string ix_ckpt, ix_pool, ix_out;
  std::size_t ix_workers = 1;
  auto* index = app.add_subcommand("index", "Encode a candidate pool");
  index->add_option("--ckpt", ix_ckpt, "Checkpoint")->required();
  index->add_option("--pool", ix_pool, "One identifier per line")->required();
  index->add_option("--workers", ix_workers, "Worker threads")->capture_default_str();
  index->add_option("--out", ix_out, "Output index")->required();

  // search
  std::string se_index, se_query, se_ckpt;
  std::size_t se_k = 10;
  bool se_exclude = false;
  auto* search = app.add_subcommand("search", "Top-k similar pool names");
  search->add_option("--index", se_index, "Index file")->required();
  search->add_option("--query", se_query, "Query identifier")->required();
  search->add_option("--k", se_k, "Number of results")->capture_default_str();
  search->add_option("--ckpt", se_ckpt, "Checkpoint (default: the one recorded in the index)");
  search->add_flag("--exclude-query", se_exclude, "Leave the query itself out of the results");

  // hitk
  std::string hk_index, hk_pairs, hk_ks = "1,5,10,25,50,100,250,500,1000", hk_out, hk_ckpt;
  varclr_hitk_options hk_opts;
  varclr_hitk_options_init(&hk_opts);
  bool hk_exclude = false, hk_both = false;
  auto* hitk = app.add_subcommand("hitk", "Hit@K curve for query/target pairs");
  hitk->add_option("--index", hk_index, "Index file")->required();
  hitk->add_option("--pairs", hk_pairs, "TSV query<TAB>target, or benchmark CSV")->required();
  hitk->add_option("--ks", hk_ks, "Comma-separated cutoffs")->capture_default_str();
  hitk->add_option("--threshold", hk_opts.similarity_threshold, "Benchmark similarity threshold")
      ->capture_default_str();
  hitk->add_flag("--exclude-query", hk_exclude, "Leave each query out of its own candidates");
  hitk->add_flag("--both-directions", hk_both, "Benchmark input: query left->right and right->left");
  hitk->add_option("--ckpt", hk_ckpt, "Checkpoint (default: the one recorded in the index)");
  hitk->add_option("--out", hk_out, "Output curve CSV")->required();

  // typo-gen
  std::string tg_pool, tg_out;
  std::size_t tg_count = 1023;
  uint64_t tg_seed = 42;
  auto* typo = app.add_subcommand("typo-gen", "Generate keyboard-typo pairs");
  typo->add_option("--pool", tg_pool, "One identifier per line")->required();
  typo->add_option("--count", tg_count, "Number of typos")->capture_default_str();
  typo->add_option("--seed", tg_seed, "Random seed")->capture_default_str();
  typo->add_option("--out", tg_out, "Output TSV")->required();

  // export-embeddings
  std::string ex_ckpt, ex_out;
  auto* exp = app.add_subcommand("export-embeddings", "Write the embedding table as text");
  exp->add_option("--ckpt", ex_ckpt, "Checkpoint")->required();
  exp->add_option("--out", ex_out, "Output file")->required();

  if (argc <= 1) {
    std::cerr << app.help();
    return kExitUsage;
  }
  // CLI11 checks required options before unexpected ones; defer the
  // required check so an unknown flag is what gets reported.
  std::vector<std::pair<CLI::App*, CLI::Option*>> required;
  for (CLI::App* sub : app.get_subcommands({}))
    for (CLI::Option* opt : sub->get_options())
      if (opt->get_required()) {
        required.emplace_back(sub, opt);
        opt->required(false);
      }
  try {
    app.parse(argc, argv);
    for (auto [sub, opt] : required)
      if (sub->parsed() && opt->count() == 0) throw CLI::RequiredError(opt->get_name());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "varclr: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*mine) {
      Manifest m("mine");
      m.input(diffs_dir);
      m.config("max_lines", max_lines);
      varclr_mine_stats stats{};
      check(varclr_mine_directory(
                diffs_dir.c_str(), max_lines, mine_out.c_str(),
                [](const char* msg, void*) { std::cerr << "skipped " << msg << "\n"; }, nullptr, &stats),
            "mine");
      m.write(mine_out);
      std::cout << "commits=" << stats.commits << " pairs=" << stats.pairs
                << " skipped_files=" << stats.files_skipped << "\n";
    } else if (*train_bpe) {
      Manifest m("train-bpe");
      m.input(corpus);
      m.config("vocab_size", vocab_size);
      m.config("min_freq", min_freq);
      varclr_vocab* v = nullptr;
      size_t skipped = 0;
      check(varclr_vocab_train_file(corpus.c_str(), vocab_size, min_freq, &v, &skipped), "train-bpe");
      VocabPtr vocab(v);
      check(varclr_vocab_save(vocab.get(), bpe_out.c_str()), "writing vocab");
      m.write(bpe_out);
      std::cout << "vocab_size=" << varclr_vocab_size(vocab.get())
                << " merges=" << varclr_vocab_merge_count(vocab.get()) << " skipped_names=" << skipped << "\n";
    } else if (*tokenize) {
      auto vocab = load_vocab(tok_vocab);
      for (const auto& name : tok_names)
        std::cout << string_out(
                         [&](char* b, size_t n, size_t* w) { return varclr_vocab_tokenize(vocab.get(), name.c_str(), b, n, w); },
                         "tokenize '" + name + "'")
                  << "\n";
    } else if (*train) {
      Manifest m("train");
      m.input(tr_pairs);
      m.input(tr_vocab);
      if (!tr_init.empty()) m.input(tr_init);
      m.seed(cfg.seed);
      m.config("encoder", tr_encoder);
      m.config("dim", cfg.embedding_dim);
      m.config("hidden", cfg.hidden);
      m.config("out_dim", cfg.output_dim);
      m.config("batch", cfg.batch_size);
      m.config("tau", cfg.temperature);
      m.config("lr", cfg.learning_rate);
      m.config("clip", cfg.clip_bound);
      m.config("epochs", cfg.max_epochs);
      m.config("patience", cfg.patience);
      m.config("val_fraction", cfg.validation_fraction);
      m.config("data_fraction", cfg.data_fraction);
      m.config("dropout", cfg.embedding_dropout);
      m.config("workers", cfg.workers);
      auto vocab = load_vocab(tr_vocab);

      struct LogSink {
        std::ofstream file;
      } sink;
      if (!tr_log.empty()) {
        sink.file.open(tr_log);
        if (!sink.file) throw DomainError{"cannot write log '" + tr_log + "'"};
        sink.file << "epoch,train_loss,val_loss,seconds\n";
      }
      std::cout << "epoch,train_loss,val_loss,seconds\n";
      auto on_epoch = [](const varclr_epoch_log* l, void* user) {
        std::ostringstream line;
        line << l->epoch << "," << fmt(l->train_loss) << "," << fmt(l->validation_loss) << "," << fmt(l->seconds)
             << "\n";
        std::cout << line.str() << std::flush;
        auto* s = static_cast<LogSink*>(user);
        if (s->file.is_open()) s->file << line.str() << std::flush;
      };
      varclr_model* raw = nullptr;
      size_t imported = 0;
      check(varclr_train_file(tr_pairs.c_str(), vocab.get(),
                              tr_encoder == "lstm" ? VARCLR_ENCODER_LSTM : VARCLR_ENCODER_AVG, &cfg,
                              tr_init.empty() ? nullptr : tr_init.c_str(), on_epoch, &sink, &raw, &imported),
            "train");
      ModelPtr model(raw);
      check(varclr_model_save(model.get(), tr_out.c_str()), "writing checkpoint");
      m.write(tr_out);
      varclr_training_info info{};
      check(varclr_model_training_info(model.get(), &info), "train");
      std::cerr << "best_epoch=" << info.best_epoch << " val_loss=" << fmt(info.validation_loss)
                << " train_pairs=" << info.train_pairs << " val_pairs=" << info.validation_pairs;
      if (!tr_init.empty()) std::cerr << " imported_embeddings=" << imported;
      std::cerr << "\n";
    } else if (*score) {
      auto model = load_model(sc_ckpt);
      double s = 0;
      check(varclr_model_similarity(model.get(), sc_names[0].c_str(), sc_names[1].c_str(), &s), "score");
      std::cout << fmt(s) << "\n";
    } else if (*eval) {
      ModelPtr model;
      varclr_scorer scorer = VARCLR_SCORER_MODEL;
      std::string encoder;
      if (ev_baseline == "levenshtein") {
        scorer = VARCLR_SCORER_LEVENSHTEIN;
        encoder = "levenshtein";
      } else {
        if (ev_ckpt.empty()) throw CLI::RequiredError("--ckpt (or --baseline)");
        model = load_model(ev_ckpt);
        encoder = varclr_model_kind(model.get()) == VARCLR_ENCODER_LSTM ? "lstm" : "avg";
      }
      varclr_score_report r{};
      check(varclr_evaluate_benchmark(model.get(), ev_bench.c_str(), scorer, &r), "eval");
      std::cout << "benchmark,encoder,pairs,dropped,similarity,relatedness\n"
                << std::filesystem::path(ev_bench).filename().string() << "," << encoder << "," << r.pairs << ","
                << r.dropped << "," << (r.has_similarity ? fmt(r.similarity) : "") << ","
                << (r.has_relatedness ? fmt(r.relatedness) : "") << "\n";
    } else if (*index) {
      Manifest m("index");
      m.input(ix_ckpt);
      m.input(ix_pool);
      m.config("workers", ix_workers);
      auto model = load_model(ix_ckpt);
      varclr_index* raw = nullptr;
      size_t dropped = 0;
      check(varclr_index_build_file(model.get(), ix_pool.c_str(), ix_workers, &raw, &dropped), "index");
      IndexPtr idx(raw);
      check(varclr_index_save(idx.get(), ix_out.c_str(), ix_ckpt.c_str()), "writing index");
      m.write(ix_out);
      std::cout << "indexed=" << varclr_index_size(idx.get()) << " dropped=" << dropped << "\n";
    } else if (*search) {
      auto idx = load_index(se_index);
      const std::string ckpt = se_ckpt.empty() ? varclr_index_checkpoint_path(idx.get()) : se_ckpt;
      if (ckpt.empty()) throw DomainError{"index records no checkpoint; pass --ckpt"};
      auto model = load_model(ckpt);
      std::vector<varclr_hit> hits(se_k);
      check(varclr_index_search(idx.get(), model.get(), se_query.c_str(), se_k, se_exclude, hits.data()), "search");
      std::cout << "rank,name,score\n";
      for (std::size_t i = 0; i < hits.size(); ++i)
        std::cout << i + 1 << "," << hits[i].name << "," << fmt(hits[i].score) << "\n";
    } else if (*hitk) {
      Manifest m("hitk");
      m.input(hk_index);
      m.input(hk_pairs);
      m.config("ks", hk_ks);
      m.config("threshold", hk_opts.similarity_threshold);
      m.config("exclude_query", hk_exclude);
      m.config("both_directions", hk_both);
      std::vector<size_t> ks;
      try {
        std::stringstream ss(hk_ks);
        for (std::string part; std::getline(ss, part, ',');) {
          const long long k = std::stoll(part);
          if (k < 1) throw std::invalid_argument("k < 1");
          ks.push_back(static_cast<size_t>(k));
        }
      } catch (const std::exception&) {
        throw CLI::ValidationError("--ks", "expected comma-separated positive integers");
      }
      auto idx = load_index(hk_index);
      const std::string ckpt = hk_ckpt.empty() ? varclr_index_checkpoint_path(idx.get()) : hk_ckpt;
      if (ckpt.empty()) throw DomainError{"index records no checkpoint; pass --ckpt"};
      auto model = load_model(ckpt);
      hk_opts.exclude_query = hk_exclude;
      hk_opts.both_directions = hk_both;
      std::vector<size_t> ks_out(ks.size());
      std::vector<double> rates(ks.size());
      size_t n_rates = 0, queries = 0;
      check(varclr_index_hit_at_k_file(idx.get(), model.get(), hk_pairs.c_str(), ks.data(), ks.size(), &hk_opts,
                                       ks_out.data(), rates.data(), &n_rates, &queries),
            "hitk");
      std::ostringstream csv;
      csv << "k,hit_rate\n";
      for (size_t i = 0; i < n_rates; ++i) csv << ks_out[i] << "," << fmt(rates[i]) << "\n";
      std::ofstream f(hk_out);
      f << csv.str();
      if (!f) throw DomainError{"cannot write '" + hk_out + "'"};
      f.close();
      m.write(hk_out);
      std::cout << "queries=" << queries << "\n" << csv.str();
    } else if (*typo) {
      Manifest m("typo-gen");
      m.input(tg_pool);
      m.seed(tg_seed);
      m.config("count", tg_count);
      check(varclr_typo_gen_file(tg_pool.c_str(), tg_count, tg_seed, tg_out.c_str()), "typo-gen");
      m.write(tg_out);
    } else if (*exp) {
      Manifest m("export-embeddings");
      m.input(ex_ckpt);
      auto model = load_model(ex_ckpt);
      check(varclr_model_export_embeddings(model.get(), ex_out.c_str()), "export-embeddings");
      m.write(ex_out);
    }
  } catch (const CLI::Error& e) {
    std::cerr << "varclr: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "varclr: " << e.message << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "varclr: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitOk;
}
