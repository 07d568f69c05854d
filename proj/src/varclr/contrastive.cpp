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

#include "varclr/contrastive.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

namespace varclr {
namespace {

void check_unit_rows(const Matrix& m, const char* what) {
  for (std::size_t r = 0; r < m.rows; ++r)
    if (std::abs(norm2(m.row(r)) - 1.0) > 1e-6)
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(what) + " row " + std::to_string(r) + " is not unit norm");
}

// Runs fn(worker, begin, end) over a contiguous static partition of [0, n).
template <typename Fn>
void parallel_ranges(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    fn(0, 0, n);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = std::min(n, w * chunk), e = std::min(n, b + chunk);
    threads.emplace_back([&, w, b, e] {
      try {
        fn(w, b, e);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct Side {
  ForwardCache cache;
  Vector unit;
  double norm = 0.0;
};

void encode_side(const EncoderParams& params, std::span<const std::int32_t> ids, Side& side,
                 bool record, const EncodeOptions& options) {
  Vector v = encode(params, ids, record ? &side.cache : nullptr, options);
  side.norm = norm2(v);
  side.unit = l2_normalize(v);
}

Matrix stack(const std::vector<Side>& sides) {
  Matrix m(sides.size(), sides.empty() ? 0 : sides[0].unit.size());
  for (std::size_t i = 0; i < sides.size(); ++i) std::copy(sides[i].unit.begin(), sides[i].unit.end(), m.row(i).begin());
  return m;
}

void add_into(EncoderParams& dst, const EncoderParams& src) {
  auto d = dst.buffers();
  auto s = src.buffers();
  for (std::size_t b = 0; b < d.size(); ++b) axpy(1.0, s[b], d[b]);
}

}  // namespace

void TrainConfig::validate() const {
  if (!(temperature > 0.0)) throw Error(ErrorCode::kInvalidArgument, "temperature must be > 0");
  if (batch_size < 2) throw Error(ErrorCode::kInvalidArgument, "batch size must be at least 2");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "validation fraction must be in (0, 1)");
  if (!(data_fraction > 0.0 && data_fraction <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "data fraction must be in (0, 1]");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidArgument, "learning rate must be > 0");
  if (!(clip_bound > 0.0)) throw Error(ErrorCode::kInvalidArgument, "clip bound must be > 0");
  if (!(embedding_dropout >= 0.0 && embedding_dropout < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "embedding dropout must be in [0, 1)");
  if (max_epochs == 0) throw Error(ErrorCode::kInvalidArgument, "max epochs must be > 0");
}

namespace {

constexpr std::size_t kTile = 64;

// s(i, j) = a_i . b_j. Four columns share each pass over a_i; every entry is
// still summed in plain index order, so values match dot() exactly.
Matrix mul_abt(const Matrix& a, const Matrix& b) {
  Matrix s(a.rows, b.rows);
  const std::size_t d = a.cols;
  for (std::size_t j0 = 0; j0 < b.rows; j0 += kTile) {
    const std::size_t j1 = std::min(j0 + kTile, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
      const double* x = a.data.data() + i * d;
      std::size_t j = j0;
      for (; j + 4 <= j1; j += 4) {
        const double* b0 = b.data.data() + j * d;
        const double *b1 = b0 + d, *b2 = b1 + d, *b3 = b2 + d;
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          const double v = x[c];
          s0 += v * b0[c];
          s1 += v * b1[c];
          s2 += v * b2[c];
          s3 += v * b3[c];
        }
        s(i, j) = s0;
        s(i, j + 1) = s1;
        s(i, j + 2) = s2;
        s(i, j + 3) = s3;
      }
      for (; j < j1; ++j) s(i, j) = dot(a.row(i), b.row(j));
    }
  }
  return s;
}

// m * b, accumulating rows of b in ascending order for each output row.
Matrix mul_ab(const Matrix& m, const Matrix& b) {
  Matrix out(m.rows, b.cols);
  for (std::size_t j0 = 0; j0 < b.rows; j0 += kTile) {
    const std::size_t j1 = std::min(j0 + kTile, b.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
      for (std::size_t j = j0; j < j1; ++j) axpy(m(i, j), b.row(j), out.row(i));
  }
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
  return t;
}

void check_batch(const Matrix& q, const Matrix& k, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::kInvalidArgument, "temperature must be > 0");
  if (q.rows != k.rows || q.cols != k.cols) throw Error(ErrorCode::kShape, "query/key batches differ in shape");
  if (q.rows == 0) throw Error(ErrorCode::kInvalidArgument, "empty batch");
  check_unit_rows(q, "query");
  check_unit_rows(k, "key");
}

// Summed cross-entropy of each row of s / tau against its diagonal entry.
// When `ds` is set, adds scale * d(mean loss)/ds to it.
double nce_rows(const Matrix& s, double tau, double scale, Matrix* ds) {
  const std::size_t n = s.rows;
  double total = 0.0;
  Vector logits(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mx = -INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
      logits[j] = s(i, j) / tau;
      mx = std::max(mx, logits[j]);
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += std::exp(logits[j] - mx);
    const double lse = mx + std::log(sum);
    total += lse - logits[i];
    if (!ds) continue;
    for (std::size_t j = 0; j < n; ++j) {
      const double p = std::exp(logits[j] - lse);
      (*ds)(i, j) += scale * (p - (i == j ? 1.0 : 0.0)) / (static_cast<double>(n) * tau);
    }
  }
  return total;
}

}  // namespace

Matrix batch_similarities(const Matrix& q, const Matrix& k) {
  if (q.cols != k.cols) throw Error(ErrorCode::kShape, "similarity operands differ in dimension");
  return mul_abt(q, k);
}

double info_nce(const Matrix& q, const Matrix& k, double tau, Matrix* grad_q, Matrix* grad_k) {
  check_batch(q, k, tau);
  const std::size_t n = q.rows;
  const bool want = grad_q || grad_k;
  Matrix ds(want ? n : 0, want ? n : 0);
  const double total = nce_rows(mul_abt(q, k), tau, 1.0, want ? &ds : nullptr);
  if (grad_q) *grad_q = mul_ab(ds, k);
  if (grad_k) *grad_k = mul_ab(transpose(ds), q);
  return total / static_cast<double>(n);
}

double symmetric_loss(const Matrix& q, const Matrix& k, double tau, Matrix* grad_q, Matrix* grad_k) {
  check_batch(q, k, tau);
  const std::size_t n = q.rows;
  const bool want = grad_q || grad_k;
  // The key-to-query direction scores the transpose of the same matrix.
  const Matrix s = mul_abt(q, k);
  Matrix ds(want ? n : 0, want ? n : 0), ds_t(want ? n : 0, want ? n : 0);
  const double a = nce_rows(s, tau, 0.5, want ? &ds : nullptr);
  const double b = nce_rows(transpose(s), tau, 0.5, want ? &ds_t : nullptr);
  if (want) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) ds(i, j) += ds_t(j, i);
  }
  if (grad_q) *grad_q = mul_ab(ds, k);
  if (grad_k) *grad_k = mul_ab(transpose(ds), q);
  return (0.5 * a + 0.5 * b) / static_cast<double>(n);
}

double clip_gradients(std::span<const std::span<double>> grads, double bound) {
  if (!(bound > 0.0)) throw Error(ErrorCode::kInvalidArgument, "clip bound must be > 0");
  double sq = 0.0;
  for (auto g : grads) sq += dot(g, g);
  const double norm = std::sqrt(sq);
  if (norm > bound) {
    const double scale = bound / norm;
    for (auto g : grads)
      for (double& x : g) x *= scale;
  }
  return norm;
}

AdamState AdamState::for_buffers(std::span<const std::span<double>> params) {
  AdamState s;
  for (auto p : params) {
    s.m.emplace_back(p.size(), 0.0);
    s.v.emplace_back(p.size(), 0.0);
  }
  return s;
}

void adam_step(std::span<const std::span<double>> params, std::span<const std::span<double>> grads,
               AdamState& state, const AdamConfig& config) {
  if (params.size() != grads.size() || params.size() != state.m.size() || params.size() != state.v.size())
    throw Error(ErrorCode::kShape, "Adam: parameter, gradient and state buffers differ in count");
  for (std::size_t b = 0; b < params.size(); ++b)
    if (params[b].size() != grads[b].size() || params[b].size() != state.m[b].size() ||
        params[b].size() != state.v[b].size())
      throw Error(ErrorCode::kShape, "Adam: buffer " + std::to_string(b) + " shape mismatch");

  clip_gradients(grads, config.clip_bound);
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto p = params[b];
    auto g = grads[b];
    auto& m = state.m[b];
    auto& v = state.v[b];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

double batch_loss_and_grads(const EncoderParams& params, std::span<const PairIds> batch, double tau,
                            EncoderParams* grads, const EncodeOptions& options, std::size_t workers) {
  const std::size_t n = batch.size();
  std::vector<Side> left(n), right(n);
  const bool record = grads != nullptr;
  // Dropout draws from a shared Rng, so that path stays sequential.
  const std::size_t fwd_workers = options.embedding_dropout > 0.0 ? 1 : workers;
  parallel_ranges(n, fwd_workers, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      encode_side(params, batch[i].left, left[i], record, options);
      encode_side(params, batch[i].right, right[i], record, options);
    }
  });
  const Matrix q = stack(left), k = stack(right);
  if (!grads) return symmetric_loss(q, k, tau);

  Matrix gq, gk;
  const double loss = symmetric_loss(q, k, tau, &gq, &gk);

  const std::size_t bw = std::max<std::size_t>(1, std::min(workers, n));
  std::vector<EncoderParams> partial;
  if (bw > 1)
    for (std::size_t w = 0; w < bw; ++w) partial.push_back(params.zeros_like());
  parallel_ranges(n, bw, [&](std::size_t w, std::size_t b, std::size_t e) {
    EncoderParams& g = bw > 1 ? partial[w] : *grads;
    for (std::size_t i = b; i < e; ++i) {
      backward(params, left[i].cache, l2_normalize_backward(left[i].unit, left[i].norm, gq.row(i)), g);
      backward(params, right[i].cache, l2_normalize_backward(right[i].unit, right[i].norm, gk.row(i)), g);
    }
  });
  for (const auto& g : partial) add_into(*grads, g);
  return loss;
}

double dataset_loss(const EncoderParams& params, std::span<const PairIds> pairs, std::size_t batch_size,
                    double tau) {
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t b = 0; b < pairs.size(); b += batch_size) {
    const std::size_t len = std::min(batch_size, pairs.size() - b);
    if (len < 2) continue;
    total += batch_loss_and_grads(params, pairs.subspan(b, len), tau, nullptr) * static_cast<double>(len);
    counted += len;
  }
  return counted ? total / static_cast<double>(counted) : 0.0;
}

double discrimination_accuracy(const EncoderParams& params, std::span<const PairIds> pairs,
                               std::size_t batch_size) {
  if (pairs.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t b = 0; b < pairs.size(); b += batch_size) {
    const std::size_t len = std::min(batch_size, pairs.size() - b);
    std::vector<Side> left(len), right(len);
    for (std::size_t i = 0; i < len; ++i) {
      encode_side(params, pairs[b + i].left, left[i], false, {});
      encode_side(params, pairs[b + i].right, right[i], false, {});
    }
    const Matrix s = batch_similarities(stack(left), stack(right));
    for (std::size_t i = 0; i < len; ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < len; ++j)
        if (s(i, j) > s(i, best)) best = j;
      correct += best == i;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

std::vector<PairIds> tokenize_pairs(std::span<const RenamePair> pairs, const BpeVocab& vocab) {
  std::vector<PairIds> out;
  out.reserve(pairs.size());
  auto ids_of = [&](const std::string& name) {
    try {
      return tokenize(name, vocab).ids;
    } catch (const Error& e) {
      throw Error(ErrorCode::kInvalidName, "cannot tokenize '" + name + "': " + e.what());
    }
  };
  for (const auto& p : pairs) out.push_back({ids_of(p.before), ids_of(p.after)});
  return out;
}

TrainResult train(std::span<const RenamePair> pairs, const BpeVocab& vocab, EncoderKind kind,
                  const TrainConfig& config, std::optional<std::string_view> init_embeddings,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  config.validate();
  if (pairs.size() < 2) throw Error(ErrorCode::kInvalidArgument, "training needs at least 2 pairs");
  const std::vector<PairIds> all = tokenize_pairs(pairs, vocab);

  Rng rng(config.seed);
  EncoderShape shape{kind, vocab.size(), config.embedding_dim, config.hidden, config.output_dim};
  TrainResult result;
  EncoderParams params = init_encoder(shape, rng);
  if (init_embeddings) result.imported_embeddings = import_embeddings(*init_embeddings, vocab, params.embeddings);

  std::vector<std::size_t> order(all.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  const auto n = static_cast<double>(all.size());
  const std::size_t n_val =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(config.validation_fraction * n)), 1,
                              all.size() - 1);
  std::vector<PairIds> validation, training;
  for (std::size_t i = 0; i < n_val; ++i) validation.push_back(all[order[i]]);
  const std::size_t n_train_all = all.size() - n_val;
  const std::size_t n_train = std::min(
      n_train_all, std::max<std::size_t>(2, static_cast<std::size_t>(
                                                std::ceil(config.data_fraction * static_cast<double>(n_train_all)))));
  for (std::size_t i = 0; i < n_train; ++i) training.push_back(all[order[n_val + i]]);

  EncoderParams grads = params.zeros_like();
  auto param_bufs = params.buffers();
  auto grad_bufs = grads.buffers();
  AdamState adam = AdamState::for_buffers(param_bufs);
  const AdamConfig adam_cfg{config.learning_rate, config.beta1, config.beta2, config.epsilon, config.clip_bound};
  EncodeOptions enc_opts{config.embedding_dropout, &rng};

  double best_loss = INFINITY;
  EncoderParams best = params;
  std::size_t best_epoch = 0, bad = 0, epoch = 0;
  std::vector<std::size_t> idx(training.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<PairIds> batch;

  while (epoch < config.max_epochs) {
    ++epoch;
    const auto start = std::chrono::steady_clock::now();
    rng.shuffle(idx);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t b = 0; b < idx.size(); b += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, idx.size() - b);
      if (len < 2) continue;
      batch.clear();
      for (std::size_t i = 0; i < len; ++i) batch.push_back(training[idx[b + i]]);
      grads.set_zero();
      loss_sum += batch_loss_and_grads(params, batch, config.temperature, &grads, enc_opts, config.workers) *
                  static_cast<double>(len);
      seen += len;
      adam_step(param_bufs, grad_bufs, adam, adam_cfg);
    }
    check_finite(params);

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = seen ? loss_sum / static_cast<double>(seen) : 0.0;
    log.validation_loss = dataset_loss(params, validation, config.batch_size, config.temperature);
    log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(log);
    if (on_epoch) on_epoch(log);

    if (log.validation_loss < best_loss) {
      best_loss = log.validation_loss;
      best = params;
      best_epoch = epoch;
      bad = 0;
    } else if (++bad > config.patience) {
      break;
    }
  }

  TrainingMeta meta;
  meta.epochs_run = static_cast<std::int64_t>(epoch);
  meta.best_epoch = static_cast<std::int64_t>(best_epoch);
  meta.validation_loss = best_loss;
  meta.seed = config.seed;
  meta.batch_size = config.batch_size;
  meta.temperature = config.temperature;
  meta.learning_rate = config.learning_rate;
  meta.clip_bound = config.clip_bound;
  meta.data_fraction = config.data_fraction;
  meta.train_pairs = training.size();
  meta.validation_pairs = validation.size();
  result.checkpoint = Checkpoint{vocab, std::move(best), meta};
  return result;
}

}  // namespace varclr
