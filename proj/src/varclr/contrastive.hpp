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

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "varclr/checkpoint.hpp"
#include "varclr/encoders.hpp"
#include "varclr/mining.hpp"
#include "varclr/tensor.hpp"

namespace varclr {

struct TrainConfig {
  std::size_t batch_size = 1024;
  double temperature = 0.05;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_bound = 1.0;
  std::size_t max_epochs = 20;
  std::size_t patience = 2;
  double validation_fraction = 0.05;
  double data_fraction = 1.0;
  std::uint64_t seed = 42;
  std::size_t embedding_dim = 768;
  std::size_t hidden = 150;
  std::size_t output_dim = 150;
  double embedding_dropout = 0.0;
  std::size_t workers = 1;

  void validate() const;
};

// S[i][j] = q_i . k_j
Matrix batch_similarities(const Matrix& q, const Matrix& k);

// Mean over rows i of -log softmax(S[i] / tau)[i], with rows of `q` and `k`
// unit vectors. Gradients with respect to q and k are written when the
// pointers are non-null.
double info_nce(const Matrix& q, const Matrix& k, double tau, Matrix* grad_q = nullptr,
                Matrix* grad_k = nullptr);

// (info_nce(q, k) + info_nce(k, q)) / 2
double symmetric_loss(const Matrix& q, const Matrix& k, double tau, Matrix* grad_q = nullptr,
                      Matrix* grad_k = nullptr);

// Global L2 norm over all buffers; scales them by bound/norm when the norm
// exceeds `bound`. Returns the norm before clipping.
double clip_gradients(std::span<const std::span<double>> grads, double bound);

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_bound = 1.0;
};

struct AdamState {
  std::vector<Vector> m;
  std::vector<Vector> v;
  std::uint64_t step = 0;

  static AdamState for_buffers(std::span<const std::span<double>> params);
};

// Clips `grads` in place, then applies one bias-corrected Adam update.
void adam_step(std::span<const std::span<double>> params, std::span<const std::span<double>> grads,
               AdamState& state, const AdamConfig& config);

struct PairIds {
  std::vector<std::int32_t> left;
  std::vector<std::int32_t> right;
};

// Forward + backward for one batch: encodes both sides, normalizes,
// evaluates the symmetric loss and accumulates parameter gradients into
// `grads` (which the caller zeroes).
double batch_loss_and_grads(const EncoderParams& params, std::span<const PairIds> batch, double tau,
                            EncoderParams* grads, const EncodeOptions& options = {},
                            std::size_t workers = 1);

// Symmetric loss averaged over consecutive batches of `batch_size` (a final
// batch of one pair is skipped), weighted by batch size.
double dataset_loss(const EncoderParams& params, std::span<const PairIds> pairs, std::size_t batch_size,
                    double tau);

// Fraction of rows whose largest similarity within their batch is the
// partner on the diagonal.
double discrimination_accuracy(const EncoderParams& params, std::span<const PairIds> pairs,
                               std::size_t batch_size);

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLog> history;
  std::size_t imported_embeddings = 0;
};

// Trains an encoder with in-batch negatives and early stopping on the
// validation loss. Returns the parameters of the best validation epoch.
TrainResult train(std::span<const RenamePair> pairs, const BpeVocab& vocab, EncoderKind kind,
                  const TrainConfig& config, std::optional<std::string_view> init_embeddings = std::nullopt,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

// Tokenizes both sides of every pair; throws Error(kInvalidName) naming the
// first identifier that fails.
std::vector<PairIds> tokenize_pairs(std::span<const RenamePair> pairs, const BpeVocab& vocab);

}  // namespace varclr
