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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "varclr/common.hpp"
#include "varclr/tensor.hpp"
#include "varclr/tokenizer.hpp"

namespace varclr {

enum class EncoderKind : std::uint8_t { kAvg = 0, kLstm = 1 };

std::string_view to_string(EncoderKind kind);
EncoderKind parse_encoder_kind(std::string_view text);

// Weights of one LSTM direction. Gate rows are stacked [input, forget,
// cell, output], each `hidden` rows tall.
struct LstmDirection {
  Matrix w_input;   // 4h x d
  Matrix w_hidden;  // 4h x h
  Vector bias;      // 4h

  friend bool operator==(const LstmDirection&, const LstmDirection&) = default;
};

struct LstmParams {
  std::size_t hidden = 0;
  LstmDirection forward;
  LstmDirection backward;
  Matrix projection;       // d_out x 2h
  Vector projection_bias;  // d_out

  friend bool operator==(const LstmParams&, const LstmParams&) = default;
};

struct EncoderParams {
  EncoderKind kind = EncoderKind::kAvg;
  Matrix embeddings;  // |vocab| x d
  std::optional<LstmParams> lstm;

  std::size_t vocab_size() const { return embeddings.rows; }
  std::size_t embedding_dim() const { return embeddings.cols; }
  std::size_t output_dim() const;

  // Every parameter buffer in a fixed order; optimizer state and gradients
  // line up with it entry for entry.
  std::vector<std::span<double>> buffers();
  std::vector<std::span<const double>> buffers() const;

  // Same shapes, all zeros.
  EncoderParams zeros_like() const;
  void set_zero();

  friend bool operator==(const EncoderParams&, const EncoderParams&) = default;
};

struct EncoderShape {
  EncoderKind kind = EncoderKind::kAvg;
  std::size_t vocab_size = 0;
  std::size_t embedding_dim = 768;
  std::size_t hidden = 150;
  std::size_t output_dim = 150;
};

// Embeddings ~ U[-0.5/d, 0.5/d]; LSTM weights ~ U[-1/sqrt(h), 1/sqrt(h)] with
// forget-gate bias 1; projection ~ U[-1/sqrt(2h), 1/sqrt(2h)], bias 0.
EncoderParams init_encoder(const EncoderShape& shape, Rng& rng);

void check_finite(const EncoderParams& params);

struct LstmStep {
  Vector x;  // embedded input after dropout
  Vector i, f, g, o, c, h;
};

// Activations recorded by a forward pass, consumed by `backward`.
struct ForwardCache {
  EncoderKind kind = EncoderKind::kAvg;
  std::vector<std::int32_t> ids;
  std::vector<LstmStep> fwd;  // indexed by position
  std::vector<LstmStep> bwd;  // indexed by position
  Vector pooled;              // 2h
  Vector dropout_mask;        // n x d, empty when dropout is off
};

struct EncodeOptions {
  double embedding_dropout = 0.0;  // LSTM only
  Rng* rng = nullptr;              // required when dropout > 0
};

Vector encode(const EncoderParams& params, std::span<const std::int32_t> ids,
              ForwardCache* cache = nullptr, const EncodeOptions& options = {});

// Mean of the embedding rows.
Vector encode_avg(const TokenSeq& seq, const Matrix& table);

// Bidirectional LSTM, per-position [h_fwd; h_bwd] mean-pooled and projected.
Vector encode_lstm(const TokenSeq& seq, const EncoderParams& params);

// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(output).
// Embedding rows not in the cached sequence are left untouched.
void backward(const EncoderParams& params, const ForwardCache& cache,
              std::span<const double> upstream, EncoderParams& grads);

// Throws Error(kNumeric) on a zero vector.
Vector l2_normalize(std::span<const double> v);

// d/dv of v/|v| applied to `upstream`, given the normalized vector and |v|.
Vector l2_normalize_backward(std::span<const double> normalized, double norm,
                             std::span<const double> upstream);

// Embedding text format: "<count> <dim>" then "<token> <f1> ... <fdim>".
// Rows whose token is in `vocab` are copied into `table`; returns how many.
std::size_t import_embeddings(std::string_view text, const BpeVocab& vocab, Matrix& table);
std::string export_embeddings(const Matrix& table, const BpeVocab& vocab);

}  // namespace varclr
