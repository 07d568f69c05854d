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
#include <string>
#include <string_view>

#include "varclr/encoders.hpp"
#include "varclr/tokenizer.hpp"

namespace varclr {

struct TrainingMeta {
  std::int64_t epochs_run = 0;
  std::int64_t best_epoch = 0;
  double validation_loss = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t batch_size = 0;
  double temperature = 0.0;
  double learning_rate = 0.0;
  double clip_bound = 0.0;
  double data_fraction = 1.0;
  std::uint64_t train_pairs = 0;
  std::uint64_t validation_pairs = 0;

  friend bool operator==(const TrainingMeta&, const TrainingMeta&) = default;
};

// A trained encoder together with the vocabulary it was trained against.
struct Checkpoint {
  BpeVocab vocab;
  EncoderParams encoder;
  TrainingMeta meta;

  // Tokenizes and encodes one identifier (unnormalized).
  Vector embed(std::string_view name) const;

  // Hash of vocab and parameter payload; identifies the function `embed`.
  std::uint64_t fingerprint() const;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary layout, little endian: magic "VARCLRCK", u32 version, u64 vocab
// hash, u64 vocab text length, vocab text, u8 encoder kind, u64 vocab size,
// embedding dim, hidden, output dim, the TrainingMeta fields in declaration
// order, u64 parameter count, then the parameters as IEEE doubles in
// EncoderParams::buffers() order.
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace varclr
