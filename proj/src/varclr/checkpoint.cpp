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

#include "varclr/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "varclr/io.hpp"

namespace varclr {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr std::string_view kMagic = "VARCLRCK";

class Writer {
 public:
  template <typename T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void bytes(std::string_view s) { out_.append(s); }
  std::string take() { return std::move(out_); }
  const std::string& view() const { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw Error(ErrorCode::kParse, "checkpoint truncated");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

Vector Checkpoint::embed(std::string_view name) const {
  return encode(encoder, tokenize(name, vocab).ids);
}

std::uint64_t Checkpoint::fingerprint() const {
  std::uint64_t h = vocab.fingerprint();
  for (auto buf : encoder.buffers())
    h = fnv1a({reinterpret_cast<const char*>(buf.data()), buf.size() * sizeof(double)}, h);
  return h;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.bytes(kMagic);
  w.put<std::uint32_t>(kCheckpointVersion);
  const std::string vocab_text = ckpt.vocab.serialize();
  w.put<std::uint64_t>(fnv1a(vocab_text));
  w.put<std::uint64_t>(vocab_text.size());
  w.bytes(vocab_text);

  const EncoderParams& p = ckpt.encoder;
  w.put<std::uint8_t>(static_cast<std::uint8_t>(p.kind));
  w.put<std::uint64_t>(p.vocab_size());
  w.put<std::uint64_t>(p.embedding_dim());
  w.put<std::uint64_t>(p.lstm ? p.lstm->hidden : 0);
  w.put<std::uint64_t>(p.output_dim());

  const TrainingMeta& m = ckpt.meta;
  w.put(m.epochs_run);
  w.put(m.best_epoch);
  w.put(m.validation_loss);
  w.put(m.seed);
  w.put(m.batch_size);
  w.put(m.temperature);
  w.put(m.learning_rate);
  w.put(m.clip_bound);
  w.put(m.data_fraction);
  w.put(m.train_pairs);
  w.put(m.validation_pairs);

  std::uint64_t count = 0;
  for (auto buf : p.buffers()) count += buf.size();
  w.put(count);
  for (auto buf : p.buffers())
    w.bytes({reinterpret_cast<const char*>(buf.data()), buf.size() * sizeof(double)});
  // Trailing FNV-1a of everything before it.
  w.put<std::uint64_t>(fnv1a(w.view()));
  return w.take();
}

Checkpoint parse_checkpoint(std::string_view bytes) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic)
    throw Error(ErrorCode::kParse, "not a varclr checkpoint");
  if (bytes.size() < kMagic.size() + sizeof(std::uint64_t)) throw Error(ErrorCode::kParse, "checkpoint truncated");
  const std::string_view body = bytes.substr(0, bytes.size() - sizeof(std::uint64_t));
  std::uint64_t checksum;
  std::memcpy(&checksum, bytes.data() + body.size(), sizeof checksum);
  if (fnv1a(body) != checksum) throw Error(ErrorCode::kParse, "checkpoint checksum mismatch");

  Reader r(body);
  r.bytes(kMagic.size());
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw Error(ErrorCode::kParse, "unsupported checkpoint version " + std::to_string(version));
  const auto vocab_hash = r.get<std::uint64_t>();
  const auto vocab_len = r.get<std::uint64_t>();
  const auto vocab_text = r.bytes(vocab_len);
  if (fnv1a(vocab_text) != vocab_hash) throw Error(ErrorCode::kParse, "checkpoint vocab hash mismatch");

  Checkpoint ckpt{BpeVocab::parse(vocab_text), {}, {}};
  const auto kind_byte = r.get<std::uint8_t>();
  if (kind_byte > 1) throw Error(ErrorCode::kParse, "unknown encoder kind in checkpoint");
  EncoderShape shape;
  shape.kind = static_cast<EncoderKind>(kind_byte);
  shape.vocab_size = r.get<std::uint64_t>();
  shape.embedding_dim = r.get<std::uint64_t>();
  shape.hidden = r.get<std::uint64_t>();
  shape.output_dim = r.get<std::uint64_t>();
  if (shape.vocab_size != ckpt.vocab.size())
    throw Error(ErrorCode::kParse, "checkpoint embedding rows do not match its vocab");

  TrainingMeta& m = ckpt.meta;
  m.epochs_run = r.get<std::int64_t>();
  m.best_epoch = r.get<std::int64_t>();
  m.validation_loss = r.get<double>();
  m.seed = r.get<std::uint64_t>();
  m.batch_size = r.get<std::uint64_t>();
  m.temperature = r.get<double>();
  m.learning_rate = r.get<double>();
  m.clip_bound = r.get<double>();
  m.data_fraction = r.get<double>();
  m.train_pairs = r.get<std::uint64_t>();
  m.validation_pairs = r.get<std::uint64_t>();

  // Shapes only; the payload overwrites every value.
  Rng unused(0);
  ckpt.encoder = init_encoder(shape, unused);
  const auto count = r.get<std::uint64_t>();
  std::uint64_t expected = 0;
  for (auto buf : ckpt.encoder.buffers()) expected += buf.size();
  if (count != expected) throw Error(ErrorCode::kParse, "checkpoint parameter count mismatch");
  for (auto buf : ckpt.encoder.buffers()) {
    auto raw = r.bytes(buf.size() * sizeof(double));
    std::memcpy(buf.data(), raw.data(), raw.size());
  }
  if (!r.done()) throw Error(ErrorCode::kParse, "trailing bytes after checkpoint payload");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  io::write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) { return parse_checkpoint(io::read_file(path)); }

}  // namespace varclr
