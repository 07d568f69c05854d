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

#include "varclr/encoders.hpp"

#include <cmath>

#include "varclr/io.hpp"

namespace varclr {
namespace {

void fill_uniform(std::span<double> xs, double bound, Rng& rng) {
  for (double& x : xs) x = rng.uniform(-bound, bound);
}

LstmDirection init_direction(std::size_t d, std::size_t h, Rng& rng) {
  LstmDirection dir{Matrix(4 * h, d), Matrix(4 * h, h), Vector(4 * h, 0.0)};
  const double bound = 1.0 / std::sqrt(static_cast<double>(h));
  fill_uniform(dir.w_input.data, bound, rng);
  fill_uniform(dir.w_hidden.data, bound, rng);
  fill_uniform(dir.bias, bound, rng);
  for (std::size_t k = h; k < 2 * h; ++k) dir.bias[k] = 1.0;
  return dir;
}

LstmDirection zeros_like(const LstmDirection& d) {
  return {Matrix(d.w_input.rows, d.w_input.cols), Matrix(d.w_hidden.rows, d.w_hidden.cols),
          Vector(d.bias.size(), 0.0)};
}

void check_ids(const EncoderParams& params, std::span<const std::int32_t> ids) {
  if (ids.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot encode an empty token sequence");
  for (auto id : ids)
    if (id < 0 || static_cast<std::size_t>(id) >= params.vocab_size())
      throw Error(ErrorCode::kInvalidArgument,
                  "token id " + std::to_string(id) + " out of range for vocab of " +
                      std::to_string(params.vocab_size()));
}

void run_direction(const LstmDirection& w, std::size_t h, const std::vector<Vector>& inputs,
                   bool reverse, std::vector<LstmStep>& steps) {
  const std::size_t n = inputs.size();
  steps.assign(n, {});
  Vector h_prev(h, 0.0), c_prev(h, 0.0), z(4 * h);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = reverse ? n - 1 - k : k;
    z = w.bias;
    gemv_add(w.w_input, inputs[t], z);
    gemv_add(w.w_hidden, h_prev, z);
    LstmStep& s = steps[t];
    s.x = inputs[t];
    s.i.resize(h), s.f.resize(h), s.g.resize(h), s.o.resize(h), s.c.resize(h), s.h.resize(h);
    for (std::size_t j = 0; j < h; ++j) {
      s.i[j] = sigmoid(z[j]);
      s.f[j] = sigmoid(z[h + j]);
      s.g[j] = std::tanh(z[2 * h + j]);
      s.o[j] = sigmoid(z[3 * h + j]);
      s.c[j] = s.f[j] * c_prev[j] + s.i[j] * s.g[j];
      s.h[j] = s.o[j] * std::tanh(s.c[j]);
    }
    h_prev = s.h;
    c_prev = s.c;
  }
}

// BPTT through one direction. `dh_out[t]` is the loss gradient reaching
// position t's hidden state from the pooling layer; input gradients are
// accumulated into `dx`.
void backprop_direction(const LstmDirection& w, std::size_t h, const std::vector<LstmStep>& steps,
                        const std::vector<Vector>& dh_out, bool reverse, LstmDirection& gw,
                        std::vector<Vector>& dx) {
  const std::size_t n = steps.size();
  Vector dh_next(h, 0.0), dc_next(h, 0.0), dz(4 * h), dh(h);
  const Vector zeros(h, 0.0);
  for (std::size_t k = n; k-- > 0;) {
    const std::size_t t = reverse ? n - 1 - k : k;
    const std::size_t prev_t = reverse ? t + 1 : t - 1;  // valid only when k > 0
    const LstmStep& s = steps[t];
    const Vector& c_prev = k > 0 ? steps[prev_t].c : zeros;
    const Vector& h_prev = k > 0 ? steps[prev_t].h : zeros;
    for (std::size_t j = 0; j < h; ++j) {
      dh[j] = dh_out[t][j] + dh_next[j];
      const double tc = std::tanh(s.c[j]);
      const double d_o = dh[j] * tc;
      const double dc = dc_next[j] + dh[j] * s.o[j] * (1.0 - tc * tc);
      const double d_i = dc * s.g[j];
      const double d_g = dc * s.i[j];
      const double d_f = dc * c_prev[j];
      dc_next[j] = dc * s.f[j];
      dz[j] = d_i * s.i[j] * (1.0 - s.i[j]);
      dz[h + j] = d_f * s.f[j] * (1.0 - s.f[j]);
      dz[2 * h + j] = d_g * (1.0 - s.g[j] * s.g[j]);
      dz[3 * h + j] = d_o * s.o[j] * (1.0 - s.o[j]);
    }
    ger_add(gw.w_input, dz, s.x);
    ger_add(gw.w_hidden, dz, h_prev);
    axpy(1.0, dz, gw.bias);
    gemv_t_add(w.w_input, dz, dx[t]);
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    gemv_t_add(w.w_hidden, dz, dh_next);
  }
}

}  // namespace

std::string_view to_string(EncoderKind kind) { return kind == EncoderKind::kAvg ? "avg" : "lstm"; }

EncoderKind parse_encoder_kind(std::string_view text) {
  if (text == "avg") return EncoderKind::kAvg;
  if (text == "lstm") return EncoderKind::kLstm;
  throw Error(ErrorCode::kInvalidArgument, "unknown encoder '" + std::string(text) + "'");
}

std::size_t EncoderParams::output_dim() const {
  return kind == EncoderKind::kAvg ? embeddings.cols : lstm->projection.rows;
}

std::vector<std::span<double>> EncoderParams::buffers() {
  std::vector<std::span<double>> out{embeddings.data};
  if (lstm) {
    for (LstmDirection* d : {&lstm->forward, &lstm->backward}) {
      out.emplace_back(d->w_input.data);
      out.emplace_back(d->w_hidden.data);
      out.emplace_back(d->bias);
    }
    out.emplace_back(lstm->projection.data);
    out.emplace_back(lstm->projection_bias);
  }
  return out;
}

std::vector<std::span<const double>> EncoderParams::buffers() const {
  auto mutable_spans = const_cast<EncoderParams*>(this)->buffers();
  return {mutable_spans.begin(), mutable_spans.end()};
}

EncoderParams EncoderParams::zeros_like() const {
  EncoderParams z{kind, Matrix(embeddings.rows, embeddings.cols), std::nullopt};
  if (lstm) {
    z.lstm = LstmParams{lstm->hidden, varclr::zeros_like(lstm->forward),
                        varclr::zeros_like(lstm->backward),
                        Matrix(lstm->projection.rows, lstm->projection.cols),
                        Vector(lstm->projection_bias.size(), 0.0)};
  }
  return z;
}

void EncoderParams::set_zero() {
  for (auto buf : buffers()) std::fill(buf.begin(), buf.end(), 0.0);
}

EncoderParams init_encoder(const EncoderShape& shape, Rng& rng) {
  if (shape.vocab_size == 0 || shape.embedding_dim == 0)
    throw Error(ErrorCode::kInvalidArgument, "encoder needs a non-empty vocab and dim > 0");
  EncoderParams p{shape.kind, Matrix(shape.vocab_size, shape.embedding_dim), std::nullopt};
  fill_uniform(p.embeddings.data, 0.5 / static_cast<double>(shape.embedding_dim), rng);
  if (shape.kind == EncoderKind::kLstm) {
    if (shape.hidden == 0 || shape.output_dim == 0)
      throw Error(ErrorCode::kInvalidArgument, "LSTM needs hidden > 0 and output dim > 0");
    const std::size_t d = shape.embedding_dim, h = shape.hidden;
    LstmParams l;
    l.hidden = h;
    l.forward = init_direction(d, h, rng);
    l.backward = init_direction(d, h, rng);
    l.projection = Matrix(shape.output_dim, 2 * h);
    fill_uniform(l.projection.data, 1.0 / std::sqrt(2.0 * static_cast<double>(h)), rng);
    l.projection_bias.assign(shape.output_dim, 0.0);
    p.lstm = std::move(l);
  }
  return p;
}

void check_finite(const EncoderParams& params) {
  for (auto buf : params.buffers())
    for (double x : buf)
      if (!std::isfinite(x)) throw Error(ErrorCode::kNumeric, "non-finite encoder parameter");
}

Vector encode(const EncoderParams& params, std::span<const std::int32_t> ids, ForwardCache* cache,
              const EncodeOptions& options) {
  check_ids(params, ids);
  const std::size_t n = ids.size();
  const std::size_t d = params.embedding_dim();
  if (cache) {
    cache->kind = params.kind;
    cache->ids.assign(ids.begin(), ids.end());
    cache->fwd.clear();
    cache->bwd.clear();
    cache->pooled.clear();
    cache->dropout_mask.clear();
  }

  if (params.kind == EncoderKind::kAvg) {
    Vector out(d, 0.0);
    for (auto id : ids) axpy(1.0, params.embeddings.row(static_cast<std::size_t>(id)), out);
    for (double& x : out) x /= static_cast<double>(n);
    return out;
  }

  if (!params.lstm) throw Error(ErrorCode::kShape, "LSTM encoder without LSTM parameters");
  const LstmParams& l = *params.lstm;
  const std::size_t h = l.hidden;

  std::vector<Vector> inputs(n);
  Vector mask;
  if (options.embedding_dropout > 0.0) {
    if (!options.rng) throw Error(ErrorCode::kInvalidArgument, "dropout requires an Rng");
    const double keep = 1.0 - options.embedding_dropout;
    mask.resize(n * d);
    for (double& m : mask) m = options.rng->uniform() < keep ? 1.0 / keep : 0.0;
  }
  for (std::size_t t = 0; t < n; ++t) {
    auto row = params.embeddings.row(static_cast<std::size_t>(ids[t]));
    inputs[t].assign(row.begin(), row.end());
    if (!mask.empty())
      for (std::size_t k = 0; k < d; ++k) inputs[t][k] *= mask[t * d + k];
  }

  std::vector<LstmStep> fwd, bwd;
  run_direction(l.forward, h, inputs, false, fwd);
  run_direction(l.backward, h, inputs, true, bwd);

  Vector pooled(2 * h, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < h; ++j) {
      pooled[j] += fwd[t].h[j];
      pooled[h + j] += bwd[t].h[j];
    }
  }
  for (double& x : pooled) x /= static_cast<double>(n);

  Vector out = l.projection_bias;
  gemv_add(l.projection, pooled, out);
  if (cache) {
    cache->fwd = std::move(fwd);
    cache->bwd = std::move(bwd);
    cache->pooled = std::move(pooled);
    cache->dropout_mask = std::move(mask);
  }
  return out;
}

Vector encode_avg(const TokenSeq& seq, const Matrix& table) {
  if (seq.ids.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot encode an empty token sequence");
  Vector out(table.cols, 0.0);
  for (auto id : seq.ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= table.rows)
      throw Error(ErrorCode::kInvalidArgument, "token id " + std::to_string(id) + " out of range");
    axpy(1.0, table.row(static_cast<std::size_t>(id)), out);
  }
  for (double& x : out) x /= static_cast<double>(seq.ids.size());
  return out;
}

Vector encode_lstm(const TokenSeq& seq, const EncoderParams& params) {
  if (params.kind != EncoderKind::kLstm) throw Error(ErrorCode::kShape, "encoder is not an LSTM");
  return encode(params, seq.ids);
}

void backward(const EncoderParams& params, const ForwardCache& cache, std::span<const double> upstream,
              EncoderParams& grads) {
  if (cache.kind != params.kind || grads.kind != params.kind || cache.ids.empty())
    throw Error(ErrorCode::kShape, "backward does not match the recorded forward pass");
  if (grads.embeddings.rows != params.embeddings.rows || grads.embeddings.cols != params.embeddings.cols)
    throw Error(ErrorCode::kShape, "gradient buffer shape mismatch");
  if (upstream.size() != params.output_dim())
    throw Error(ErrorCode::kShape, "upstream gradient has wrong dimension");

  const std::size_t n = cache.ids.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  if (params.kind == EncoderKind::kAvg) {
    for (auto id : cache.ids) axpy(inv_n, upstream, grads.embeddings.row(static_cast<std::size_t>(id)));
    return;
  }

  if (!params.lstm || !grads.lstm || cache.fwd.size() != n || cache.bwd.size() != n)
    throw Error(ErrorCode::kShape, "backward does not match the recorded forward pass");
  const LstmParams& l = *params.lstm;
  LstmParams& gl = *grads.lstm;
  const std::size_t h = l.hidden;
  const std::size_t d = params.embedding_dim();

  ger_add(gl.projection, upstream, cache.pooled);
  axpy(1.0, upstream, gl.projection_bias);
  Vector d_pooled(2 * h, 0.0);
  gemv_t_add(l.projection, upstream, d_pooled);

  std::vector<Vector> dh_fwd(n, Vector(h)), dh_bwd(n, Vector(h));
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t j = 0; j < h; ++j) {
      dh_fwd[t][j] = d_pooled[j] * inv_n;
      dh_bwd[t][j] = d_pooled[h + j] * inv_n;
    }

  std::vector<Vector> dx(n, Vector(d, 0.0));
  backprop_direction(l.forward, h, cache.fwd, dh_fwd, false, gl.forward, dx);
  backprop_direction(l.backward, h, cache.bwd, dh_bwd, true, gl.backward, dx);

  for (std::size_t t = 0; t < n; ++t) {
    if (!cache.dropout_mask.empty())
      for (std::size_t k = 0; k < d; ++k) dx[t][k] *= cache.dropout_mask[t * d + k];
    axpy(1.0, dx[t], grads.embeddings.row(static_cast<std::size_t>(cache.ids[t])));
  }
}

Vector l2_normalize(std::span<const double> v) {
  const double n = norm2(v);
  if (!(n > 0.0)) throw Error(ErrorCode::kNumeric, "cannot normalize a zero vector");
  Vector out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return out;
}

Vector l2_normalize_backward(std::span<const double> normalized, double norm,
                             std::span<const double> upstream) {
  const double proj = dot(normalized, upstream);
  Vector out(upstream.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (upstream[i] - normalized[i] * proj) / norm;
  return out;
}

std::size_t import_embeddings(std::string_view text, const BpeVocab& vocab, Matrix& table) {
  if (table.rows != vocab.size())
    throw Error(ErrorCode::kShape, "embedding table rows do not match vocab size");
  const auto ls = io::lines(text);
  std::size_t first = 0;
  while (first < ls.size() && io::trim(ls[first]).empty()) ++first;
  if (first == ls.size()) return 0;

  auto header = io::fields(ls[first]);
  if (header.size() != 2)
    throw Error(ErrorCode::kParse, "embeddings line " + std::to_string(first + 1) + ": expected '<count> <dim>'");
  long long count = 0, dim = 0;
  try {
    count = parse_int(header[0]);
    dim = parse_int(header[1]);
  } catch (const Error&) {
    throw Error(ErrorCode::kParse, "embeddings line " + std::to_string(first + 1) + ": malformed header");
  }
  if (dim != static_cast<long long>(table.cols))
    throw Error(ErrorCode::kShape, "embedding file dimension " + std::to_string(dim) +
                                       " does not match model dimension " + std::to_string(table.cols));

  std::size_t matched = 0, rows = 0;
  Vector values(table.cols);
  for (std::size_t i = first + 1; i < ls.size(); ++i) {
    if (io::trim(ls[i]).empty()) continue;
    auto f = io::fields(ls[i]);
    if (f.size() != table.cols + 1)
      throw Error(ErrorCode::kParse, "embeddings line " + std::to_string(i + 1) + ": expected token and " +
                                         std::to_string(table.cols) + " values");
    try {
      for (std::size_t k = 0; k < table.cols; ++k) values[k] = parse_double(f[k + 1]);
    } catch (const Error&) {
      throw Error(ErrorCode::kParse, "embeddings line " + std::to_string(i + 1) + ": malformed value");
    }
    ++rows;
    const auto id = vocab.id(f[0]);
    if (id < 0) continue;
    std::copy(values.begin(), values.end(), table.row(static_cast<std::size_t>(id)).begin());
    ++matched;
  }
  if (static_cast<long long>(rows) != count)
    throw Error(ErrorCode::kParse, "embeddings header declares " + std::to_string(count) + " rows, found " +
                                       std::to_string(rows));
  return matched;
}

std::string export_embeddings(const Matrix& table, const BpeVocab& vocab) {
  if (table.rows != vocab.size())
    throw Error(ErrorCode::kShape, "embedding table rows do not match vocab size");
  std::string out = std::to_string(table.rows) + " " + std::to_string(table.cols) + "\n";
  for (std::size_t r = 0; r < table.rows; ++r) {
    out += vocab.token(static_cast<std::int32_t>(r));
    for (double x : table.row(r)) {
      out.push_back(' ');
      out += format_exact(x);
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace varclr
