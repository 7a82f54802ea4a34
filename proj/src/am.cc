// vnet/am.cc

// Copyright 2026  The vnet Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "vnet/am.h"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace vnet {

namespace {

void CheckConfig(const AmConfig &cfg) {
  if (cfg.input_dim < 1 || cfg.splice_left < 0 || cfg.splice_right < 0 ||
      cfg.hidden_layers < 0 || cfg.pdim < 1 ||
      (cfg.hidden_layers > 0 && cfg.hidden_units < 1))
    throw ValidationError("bad acoustic model config");
}

}  // namespace

AmModel InitAm(const AmConfig &cfg, uint64_t seed) {
  CheckConfig(cfg);
  AmModel m;
  m.cfg = cfg;
  Rng rng(seed ^ 0x616d5f696e6974ULL);
  int in = cfg.SplicedDim();
  for (int l = 0; l <= cfg.hidden_layers; ++l) {
    int out = l == cfg.hidden_layers ? cfg.pdim : cfg.hidden_units;
    Mat w(out, in);
    double bound = std::sqrt(6.0 / (in + out));
    for (double &v : w.data) v = rng.Uniform(-bound, bound);
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(out, 0.0);
    in = out;
  }
  return m;
}

Mat Splice(const Mat &features, int left, int right) {
  if (features.rows < 1) throw ValidationError("cannot splice an empty matrix");
  const int T = features.rows;
  const int D = features.cols;
  const int win = left + right + 1;
  Mat out(T, D * win);
  for (int t = 0; t < T; ++t) {
    double *row = out.Row(t);
    for (int k = -left; k <= right; ++k) {
      int src = std::clamp(t + k, 0, T - 1);
      std::memcpy(row + (k + left) * D, features.Row(src),
                  sizeof(double) * D);
    }
  }
  return out;
}

Mat AmForward(const AmModel &m, const Mat &spliced, AmCache *cache) {
  if (spliced.cols != m.cfg.SplicedDim())
    throw ValidationError("spliced input dim " + std::to_string(spliced.cols) +
                          " does not match model " +
                          std::to_string(m.cfg.SplicedDim()));
  const int T = spliced.rows;
  AmCache local;
  AmCache *c = cache ? cache : &local;
  c->post_act.clear();
  c->post_act.push_back(spliced);

  Mat cur = spliced;
  for (int l = 0; l < m.NumLayers(); ++l) {
    const Mat &w = m.weights[l];
    const std::vector<double> &b = m.biases[l];
    Mat next(T, w.rows);
#pragma omp parallel for schedule(static) if (T >= 64)
    for (int t = 0; t < T; ++t) {
      const double *in = cur.Row(t);
      double *out = next.Row(t);
      for (int o = 0; o < w.rows; ++o) {
        double acc = b[o];
        const double *wrow = w.Row(o);
        for (int i = 0; i < w.cols; ++i) acc += wrow[i] * in[i];
        out[o] = acc;
      }
    }
    if (l < m.NumLayers() - 1) {
      for (double &v : next.data) v = v > 0.0 ? v : 0.0;  // ReLU
      c->post_act.push_back(next);
      cur = std::move(next);
    } else {
      c->logits = std::move(next);
    }
  }

  const int P = m.cfg.pdim;
  c->log_post = Mat(T, P);
  for (int t = 0; t < T; ++t) {
    const double *z = c->logits.Row(t);
    double *out = c->log_post.Row(t);
    double max = z[0];
    for (int j = 1; j < P; ++j) max = std::max(max, z[j]);
    double sum = 0.0;
    for (int j = 0; j < P; ++j) sum += std::exp(z[j] - max);
    double log_denom = max + std::log(sum);
    for (int j = 0; j < P; ++j) out[j] = z[j] - log_denom;
  }
  return c->log_post;
}

Mat LogitGradFromLogPostGrad(const Mat &log_post, const Mat &d_logpost) {
  if (!log_post.SameShape(d_logpost))
    throw ValidationError("log-posterior gradient shape mismatch");
  Mat d_logits(log_post.rows, log_post.cols);
  for (int t = 0; t < log_post.rows; ++t) {
    const double *lp = log_post.Row(t);
    const double *d = d_logpost.Row(t);
    double *out = d_logits.Row(t);
    double total = 0.0;
    for (int j = 0; j < log_post.cols; ++j) total += d[j];
    for (int j = 0; j < log_post.cols; ++j)
      out[j] = d[j] - std::exp(lp[j]) * total;
  }
  return d_logits;
}

AmGrads ZeroAmGrads(const AmModel &m) {
  AmGrads g;
  for (int l = 0; l < m.NumLayers(); ++l) {
    g.d_weights.emplace_back(m.weights[l].rows, m.weights[l].cols, 0.0);
    g.d_biases.emplace_back(m.biases[l].size(), 0.0);
  }
  return g;
}

AmGrads AmBackward(const AmModel &m, const AmCache &cache,
                   const Mat &d_logits) {
  const int T = d_logits.rows;
  AmGrads g = ZeroAmGrads(m);
  Mat delta = d_logits;  // gradient w.r.t. current layer's pre-activation
  for (int l = m.NumLayers() - 1; l >= 0; --l) {
    const Mat &w = m.weights[l];
    const Mat &input = cache.post_act[l];
    Mat &dw = g.d_weights[l];
    std::vector<double> &db = g.d_biases[l];
#pragma omp parallel for schedule(static) if (w.rows >= 64)
    for (int o = 0; o < w.rows; ++o) {
      double *dwrow = dw.Row(o);
      double acc_b = 0.0;
      for (int t = 0; t < T; ++t) {
        double d = delta(t, o);
        if (d == 0.0) continue;
        acc_b += d;
        const double *in = input.Row(t);
        for (int i = 0; i < w.cols; ++i) dwrow[i] += d * in[i];
      }
      db[o] = acc_b;
    }
    if (l == 0) break;
    Mat prev_delta(T, w.cols, 0.0);
#pragma omp parallel for schedule(static) if (T >= 64)
    for (int t = 0; t < T; ++t) {
      const double *d = delta.Row(t);
      const double *act = input.Row(t);
      double *out = prev_delta.Row(t);
      for (int o = 0; o < w.rows; ++o) {
        if (d[o] == 0.0) continue;
        const double *wrow = w.Row(o);
        for (int i = 0; i < w.cols; ++i) out[i] += d[o] * wrow[i];
      }
      for (int i = 0; i < w.cols; ++i)
        if (act[i] <= 0.0) out[i] = 0.0;  // ReLU mask
    }
    delta = std::move(prev_delta);
  }
  return g;
}

void AccumulateAmGrads(AmGrads *acc, const AmGrads &g) {
  VNET_ASSERT(acc->d_weights.size() == g.d_weights.size());
  for (size_t l = 0; l < g.d_weights.size(); ++l) {
    for (size_t i = 0; i < g.d_weights[l].data.size(); ++i)
      acc->d_weights[l].data[i] += g.d_weights[l].data[i];
    for (size_t i = 0; i < g.d_biases[l].size(); ++i)
      acc->d_biases[l][i] += g.d_biases[l][i];
  }
}

void ScaleAmGrads(AmGrads *g, double factor) {
  for (auto &w : g->d_weights)
    for (double &v : w.data) v *= factor;
  for (auto &b : g->d_biases)
    for (double &v : b) v *= factor;
}

namespace {

constexpr char kAmMagic[8] = {'V', 'A', 'M', '1', 0, 0, 0, 0};

void PutI32(std::string *out, int32_t v) {
  out->append(reinterpret_cast<const char *>(&v), 4);
}

void PutF64(std::string *out, const double *v, size_t n) {
  out->append(reinterpret_cast<const char *>(v), 8 * n);
}

int32_t GetI32(const std::string &in, size_t *pos) {
  if (*pos + 4 > in.size()) throw ParseError("truncated model checkpoint");
  int32_t v;
  std::memcpy(&v, in.data() + *pos, 4);
  *pos += 4;
  return v;
}

void GetF64(const std::string &in, size_t *pos, double *v, size_t n) {
  if (*pos + 8 * n > in.size()) throw ParseError("truncated model checkpoint");
  std::memcpy(v, in.data() + *pos, 8 * n);
  *pos += 8 * n;
}

}  // namespace

std::string SerializeAm(const AmModel &m) {
  std::string out(kAmMagic, 8);
  PutI32(&out, m.cfg.input_dim);
  PutI32(&out, m.cfg.splice_left);
  PutI32(&out, m.cfg.splice_right);
  PutI32(&out, m.cfg.hidden_layers);
  PutI32(&out, m.cfg.hidden_units);
  PutI32(&out, m.cfg.pdim);
  for (int l = 0; l < m.NumLayers(); ++l) {
    PutF64(&out, m.weights[l].data.data(), m.weights[l].data.size());
    PutF64(&out, m.biases[l].data(), m.biases[l].size());
  }
  return out;
}

AmModel ParseAm(const std::string &bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kAmMagic, 8) != 0)
    throw ParseError("not a model checkpoint (bad magic)");
  size_t pos = 8;
  AmConfig cfg;
  cfg.input_dim = GetI32(bytes, &pos);
  cfg.splice_left = GetI32(bytes, &pos);
  cfg.splice_right = GetI32(bytes, &pos);
  cfg.hidden_layers = GetI32(bytes, &pos);
  cfg.hidden_units = GetI32(bytes, &pos);
  cfg.pdim = GetI32(bytes, &pos);
  CheckConfig(cfg);

  AmModel m;
  m.cfg = cfg;
  int in = cfg.SplicedDim();
  for (int l = 0; l <= cfg.hidden_layers; ++l) {
    int out = l == cfg.hidden_layers ? cfg.pdim : cfg.hidden_units;
    Mat w(out, in);
    GetF64(bytes, &pos, w.data.data(), w.data.size());
    std::vector<double> b(out);
    GetF64(bytes, &pos, b.data(), b.size());
    m.weights.push_back(std::move(w));
    m.biases.push_back(std::move(b));
    in = out;
  }
  if (pos != bytes.size())
    throw ParseError("trailing bytes in model checkpoint");
  return m;
}

void SaveAm(const AmModel &m, const std::string &path) {
  WriteStringToFile(path, SerializeAm(m));
}

AmModel LoadAm(const std::string &path) {
  try {
    return ParseAm(ReadFileToString(path));
  } catch (const ParseError &e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace vnet
