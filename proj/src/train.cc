// vnet/train.cc

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

#include "vnet/train.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "vnet/decode.h"

namespace vnet {

std::vector<DatasetEntry> LoadManifest(const std::string &path) {
  std::string text = ReadFileToString(path);
  std::filesystem::path base = std::filesystem::path(path).parent_path();
  std::vector<DatasetEntry> out;
  size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string line = nl == std::string::npos ? text.substr(pos)
                                               : text.substr(pos, nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t tab1 = line.find('\t');
    size_t tab2 = tab1 == std::string::npos ? std::string::npos
                                            : line.find('\t', tab1 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos)
      throw ParseError(path + " line " + std::to_string(line_no) +
                       ": expected `utt<TAB>path<TAB>label`");
    DatasetEntry e;
    e.utt = line.substr(0, tab1);
    e.path = line.substr(tab1 + 1, tab2 - tab1 - 1);
    e.label = static_cast<int>(ParseIntStrict(
        line.substr(tab2 + 1), path + " line " + std::to_string(line_no)));
    if (e.label < 0)
      throw ParseError(path + " line " + std::to_string(line_no) +
                       ": negative label");
    std::filesystem::path p(e.path);
    if (p.is_relative()) e.path = (base / p).string();
    out.push_back(std::move(e));
  }
  return out;
}

double AdamUpdate(double grad, double *m, double *v, int64_t step,
                  const TrainConfig &cfg) {
  *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * grad;
  *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * grad * grad;
  double m_hat = *m / (1.0 - std::pow(cfg.beta1, static_cast<double>(step)));
  double v_hat = *v / (1.0 - std::pow(cfg.beta2, static_cast<double>(step)));
  return -cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon_adam);
}

void AdamStepDense(AmModel *am, const AmGrads &grads, AdamState *state,
                   const TrainConfig &cfg) {
  if (state->m_w.empty()) {
    for (int l = 0; l < am->NumLayers(); ++l) {
      state->m_w.emplace_back(am->weights[l].rows, am->weights[l].cols, 0.0);
      state->v_w.emplace_back(am->weights[l].rows, am->weights[l].cols, 0.0);
      state->m_b.emplace_back(am->biases[l].size(), 0.0);
      state->v_b.emplace_back(am->biases[l].size(), 0.0);
    }
  }
  int64_t step = ++state->dense_step;
  for (int l = 0; l < am->NumLayers(); ++l) {
    for (size_t i = 0; i < am->weights[l].data.size(); ++i)
      am->weights[l].data[i] +=
          AdamUpdate(grads.d_weights[l].data[i], &state->m_w[l].data[i],
                     &state->v_w[l].data[i], step, cfg);
    for (size_t i = 0; i < am->biases[l].size(); ++i)
      am->biases[l][i] += AdamUpdate(grads.d_biases[l][i], &state->m_b[l][i],
                                     &state->v_b[l][i], step, cfg);
  }
}

void AdamStepSparse(CompiledGraph *g, const std::map<ArcId, double> &d_logv,
                    AdamState *state, const TrainConfig &cfg) {
  for (const auto &[arc, grad] : d_logv) {
    VNET_ASSERT(arc >= 0 && arc < static_cast<ArcId>(g->arcs.size()));
    AdamState::Slot &slot = state->sparse[arc];
    ++slot.step;
    g->arcs[arc].log_weight +=
        AdamUpdate(grad, &slot.m, &slot.v, slot.step, cfg);
  }
}

UttResult ComputeUtterance(const CompiledGraph &g, const AmModel *am,
                           const Mat &input, const Mat &logp_org, int label,
                           const TrainConfig &cfg, bool want_gradients) {
  UttResult r;
  AmCache cache;
  Mat logp;
  if (am != nullptr) {
    Mat spliced = Splice(input, am->cfg.splice_left, am->cfg.splice_right);
    logp = AmForward(*am, spliced, &cache);
  } else {
    logp = input;
  }

  PosteriorSequence post;
  post.log_post = logp;
  post.scale = cfg.acoustic_scale;
  Trellis tr = RunTrellis(g, post);
  OutputScores scores = ComputeOutputScores(g, tr);

  int argmax = 0;
  for (int u = 1; u < static_cast<int>(scores.pooled.size()); ++u)
    if (scores.pooled[u] > scores.pooled[argmax]) argmax = u;
  r.correct = argmax == label;

  std::vector<double> dl;
  try {
    auto [ce, grad] = ClassificationLoss(scores, label);
    r.loss = ce;
    dl = std::move(grad);
  } catch (const NoPathError &) {
    r.skipped = true;
    return r;
  }

  bool am_trainable = am != nullptr && cfg.mode != TrainMode::kWfstOnly;
  bool kl_active = am_trainable && cfg.lambda > 0.0 && logp_org.rows > 0;
  Mat d_kl;
  if (kl_active) {
    auto [penalty, dk] = KlRegularizer(logp_org, logp, cfg.lambda);
    r.loss += penalty;
    d_kl = std::move(dk);
  }

  if (!want_gradients) return r;

  r.bundle = RouteGradients(g, tr, scores, dl, cfg.mode, cfg.acoustic_scale);
  r.bundle.loss_value = r.loss;
  if (kl_active) r.bundle.d_kl = d_kl;

  if (am_trainable) {
    Mat d_logits = LogitGradFromLogPostGrad(logp, r.bundle.d_logpost);
    if (kl_active)
      for (size_t i = 0; i < d_logits.data.size(); ++i)
        d_logits.data[i] += d_kl.data[i];
    r.am_grads = AmBackward(*am, cache, d_logits);
  }
  return r;
}

std::string FormatMetricsLine(const EpochMetrics &m) {
  return std::to_string(m.epoch) + " " + FormatDouble(m.mean_loss) + " " +
         FormatDouble(m.accuracy) + " " + std::to_string(m.wall_ms);
}

TrainResult TrainLoop(CompiledGraph *g, AmModel *am,
                      const std::vector<DatasetEntry> &data,
                      const TrainConfig &cfg, const std::string &out_dir) {
  if (data.empty()) throw ValidationError("training dataset is empty");
  if (am == nullptr && cfg.mode != TrainMode::kWfstOnly)
    throw ValidationError("modes that update the acoustic model need one");
  for (const DatasetEntry &e : data)
    if (e.label >= g->num_commands)
      throw ValidationError("utterance " + e.utt + " label " +
                            std::to_string(e.label) +
                            " out of range for C = " +
                            std::to_string(g->num_commands));
  std::filesystem::create_directories(out_dir);

  const int n = static_cast<int>(data.size());
  bool am_trainable = am != nullptr && cfg.mode != TrainMode::kWfstOnly;
  bool kl_active = am_trainable && cfg.lambda > 0.0;

  // Inputs are loaded once. With an AM they are raw features; otherwise
  // they are linear posterior files converted to log.
  std::vector<Mat> inputs(n);
  for (int i = 0; i < n; ++i) {
    Mat m = LoadMatrix(data[i].path);
    inputs[i] = am != nullptr ? std::move(m) : LinearToLogPosteriors(m);
  }

  // KL anchors: posteriors of the unadapted model, fixed for the whole run.
  std::vector<Mat> logp_org(n);
  if (kl_active) {
    const AmModel original = *am;
    for (int i = 0; i < n; ++i) {
      Mat spliced = Splice(inputs[i], original.cfg.splice_left,
                           original.cfg.splice_right);
      logp_org[i] = AmForward(original, spliced, nullptr);
    }
  }

  AdamState adam;
  Rng rng(cfg.seed ^ 0x747261696eULL);
  TrainResult result;

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[rng.UniformInt(i + 1)]);

    double loss_sum = 0.0;
    int effective = 0, correct = 0, skipped = 0;

    for (int begin = 0; begin < n; begin += cfg.batch_size) {
      int end = std::min(n, begin + cfg.batch_size);
      int bsize = end - begin;
      std::vector<UttResult> results(bsize);

#pragma omp parallel for schedule(dynamic, 1) num_threads(cfg.threads)
      for (int b = 0; b < bsize; ++b) {
        int i = order[begin + b];
        results[b] = ComputeUtterance(*g, am, inputs[i],
                                      kl_active ? logp_org[i] : Mat(),
                                      data[i].label, cfg, true);
      }

      // Merge in batch order so the update is independent of thread timing.
      std::map<ArcId, double> d_logv;
      AmGrads am_grads;
      if (am_trainable) am_grads = ZeroAmGrads(*am);
      int batch_effective = 0;
      for (int b = 0; b < bsize; ++b) {
        UttResult &r = results[b];
        if (r.skipped) {
          ++skipped;
          std::fprintf(stderr, "WARNING: skipping %s: no complete path\n",
                       data[order[begin + b]].utt.c_str());
          continue;
        }
        ++batch_effective;
        loss_sum += r.loss;
        if (r.correct) ++correct;
        if (!std::isfinite(r.loss))
          throw ValidationError("non-finite loss; aborting");
        for (const auto &[arc, v] : r.bundle.d_logv) d_logv[arc] += v;
        if (am_trainable) AccumulateAmGrads(&am_grads, r.am_grads);
      }
      if (batch_effective == 0)
        throw ValidationError(
            "every utterance in a batch was skipped; check the graph and "
            "the transition table");
      effective += batch_effective;

      double inv = 1.0 / batch_effective;
      for (auto &[arc, v] : d_logv) v *= inv;
      if (am_trainable) ScaleAmGrads(&am_grads, inv);

      if (cfg.mode != TrainMode::kAmOnly && !d_logv.empty())
        AdamStepSparse(g, d_logv, &adam, cfg);
      if (am_trainable) AdamStepDense(am, am_grads, &adam, cfg);
    }

    auto t1 = std::chrono::steady_clock::now();
    EpochMetrics m;
    m.epoch = epoch;
    m.mean_loss = effective > 0 ? loss_sum / effective : 0.0;
    m.accuracy = static_cast<double>(correct) / n;
    m.wall_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    m.skipped = skipped;
    result.metrics.push_back(m);
    result.total_skipped += skipped;

    std::string stem = out_dir + "/epoch-" + std::to_string(epoch);
    SaveGraph(*g, stem + ".vng");
    if (am != nullptr) SaveAm(*am, stem + ".am");
  }

  SaveGraph(*g, out_dir + "/final.vng");
  if (am != nullptr) SaveAm(*am, out_dir + "/final.am");
  std::string metrics_text;
  for (const EpochMetrics &m : result.metrics)
    metrics_text += FormatMetricsLine(m) + "\n";
  WriteStringToFile(out_dir + "/metrics.txt", metrics_text);
  return result;
}

}  // namespace vnet
