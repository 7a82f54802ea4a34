// vnet/loss.cc

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

#include "vnet/loss.h"

#include <cmath>

namespace vnet {

std::pair<double, std::vector<double>> ClassificationLoss(
    const OutputScores &scores, int label) {
  const int C = static_cast<int>(scores.pooled.size());
  if (label < 0 || label >= C)
    throw ValidationError("label " + std::to_string(label) +
                          " out of range [0, " + std::to_string(C) + ")");
  if (IsLogZero(scores.pooled[label]))
    throw NoPathError("no complete path emits command " +
                      std::to_string(label));

  double max = kLogZero;
  for (double v : scores.pooled)
    if (!IsLogZero(v) && v > max) max = v;

  double denom = 0.0;
  std::vector<double> dl(C, 0.0);
  for (int u = 0; u < C; ++u)
    if (!IsLogZero(scores.pooled[u])) denom += std::exp(scores.pooled[u] - max);
  double log_denom = std::log(denom) + max;
  for (int u = 0; u < C; ++u)
    dl[u] = IsLogZero(scores.pooled[u])
                ? 0.0
                : std::exp(scores.pooled[u] - log_denom);
  double loss = log_denom - scores.pooled[label];
  dl[label] -= 1.0;
  return {loss, dl};
}

namespace {

// In log scale, every max-pool subgradient is a constant routed along the
// winner transitions: the arc itself, the best prefix to its source, the
// best suffix from its destination. Each crossed arc's log weight and each
// crossed source state's log posterior receive the same dl.
void RouteOne(const CompiledGraph &g, const Trellis &tr,
              const OutputScores::Winner &win, double dl, double scale,
              bool want_v, bool want_post, GradientBundle *out) {
  const int S = g.num_states;
  const int T = tr.xs.rows;
  VNET_ASSERT(win.arc >= 0 && win.frame >= 1 && win.frame <= T);

  auto add_v = [&](ArcId id) {
    if (want_v) out->d_logv[id] += dl;
  };
  auto add_post = [&](int frame, StateId src) {
    int pdf = g.state_pdf[src];
    VNET_ASSERT(pdf >= 0);
    if (want_post) out->d_logpost(frame - 1, pdf) += dl * scale;
  };

  const CompiledArc &warc = g.arcs[win.arc];
  add_v(win.arc);
  add_post(win.frame, warc.src);

  // Best prefix: alpha backpointers from (win.frame - 1, src) down to an
  // initial state.
  StateId st = warc.src;
  for (int t = win.frame - 1; t >= 1; --t) {
    ArcId id = tr.bp_fwd[static_cast<size_t>(t - 1) * S + st];
    VNET_ASSERT(id >= 0);
    const CompiledArc &a = g.arcs[id];
    add_v(id);
    add_post(t, a.src);
    st = a.src;
  }
  VNET_ASSERT(!IsLogZero(tr.alpha(0, st)));

  // Best suffix: beta backpointers from (win.frame, dst) up to a final
  // state; the final weight itself is a constant.
  st = warc.dst;
  for (int t = win.frame; t <= T - 1; ++t) {
    ArcId id = tr.bp_bwd[static_cast<size_t>(t) * S + st];
    VNET_ASSERT(id >= 0);
    const CompiledArc &a = g.arcs[id];
    add_post(t + 1, a.src);
    add_v(id);
    st = a.dst;
  }
  VNET_ASSERT(!IsLogZero(g.finals[st]));
}

}  // namespace

GradientBundle RouteGradients(const CompiledGraph &g, const Trellis &tr,
                              const OutputScores &scores,
                              const std::vector<double> &dl, TrainMode mode,
                              double scale) {
  GradientBundle out;
  out.d_logpost = Mat(tr.xs.rows, g.pdim, 0.0);
  bool want_v = mode != TrainMode::kAmOnly;
  bool want_post = mode != TrainMode::kWfstOnly;
  for (int u = 0; u < static_cast<int>(dl.size()); ++u) {
    if (dl[u] == 0.0) continue;
    VNET_ASSERT(!IsLogZero(scores.pooled[u]));
    RouteOne(g, tr, scores.winners[u], dl[u], scale, want_v, want_post, &out);
  }
  return out;
}

std::pair<double, Mat> KlRegularizer(const Mat &logp_org, const Mat &logp,
                                     double lambda) {
  if (!logp_org.SameShape(logp))
    throw ValidationError("KL regularizer shape mismatch");
  double penalty = 0.0;
  Mat d_logits(logp.rows, logp.cols, 0.0);
  if (lambda == 0.0) return {penalty, d_logits};
  for (int t = 0; t < logp.rows; ++t) {
    for (int j = 0; j < logp.cols; ++j) {
      double po = IsLogZero(logp_org(t, j)) ? 0.0 : std::exp(logp_org(t, j));
      double p = IsLogZero(logp(t, j)) ? 0.0 : std::exp(logp(t, j));
      if (po > 0.0) penalty += po * (logp_org(t, j) - logp(t, j));
      d_logits(t, j) = lambda * (p - po);
    }
  }
  return {lambda * penalty, d_logits};
}

}  // namespace vnet
