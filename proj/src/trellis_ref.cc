// vnet/trellis_ref.cc

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

// Serial reference kernels: one flat sweep over the arc list per frame, no
// CSR, no threading. These must stay bit-identical to the production
// kernels, backpointers included; the tests and the bench tool compare the
// two directly.

#include "vnet/trellis.h"

namespace vnet {

void ForwardRef(const CompiledGraph &g, const Mat &xs, Mat *alpha,
                std::vector<ArcId> *bp_fwd) {
  const int T = xs.rows;
  const int S = g.num_states;
  *alpha = Mat(T + 1, S, kLogZero);
  bp_fwd->assign(static_cast<size_t>(T) * S, -1);
  for (const auto &[s, w] : g.initial) (*alpha)(0, s) = w;

  for (int t = 1; t <= T; ++t) {
    const double *prev = alpha->Row(t - 1);
    const double *x = xs.Row(t - 1);
    double *cur = alpha->Row(t);
    ArcId *bp = bp_fwd->data() + static_cast<size_t>(t - 1) * S;
    for (ArcId id = 0; id < static_cast<ArcId>(g.arcs.size()); ++id) {
      const CompiledArc &a = g.arcs[id];
      if (IsLogZero(prev[a.src]) || IsLogZero(x[a.src])) continue;
      double cand = prev[a.src] + x[a.src] + a.log_weight;
      if (cand > cur[a.dst]) {
        cur[a.dst] = cand;
        bp[a.dst] = id;
      }
    }
  }
}

void BackwardRef(const CompiledGraph &g, const Mat &xs, Mat *beta,
                 std::vector<ArcId> *bp_bwd) {
  const int T = xs.rows;
  const int S = g.num_states;
  *beta = Mat(T + 1, S, kLogZero);
  bp_bwd->assign(static_cast<size_t>(T) * S, -1);
  for (StateId i = 0; i < S; ++i) (*beta)(T, i) = g.finals[i];

  std::vector<double> best(S);
  std::vector<ArcId> best_arc(S);
  for (int t = T - 1; t >= 0; --t) {
    const double *next = beta->Row(t + 1);
    const double *x = xs.Row(t);
    double *cur = beta->Row(t);
    ArcId *bp = bp_bwd->data() + static_cast<size_t>(t) * S;
    best.assign(S, kLogZero);
    best_arc.assign(S, -1);
    for (ArcId id = 0; id < static_cast<ArcId>(g.arcs.size()); ++id) {
      const CompiledArc &a = g.arcs[id];
      if (IsLogZero(next[a.dst])) continue;
      double cand = a.log_weight + next[a.dst];
      if (cand > best[a.src]) {
        best[a.src] = cand;
        best_arc[a.src] = id;
      }
    }
    for (StateId i = 0; i < S; ++i) {
      if (best_arc[i] >= 0 && !IsLogZero(x[i])) {
        cur[i] = x[i] + best[i];
        bp[i] = best_arc[i];
      }
    }
  }
}

OutputScores ComputeOutputScoresRef(const CompiledGraph &g, const Trellis &tr) {
  const int T = tr.xs.rows;
  const int C = g.num_commands;
  OutputScores out;
  out.y = Mat(T, C, kLogZero);
  out.pooled.assign(C, kLogZero);
  out.winners.assign(C, {});

  for (int t = 1; t <= T; ++t) {
    const double *arow = tr.alpha.Row(t - 1);
    const double *brow = tr.beta.Row(t);
    const double *x = tr.xs.Row(t - 1);
    for (ArcId id = 0; id < static_cast<ArcId>(g.arcs.size()); ++id) {
      const CompiledArc &a = g.arcs[id];
      if (a.olabel == 0) continue;
      if (IsLogZero(arow[a.src]) || IsLogZero(x[a.src]) ||
          IsLogZero(brow[a.dst]))
        continue;
      double cand = arow[a.src] + x[a.src] + a.log_weight + brow[a.dst];
      int u = a.olabel - 1;
      if (cand > out.y(t - 1, u)) out.y(t - 1, u) = cand;
      if (cand > out.pooled[u]) {
        out.pooled[u] = cand;
        out.winners[u].frame = t;
        out.winners[u].arc = id;
      }
    }
  }
  return out;
}

}  // namespace vnet
