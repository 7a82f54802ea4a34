// vnet/decode.cc

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

#include "vnet/decode.h"

#include <algorithm>
#include <cmath>

namespace vnet {

namespace {

// Token histories live in an arena; nodes record the olabel emitted on the
// arc (0 for none) and, for emitting arcs, the source state as the
// alignment entry for that frame.
struct HistNode {
  int parent = -1;
  Label olabel = 0;
  StateId align_state = -1;  // -1 for epsilon traversals
};

struct TokenLattice {
  std::vector<HistNode> arena;

  int Push(int parent, Label olabel, StateId align_state) {
    arena.push_back({parent, olabel, align_state});
    return static_cast<int>(arena.size()) - 1;
  }
};

// Per-frame epsilon closure: bounded relaxation over ilabel-0 arcs in arc
// order. Strict improvement keeps it deterministic and terminates positive
// cycles at num_states passes.
void EpsilonClosure(const Wfst &w, const std::vector<const Arc *> &eps_arcs,
                    TokenLattice *lat, std::vector<double> *score,
                    std::vector<int> *hist) {
  if (eps_arcs.empty()) return;
  for (int pass = 0; pass < w.num_states; ++pass) {
    bool changed = false;
    for (const Arc *a : eps_arcs) {
      double s = (*score)[a->src];
      if (IsLogZero(s)) continue;
      double cand = s + a->log_weight;
      if (cand > (*score)[a->dst]) {
        (*score)[a->dst] = cand;
        (*hist)[a->dst] = a->olabel == 0
                              ? (*hist)[a->src]
                              : lat->Push((*hist)[a->src], a->olabel, -1);
        changed = true;
      }
    }
    if (!changed) break;
  }
}

}  // namespace

Hypothesis ViterbiDecode(const Wfst &w, const TransitionTable &tt,
                         const Mat &log_post, const DecodeConfig &cfg) {
  Validate(w);
  if (!(cfg.beam > 0.0))
    throw ValidationError("beam must be > 0");
  const int T = log_post.rows;
  const int S = w.num_states;

  std::vector<const Arc *> eps_arcs;
  std::vector<const Arc *> emit_arcs;
  for (const Arc &a : w.arcs)
    (a.ilabel == 0 ? eps_arcs : emit_arcs).push_back(&a);

  TokenLattice lat;
  std::vector<double> score(S, kLogZero), next_score(S);
  std::vector<int> hist(S, -1), next_hist(S);
  score[w.start] = 0.0;
  EpsilonClosure(w, eps_arcs, &lat, &score, &hist);

  for (int t = 0; t < T; ++t) {
    double best = kLogZero;
    for (double s : score)
      if (s > best) best = s;
    if (IsLogZero(best)) break;
    double threshold = cfg.beam >= kInfiniteBeam ? kLogZero : best - cfg.beam;

    next_score.assign(S, kLogZero);
    next_hist.assign(S, -1);
    const double *row = log_post.Row(t);
    for (const Arc *a : emit_arcs) {
      double s = score[a->src];
      if (IsLogZero(s) || s < threshold) continue;
      double lp = row[tt.Pdf(a->ilabel)];
      if (IsLogZero(lp)) continue;
      double cand = s + cfg.acoustic_scale * lp + a->log_weight;
      if (cand > next_score[a->dst]) {
        next_score[a->dst] = cand;
        next_hist[a->dst] = lat.Push(hist[a->src], a->olabel, a->src);
      }
    }
    score.swap(next_score);
    hist.swap(next_hist);
    EpsilonClosure(w, eps_arcs, &lat, &score, &hist);
  }

  Hypothesis hyp;
  StateId best_state = -1;
  for (StateId s = 0; s < S; ++s) {
    if (IsLogZero(score[s]) || !w.IsFinal(s)) continue;
    double total = score[s] + w.FinalLog(s);
    if (total > hyp.score) {
      hyp.score = total;
      best_state = s;
    }
  }
  if (best_state < 0) {
    hyp.score = kLogZero;
    return hyp;
  }

  hyp.found = true;
  std::vector<Label> rev_olabels;
  std::vector<StateId> rev_align;
  for (int node = hist[best_state]; node >= 0; node = lat.arena[node].parent) {
    if (lat.arena[node].olabel != 0)
      rev_olabels.push_back(lat.arena[node].olabel);
    if (lat.arena[node].align_state >= 0)
      rev_align.push_back(lat.arena[node].align_state);
  }
  hyp.olabels.assign(rev_olabels.rbegin(), rev_olabels.rend());
  hyp.alignment.assign(rev_align.rbegin(), rev_align.rend());
  VNET_ASSERT(static_cast<int>(hyp.alignment.size()) == T);
  return hyp;
}

SerResult ScoreSer(const std::vector<Hypothesis> &hyps,
                   const std::vector<int> &refs) {
  if (hyps.size() != refs.size())
    throw ValidationError("hypothesis/reference count mismatch");
  SerResult r;
  r.total = static_cast<int>(hyps.size());
  for (size_t k = 0; k < hyps.size(); ++k) {
    bool correct = hyps[k].found && hyps[k].olabels.size() == 1 &&
                   hyps[k].olabels[0] == refs[k] + 1;
    if (!correct) ++r.errors;
  }
  r.ser = r.total == 0 ? 0.0 : static_cast<double>(r.errors) / r.total;
  return r;
}

}  // namespace vnet
