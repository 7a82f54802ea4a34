// vnet/decode.h

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

#ifndef VNET_DECODE_H_
#define VNET_DECODE_H_

#include <vector>

#include "vnet/compile.h"
#include "vnet/trellis.h"
#include "vnet/wfst.h"

namespace vnet {

struct DecodeConfig {
  double beam = 7.0;            // log-score margin for per-frame pruning
  double acoustic_scale = 0.07;
};

constexpr double kInfiniteBeam = 1.0e18;

struct Hypothesis {
  bool found = false;
  std::vector<Label> olabels;      // epsilon olabels stripped
  double score = kLogZero;
  std::vector<StateId> alignment;  // source state of the arc at each frame
};

// Token-passing Viterbi over the full Wfst, including surviving epsilon
// arcs, which are traversed within a frame by a bounded epsilon closure of
// the active tokens (at most S relaxation passes). Emissions are consumed
// at arc traversal using tt[ilabel], scaled by cfg.acoustic_scale. Tokens
// worse than best-in-frame minus cfg.beam are dropped. Ties go to the
// lowest arc.
Hypothesis ViterbiDecode(const Wfst &w, const TransitionTable &tt,
                         const Mat &log_post, const DecodeConfig &cfg);

struct SerResult {
  double ser = 0.0;
  int errors = 0;
  int total = 0;
};

// Sentence error rate: a hypothesis is correct iff its stripped olabel
// sequence is exactly {ref_command + 1}; a no-path result counts as an
// error. Reference labels are 0-based command ids.
SerResult ScoreSer(const std::vector<Hypothesis> &hyps,
                   const std::vector<int> &refs);

}  // namespace vnet

#endif  // VNET_DECODE_H_
