// vnet/loss.h

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

#ifndef VNET_LOSS_H_
#define VNET_LOSS_H_

#include <map>
#include <utility>
#include <vector>

#include "vnet/trellis.h"

namespace vnet {

enum class TrainMode {
  kAmOnly,    // update acoustic model only
  kWfstOnly,  // update transition weights only
  kE2e,       // update both jointly
};

// Per-utterance gradients. d_logv is sparse over V entries; d_logpost is the
// dense gradient on unscaled log posteriors; d_kl is the regularizer's
// gradient on AM logits.
struct GradientBundle {
  std::map<ArcId, double> d_logv;
  Mat d_logpost;  // T x P
  Mat d_kl;       // T x P, empty unless KL is active
  double loss_value = 0.0;
};

// Softmax cross-entropy of the pooled log scores against the reference
// command. Returns the loss and dl[u] = softmax(pooled)[u] - 1[u = label].
// Throws NoPathError when pooled[label] is log 0 (utterance has no complete
// path emitting the label).
std::pair<double, std::vector<double>> ClassificationLoss(
    const OutputScores &scores, int label);

// Spreads dl along the winner transitions: for each command with a nonzero
// dl, the winning arc, the best prefix to its source and the best suffix
// from its destination each receive dl on their arc log-weights, and every
// crossed source state's pdf receives dl * scale at its frame. Final
// weights are constants and receive nothing. AM-only masks d_logv;
// WFST-only masks d_logpost.
GradientBundle RouteGradients(const CompiledGraph &g, const Trellis &tr,
                              const OutputScores &scores,
                              const std::vector<double> &dl, TrainMode mode,
                              double scale);

// penalty = lambda * sum_t KL(exp(logp_org[t]) || exp(logp[t])), with the
// gradient taken w.r.t. the adapted model's pre-softmax logits:
// d_logits[t][p] = lambda * (exp(logp[t][p]) - exp(logp_org[t][p])).
std::pair<double, Mat> KlRegularizer(const Mat &logp_org, const Mat &logp,
                                     double lambda);

}  // namespace vnet

#endif  // VNET_LOSS_H_
