// vnet/train.h

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

#ifndef VNET_TRAIN_H_
#define VNET_TRAIN_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vnet/am.h"
#include "vnet/loss.h"

namespace vnet {

struct TrainConfig {
  double lr = 0.0001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon_adam = 1e-8;
  int batch_size = 16;
  int epochs = 20;
  double lambda = 0.01;          // KL regularization weight
  double acoustic_scale = 0.07;
  TrainMode mode = TrainMode::kE2e;
  uint64_t seed = 0;
  int threads = 1;
};

struct DatasetEntry {
  std::string utt;
  std::string path;   // feature or posterior matrix file
  int label = 0;      // 0-based command id
};

// Manifest lines: utt-id <TAB> path <TAB> label-id. Relative paths are
// resolved against the manifest's directory.
std::vector<DatasetEntry> LoadManifest(const std::string &path);

// Adam with bias correction. Dense state covers the AM parameters; sparse
// state keeps per-arc moments and step counts, allocated lazily on first
// touch so memory stays proportional to the gradient support.
struct AdamState {
  struct Slot {
    double m = 0.0, v = 0.0;
    int64_t step = 0;
  };
  std::vector<Mat> m_w, v_w;                     // per AM weight matrix
  std::vector<std::vector<double>> m_b, v_b;     // per AM bias vector
  int64_t dense_step = 0;
  std::map<ArcId, Slot> sparse;                  // per touched V entry
};

// One scalar Adam update; step must already be advanced to >= 1.
double AdamUpdate(double grad, double *m, double *v, int64_t step,
                  const TrainConfig &cfg);

void AdamStepDense(AmModel *am, const AmGrads &grads, AdamState *state,
                   const TrainConfig &cfg);
void AdamStepSparse(CompiledGraph *g, const std::map<ArcId, double> &d_logv,
                    AdamState *state, const TrainConfig &cfg);

struct EpochMetrics {
  int epoch = 0;
  double mean_loss = 0.0;
  double accuracy = 0.0;
  int64_t wall_ms = 0;
  int skipped = 0;
};

// Everything one utterance contributes at its current parameters.
struct UttResult {
  bool skipped = false;        // no complete path for the label
  double loss = 0.0;           // classification + KL penalty
  bool correct = false;        // argmax(pooled) == label
  GradientBundle bundle;
  AmGrads am_grads;            // empty when the AM is frozen or absent
};

// Forward + loss + gradients for one utterance. `am` may be null
// (posterior-mode); `logp_org` is the original model's log posteriors for
// the KL term and may be empty when KL is inactive.
UttResult ComputeUtterance(const CompiledGraph &g, const AmModel *am,
                           const Mat &input, const Mat &logp_org, int label,
                           const TrainConfig &cfg, bool want_gradients);

struct TrainResult {
  std::vector<EpochMetrics> metrics;
  int total_skipped = 0;
};

// Minibatch Adam loop. Per epoch: Fisher-Yates shuffle seeded by the run
// seed, per-utterance computation (data-parallel), gradient merge in
// dataset order, one Adam step per batch. Writes epoch-N.vng / epoch-N.am
// checkpoints plus final.* and a metrics log under out_dir. Utterances with
// no complete path are skipped with a warning; a batch with every utterance
// skipped or a non-finite loss aborts with ValidationError.
TrainResult TrainLoop(CompiledGraph *g, AmModel *am,
                      const std::vector<DatasetEntry> &data,
                      const TrainConfig &cfg, const std::string &out_dir);

std::string FormatMetricsLine(const EpochMetrics &m);

}  // namespace vnet

#endif  // VNET_TRAIN_H_
