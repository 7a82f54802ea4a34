// vnet/am.h

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

#ifndef VNET_AM_H_
#define VNET_AM_H_

#include <string>
#include <vector>

#include "vnet/common.h"

namespace vnet {

// Feed-forward acoustic model: spliced features -> affine/ReLU hidden
// layers -> affine -> log-softmax posteriors.
struct AmConfig {
  int input_dim = 75;   // feature dimension before splicing
  int splice_left = 5;
  int splice_right = 5;
  int hidden_layers = 2;
  int hidden_units = 64;
  int pdim = 0;         // output pdfs

  int SplicedDim() const { return input_dim * (splice_left + splice_right + 1); }

  // Production-sized shape: five 640-unit layers over 11 spliced frames.
  static AmConfig FullScale(int pdim) {
    AmConfig cfg;
    cfg.hidden_layers = 5;
    cfg.hidden_units = 640;
    cfg.pdim = pdim;
    return cfg;
  }
};

struct AmModel {
  AmConfig cfg;
  // weights[l] is (out x in); hidden layers first, output layer last.
  std::vector<Mat> weights;
  std::vector<std::vector<double>> biases;

  int NumLayers() const { return static_cast<int>(weights.size()); }
};

// Glorot-uniform initialization, deterministic in the seed.
AmModel InitAm(const AmConfig &cfg, uint64_t seed);

// Frame t of the result concatenates frames t-L..t+R with edge replication.
Mat Splice(const Mat &features, int left, int right);

// Activations kept for the backward pass.
struct AmCache {
  std::vector<Mat> post_act;  // post_act[0] = spliced input, then ReLU outputs
  Mat logits;                 // T x P
  Mat log_post;               // T x P
};

// Returns T x P log posteriors; rows normalize to 1 in the linear domain.
Mat AmForward(const AmModel &m, const Mat &spliced, AmCache *cache);

// Maps a gradient w.r.t. log posteriors through the log-softmax to a
// gradient w.r.t. logits: d_logit[q] = d[q] - softmax[q] * sum_p d[p].
Mat LogitGradFromLogPostGrad(const Mat &log_post, const Mat &d_logpost);

struct AmGrads {
  std::vector<Mat> d_weights;
  std::vector<std::vector<double>> d_biases;
};

// Exact reverse-mode gradients of all parameters given logit gradients.
AmGrads AmBackward(const AmModel &m, const AmCache &cache, const Mat &d_logits);

void AccumulateAmGrads(AmGrads *acc, const AmGrads &g);
void ScaleAmGrads(AmGrads *g, double factor);
AmGrads ZeroAmGrads(const AmModel &m);

// Versioned binary checkpoint: header with the config, then row-major
// parameter blocks.
std::string SerializeAm(const AmModel &m);
AmModel ParseAm(const std::string &bytes);
void SaveAm(const AmModel &m, const std::string &path);
AmModel LoadAm(const std::string &path);

}  // namespace vnet

#endif  // VNET_AM_H_
