// vnet/trellis.h

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

#ifndef VNET_TRELLIS_H_
#define VNET_TRELLIS_H_

#include <vector>

#include "vnet/compile.h"
#include "vnet/common.h"

namespace vnet {

// T x P log posteriors plus the acoustic scale that multiplies them when
// they are mapped onto states.
struct PosteriorSequence {
  Mat log_post;        // rows are frames 1..T
  double scale = 1.0;

  int NumFrames() const { return log_post.rows; }
};

// Loads a feature/posterior matrix file: first line `T D`, then T rows of D
// decimal values. With validate_posteriors, rows must be linear-domain
// posteriors summing to 1 within 1e-5; the returned matrix is their log.
Mat LoadMatrix(const std::string &path);
void SaveMatrix(const Mat &m, const std::string &path);
Mat LinearToLogPosteriors(const Mat &linear);  // validates row sums

// Max-semiring forward/backward state. Row t of alpha/beta is time t in
// [0, T]; row t of xs is frame t+1. Unreached entries hold kLogZero.
struct Trellis {
  Mat xs;     // T x S mapped log emissions
  Mat alpha;  // (T+1) x S
  Mat beta;   // (T+1) x S
  // bp_fwd[(t-1)*S + i]: arc that wins alpha[t][i], t in [1, T]; -1 if none.
  std::vector<ArcId> bp_fwd;
  // bp_bwd[t*S + i]: arc that wins beta[t][i], t in [0, T-1]; -1 if none.
  std::vector<ArcId> bp_bwd;
};

struct OutputScores {
  Mat y;                       // T x C; row t-1 is frame t
  std::vector<double> pooled;  // C; max over frames
  struct Winner {
    int frame = 0;             // t* in [1, T]
    ArcId arc = -1;
  };
  std::vector<Winner> winners; // per command; arc = -1 when pooled = log 0
};

// xs[t][i] = scale * log_post[t][e(i)] for emitting states, 0 for states
// with no emission pdf.
Mat MapEmissions(const CompiledGraph &g, const PosteriorSequence &p);

// alpha[t][dst] = max over arcs src->dst of
//     alpha[t-1][src] + xs[t][src] + log v(arc),
// alpha[0] = the compiled initial vector. Ties go to the lowest arc.
void Forward(const CompiledGraph &g, const Mat &xs, Mat *alpha,
             std::vector<ArcId> *bp_fwd);

// beta[T][i] = final log weight; beta[t][src] = xs[t+1][src] +
//     max over arcs src->dst of (log v(arc) + beta[t+1][dst]).
void Backward(const CompiledGraph &g, const Mat &xs, Mat *beta,
              std::vector<ArcId> *bp_bwd);

// y[t][u] = max over arcs a = src->dst with olabel u+1 of
//     alpha[t-1][src] + xs[t][src] + log v(a) + beta[t][dst],
// pooled[u] = max over t. Ties: lowest frame, then lowest arc.
OutputScores ComputeOutputScores(const CompiledGraph &g, const Trellis &tr);

// Best complete-path score: max_i alpha[T][i] + final[i].
double AlphaFinal(const CompiledGraph &g, const Mat &alpha);

// Runs map/forward/backward in one go.
Trellis RunTrellis(const CompiledGraph &g, const PosteriorSequence &p);

// Serial reference kernels: same contracts and tie rules, implemented as
// plain per-frame sweeps over the arc list. Kept for tests and benches.
void ForwardRef(const CompiledGraph &g, const Mat &xs, Mat *alpha,
                std::vector<ArcId> *bp_fwd);
void BackwardRef(const CompiledGraph &g, const Mat &xs, Mat *beta,
                 std::vector<ArcId> *bp_bwd);
OutputScores ComputeOutputScoresRef(const CompiledGraph &g, const Trellis &tr);

}  // namespace vnet

#endif  // VNET_TRELLIS_H_
