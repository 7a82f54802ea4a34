// vnet/oracle.h

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

#ifndef VNET_ORACLE_H_
#define VNET_ORACLE_H_

#include <functional>
#include <vector>

#include "vnet/compile.h"
#include "vnet/trellis.h"
#include "vnet/wfst.h"

namespace vnet {

// Brute-force references used by tests. Everything here enumerates paths
// explicitly and runs in exponential time; size guards throw
// ValidationError when exceeded.

struct PathRecord {
  std::vector<StateId> states;   // length T+1
  std::vector<ArcId> arcs;       // length T
  std::vector<Label> olabels;    // nonzero olabels in order
  double score = 0.0;            // emissions + arc weights + final weight
};

// Guards: S <= 10, T <= 7, arcs <= 40, and at most `max_paths` results.
constexpr int kOracleMaxStates = 10;
constexpr int kOracleMaxFrames = 7;
constexpr int kOracleMaxArcs = 40;
constexpr long kOracleMaxPaths = 2000000;

// Every complete path of exactly T transitions from the initial vector to a
// final state, scored with source-state emissions from xs.
std::vector<PathRecord> EnumeratePaths(const CompiledGraph &g, const Mat &xs,
                                       int num_frames);

// Helper queries derived from explicit path enumeration (prefixes and
// suffixes are enumerated independently of the complete-path list).
Mat OracleAlpha(const CompiledGraph &g, const Mat &xs, int num_frames);
Mat OracleBeta(const CompiledGraph &g, const Mat &xs, int num_frames);
Mat OracleOutputScores(const CompiledGraph &g, const Mat &xs, int num_frames);
std::vector<double> OraclePooled(const CompiledGraph &g, const Mat &xs,
                                 int num_frames);
double OracleBestScore(const CompiledGraph &g, const Mat &xs, int num_frames);

// Probability-domain recursions. Emissions/weights are exponentiated,
// combined with * and max in the linear domain, and the results are
// returned as probabilities. Usable only where underflow is absent.
Mat ProbDomainForward(const CompiledGraph &g, const Mat &xs);
Mat ProbDomainBackward(const CompiledGraph &g, const Mat &xs);
Mat ProbDomainOutputScores(const CompiledGraph &g, const Mat &alpha_lin,
                           const Mat &beta_lin, const Mat &xs);

// Complete paths over a raw Wfst with arc-attached emissions: the t-th
// non-epsilon arc consumes frame t via tt[ilabel]; epsilon arcs consume
// nothing and at most `S` of them may run back to back. With a zero
// emission matrix this enumerates structural (ilabel-seq, olabel-seq,
// weight) triples for transform-equivalence checks.
struct WfstPath {
  std::vector<Label> ilabels;  // non-epsilon inputs, length = frames used
  std::vector<Label> olabels;  // nonzero outputs in order
  double score = 0.0;
};
std::vector<WfstPath> EnumerateWfstPaths(const Wfst &w,
                                         const TransitionTable &tt,
                                         const Mat &scaled_log_post,
                                         int num_frames);

// Central differences (f(x+h) - f(x-h)) / 2h per coordinate.
std::vector<double> FiniteDiff(
    const std::function<double(const std::vector<double> &)> &f,
    const std::vector<double> &point, double h);

}  // namespace vnet

#endif  // VNET_ORACLE_H_
