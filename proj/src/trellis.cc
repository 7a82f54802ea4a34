// vnet/trellis.cc

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

// Forward/backward recursions are sequential in t (the recurrence is the
// whole point); within a frame every destination (forward) or source
// (backward) state reduces over its own arc bucket independently, which is
// where the OpenMP parallelism lives. Each state's reduction scans its
// bucket serially in ascending arc order, so results and backpointers are
// bit-identical at any thread count.

#include "vnet/trellis.h"

#include <cmath>
#include <sstream>

namespace vnet {

Mat LoadMatrix(const std::string &path) {
  std::string text = ReadFileToString(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty matrix file");
  std::vector<std::string> hdr = SplitFields(line);
  if (hdr.size() != 2) throw ParseError(path + ": first line must be `T D`");
  int64_t rows = ParseIntStrict(hdr[0], path);
  int64_t cols = ParseIntStrict(hdr[1], path);
  if (rows < 1 || cols < 1 || rows > 1000000 || cols > 1000000)
    throw ParseError(path + ": implausible matrix shape");
  Mat m(static_cast<int>(rows), static_cast<int>(cols));
  for (int t = 0; t < m.rows; ++t) {
    if (!std::getline(in, line))
      throw ParseError(path + ": missing row " + std::to_string(t + 1));
    std::vector<std::string> f = SplitFields(line);
    if (static_cast<int64_t>(f.size()) != cols)
      throw ParseError(path + ": row " + std::to_string(t + 1) + " has " +
                       std::to_string(f.size()) + " of " +
                       std::to_string(cols) + " values");
    for (int j = 0; j < m.cols; ++j)
      m(t, j) = ParseDoubleStrict(f[j], path + " row " + std::to_string(t + 1));
  }
  return m;
}

void SaveMatrix(const Mat &m, const std::string &path) {
  std::string out;
  out += std::to_string(m.rows) + " " + std::to_string(m.cols) + "\n";
  for (int t = 0; t < m.rows; ++t) {
    for (int j = 0; j < m.cols; ++j) {
      if (j) out += ' ';
      out += FormatDouble(m(t, j));
    }
    out += '\n';
  }
  WriteStringToFile(path, out);
}

Mat LinearToLogPosteriors(const Mat &linear) {
  Mat logp(linear.rows, linear.cols);
  for (int t = 0; t < linear.rows; ++t) {
    double sum = 0.0;
    for (int j = 0; j < linear.cols; ++j) {
      double p = linear(t, j);
      if (!(p >= 0.0) || !std::isfinite(p))
        throw ValidationError("posterior row " + std::to_string(t + 1) +
                              " has a negative or non-finite entry");
      sum += p;
      logp(t, j) = p > 0.0 ? std::log(p) : kLogZero;
    }
    if (std::abs(sum - 1.0) > 1e-5)
      throw ValidationError("posterior row " + std::to_string(t + 1) +
                            " sums to " + FormatDouble(sum) + ", not 1");
  }
  return logp;
}

Mat MapEmissions(const CompiledGraph &g, const PosteriorSequence &p) {
  if (p.log_post.cols != g.pdim)
    throw ValidationError("posterior dimension " +
                          std::to_string(p.log_post.cols) +
                          " does not match graph pdim " +
                          std::to_string(g.pdim));
  const int T = p.NumFrames();
  const int S = g.num_states;
  Mat xs(T, S, 0.0);
#pragma omp parallel for schedule(static) if (T >= 64)
  for (int t = 0; t < T; ++t) {
    const double *row = p.log_post.Row(t);
    double *out = xs.Row(t);
    for (StateId i = 0; i < S; ++i) {
      int pdf = g.state_pdf[i];
      if (pdf < 0) {
        out[i] = 0.0;  // log 1: non-emitting states never consume a frame
      } else {
        double lp = row[pdf];
        out[i] = IsLogZero(lp) ? kLogZero : p.scale * lp;
      }
    }
  }
  return xs;
}

void Forward(const CompiledGraph &g, const Mat &xs, Mat *alpha,
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
#pragma omp parallel for schedule(static) if (S >= 128)
    for (StateId i = 0; i < S; ++i) {
      double best = kLogZero;
      ArcId best_arc = -1;
      for (int k = g.in_offsets[i]; k < g.in_offsets[i + 1]; ++k) {
        const ArcId id = g.in_arcs[k];
        const CompiledArc &a = g.arcs[id];
        if (IsLogZero(prev[a.src]) || IsLogZero(x[a.src])) continue;
        double cand = prev[a.src] + x[a.src] + a.log_weight;
        if (cand > best) {
          best = cand;
          best_arc = id;
        }
      }
      cur[i] = best;
      bp[i] = best_arc;
    }
  }
}

void Backward(const CompiledGraph &g, const Mat &xs, Mat *beta,
              std::vector<ArcId> *bp_bwd) {
  const int T = xs.rows;
  const int S = g.num_states;
  *beta = Mat(T + 1, S, kLogZero);
  bp_bwd->assign(static_cast<size_t>(T) * S, -1);
  for (StateId i = 0; i < S; ++i) (*beta)(T, i) = g.finals[i];

  for (int t = T - 1; t >= 0; --t) {
    const double *next = beta->Row(t + 1);
    const double *x = xs.Row(t);  // xs row t is frame t+1
    double *cur = beta->Row(t);
    ArcId *bp = bp_bwd->data() + static_cast<size_t>(t) * S;
#pragma omp parallel for schedule(static) if (S >= 128)
    for (StateId i = 0; i < S; ++i) {
      double best = kLogZero;
      ArcId best_arc = -1;
      for (int k = g.out_offsets[i]; k < g.out_offsets[i + 1]; ++k) {
        const ArcId id = g.out_arcs[k];
        const CompiledArc &a = g.arcs[id];
        if (IsLogZero(next[a.dst])) continue;
        double cand = a.log_weight + next[a.dst];
        if (cand > best) {
          best = cand;
          best_arc = id;
        }
      }
      if (best_arc >= 0 && !IsLogZero(x[i])) {
        cur[i] = x[i] + best;
        bp[i] = best_arc;
      } else {
        cur[i] = kLogZero;
        bp[i] = -1;
      }
    }
  }
}

OutputScores ComputeOutputScores(const CompiledGraph &g, const Trellis &tr) {
  const int T = tr.xs.rows;
  const int C = g.num_commands;
  OutputScores out;
  out.y = Mat(T, C, kLogZero);
  out.pooled.assign(C, kLogZero);
  out.winners.assign(C, {});

#pragma omp parallel for schedule(static) if (C >= 16)
  for (int u = 0; u < C; ++u) {
    double pooled = kLogZero;
    OutputScores::Winner win;
    for (int t = 1; t <= T; ++t) {
      const double *arow = tr.alpha.Row(t - 1);
      const double *brow = tr.beta.Row(t);
      const double *x = tr.xs.Row(t - 1);
      double best = kLogZero;
      for (ArcId id : g.olabel_arcs[u]) {
        const CompiledArc &a = g.arcs[id];
        if (IsLogZero(arow[a.src]) || IsLogZero(x[a.src]) ||
            IsLogZero(brow[a.dst]))
          continue;
        double cand = arow[a.src] + x[a.src] + a.log_weight + brow[a.dst];
        if (cand > best) best = cand;
        if (cand > pooled) {
          pooled = cand;
          win.frame = t;
          win.arc = id;
        }
      }
      out.y(t - 1, u) = best;
    }
    out.pooled[u] = pooled;
    out.winners[u] = win;
  }
  return out;
}

double AlphaFinal(const CompiledGraph &g, const Mat &alpha) {
  const int T = alpha.rows - 1;
  double best = kLogZero;
  for (StateId i = 0; i < g.num_states; ++i) {
    double a = alpha(T, i);
    if (IsLogZero(a) || IsLogZero(g.finals[i])) continue;
    best = std::max(best, a + g.finals[i]);
  }
  return best;
}

Trellis RunTrellis(const CompiledGraph &g, const PosteriorSequence &p) {
  Trellis tr;
  tr.xs = MapEmissions(g, p);
  Forward(g, tr.xs, &tr.alpha, &tr.bp_fwd);
  Backward(g, tr.xs, &tr.beta, &tr.bp_bwd);
  return tr;
}

}  // namespace vnet
