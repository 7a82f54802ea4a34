// vnet/oracle.cc

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

#include "vnet/oracle.h"

#include <cmath>
#include <limits>

namespace vnet {

namespace {

void CheckGuards(const CompiledGraph &g, int num_frames) {
  if (g.num_states > kOracleMaxStates || num_frames > kOracleMaxFrames ||
      static_cast<int>(g.arcs.size()) > kOracleMaxArcs || num_frames < 0)
    throw ValidationError("oracle size guard exceeded (S <= 10, T <= 7, arcs <= 40)");
}

struct PathCounter {
  long count = 0;
  void Tick() {
    if (++count > kOracleMaxPaths)
      throw ValidationError("oracle path budget exceeded");
  }
};

// All complete paths with exactly `num_frames` transitions, recursively.
void ExtendPath(const CompiledGraph &g, const Mat &xs, int num_frames,
                PathRecord *cur, PathCounter *guard,
                std::vector<PathRecord> *out) {
  int t = static_cast<int>(cur->arcs.size());
  StateId here = cur->states.back();
  if (t == num_frames) {
    guard->Tick();
    if (!IsLogZero(g.finals[here])) {
      PathRecord done = *cur;
      done.score = LogMul(done.score, g.finals[here]);
      if (!IsLogZero(done.score)) out->push_back(std::move(done));
    }
    return;
  }
  for (ArcId id = 0; id < static_cast<ArcId>(g.arcs.size()); ++id) {
    const CompiledArc &a = g.arcs[id];
    if (a.src != here) continue;
    double step = LogMul(xs(t, a.src), a.log_weight);
    if (IsLogZero(step) || IsLogZero(cur->score)) continue;
    cur->states.push_back(a.dst);
    cur->arcs.push_back(id);
    if (a.olabel != 0) cur->olabels.push_back(a.olabel);
    double saved = cur->score;
    cur->score = LogMul(cur->score, step);
    ExtendPath(g, xs, num_frames, cur, guard, out);
    cur->score = saved;
    if (a.olabel != 0) cur->olabels.pop_back();
    cur->arcs.pop_back();
    cur->states.pop_back();
  }
}

}  // namespace

std::vector<PathRecord> EnumeratePaths(const CompiledGraph &g, const Mat &xs,
                                       int num_frames) {
  CheckGuards(g, num_frames);
  std::vector<PathRecord> out;
  PathCounter guard;
  for (const auto &[s, w] : g.initial) {
    PathRecord seed;
    seed.states.push_back(s);
    seed.score = w;
    ExtendPath(g, xs, num_frames, &seed, &guard, &out);
  }
  return out;
}

namespace {

// Explicitly walks every prefix of up to `num_frames` transitions and folds
// the running scores into the table; no per-state maximization happens
// while walking.
void WalkPrefixes(const CompiledGraph &g, const Mat &xs, int num_frames,
                  StateId here, int t, double score, PathCounter *guard,
                  Mat *table) {
  guard->Tick();
  if (score > (*table)(t, here)) (*table)(t, here) = score;
  if (t == num_frames) return;
  for (ArcId id = 0; id < static_cast<ArcId>(g.arcs.size()); ++id) {
    const CompiledArc &a = g.arcs[id];
    if (a.src != here) continue;
    double cand = LogMul(score, LogMul(xs(t, a.src), a.log_weight));
    if (IsLogZero(cand)) continue;
    WalkPrefixes(g, xs, num_frames, a.dst, t + 1, cand, guard, table);
  }
}

void WalkSuffixes(const CompiledGraph &g, const Mat &xs, int num_frames,
                  StateId here, int t, double score, int t0, StateId i0,
                  PathCounter *guard, Mat *table) {
  guard->Tick();
  if (t == num_frames) {
    double total = LogMul(score, g.finals[here]);
    if (!IsLogZero(total) && total > (*table)(t0, i0))
      (*table)(t0, i0) = total;
    return;
  }
  for (ArcId id = 0; id < static_cast<ArcId>(g.arcs.size()); ++id) {
    const CompiledArc &a = g.arcs[id];
    if (a.src != here) continue;
    double cand = LogMul(score, LogMul(xs(t, a.src), a.log_weight));
    if (IsLogZero(cand)) continue;
    WalkSuffixes(g, xs, num_frames, a.dst, t + 1, cand, t0, i0, guard, table);
  }
}

}  // namespace

Mat OracleAlpha(const CompiledGraph &g, const Mat &xs, int num_frames) {
  CheckGuards(g, num_frames);
  Mat table(num_frames + 1, g.num_states, kLogZero);
  PathCounter guard;
  for (const auto &[s, w] : g.initial)
    WalkPrefixes(g, xs, num_frames, s, 0, w, &guard, &table);
  return table;
}

Mat OracleBeta(const CompiledGraph &g, const Mat &xs, int num_frames) {
  CheckGuards(g, num_frames);
  Mat table(num_frames + 1, g.num_states, kLogZero);
  PathCounter guard;
  for (StateId i = 0; i < g.num_states; ++i) {
    if (!IsLogZero(g.finals[i])) table(num_frames, i) = g.finals[i];
    for (int t = 0; t < num_frames; ++t)
      WalkSuffixes(g, xs, num_frames, i, t, 0.0, t, i, &guard, &table);
  }
  return table;
}

Mat OracleOutputScores(const CompiledGraph &g, const Mat &xs, int num_frames) {
  std::vector<PathRecord> paths = EnumeratePaths(g, xs, num_frames);
  Mat y(num_frames, g.num_commands, kLogZero);
  for (const PathRecord &p : paths) {
    for (int t = 1; t <= num_frames; ++t) {
      Label ol = g.arcs[p.arcs[t - 1]].olabel;
      if (ol == 0) continue;
      if (p.score > y(t - 1, ol - 1)) y(t - 1, ol - 1) = p.score;
    }
  }
  return y;
}

std::vector<double> OraclePooled(const CompiledGraph &g, const Mat &xs,
                                 int num_frames) {
  Mat y = OracleOutputScores(g, xs, num_frames);
  std::vector<double> pooled(g.num_commands, kLogZero);
  for (int u = 0; u < g.num_commands; ++u)
    for (int t = 0; t < num_frames; ++t)
      pooled[u] = std::max(pooled[u], y(t, u));
  return pooled;
}

double OracleBestScore(const CompiledGraph &g, const Mat &xs, int num_frames) {
  double best = kLogZero;
  for (const PathRecord &p : EnumeratePaths(g, xs, num_frames))
    best = std::max(best, p.score);
  return best;
}

Mat ProbDomainForward(const CompiledGraph &g, const Mat &xs) {
  const int T = xs.rows;
  const int S = g.num_states;
  Mat alpha(T + 1, S, 0.0);
  for (const auto &[s, w] : g.initial) alpha(0, s) = std::exp(w);
  for (int t = 1; t <= T; ++t) {
    for (const CompiledArc &a : g.arcs) {
      double cand =
          std::exp(a.log_weight) * alpha(t - 1, a.src) * std::exp(xs(t - 1, a.src));
      if (cand > alpha(t, a.dst)) alpha(t, a.dst) = cand;
    }
  }
  return alpha;
}

Mat ProbDomainBackward(const CompiledGraph &g, const Mat &xs) {
  const int T = xs.rows;
  const int S = g.num_states;
  Mat beta(T + 1, S, 0.0);
  for (StateId i = 0; i < S; ++i)
    beta(T, i) = IsLogZero(g.finals[i]) ? 0.0 : std::exp(g.finals[i]);
  for (int t = T - 1; t >= 0; --t) {
    for (const CompiledArc &a : g.arcs) {
      double cand = std::exp(a.log_weight) * beta(t + 1, a.dst) *
                    std::exp(xs(t, a.src));
      if (cand > beta(t, a.src)) beta(t, a.src) = cand;
    }
  }
  return beta;
}

Mat ProbDomainOutputScores(const CompiledGraph &g, const Mat &alpha_lin,
                           const Mat &beta_lin, const Mat &xs) {
  const int T = xs.rows;
  Mat y(T, g.num_commands, 0.0);
  for (int t = 1; t <= T; ++t) {
    for (const CompiledArc &a : g.arcs) {
      if (a.olabel == 0) continue;
      double cand = alpha_lin(t - 1, a.src) * std::exp(xs(t - 1, a.src)) *
                    std::exp(a.log_weight) * beta_lin(t, a.dst);
      if (cand > y(t - 1, a.olabel - 1)) y(t - 1, a.olabel - 1) = cand;
    }
  }
  return y;
}

namespace {

void WalkWfst(const Wfst &w, const TransitionTable &tt,
              const Mat &scaled_log_post, int num_frames, StateId here,
              int frames_used, int eps_run, WfstPath *cur, PathCounter *guard,
              std::vector<WfstPath> *out) {
  guard->Tick();
  if (frames_used == num_frames && w.IsFinal(here)) {
    WfstPath done = *cur;
    done.score = LogMul(done.score, w.FinalLog(here));
    if (!IsLogZero(done.score)) out->push_back(std::move(done));
  }
  for (const Arc &a : w.arcs) {
    if (a.src != here) continue;
    bool is_eps = a.ilabel == 0;
    if (is_eps && eps_run >= w.num_states) continue;
    if (!is_eps && frames_used == num_frames) continue;
    double step = a.log_weight;
    if (!is_eps) {
      double lp = scaled_log_post(frames_used, tt.Pdf(a.ilabel));
      step = LogMul(step, lp);
    }
    double cand = LogMul(cur->score, step);
    if (IsLogZero(cand)) continue;
    double saved = cur->score;
    cur->score = cand;
    if (!is_eps) cur->ilabels.push_back(a.ilabel);
    if (a.olabel != 0) cur->olabels.push_back(a.olabel);
    WalkWfst(w, tt, scaled_log_post, num_frames, a.dst,
             frames_used + (is_eps ? 0 : 1), is_eps ? eps_run + 1 : 0, cur,
             guard, out);
    if (a.olabel != 0) cur->olabels.pop_back();
    if (!is_eps) cur->ilabels.pop_back();
    cur->score = saved;
  }
}

}  // namespace

std::vector<WfstPath> EnumerateWfstPaths(const Wfst &w,
                                         const TransitionTable &tt,
                                         const Mat &scaled_log_post,
                                         int num_frames) {
  // Transducer-level enumeration tolerates a little more room because
  // ilabel normalization grows graphs; the path budget still applies.
  if (w.num_states > 32 || num_frames > kOracleMaxFrames ||
      static_cast<int>(w.arcs.size()) > 160)
    throw ValidationError("oracle size guard exceeded");
  if (scaled_log_post.rows < num_frames)
    throw ValidationError("not enough posterior frames");
  std::vector<WfstPath> out;
  WfstPath seed;
  PathCounter guard;
  WalkWfst(w, tt, scaled_log_post, num_frames, w.start, 0, 0, &seed, &guard,
           &out);
  return out;
}

std::vector<double> FiniteDiff(
    const std::function<double(const std::vector<double> &)> &f,
    const std::vector<double> &point, double h) {
  std::vector<double> grad(point.size());
  std::vector<double> x = point;
  for (size_t i = 0; i < point.size(); ++i) {
    x[i] = point[i] + h;
    double up = f(x);
    x[i] = point[i] - h;
    double down = f(x);
    x[i] = point[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      grad[i] = std::numeric_limits<double>::quiet_NaN();  // flagged
    } else {
      grad[i] = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

}  // namespace vnet
