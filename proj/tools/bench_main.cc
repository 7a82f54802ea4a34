// tools/bench_main.cc

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

// Times the OpenMP trellis kernels against the serial reference on a random
// graph and verifies that both produce bit-identical scores and
// backpointers.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"

#include "vnet/trellis.h"

namespace {

using namespace vnet;

CompiledGraph RandomGraph(int states, int arcs, int pdim, int commands,
                          Rng *rng) {
  Wfst w;
  w.num_states = states;
  w.start = 0;
  std::vector<Label> state_ilabel(states);
  for (int s = 0; s < states; ++s) state_ilabel[s] = 1 + rng->UniformInt(pdim);
  w.arcs.push_back(Arc{0, 1 + rng->UniformInt(states - 1), state_ilabel[0],
                       0, rng->Uniform(-1.0, 0.5)});
  for (int k = 1; k < arcs; ++k) {
    StateId src = rng->UniformInt(states);
    StateId dst = rng->UniformInt(states);
    Label ol = rng->UniformInt(4) == 0 ? 1 + rng->UniformInt(commands) : 0;
    w.arcs.push_back(
        Arc{src, dst, state_ilabel[src], ol, rng->Uniform(-1.0, 0.5)});
  }
  for (int s = states - 1 - states / 10; s < states; ++s)
    w.finals.emplace(s, 0.0);
  return Compile(w, TransitionTable::Identity(pdim), pdim);
}

Mat RandomXs(const CompiledGraph &g, int frames, Rng *rng) {
  PosteriorSequence p;
  p.log_post = Mat(frames, g.pdim);
  for (int t = 0; t < frames; ++t) {
    double sum = 0.0;
    for (int j = 0; j < g.pdim; ++j) {
      p.log_post(t, j) = rng->Uniform(0.05, 1.0);
      sum += p.log_post(t, j);
    }
    for (int j = 0; j < g.pdim; ++j)
      p.log_post(t, j) = std::log(p.log_post(t, j) / sum);
  }
  return MapEmissions(g, p);
}

template <typename F>
double TimeMs(int reps, F &&fn) {
  auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

bool Same(const Mat &a, const Mat &b) { return a.data == b.data; }

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"trellis kernel benchmark: OpenMP vs serial reference"};
  int states = 4000, arcs = 20000, frames = 200, pdim = 512, commands = 50,
      reps = 5, threads = 0;
  uint64_t seed = 1;
  app.add_option("--states", states);
  app.add_option("--arcs", arcs);
  app.add_option("--frames", frames);
  app.add_option("--pdim", pdim);
  app.add_option("--commands", commands);
  app.add_option("--reps", reps);
  app.add_option("--threads", threads);
  app.add_option("--seed", seed);
  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
  std::printf("openmp: yes, max threads %d\n", omp_get_max_threads());
#else
  std::printf("openmp: no (serial build)\n");
#endif

  Rng rng(seed);
  CompiledGraph g = RandomGraph(states, arcs, pdim, commands, &rng);
  Mat xs = RandomXs(g, frames, &rng);
  std::printf("graph: S=%d arcs=%zu C=%d, T=%d\n", g.num_states, g.arcs.size(),
              g.num_commands, frames);

  Trellis par, ser;
  par.xs = xs;
  ser.xs = xs;

  double fwd = TimeMs(reps, [&] { Forward(g, xs, &par.alpha, &par.bp_fwd); });
  double fwd_ref =
      TimeMs(reps, [&] { ForwardRef(g, xs, &ser.alpha, &ser.bp_fwd); });
  double bwd = TimeMs(reps, [&] { Backward(g, xs, &par.beta, &par.bp_bwd); });
  double bwd_ref =
      TimeMs(reps, [&] { BackwardRef(g, xs, &ser.beta, &ser.bp_bwd); });

  OutputScores out_par, out_ser;
  double outs = TimeMs(reps, [&] { out_par = ComputeOutputScores(g, par); });
  double outs_ref =
      TimeMs(reps, [&] { out_ser = ComputeOutputScoresRef(g, ser); });

  bool ok = Same(par.alpha, ser.alpha) && Same(par.beta, ser.beta) &&
            par.bp_fwd == ser.bp_fwd && par.bp_bwd == ser.bp_bwd &&
            Same(out_par.y, out_ser.y) && out_par.pooled == out_ser.pooled;

  std::printf("%-14s %10s %10s %8s\n", "kernel", "omp ms", "serial ms",
              "speedup");
  std::printf("%-14s %10.3f %10.3f %7.2fx\n", "forward", fwd, fwd_ref,
              fwd_ref / fwd);
  std::printf("%-14s %10.3f %10.3f %7.2fx\n", "backward", bwd, bwd_ref,
              bwd_ref / bwd);
  std::printf("%-14s %10.3f %10.3f %7.2fx\n", "output_scores", outs, outs_ref,
              outs_ref / outs);
  std::printf("results identical: %s\n", ok ? "yes" : "NO");
  return ok ? 0 : 1;
}
