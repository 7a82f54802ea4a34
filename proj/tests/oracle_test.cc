// tests/oracle_test.cc

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

#include <cmath>

#include "doctest.h"
#include "test_util.h"
#include "vnet/oracle.h"

namespace vnet {
namespace {

using testutil::Fig2Wfst;

TEST_SUITE_BEGIN("oracle");

TEST_CASE("a linear chain has exactly one path") {
  Wfst w = ParseWfst("0 1 1 0 0.0\n1 2 2 0 0.0\n2 3 3 1 0.0\n3 0.0\n",
                     WeightDomain::kTropical);
  CompiledGraph g = Compile(w, TransitionTable::Identity(3), 3);
  Mat xs(3, g.num_states, 0.0);
  std::vector<PathRecord> paths = EnumeratePaths(g, xs, 3);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].states ==
        std::vector<StateId>{0, 1, 2, 3});
  CHECK(paths[0].olabels == std::vector<Label>{1});
  CHECK(paths[0].score == doctest::Approx(0.0));
}

TEST_CASE("path counts match an adjacency-matrix power") {
  CompiledGraph g = Compile(Fig2Wfst(), TransitionTable::Identity(9), 9);
  const int T = 5;
  Mat xs(T, g.num_states, 0.0);
  std::vector<PathRecord> paths = EnumeratePaths(g, xs, T);

  // Independent count: (A^T)[start][final] with A the 0/1 adjacency matrix.
  const int S = g.num_states;
  std::vector<std::vector<long>> a(S, std::vector<long>(S, 0));
  for (const CompiledArc &arc : g.arcs) a[arc.src][arc.dst] += 1;
  std::vector<std::vector<long>> power(S, std::vector<long>(S, 0));
  for (int i = 0; i < S; ++i) power[i][i] = 1;
  for (int rep = 0; rep < T; ++rep) {
    std::vector<std::vector<long>> next(S, std::vector<long>(S, 0));
    for (int i = 0; i < S; ++i)
      for (int k = 0; k < S; ++k)
        for (int j = 0; j < S; ++j) next[i][j] += power[i][k] * a[k][j];
    power = next;
  }
  CHECK(static_cast<long>(paths.size()) == power[0][8]);
  CHECK(paths.size() == 2);  // 0-2-3-4-{6,7}-8
}

TEST_CASE("graphs without final states have no complete paths") {
  Wfst w = ParseWfst("0 1 1 0 0.0\n1 0 1 0 0.0\n", WeightDomain::kTropical);
  w.finals.clear();
  CompiledGraph g = Compile(w, TransitionTable::Identity(1), 1);
  Mat xs(3, g.num_states, 0.0);
  CHECK(EnumeratePaths(g, xs, 3).empty());
}

TEST_CASE("size guards trip") {
  Rng rng(5);
  testutil::InstanceOpts opts;
  auto inst = testutil::RandomInstance(&rng, opts);
  Mat xs = MapEmissions(inst.graph, inst.post);
  CHECK_THROWS_AS(EnumeratePaths(inst.graph, xs, kOracleMaxFrames + 1),
                  ValidationError);
}

TEST_CASE("central differences recover an analytic derivative") {
  auto f = [](const std::vector<double> &x) { return x[0] * x[0]; };
  std::vector<double> grad = FiniteDiff(f, {3.0}, 1e-5);
  CHECK(grad[0] == doctest::Approx(6.0).epsilon(1e-6));

  auto c = [](const std::vector<double> &) { return 4.25; };
  std::vector<double> zero = FiniteDiff(c, {1.0, -2.0, 0.5}, 1e-5);
  for (double v : zero) CHECK(v == 0.0);
}

TEST_CASE("probability-domain and log-domain scores describe the same paths") {
  // exp(oracle best) equals the linear-domain best complete path by
  // construction on a tiny instance computed both ways.
  Wfst w = ParseWfst("0 1 1 0 0.5\n1 2 2 1 0.25\n2 1.0\n",
                     WeightDomain::kProbability);
  CompiledGraph g = Compile(w, TransitionTable::Identity(2), 2);
  Mat xs(2, g.num_states, 0.0);
  double best = OracleBestScore(g, xs, 2);
  CHECK(std::exp(best) == doctest::Approx(0.5 * 0.25).epsilon(1e-9));
}

TEST_SUITE_END();

}  // namespace
}  // namespace vnet
