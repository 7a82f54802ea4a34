// tests/loss_test.cc

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
#include "vnet/loss.h"
#include "vnet/oracle.h"

namespace vnet {
namespace {

using testutil::RandomDecodableInstance;
using testutil::RandomInstance;

OutputScores ScoresFromPooled(const std::vector<double> &pooled) {
  OutputScores s;
  s.pooled = pooled;
  s.y = Mat(1, static_cast<int>(pooled.size()), kLogZero);
  s.winners.assign(pooled.size(), {});
  return s;
}

double CeLoss(const CompiledGraph &g, const PosteriorSequence &post,
              int label) {
  Trellis tr = RunTrellis(g, post);
  OutputScores scores = ComputeOutputScores(g, tr);
  return ClassificationLoss(scores, label).first;
}

TEST_SUITE_BEGIN("loss");

TEST_CASE("a certain classification has zero loss and zero gradient") {
  auto [loss, dl] = ClassificationLoss(ScoresFromPooled({0.0, kLogZero, kLogZero}), 0);
  CHECK(loss == doctest::Approx(0.0));
  for (double v : dl) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("softmax form equals the l1-normalized cross entropy") {
  double a = 0.7, b = 0.2;
  auto [loss, dl] =
      ClassificationLoss(ScoresFromPooled({std::log(a), std::log(b)}), 0);
  CHECK(loss == doctest::Approx(-std::log(a / (a + b))).epsilon(1e-12));
  CHECK(dl[0] == doctest::Approx(a / (a + b) - 1.0));
  CHECK(dl[1] == doctest::Approx(b / (a + b)));
}

TEST_CASE("no-path labels raise") {
  CHECK_THROWS_AS(ClassificationLoss(ScoresFromPooled({kLogZero, 0.0}), 0),
                  NoPathError);
  CHECK_THROWS_AS(
      ClassificationLoss(ScoresFromPooled({kLogZero, kLogZero}), 0),
      NoPathError);
  CHECK_THROWS_AS(ClassificationLoss(ScoresFromPooled({0.0}), 3),
                  ValidationError);
}

TEST_CASE("pooled-score gradients match finite differences") {
  Rng rng(201);
  for (int trial = 0; trial < 50; ++trial) {
    int c = 2 + rng.UniformInt(4);
    std::vector<double> pooled(c);
    for (double &v : pooled) v = rng.Uniform(-3.0, 1.0);
    int label = rng.UniformInt(c);
    auto [loss, dl] = ClassificationLoss(ScoresFromPooled(pooled), label);

    double sum = 0.0;
    for (double v : dl) sum += v;
    CHECK(std::abs(sum) <= 1e-12);

    auto f = [&](const std::vector<double> &p) {
      return ClassificationLoss(ScoresFromPooled(p), label).first;
    };
    std::vector<double> fd = FiniteDiff(f, pooled, 1e-6);
    for (int u = 0; u < c; ++u)
      REQUIRE(dl[u] == doctest::Approx(fd[u]).epsilon(1e-6));
    (void)loss;
  }
}

TEST_CASE("a single-path graph receives constant gradients everywhere") {
  // Linear chain emitting one command: the routed gradient is dl[0] on
  // every arc and dl[0] * scale on every frame's pdf.
  Wfst w = ParseWfst("0 1 1 0 0.3\n1 2 2 0 0.2\n2 3 1 1 0.4\n3 0.0\n",
                     WeightDomain::kTropical);
  CompiledGraph g = Compile(w, TransitionTable::Identity(2), 2);
  PosteriorSequence post;
  post.log_post = Mat(3, 2, std::log(0.5));
  post.scale = 0.07;
  Trellis tr = RunTrellis(g, post);
  OutputScores scores = ComputeOutputScores(g, tr);
  std::vector<double> dl = {-0.25};
  GradientBundle bundle =
      RouteGradients(g, tr, scores, dl, TrainMode::kE2e, post.scale);

  REQUIRE(bundle.d_logv.size() == 3);
  for (const auto &[arc, v] : bundle.d_logv)
    CHECK(v == doctest::Approx(-0.25));
  int nonzero = 0;
  for (int t = 0; t < 3; ++t)
    for (int j = 0; j < 2; ++j)
      if (bundle.d_logpost(t, j) != 0.0) {
        ++nonzero;
        CHECK(bundle.d_logpost(t, j) == doctest::Approx(-0.25 * 0.07));
      }
  CHECK(nonzero == 3);
}

TEST_CASE("zero upstream gradients route nothing") {
  Rng rng(202);
  int label = 0;
  auto inst = RandomDecodableInstance(&rng, &label, false);
  Trellis tr = RunTrellis(inst.graph, inst.post);
  OutputScores scores = ComputeOutputScores(inst.graph, tr);
  std::vector<double> dl(inst.graph.num_commands, 0.0);
  GradientBundle bundle =
      RouteGradients(inst.graph, tr, scores, dl, TrainMode::kE2e, 1.0);
  CHECK(bundle.d_logv.empty());
  for (double v : bundle.d_logpost.data) CHECK(v == 0.0);
}

TEST_CASE("routed gradients match finite differences of the loss") {
  Rng rng(203);
  for (int trial = 0; trial < 60; ++trial) {
    int label = 0;
    testutil::InstanceOpts opts;
    opts.scale = trial % 3 == 0 ? 0.07 : 1.0;
    auto inst = RandomDecodableInstance(&rng, &label, true, opts);
    Trellis tr = RunTrellis(inst.graph, inst.post);
    OutputScores scores = ComputeOutputScores(inst.graph, tr);
    auto [loss, dl] = ClassificationLoss(scores, label);
    GradientBundle bundle = RouteGradients(inst.graph, tr, scores, dl,
                                           TrainMode::kE2e, inst.post.scale);

    // Arc log weights.
    std::vector<double> logv(inst.graph.arcs.size());
    for (size_t k = 0; k < logv.size(); ++k)
      logv[k] = inst.graph.arcs[k].log_weight;
    auto loss_of_v = [&](const std::vector<double> &v) {
      CompiledGraph gx = inst.graph;
      for (size_t k = 0; k < v.size(); ++k) gx.arcs[k].log_weight = v[k];
      return CeLoss(gx, inst.post, label);
    };
    std::vector<double> fd_v = FiniteDiff(loss_of_v, logv, 1e-5);
    for (size_t k = 0; k < logv.size(); ++k) {
      auto it = bundle.d_logv.find(static_cast<ArcId>(k));
      double analytic = it == bundle.d_logv.end() ? 0.0 : it->second;
      REQUIRE(std::abs(analytic - fd_v[k]) /
                  std::max({1.0, std::abs(analytic), std::abs(fd_v[k])}) <=
              1e-4);
    }

    // Log posteriors.
    auto loss_of_x = [&](const std::vector<double> &x) {
      PosteriorSequence px = inst.post;
      px.log_post.data = x;
      return CeLoss(inst.graph, px, label);
    };
    std::vector<double> fd_x =
        FiniteDiff(loss_of_x, inst.post.log_post.data, 1e-5);
    for (size_t k = 0; k < fd_x.size(); ++k) {
      double analytic = bundle.d_logpost.data[k];
      REQUIRE(std::abs(analytic - fd_x[k]) /
                  std::max({1.0, std::abs(analytic), std::abs(fd_x[k])}) <=
              1e-4);
    }

    // Support stays within the winner paths.
    CHECK(static_cast<int>(bundle.d_logv.size()) <=
          inst.graph.num_commands * (2 * inst.frames + 1));
  }
}

TEST_CASE("mode masks zero one side of the bundle") {
  Rng rng(204);
  int label = 0;
  auto inst = RandomDecodableInstance(&rng, &label, false);
  Trellis tr = RunTrellis(inst.graph, inst.post);
  OutputScores scores = ComputeOutputScores(inst.graph, tr);
  auto [loss, dl] = ClassificationLoss(scores, label);

  GradientBundle am_only =
      RouteGradients(inst.graph, tr, scores, dl, TrainMode::kAmOnly, 1.0);
  CHECK(am_only.d_logv.empty());

  GradientBundle wfst_only =
      RouteGradients(inst.graph, tr, scores, dl, TrainMode::kWfstOnly, 1.0);
  for (double v : wfst_only.d_logpost.data) CHECK(v == 0.0);
  bool any_arc = false;
  for (double v : dl)
    if (v != 0.0) any_arc = true;
  CHECK(wfst_only.d_logv.empty() == !any_arc);
}

TEST_CASE("a small step against the gradient reduces the loss") {
  Rng rng(205);
  const double step = 1e-4;
  for (int trial = 0; trial < 20; ++trial) {
    int label = 0;
    auto inst = RandomDecodableInstance(&rng, &label, true);
    Trellis tr = RunTrellis(inst.graph, inst.post);
    OutputScores scores = ComputeOutputScores(inst.graph, tr);
    auto [loss, dl] = ClassificationLoss(scores, label);
    if (loss < 1e-10) continue;  // already at the optimum
    GradientBundle bundle =
        RouteGradients(inst.graph, tr, scores, dl, TrainMode::kE2e, 1.0);
    double norm = 0.0;
    for (const auto &[arc, v] : bundle.d_logv) norm += v * v;
    for (double v : bundle.d_logpost.data) norm += v * v;
    if (norm < 1e-12) continue;  // both commands share one winner path

    CompiledGraph gx = inst.graph;
    for (const auto &[arc, v] : bundle.d_logv)
      gx.arcs[arc].log_weight -= step * v;
    PosteriorSequence px = inst.post;
    for (size_t k = 0; k < px.log_post.data.size(); ++k)
      px.log_post.data[k] -= step * bundle.d_logpost.data[k];
    CHECK(CeLoss(gx, px, label) < loss);
  }
}

TEST_CASE("the KL regularizer vanishes at the anchor and at lambda zero") {
  Rng rng(206);
  Mat logits(3, 4);
  for (double &v : logits.data) v = rng.Uniform(-1.0, 1.0);
  Mat logp(3, 4);
  for (int t = 0; t < 3; ++t) {
    double max = -1e9;
    for (int j = 0; j < 4; ++j) max = std::max(max, logits(t, j));
    double sum = 0.0;
    for (int j = 0; j < 4; ++j) sum += std::exp(logits(t, j) - max);
    for (int j = 0; j < 4; ++j)
      logp(t, j) = logits(t, j) - max - std::log(sum);
  }

  auto [p0, d0] = KlRegularizer(logp, logp, 0.01);
  CHECK(p0 == doctest::Approx(0.0));
  for (double v : d0.data) CHECK(v == doctest::Approx(0.0));

  Mat other = logp;
  other.data[0] -= 0.3;
  auto [p1, d1] = KlRegularizer(logp, other, 0.0);
  CHECK(p1 == 0.0);
  for (double v : d1.data) CHECK(v == 0.0);

  CHECK_THROWS_AS(KlRegularizer(logp, Mat(2, 4, 0.0), 0.01), ValidationError);
}

TEST_CASE("KL penalty is nonnegative and its logit gradient checks out") {
  Rng rng(207);
  const double lambda = 0.01;
  for (int trial = 0; trial < 30; ++trial) {
    int T = 1 + rng.UniformInt(3);
    int P = 2 + rng.UniformInt(3);
    auto softmax_rows = [&](const Mat &z) {
      Mat lp(z.rows, z.cols);
      for (int t = 0; t < z.rows; ++t) {
        double max = -1e9;
        for (int j = 0; j < z.cols; ++j) max = std::max(max, z(t, j));
        double sum = 0.0;
        for (int j = 0; j < z.cols; ++j) sum += std::exp(z(t, j) - max);
        for (int j = 0; j < z.cols; ++j)
          lp(t, j) = z(t, j) - max - std::log(sum);
      }
      return lp;
    };
    Mat z_org(T, P), z(T, P);
    for (double &v : z_org.data) v = rng.Uniform(-1.5, 1.5);
    for (double &v : z.data) v = rng.Uniform(-1.5, 1.5);
    Mat logp_org = softmax_rows(z_org);

    auto [penalty, d_logits] = KlRegularizer(logp_org, softmax_rows(z), lambda);
    CHECK(penalty >= -1e-12);

    auto f = [&](const std::vector<double> &zv) {
      Mat zz = z;
      zz.data = zv;
      return KlRegularizer(logp_org, softmax_rows(zz), lambda).first;
    };
    std::vector<double> fd = FiniteDiff(f, z.data, 1e-5);
    for (size_t k = 0; k < fd.size(); ++k)
      REQUIRE(d_logits.data[k] == doctest::Approx(fd[k]).epsilon(1e-5));
  }
}

TEST_SUITE_END();

}  // namespace
}  // namespace vnet
