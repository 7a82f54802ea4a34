// tests/acceptance_main.cc

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

// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// the exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "test_util.h"
#include "vnet/am.h"
#include "vnet/compile.h"
#include "vnet/decode.h"
#include "vnet/loss.h"
#include "vnet/oracle.h"
#include "vnet/synth.h"
#include "vnet/train.h"
#include "vnet/trellis.h"
#include "vnet/wfst.h"

namespace vnet {
namespace {

using testutil::RandomDecodableInstance;
using testutil::RandomInstance;
using testutil::TempDir;

struct Outcome {
  int failures = 0;

  void Report(int id, const std::string &name, bool pass,
              const std::string &detail) {
    std::printf("[%s] %2d. %-26s %s\n", pass ? "PASS" : "FAIL", id,
                name.c_str(), detail.c_str());
    if (!pass) ++failures;
  }
};

double SecondsSince(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// Criteria 1 and 5 share the random instance sweep: trellis quantities
// against exhaustive path enumeration, and the per-frame best output score
// against the global best complete path.
void OracleEquivalence(Outcome *out) {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(9001);
  double worst = 0.0;
  double worst_consistency = 0.0;
  bool ok = true;
  for (int trial = 0; trial < 200 && ok; ++trial) {
    auto inst = RandomInstance(&rng);
    Trellis tr = RunTrellis(inst.graph, inst.post);
    OutputScores scores = ComputeOutputScores(inst.graph, tr);
    Mat oa = OracleAlpha(inst.graph, tr.xs, inst.frames);
    Mat ob = OracleBeta(inst.graph, tr.xs, inst.frames);
    Mat oy = OracleOutputScores(inst.graph, tr.xs, inst.frames);
    std::vector<double> op = OraclePooled(inst.graph, tr.xs, inst.frames);

    auto check = [&](double got, double want) {
      if (IsLogZero(got) != IsLogZero(want)) ok = false;
      if (IsLogZero(got) || IsLogZero(want)) return;
      worst = std::max(worst, std::abs(got - want));
      if (std::abs(got - want) > 1e-9) ok = false;
    };
    for (int t = 0; t <= inst.frames; ++t)
      for (StateId s = 0; s < inst.graph.num_states; ++s) {
        check(tr.alpha(t, s), oa(t, s));
        check(tr.beta(t, s), ob(t, s));
      }
    for (int t = 0; t < inst.frames; ++t)
      for (int u = 0; u < inst.graph.num_commands; ++u)
        check(scores.y(t, u), oy(t, u));
    for (int u = 0; u < inst.graph.num_commands; ++u)
      check(scores.pooled[u], op[u]);

    double best = AlphaFinal(inst.graph, tr.alpha);
    for (int t = 1; t <= inst.frames; ++t) {
      double frame_best = kLogZero;
      for (const CompiledArc &a : inst.graph.arcs)
        frame_best = std::max(
            frame_best,
            LogMul(LogMul(tr.alpha(t - 1, a.src), tr.xs(t - 1, a.src)),
                   LogMul(a.log_weight, tr.beta(t, a.dst))));
      if (IsLogZero(best) != IsLogZero(frame_best)) ok = false;
      if (!IsLogZero(best)) {
        worst_consistency =
            std::max(worst_consistency, std::abs(frame_best - best));
        if (std::abs(frame_best - best) > 1e-9) ok = false;
      }
    }
  }
  double secs = SecondsSince(t0);
  bool in_time = secs < 10.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "200 instances, max |err| %.2e, %.1fs (limit 10s)", worst,
                secs);
  out->Report(1, "oracle equivalence", ok && in_time, buf);
  std::snprintf(buf, sizeof(buf), "max |frame best - path best| %.2e",
                worst_consistency);
  out->Report(5, "path consistency", ok, buf);
}

void LogDomainEquivalence(Outcome *out) {
  Rng rng(9002);
  testutil::InstanceOpts opts;
  opts.max_frames = 4;
  double worst = 0.0;
  bool ok = true;
  for (int trial = 0; trial < 50; ++trial) {
    auto inst = RandomInstance(&rng, opts);
    Trellis tr = RunTrellis(inst.graph, inst.post);
    OutputScores scores = ComputeOutputScores(inst.graph, tr);
    Mat alpha_lin = ProbDomainForward(inst.graph, tr.xs);
    Mat beta_lin = ProbDomainBackward(inst.graph, tr.xs);
    Mat y_lin = ProbDomainOutputScores(inst.graph, alpha_lin, beta_lin, tr.xs);

    auto check = [&](double linear, double log_domain) {
      if ((linear <= 0.0) != IsLogZero(log_domain)) {
        ok = false;
        return;
      }
      if (linear <= 0.0) return;
      double err = std::abs(std::log(linear) - log_domain);
      worst = std::max(worst, err);
      if (err > 1e-6) ok = false;
    };
    for (int t = 0; t <= inst.frames; ++t)
      for (StateId s = 0; s < inst.graph.num_states; ++s) {
        check(alpha_lin(t, s), tr.alpha(t, s));
        check(beta_lin(t, s), tr.beta(t, s));
      }
    for (int t = 0; t < inst.frames; ++t)
      for (int u = 0; u < inst.graph.num_commands; ++u)
        check(y_lin(t, u), scores.y(t, u));
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "50 instances, max |log err| %.2e", worst);
  out->Report(2, "log-domain equivalence", ok, buf);
}

double RelErr(double a, double f) {
  return std::abs(a - f) / std::max({1.0, std::abs(a), std::abs(f)});
}

void GradientCorrectness(Outcome *out) {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(9003);
  const double h = 1e-5;
  double worst = 0.0;
  bool ok = true;
  testutil::InstanceOpts opts;
  opts.max_states = 6;
  opts.max_arcs = 14;
  opts.max_frames = 4;

  // 140 posterior-driven instances check d_logv and d_logpost.
  for (int trial = 0; trial < 140; ++trial) {
    int label = 0;
    auto inst = RandomDecodableInstance(&rng, &label, true, opts);
    Trellis tr = RunTrellis(inst.graph, inst.post);
    OutputScores scores = ComputeOutputScores(inst.graph, tr);
    auto [loss, dl] = ClassificationLoss(scores, label);
    GradientBundle bundle = RouteGradients(inst.graph, tr, scores, dl,
                                           TrainMode::kE2e, inst.post.scale);

    std::vector<double> logv(inst.graph.arcs.size());
    for (size_t k = 0; k < logv.size(); ++k)
      logv[k] = inst.graph.arcs[k].log_weight;
    auto loss_v = [&](const std::vector<double> &v) {
      CompiledGraph gx = inst.graph;
      for (size_t k = 0; k < v.size(); ++k) gx.arcs[k].log_weight = v[k];
      Trellis trx = RunTrellis(gx, inst.post);
      return ClassificationLoss(ComputeOutputScores(gx, trx), label).first;
    };
    std::vector<double> fd = FiniteDiff(loss_v, logv, h);
    for (size_t k = 0; k < fd.size(); ++k) {
      auto it = bundle.d_logv.find(static_cast<ArcId>(k));
      double an = it == bundle.d_logv.end() ? 0.0 : it->second;
      worst = std::max(worst, RelErr(an, fd[k]));
    }

    auto loss_x = [&](const std::vector<double> &x) {
      PosteriorSequence px = inst.post;
      px.log_post.data = x;
      Trellis trx = RunTrellis(inst.graph, px);
      return ClassificationLoss(ComputeOutputScores(inst.graph, trx), label)
          .first;
    };
    std::vector<double> fdx = FiniteDiff(loss_x, inst.post.log_post.data, h);
    for (size_t k = 0; k < fdx.size(); ++k)
      worst = std::max(worst, RelErr(bundle.d_logpost.data[k], fdx[k]));
  }

  // 60 model-driven instances check every model parameter through the
  // whole pipeline, KL term included.
  for (int trial = 0; trial < 60; ++trial) {
    int label = 0;
    auto inst = RandomDecodableInstance(&rng, &label, false, opts);
    const int P = inst.graph.pdim;
    AmConfig cfg;
    cfg.input_dim = P;
    cfg.splice_left = cfg.splice_right = 1;
    cfg.hidden_layers = 1;
    cfg.hidden_units = 4;
    cfg.pdim = P;
    AmModel am = InitAm(cfg, rng.Next());
    AmModel original = InitAm(cfg, rng.Next());
    Mat features(inst.frames, P);
    for (double &v : features.data) v = rng.Uniform(0.0, 1.0);
    Mat logp_org = AmForward(original, Splice(features, 1, 1), nullptr);

    TrainConfig tc;
    tc.mode = TrainMode::kE2e;
    tc.lambda = 0.01;
    tc.acoustic_scale = 1.0;

    // Unique argmaxes under the model's own posteriors.
    {
      Mat logp = AmForward(am, Splice(features, 1, 1), nullptr);
      PosteriorSequence p;
      p.log_post = logp;
      Mat xs = MapEmissions(inst.graph, p);
      std::vector<PathRecord> paths =
          EnumeratePaths(inst.graph, xs, inst.frames);
      std::vector<double> ss;
      for (const PathRecord &pr : paths) ss.push_back(pr.score);
      std::sort(ss.begin(), ss.end());
      bool tied = false;
      for (size_t k = 1; k < ss.size(); ++k)
        if (ss[k] - ss[k - 1] < 5e-4) tied = true;
      bool has_label = false;
      for (const PathRecord &pr : paths)
        for (Label ol : pr.olabels)
          if (ol == label + 1) has_label = true;
      if (tied || !has_label) {
        --trial;
        continue;
      }
    }

    UttResult base =
        ComputeUtterance(inst.graph, &am, features, logp_org, label, tc, true);
    if (base.skipped) {
      --trial;
      continue;
    }
    for (int l = 0; l < am.NumLayers(); ++l) {
      auto check_block = [&](std::vector<double> *block,
                             const std::vector<double> &analytic) {
        auto f = [&](const std::vector<double> &v) {
          std::vector<double> saved = *block;
          *block = v;
          double loss = ComputeUtterance(inst.graph, &am, features, logp_org,
                                         label, tc, false)
                            .loss;
          *block = saved;
          return loss;
        };
        std::vector<double> fd = FiniteDiff(f, *block, h);
        for (size_t k = 0; k < fd.size(); ++k)
          worst = std::max(worst, RelErr(analytic[k], fd[k]));
      };
      check_block(&am.weights[l].data, base.am_grads.d_weights[l].data);
      check_block(&am.biases[l], base.am_grads.d_biases[l]);
    }
  }

  if (worst > 1e-4) ok = false;
  double secs = SecondsSince(t0);
  if (secs >= 60.0) ok = false;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "200 instances, max rel err %.2e, %.1fs (limit 60s)", worst,
                secs);
  out->Report(3, "gradient correctness", ok, buf);
}

// Everything the toy experiment needs, shared by criteria 4 and 6-10.
struct ToyRun {
  TempDir dir{"acceptance"};
  SynthResult task;
  CompiledGraph graph0;
  AmModel am0;
  TransitionTable tt;
  std::vector<DatasetEntry> train, eval;
  double baseline_ser = 0.0;
};

TrainConfig PaperConfig(TrainMode mode) {
  TrainConfig cfg;  // defaults carry lr 1e-4, betas, batch 16, 20 epochs,
                    // lambda 0.01
  cfg.mode = mode;
  cfg.seed = 11;
  return cfg;
}

double EvalSer(const ToyRun &toy, const CompiledGraph &graph,
               const AmModel &am) {
  Wfst fst = ParseWfst(
      SerializeWfst(ExportWfst(graph), WeightDomain::kTropical),
      WeightDomain::kTropical);
  DecodeConfig dc;  // beam 7, acoustic scale 0.07
  std::vector<Hypothesis> hyps;
  std::vector<int> refs;
  for (const DatasetEntry &e : toy.eval) {
    Mat logp = AmForward(
        am, Splice(LoadMatrix(e.path), am.cfg.splice_left, am.cfg.splice_right),
        nullptr);
    hyps.push_back(ViterbiDecode(fst, toy.tt, logp, dc));
    refs.push_back(e.label);
  }
  return ScoreSer(hyps, refs).ser;
}

ToyRun MakeToyRun() {
  ToyRun toy;
  SynthConfig sc;
  sc.seed = 1;
  sc.num_commands = 5;
  sc.num_phones = 8;
  sc.frames_per_phone = 3;
  sc.noise = 0.6;
  sc.train_utts = 200;
  sc.eval_utts = 100;
  sc.out_dir = toy.dir.File("task");
  toy.task = Synthesize(sc);
  Wfst grammar = LoadWfst(toy.task.fst_path, WeightDomain::kTropical);
  toy.tt = LoadTransitionTable(toy.task.ttable_path);
  toy.graph0 =
      Compile(NormalizeIlabels(RemoveEpsilons(grammar).first), toy.tt, 8);
  toy.am0 = LoadAm(toy.task.am_path);
  toy.train = LoadManifest(toy.task.train_manifest);
  toy.eval = LoadManifest(toy.task.eval_manifest);
  toy.baseline_ser = EvalSer(toy, toy.graph0, toy.am0);
  return toy;
}

void RoundTrip(Outcome *out, const ToyRun &toy) {
  bool ok = true;
  double worst = 0.0;

  // Untouched compile/export cycles reproduce the input weights.
  Rng rng(9004);
  for (int trial = 0; trial < 30; ++trial) {
    auto inst = RandomInstance(&rng);
    Wfst w = ExportWfst(inst.graph);
    CompiledGraph again =
        Compile(w, TransitionTable::Identity(inst.graph.pdim),
                inst.graph.pdim);
    if (again.arcs.size() != inst.graph.arcs.size()) ok = false;
    for (size_t k = 0; k < again.arcs.size() && ok; ++k)
      worst = std::max(worst, std::abs(again.arcs[k].log_weight -
                                       inst.graph.arcs[k].log_weight));
  }
  Wfst grammar = LoadWfst(toy.task.fst_path, WeightDomain::kTropical);
  Wfst back = ExportWfst(toy.graph0, grammar);
  for (size_t k = 0; k < back.arcs.size(); ++k)
    worst = std::max(
        worst, std::abs(back.arcs[k].log_weight - grammar.arcs[k].log_weight));
  if (worst > 1e-9) ok = false;

  // Train, export through text, reparse, recompile: pooled scores match.
  CompiledGraph g = toy.graph0;
  AmModel am = toy.am0;
  TrainConfig cfg = PaperConfig(TrainMode::kE2e);
  cfg.epochs = 3;
  cfg.lr = 0.01;  // move the weights measurably before exporting
  TrainLoop(&g, &am, toy.train, cfg, toy.dir.File("roundtrip"));

  std::string text = SerializeWfst(ExportWfst(g), WeightDomain::kTropical);
  CompiledGraph re =
      Compile(ParseWfst(text, WeightDomain::kTropical), toy.tt, 8);
  double worst_pooled = 0.0;
  for (int i = 0; i < 10; ++i) {
    Mat logp = AmForward(am,
                         Splice(LoadMatrix(toy.train[i].path),
                                am.cfg.splice_left, am.cfg.splice_right),
                         nullptr);
    PosteriorSequence p;
    p.log_post = logp;
    p.scale = 0.07;
    Trellis tr1 = RunTrellis(g, p);
    Trellis tr2 = RunTrellis(re, p);
    OutputScores s1 = ComputeOutputScores(g, tr1);
    OutputScores s2 = ComputeOutputScores(re, tr2);
    for (int u = 0; u < g.num_commands; ++u) {
      if (IsLogZero(s1.pooled[u]) != IsLogZero(s2.pooled[u])) ok = false;
      if (!IsLogZero(s1.pooled[u]))
        worst_pooled =
            std::max(worst_pooled, std::abs(s1.pooled[u] - s2.pooled[u]));
    }
  }
  if (worst_pooled > 1e-6) ok = false;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "weights |err| %.2e, reparsed pooled |err| %.2e", worst,
                worst_pooled);
  out->Report(4, "export round trip", ok, buf);
}

void DecoderCrossValidation(Outcome *out, const ToyRun &toy) {
  Rng rng(9005);
  bool ok = true;
  double worst = 0.0;
  for (int trial = 0; trial < 120; ++trial) {
    auto inst = RandomInstance(&rng);
    Trellis tr = RunTrellis(inst.graph, inst.post);
    double best = AlphaFinal(inst.graph, tr.alpha);
    DecodeConfig dc;
    dc.beam = kInfiniteBeam;
    dc.acoustic_scale = inst.post.scale;
    Hypothesis hyp = ViterbiDecode(ExportWfst(inst.graph),
                                   TransitionTable::Identity(inst.graph.pdim),
                                   inst.post.log_post, dc);
    if (hyp.found != !IsLogZero(best)) ok = false;
    if (hyp.found) {
      worst = std::max(worst, std::abs(hyp.score - best));
      if (std::abs(hyp.score - best) > 1e-9) ok = false;
    }
  }

  // Beam 7 against exhaustive decoding on the trained toy system.
  CompiledGraph g = toy.graph0;
  AmModel am = toy.am0;
  TrainConfig cfg = PaperConfig(TrainMode::kE2e);
  TrainLoop(&g, &am, toy.train, cfg, toy.dir.File("xval"));
  Wfst fst = ExportWfst(g);
  DecodeConfig pruned, full;
  pruned.beam = 7.0;
  full.beam = kInfiniteBeam;
  int agree = 0;
  for (const DatasetEntry &e : toy.eval) {
    Mat logp = AmForward(
        am, Splice(LoadMatrix(e.path), am.cfg.splice_left, am.cfg.splice_right),
        nullptr);
    Hypothesis a = ViterbiDecode(fst, toy.tt, logp, pruned);
    Hypothesis b = ViterbiDecode(fst, toy.tt, logp, full);
    if (a.found == b.found && a.olabels == b.olabels) ++agree;
  }
  double rate = static_cast<double>(agree) / toy.eval.size();
  if (rate < 0.99) ok = false;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "score |err| %.2e; beam-7 agreement %.0f%%", worst,
                100.0 * rate);
  out->Report(6, "decoder cross-validation", ok, buf);
}

struct AdaptationResult {
  double am_ser = 1.0, wfst_ser = 1.0, e2e_ser = 1.0;
  CompiledGraph e2e_graph;
  AmModel e2e_am;
};

void ToyAdaptation(Outcome *out, const ToyRun &toy, AdaptationResult *adapt) {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;

  // Pinned regression point for the generator: measured once at this seed.
  const double kExpectedBaseline = 0.69;
  if (toy.baseline_ser <= 0.0 || toy.baseline_ser >= 1.0) ok = false;
  if (std::abs(toy.baseline_ser - kExpectedBaseline) > 0.05) ok = false;

  auto run_mode = [&](TrainMode mode, const std::string &tag, double *ser,
                      CompiledGraph *graph_out, AmModel *am_out) {
    CompiledGraph g = toy.graph0;
    AmModel am = toy.am0;
    TrainConfig cfg = PaperConfig(mode);
    TrainLoop(&g, &am, toy.train, cfg, toy.dir.File(tag));
    *ser = EvalSer(toy, g, am);
    if (graph_out != nullptr) *graph_out = g;
    if (am_out != nullptr) *am_out = am;
  };
  run_mode(TrainMode::kAmOnly, "am_only", &adapt->am_ser, nullptr, nullptr);
  run_mode(TrainMode::kWfstOnly, "wfst_only", &adapt->wfst_ser, nullptr,
           nullptr);
  run_mode(TrainMode::kE2e, "e2e", &adapt->e2e_ser, &adapt->e2e_graph,
           &adapt->e2e_am);

  if (!(adapt->am_ser < toy.baseline_ser)) ok = false;
  if (!(adapt->wfst_ser < toy.baseline_ser)) ok = false;
  if (!(adapt->e2e_ser < toy.baseline_ser)) ok = false;
  if (!(adapt->e2e_ser <=
        std::min(adapt->am_ser, adapt->wfst_ser) + 0.01 + 1e-12))
    ok = false;

  double secs = SecondsSince(t0);
  if (secs >= 120.0) ok = false;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "SER base %.2f -> am %.2f, wfst %.2f, e2e %.2f; %.1fs "
                "(limit 120s)",
                toy.baseline_ser, adapt->am_ser, adapt->wfst_ser,
                adapt->e2e_ser, secs);
  out->Report(7, "toy adaptation", ok, buf);
}

void ModeMasking(Outcome *out, const ToyRun &toy) {
  bool ok = true;
  std::string graph_before = SerializeGraph(toy.graph0);
  std::string am_before = SerializeAm(toy.am0);

  {
    CompiledGraph g = toy.graph0;
    AmModel am = toy.am0;
    TrainConfig cfg = PaperConfig(TrainMode::kAmOnly);
    cfg.epochs = 4;
    TrainLoop(&g, &am, toy.train, cfg, toy.dir.File("mask_am"));
    if (SerializeGraph(g) != graph_before) ok = false;
    if (SerializeWfst(ExportWfst(g), WeightDomain::kTropical) !=
        SerializeWfst(ExportWfst(toy.graph0), WeightDomain::kTropical))
      ok = false;
  }
  {
    CompiledGraph g = toy.graph0;
    AmModel am = toy.am0;
    TrainConfig cfg = PaperConfig(TrainMode::kWfstOnly);
    cfg.epochs = 4;
    TrainLoop(&g, &am, toy.train, cfg, toy.dir.File("mask_wfst"));
    if (SerializeAm(am) != am_before) ok = false;
    if (ReadFileToString(toy.dir.File("mask_wfst/final.am")) != am_before)
      ok = false;
  }
  out->Report(8, "mode masking", ok,
              "untouched halves stay bit-identical through training");
}

void KlRegularization(Outcome *out, const ToyRun &toy,
                      const AdaptationResult &adapt) {
  // The e2e run from criterion 7 used lambda 0.01; rerun with lambda 0.
  CompiledGraph g = toy.graph0;
  AmModel am_plain = toy.am0;
  TrainConfig cfg = PaperConfig(TrainMode::kE2e);
  cfg.lambda = 0.0;
  TrainLoop(&g, &am_plain, toy.train, cfg, toy.dir.File("e2e_l0"));

  auto mean_kl = [&](const AmModel &adapted) {
    double total = 0.0;
    long frames = 0;
    for (const DatasetEntry &e : toy.train) {
      Mat f = LoadMatrix(e.path);
      Mat lo = AmForward(toy.am0,
                         Splice(f, toy.am0.cfg.splice_left,
                                toy.am0.cfg.splice_right),
                         nullptr);
      Mat la = AmForward(adapted,
                         Splice(f, adapted.cfg.splice_left,
                                adapted.cfg.splice_right),
                         nullptr);
      total += KlRegularizer(lo, la, 1.0).first;
      frames += f.rows;
    }
    return total / frames;
  };
  double kl_reg = mean_kl(adapt.e2e_am);
  double kl_plain = mean_kl(am_plain);
  bool ok = kl_reg < kl_plain;
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "mean KL %.3e (lambda .01) < %.3e (lambda 0)", kl_reg,
                kl_plain);
  out->Report(9, "KL regularization", ok, buf);
}

void Reproducibility(Outcome *out, const ToyRun &toy) {
  bool ok = true;
  auto run = [&](const std::string &tag, int threads) {
    CompiledGraph g = toy.graph0;
    AmModel am = toy.am0;
    TrainConfig cfg = PaperConfig(TrainMode::kE2e);
    cfg.epochs = 4;
    cfg.threads = threads;
    return TrainLoop(&g, &am, toy.train, cfg, toy.dir.File(tag));
  };
  TrainResult r1 = run("repro1", 1);
  TrainResult r2 = run("repro2", 1);
  TrainResult r4 = run("repro4", 2);

  for (const char *name : {"final.vng", "final.am", "epoch-2.vng",
                           "epoch-2.am"}) {
    if (ReadFileToString(toy.dir.File(std::string("repro1/") + name)) !=
        ReadFileToString(toy.dir.File(std::string("repro2/") + name)))
      ok = false;
  }
  // Metrics match byte for byte apart from wall-clock timing.
  if (r1.metrics.size() != r2.metrics.size()) ok = false;
  double worst = 0.0;
  for (size_t k = 0; k < r1.metrics.size() && ok; ++k) {
    if (FormatDouble(r1.metrics[k].mean_loss) !=
            FormatDouble(r2.metrics[k].mean_loss) ||
        FormatDouble(r1.metrics[k].accuracy) !=
            FormatDouble(r2.metrics[k].accuracy))
      ok = false;
    worst = std::max(
        {worst, std::abs(r1.metrics[k].mean_loss - r4.metrics[k].mean_loss),
         std::abs(r1.metrics[k].accuracy - r4.metrics[k].accuracy)});
  }
  if (worst > 1e-12) ok = false;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "same-seed runs byte-identical; threaded |err| %.1e", worst);
  out->Report(10, "reproducibility", ok, buf);
}

}  // namespace
}  // namespace vnet

int main() {
  using namespace vnet;
  Outcome out;
  try {
    OracleEquivalence(&out);
    LogDomainEquivalence(&out);
    GradientCorrectness(&out);
    ToyRun toy = MakeToyRun();
    RoundTrip(&out, toy);
    DecoderCrossValidation(&out, toy);
    AdaptationResult adapt;
    ToyAdaptation(&out, toy, &adapt);
    ModeMasking(&out, toy);
    KlRegularization(&out, toy, adapt);
    Reproducibility(&out, toy);
  } catch (const std::exception &e) {
    std::fprintf(stderr, "acceptance aborted: %s\n", e.what());
    return 99;
  }
  if (out.failures == 0) std::printf("all criteria passed\n");
  return out.failures;
}
