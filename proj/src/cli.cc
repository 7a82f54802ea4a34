// vnet/cli.cc

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

#include "vnet/cli.h"

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"

#include "vnet/compile.h"
#include "vnet/decode.h"
#include "vnet/oracle.h"
#include "vnet/synth.h"
#include "vnet/train.h"

namespace vnet {
namespace cli {

namespace {

WeightDomain DomainFromString(const std::string &s) {
  if (s == "tropical") return WeightDomain::kTropical;
  if (s == "probability") return WeightDomain::kProbability;
  throw ValidationError("unknown weight domain: " + s +
                        " (use tropical or probability)");
}

TrainMode ModeFromString(const std::string &s) {
  if (s == "am") return TrainMode::kAmOnly;
  if (s == "wfst") return TrainMode::kWfstOnly;
  if (s == "e2e") return TrainMode::kE2e;
  throw ValidationError("unknown mode: " + s + " (use am, wfst or e2e)");
}

void SetThreads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

struct CompileOpts {
  std::string fst, ttable, out, domain = "tropical";
  int pdim = 0;
};

int RunCompile(const CompileOpts &o) {
  Wfst w = LoadWfst(o.fst, DomainFromString(o.domain));
  auto [clean, report] = RemoveEpsilons(w);
  std::fprintf(stderr,
               "epsilon removal: %d removed, %d on cycles, %d carrying "
               "olabels\n",
               report.removed, report.surviving_cycle,
               report.surviving_olabel);
  Wfst normalized = NormalizeIlabels(clean);
  if (normalized.num_states != clean.num_states)
    std::fprintf(stderr, "ilabel normalization: %d -> %d states\n",
                 clean.num_states, normalized.num_states);
  TransitionTable tt = o.ttable.empty() ? TransitionTable::Identity(o.pdim)
                                        : LoadTransitionTable(o.ttable);
  CompiledGraph g = Compile(normalized, tt, o.pdim);
  SaveGraph(g, o.out);
  std::fprintf(stderr, "compiled: S=%d P=%d C=%d arcs=%zu eps=%zu\n",
               g.num_states, g.pdim, g.num_commands, g.arcs.size(),
               g.eps_arcs.size());
  return kExitOk;
}

struct SynthOpts {
  SynthConfig cfg;
};

int RunSynth(const SynthOpts &o) {
  SynthResult res = Synthesize(o.cfg);
  std::printf("grammar %s\n", res.fst_path.c_str());
  std::printf("ttable %s\n", res.ttable_path.c_str());
  std::printf("train %s\n", res.train_manifest.c_str());
  std::printf("eval %s\n", res.eval_manifest.c_str());
  std::printf("am %s\n", res.am_path.c_str());
  return kExitOk;
}

struct TrainOpts {
  std::string graph, am, data, out, mode = "e2e";
  bool posteriors = false;
  TrainConfig cfg;
};

int RunTrain(const TrainOpts &o) {
  if (o.am.empty() && !o.posteriors)
    throw ValidationError("need --am or --posteriors");
  if (!o.am.empty() && o.posteriors)
    throw ValidationError("--am and --posteriors are mutually exclusive");
  TrainConfig cfg = o.cfg;
  cfg.mode = ModeFromString(o.mode);
  CompiledGraph g = LoadGraph(o.graph);
  std::unique_ptr<AmModel> am;
  if (!o.am.empty()) am = std::make_unique<AmModel>(LoadAm(o.am));
  std::vector<DatasetEntry> data = LoadManifest(o.data);
  TrainResult res = TrainLoop(&g, am.get(), data, cfg, o.out);
  for (const EpochMetrics &m : res.metrics)
    std::printf("%s\n", FormatMetricsLine(m).c_str());
  return kExitOk;
}

struct ScoreOpts {
  std::string graph, posteriors, am, features;
  double acwt = 0.07;
};

int RunScore(const ScoreOpts &o) {
  CompiledGraph g = LoadGraph(o.graph);
  Mat logp;
  if (!o.posteriors.empty()) {
    logp = LinearToLogPosteriors(LoadMatrix(o.posteriors));
  } else if (!o.am.empty() && !o.features.empty()) {
    AmModel am = LoadAm(o.am);
    logp = AmForward(
        am, Splice(LoadMatrix(o.features), am.cfg.splice_left,
                   am.cfg.splice_right),
        nullptr);
  } else {
    throw ValidationError("need --posteriors or --am plus --features");
  }
  PosteriorSequence post;
  post.log_post = std::move(logp);
  post.scale = o.acwt;
  Trellis tr = RunTrellis(g, post);
  OutputScores scores = ComputeOutputScores(g, tr);
  for (int u = 0; u < g.num_commands; ++u)
    std::printf("%d %s\n", u, FormatDouble(scores.pooled[u]).c_str());
  return kExitOk;
}

struct DecodeOpts {
  std::string fst, ttable, am, data, out;
  bool posteriors = false;
  double beam = 7.0, acwt = 0.07;
  int threads = 1;
};

int RunDecode(const DecodeOpts &o) {
  if (o.am.empty() && !o.posteriors)
    throw ValidationError("need --am or --posteriors");
  Wfst w = LoadWfst(o.fst, WeightDomain::kTropical);
  TransitionTable tt = LoadTransitionTable(o.ttable);
  std::unique_ptr<AmModel> am;
  if (!o.am.empty()) am = std::make_unique<AmModel>(LoadAm(o.am));
  std::vector<DatasetEntry> data = LoadManifest(o.data);

  DecodeConfig cfg;
  cfg.beam = o.beam;
  cfg.acoustic_scale = o.acwt;

  const int n = static_cast<int>(data.size());
  std::vector<Hypothesis> hyps(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(o.threads)
  for (int i = 0; i < n; ++i) {
    Mat m = LoadMatrix(data[i].path);
    Mat logp = am != nullptr
                   ? AmForward(*am, Splice(m, am->cfg.splice_left,
                                           am->cfg.splice_right),
                               nullptr)
                   : LinearToLogPosteriors(m);
    hyps[i] = ViterbiDecode(w, tt, logp, cfg);
  }

  std::string out;
  for (int i = 0; i < n; ++i) {
    out += data[i].utt;
    out += '\t';
    for (size_t k = 0; k < hyps[i].olabels.size(); ++k) {
      if (k) out += ' ';
      out += std::to_string(hyps[i].olabels[k]);
    }
    out += '\t';
    out += hyps[i].found ? FormatDouble(hyps[i].score) : "NOPATH";
    out += '\n';
  }
  WriteStringToFile(o.out, out);
  std::fprintf(stderr, "decoded %d utterances -> %s\n", n, o.out.c_str());
  return kExitOk;
}

struct EvalOpts {
  std::string hyp, ref;
};

int RunEval(const EvalOpts &o) {
  std::vector<DatasetEntry> refs = LoadManifest(o.ref);
  std::map<std::string, std::vector<Label>> hyp_olabels;
  std::string text = ReadFileToString(o.hyp);
  size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    std::string line = nl == std::string::npos ? text.substr(pos)
                                               : text.substr(pos, nl - pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    size_t tab1 = line.find('\t');
    size_t tab2 = tab1 == std::string::npos ? std::string::npos
                                            : line.find('\t', tab1 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos)
      throw ParseError(o.hyp + " line " + std::to_string(line_no) +
                       ": expected `utt<TAB>olabels<TAB>score`");
    std::vector<Label> ols;
    for (const std::string &tok :
         SplitFields(line.substr(tab1 + 1, tab2 - tab1 - 1)))
      ols.push_back(static_cast<Label>(ParseIntStrict(tok, o.hyp)));
    hyp_olabels[line.substr(0, tab1)] = std::move(ols);
  }

  int errors = 0;
  for (const DatasetEntry &e : refs) {
    auto it = hyp_olabels.find(e.utt);
    bool correct = it != hyp_olabels.end() && it->second.size() == 1 &&
                   it->second[0] == e.label + 1;
    if (!correct) ++errors;
  }
  double ser = refs.empty() ? 0.0 : static_cast<double>(errors) / refs.size();
  std::printf("SER %.4f (%d/%zu)\n", ser, errors, refs.size());
  return kExitOk;
}

struct ExportOpts {
  std::string graph, out, domain = "tropical";
};

int RunExport(const ExportOpts &o) {
  CompiledGraph g = LoadGraph(o.graph);
  SaveWfst(ExportWfst(g), o.out, DomainFromString(o.domain));
  return kExitOk;
}

struct GradcheckOpts {
  std::string graph, am, data, mode = "e2e";
  int n = 1;
  double lambda = 0.01, acwt = 0.07;
  bool corrupt = false;
};

double RelErr(double a, double f) {
  return std::abs(a - f) / std::max({1.0, std::abs(a), std::abs(f)});
}

int RunGradcheck(const GradcheckOpts &o) {
  CompiledGraph g = LoadGraph(o.graph);
  std::unique_ptr<AmModel> am;
  if (!o.am.empty()) am = std::make_unique<AmModel>(LoadAm(o.am));
  std::vector<DatasetEntry> data = LoadManifest(o.data);
  if (data.empty()) throw ValidationError("empty manifest");

  if (g.num_states > 64 || static_cast<int>(g.arcs.size()) > 256)
    throw ValidationError(
        "gradcheck instance too large; use a smaller graph (S <= 64, "
        "arcs <= 256)");

  TrainConfig cfg;
  cfg.mode = ModeFromString(o.mode);
  cfg.lambda = o.lambda;
  cfg.acoustic_scale = o.acwt;

  const double h = 1e-5;
  double max_err = 0.0;
  int checked = std::min<int>(o.n, static_cast<int>(data.size()));
  for (int i = 0; i < checked; ++i) {
    Mat raw = LoadMatrix(data[i].path);
    Mat input = am != nullptr ? raw : LinearToLogPosteriors(raw);
    if (input.rows > 64)
      throw ValidationError("gradcheck utterance too long (T <= 64)");

    Mat logp_org;
    if (am != nullptr && cfg.lambda > 0.0)
      logp_org = AmForward(
          *am, Splice(input, am->cfg.splice_left, am->cfg.splice_right),
          nullptr);

    UttResult base = ComputeUtterance(g, am.get(), input, logp_org,
                                      data[i].label, cfg, true);
    if (base.skipped) {
      std::fprintf(stderr, "skipping %s: no path\n", data[i].utt.c_str());
      continue;
    }
    if (o.corrupt) {
      for (auto &[arc, v] : base.bundle.d_logv) v *= 1.5;
      for (double &v : base.bundle.d_logpost.data) v *= 1.5;
      for (auto &w : base.am_grads.d_weights)
        for (double &v : w.data) v *= 1.5;
    }

    // d_logv against central differences on every arc weight. Masked-off
    // gradients are a training policy, not a statement that the loss is
    // flat, so each side is only checked in modes that compute it.
    if (cfg.mode != TrainMode::kAmOnly) {
      std::vector<double> point(g.arcs.size());
      for (size_t k = 0; k < g.arcs.size(); ++k)
        point[k] = g.arcs[k].log_weight;
      auto lossfn = [&](const std::vector<double> &v) {
        CompiledGraph gx = g;
        for (size_t k = 0; k < v.size(); ++k) gx.arcs[k].log_weight = v[k];
        return ComputeUtterance(gx, am.get(), input, logp_org, data[i].label,
                                cfg, false)
            .loss;
      };
      std::vector<double> fd = FiniteDiff(lossfn, point, h);
      for (size_t k = 0; k < fd.size(); ++k) {
        auto it = base.bundle.d_logv.find(static_cast<ArcId>(k));
        double analytic = it == base.bundle.d_logv.end() ? 0.0 : it->second;
        max_err = std::max(max_err, RelErr(analytic, fd[k]));
      }
    }

    if (am == nullptr && cfg.mode != TrainMode::kWfstOnly) {
      // d_logpost against central differences on the log posteriors.
      auto lossfn = [&](const std::vector<double> &v) {
        Mat mx = input;
        mx.data = v;
        return ComputeUtterance(g, nullptr, mx, logp_org, data[i].label, cfg,
                                false)
            .loss;
      };
      std::vector<double> fd = FiniteDiff(lossfn, input.data, h);
      for (size_t k = 0; k < fd.size(); ++k)
        max_err = std::max(max_err, RelErr(base.bundle.d_logpost.data[k], fd[k]));
    } else if (am != nullptr && cfg.mode != TrainMode::kWfstOnly) {
      // Every model parameter against central differences.
      for (int l = 0; l < am->NumLayers(); ++l) {
        auto check_block = [&](std::vector<double> *block,
                               const std::vector<double> &analytic) {
          auto lossfn = [&](const std::vector<double> &v) {
            std::vector<double> saved = *block;
            *block = v;
            double loss = ComputeUtterance(g, am.get(), input, logp_org,
                                           data[i].label, cfg, false)
                              .loss;
            *block = saved;
            return loss;
          };
          std::vector<double> fd = FiniteDiff(lossfn, *block, h);
          for (size_t k = 0; k < fd.size(); ++k)
            max_err = std::max(max_err, RelErr(analytic[k], fd[k]));
        };
        check_block(&am->weights[l].data, base.am_grads.d_weights[l].data);
        check_block(&am->biases[l], base.am_grads.d_biases[l]);
      }
    }
  }

  bool pass = max_err <= 1e-4;
  std::printf("%s max_rel_err %s\n", pass ? "PASS" : "FAIL",
              FormatDouble(max_err).c_str());
  return pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

namespace {

// Flat `key = value` lines with `#` comments. Values are injected as flags
// unless the command line already sets the key, so flags win.
std::vector<std::pair<std::string, std::string>> ParseConfigFile(
    const std::string &path) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string text = ReadFileToString(path);
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string line = nl == std::string::npos ? text.substr(pos)
                                               : text.substr(pos, nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto strip = [](std::string s) {
      size_t b = s.find_first_not_of(" \t\r");
      size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path + " line " + std::to_string(line_no) +
                            ": expected `key = value`");
    std::string key = strip(line.substr(0, eq));
    std::string value = strip(line.substr(eq + 1));
    if (key.empty())
      throw ValidationError(path + " line " + std::to_string(line_no) +
                            ": empty key");
    entries.emplace_back(key, value);
  }
  return entries;
}

// Pulls `--config FILE` out of the raw arguments and expands the file into
// ordinary options for the selected subcommand.
std::vector<std::string> ExpandConfig(const std::vector<std::string> &args,
                                      const CLI::App &app) {
  std::string config_path;
  std::vector<std::string> out;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      out.push_back(args[i]);
    }
  }
  if (config_path.empty()) return out;

  const CLI::App *sub = nullptr;
  for (size_t i = 1; i < out.size(); ++i) {
    if (out[i].empty() || out[i][0] == '-') continue;
    sub = app.get_subcommand_no_throw(out[i]);
    break;
  }
  if (sub == nullptr)
    throw ValidationError("--config requires a subcommand");

  std::set<std::string> given;
  for (const std::string &a : out)
    if (a.rfind("--", 0) == 0) given.insert(a.substr(0, a.find('=')));

  for (const auto &[key, value] : ParseConfigFile(config_path)) {
    std::string flag = "--" + key;
    const CLI::Option *opt =
        const_cast<CLI::App *>(sub)->get_option_no_throw(flag);
    if (opt == nullptr)
      throw ValidationError("unknown config key '" + key + "' for `" +
                            sub->get_name() + "`");
    if (given.count(flag)) continue;  // explicit flags win
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1") out.push_back(flag);
      else if (value != "false" && value != "0")
        throw ValidationError("config key '" + key + "' expects true/false");
    } else {
      out.push_back(flag);
      out.push_back(value);
    }
  }
  return out;
}

void LogResolvedConfig(CLI::App &app) {
  std::vector<CLI::App *> active = app.get_subcommands();
  if (active.empty()) return;
  std::fprintf(stderr, "# %s configuration\n", active[0]->get_name().c_str());
  for (const CLI::Option *opt : active[0]->get_options()) {
    std::string name = opt->get_name();
    if (name.empty() || name == "--help" || name == "--config") continue;
    std::string value = opt->count() > 0 ? opt->as<std::string>()
                                         : opt->get_default_str();
    std::fprintf(stderr, "#   %s = %s\n", name.c_str(), value.c_str());
  }
}

}  // namespace

int Run(int argc, const char *const *argv) {
  CLI::App app{"differentiable WFST toolkit for spoken command recognition"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default(true);

  auto add_config = [](CLI::App *sub) {
    sub->add_option("--config",
                    "flat key=value file supplying defaults; flags win")
        ->option_text("FILE");
  };

  CompileOpts compile_o;
  CLI::App *c = app.add_subcommand(
      "compile", "compile a text WFST into a trainable graph");
  c->add_option("--fst", compile_o.fst, "input WFST (text)")->required();
  c->add_option("--ttable", compile_o.ttable,
                "ilabel->pdf table; identity when omitted");
  c->add_option("--pdim", compile_o.pdim, "posterior dimensionality")
      ->required();
  c->add_option("--domain", compile_o.domain, "tropical|probability");
  c->add_option("--out", compile_o.out, "output graph (.vng)")->required();
  add_config(c);

  SynthOpts synth_o;
  CLI::App *sy = app.add_subcommand("synth", "generate a synthetic task");
  sy->add_option("--out", synth_o.cfg.out_dir, "output directory")->required();
  sy->add_option("--seed", synth_o.cfg.seed, "rng seed");
  sy->add_option("--commands", synth_o.cfg.num_commands, "command count");
  sy->add_option("--phones", synth_o.cfg.num_phones, "phone count");
  sy->add_option("--frames-per-phone", synth_o.cfg.frames_per_phone,
                 "nominal frames per phone");
  sy->add_option("--noise", synth_o.cfg.noise, "noise level in [0,1]");
  sy->add_option("--train-utts", synth_o.cfg.train_utts, "training utterances");
  sy->add_option("--eval-utts", synth_o.cfg.eval_utts, "evaluation utterances");
  sy->add_option("--pretrain-epochs", synth_o.cfg.pretrain_epochs,
                 "seed model pretraining epochs");
  add_config(sy);

  TrainOpts train_o;
  CLI::App *t = app.add_subcommand("train", "adapt a graph and/or model");
  t->add_option("--graph", train_o.graph, "compiled graph (.vng)")->required();
  t->add_option("--am", train_o.am, "acoustic model checkpoint");
  t->add_flag("--posteriors", train_o.posteriors,
              "manifest paths are posterior files, no model");
  t->add_option("--data", train_o.data, "training manifest (.tsv)")->required();
  t->add_option("--mode", train_o.mode, "am|wfst|e2e");
  t->add_option("--lr", train_o.cfg.lr, "Adam learning rate");
  t->add_option("--beta1", train_o.cfg.beta1, "Adam beta1");
  t->add_option("--beta2", train_o.cfg.beta2, "Adam beta2");
  t->add_option("--batch", train_o.cfg.batch_size, "minibatch size");
  t->add_option("--epochs", train_o.cfg.epochs, "training epochs");
  t->add_option("--lambda", train_o.cfg.lambda, "KL regularization weight");
  t->add_option("--acwt", train_o.cfg.acoustic_scale, "acoustic scale");
  t->add_option("--seed", train_o.cfg.seed, "shuffle seed");
  t->add_option("--threads", train_o.cfg.threads, "worker threads");
  t->add_option("--out", train_o.out, "output directory")->required();
  add_config(t);

  ScoreOpts score_o;
  CLI::App *sc = app.add_subcommand("score",
                                    "print pooled command scores for one "
                                    "utterance");
  sc->add_option("--graph", score_o.graph, "compiled graph (.vng)")->required();
  sc->add_option("--posteriors", score_o.posteriors, "posterior matrix file");
  sc->add_option("--am", score_o.am, "acoustic model checkpoint");
  sc->add_option("--features", score_o.features, "feature matrix file");
  sc->add_option("--acwt", score_o.acwt, "acoustic scale");
  add_config(sc);

  DecodeOpts decode_o;
  CLI::App *d = app.add_subcommand("decode", "beam-decode a dataset");
  d->add_option("--fst", decode_o.fst, "decoding WFST (text, tropical)")
      ->required();
  d->add_option("--ttable", decode_o.ttable, "ilabel->pdf table")->required();
  d->add_option("--am", decode_o.am, "acoustic model checkpoint");
  d->add_flag("--posteriors", decode_o.posteriors,
              "manifest paths are posterior files, no model");
  d->add_option("--data", decode_o.data, "manifest (.tsv)")->required();
  d->add_option("--beam", decode_o.beam, "pruning beam (log margin)");
  d->add_option("--acwt", decode_o.acwt, "acoustic scale");
  d->add_option("--threads", decode_o.threads, "worker threads");
  d->add_option("--out", decode_o.out, "hypothesis output (.tsv)")->required();
  add_config(d);

  EvalOpts eval_o;
  CLI::App *e = app.add_subcommand("eval", "sentence error rate");
  e->add_option("--hyp", eval_o.hyp, "hypothesis file from decode")->required();
  e->add_option("--ref", eval_o.ref, "reference manifest (.tsv)")->required();
  add_config(e);

  ExportOpts export_o;
  CLI::App *x = app.add_subcommand("export",
                                   "convert a trained graph back to a text "
                                   "WFST");
  x->add_option("--graph", export_o.graph, "compiled graph (.vng)")->required();
  x->add_option("--out", export_o.out, "output WFST path")->required();
  x->add_option("--domain", export_o.domain, "tropical|probability");
  add_config(x);

  GradcheckOpts gc_o;
  CLI::App *gc = app.add_subcommand(
      "gradcheck", "compare analytic gradients with finite differences");
  gc->add_option("--graph", gc_o.graph, "compiled graph (.vng)")->required();
  gc->add_option("--am", gc_o.am, "acoustic model checkpoint");
  gc->add_option("--data", gc_o.data, "manifest (.tsv)")->required();
  gc->add_option("--n", gc_o.n, "utterances to check");
  gc->add_option("--mode", gc_o.mode, "am|wfst|e2e");
  gc->add_option("--lambda", gc_o.lambda, "KL regularization weight");
  gc->add_option("--acwt", gc_o.acwt, "acoustic scale");
  gc->add_flag("--corrupt-gradients", gc_o.corrupt)->group("");
  add_config(gc);

  int threads = 0;
  app.add_option("--threads", threads, "worker threads (global cap)");

  std::vector<std::string> raw(argv, argv + argc);
  std::vector<std::string> expanded;
  try {
    expanded = ExpandConfig(raw, app);
  } catch (const std::exception &err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitUsage;
  }

  try {
    std::vector<const char *> cargv;
    cargv.reserve(expanded.size());
    for (const std::string &a : expanded) cargv.push_back(a.c_str());
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp &err) {
    return app.exit(err);
  } catch (const CLI::ParseError &err) {
    app.exit(err);
    return kExitUsage;
  }

  SetThreads(threads);
  LogResolvedConfig(app);

  try {
    if (app.got_subcommand(c)) return RunCompile(compile_o);
    if (app.got_subcommand(sy)) return RunSynth(synth_o);
    if (app.got_subcommand(t)) return RunTrain(train_o);
    if (app.got_subcommand(sc)) return RunScore(score_o);
    if (app.got_subcommand(d)) return RunDecode(decode_o);
    if (app.got_subcommand(e)) return RunEval(eval_o);
    if (app.got_subcommand(x)) return RunExport(export_o);
    if (app.got_subcommand(gc)) return RunGradcheck(gc_o);
  } catch (const std::exception &err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitData;
  }
  return kExitUsage;
}

int Run(const std::vector<std::string> &args) {
  std::vector<const char *> argv;
  argv.reserve(args.size());
  for (const std::string &a : args) argv.push_back(a.c_str());
  return Run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace cli
}  // namespace vnet
