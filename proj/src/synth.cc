// vnet/synth.cc

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

#include "vnet/synth.h"

#include <algorithm>
#include <filesystem>
#include <set>

#include "vnet/compile.h"
#include "vnet/train.h"
#include "vnet/trellis.h"

namespace vnet {

namespace {

constexpr Label kSil = 1;

std::string PhoneName(Label p) {
  if (p == kSil) return "sil";
  if (p - 2 < 26) return std::string(1, static_cast<char>('a' + p - 2));
  return "p" + std::to_string(p);
}

// Random phone cores (without the flanking silences), some sharing a prefix
// of an earlier command. Lengths start at 2..4 and stretch if a small phone
// set cannot supply enough distinct strings.
std::vector<std::vector<Label>> MakeCommands(const SynthConfig &cfg,
                                             Rng *rng) {
  std::set<std::vector<Label>> seen;
  std::vector<std::vector<Label>> cores;
  // Adjacent phones are kept distinct: equal neighbors would let alignments
  // shift between two states with identical emissions and tie exactly,
  // which breaks finite-difference comparisons against max subgradients.
  auto random_phone = [&](Label prev) -> Label {
    if (cfg.num_phones < 3) return 2;
    for (;;) {
      Label p = 2 + rng->UniformInt(cfg.num_phones - 1);
      if (p != prev) return p;
    }
  };
  for (int u = 0; u < cfg.num_commands; ++u) {
    int len = 2 + rng->UniformInt(3);
    for (int attempt = 0;; ++attempt) {
      std::vector<Label> core;
      if (u > 0 && rng->Uniform() < 0.4) {
        const std::vector<Label> &donor = cores[rng->UniformInt(u)];
        int keep = 1 + rng->UniformInt(static_cast<int>(donor.size()));
        core.assign(donor.begin(), donor.begin() + keep);
      }
      while (static_cast<int>(core.size()) < len)
        core.push_back(random_phone(core.empty() ? 0 : core.back()));
      if (seen.insert(core).second) {
        cores.push_back(std::move(core));
        break;
      }
      if (attempt > 0 && attempt % 50 == 0) ++len;  // tiny phone sets
    }
  }
  return cores;
}

Wfst MakeGrammar(const std::vector<std::vector<Label>> &cores) {
  Wfst w;
  w.start = 0;
  StateId next = 1;
  // Shared silence self-loop on the start.
  w.arcs.push_back(Arc{0, 0, kSil, 0, 0.0});
  for (size_t u = 0; u < cores.size(); ++u) {
    std::vector<Label> str;
    str.push_back(kSil);
    str.insert(str.end(), cores[u].begin(), cores[u].end());
    str.push_back(kSil);
    StateId prev = 0;
    for (size_t j = 0; j < str.size(); ++j) {
      StateId s = next++;
      bool last = j + 1 == str.size();
      w.arcs.push_back(Arc{prev, s, str[j],
                           last ? static_cast<Label>(u + 1) : 0, 0.0});
      if (!last) w.arcs.push_back(Arc{s, s, str[j + 1], 0, 0.0});
      prev = s;
    }
    w.finals.emplace(prev, 0.0);
  }
  w.num_states = next;

  w.isyms.id_to_sym.resize(2);
  w.isyms.id_to_sym[0] = "<eps>";
  w.osyms.id_to_sym.resize(cores.size() + 1);
  w.osyms.id_to_sym[0] = "<eps>";
  for (size_t u = 0; u < cores.size(); ++u) {
    std::string name;
    for (Label p : cores[u]) name += PhoneName(p);
    w.osyms.id_to_sym[u + 1] = name;
  }
  Validate(w);
  return w;
}

struct Utterance {
  Mat features;                  // noisy posterior rows
  std::vector<int> frame_pdf;    // true pdf per frame
  int label = 0;
};

Utterance MakeUtterance(const SynthConfig &cfg,
                        const std::vector<Label> &core, int label, Rng *rng) {
  std::vector<Label> str;
  str.push_back(kSil);
  str.insert(str.end(), core.begin(), core.end());
  str.push_back(kSil);

  std::vector<int> pdfs;
  for (Label p : str) {
    int reps = cfg.frames_per_phone + (rng->UniformInt(3) - 1);  // jitter +-1
    reps = std::max(1, reps);
    for (int r = 0; r < reps; ++r) pdfs.push_back(p - 1);
  }

  const int P = cfg.num_phones;
  Utterance utt;
  utt.label = label;
  utt.frame_pdf = pdfs;
  utt.features = Mat(static_cast<int>(pdfs.size()), P, 0.0);
  for (int t = 0; t < utt.features.rows; ++t) {
    double *row = utt.features.Row(t);
    double noise_part[256];
    double sum = 0.0;
    for (int j = 0; j < P; ++j) {
      noise_part[j] = rng->Uniform();
      sum += noise_part[j];
    }
    // With probability `noise` the frame is pure noise; otherwise the true
    // phone keeps a 1 - noise share.
    bool destroyed = rng->Uniform() < cfg.noise;
    for (int j = 0; j < P; ++j) {
      double g = noise_part[j] / sum;
      row[j] = destroyed ? g : (1.0 - cfg.noise) * (j == pdfs[t]) + cfg.noise * g;
    }
  }
  return utt;
}

// Frame-level cross-entropy pretraining of the seed model against the true
// phone labels. This stands in for an AM trained on matched data; the
// adaptation loop only ever sees command labels.
void PretrainAm(AmModel *am, const std::vector<Utterance> &utts,
                const SynthConfig &cfg, Rng *rng) {
  TrainConfig opt;
  opt.lr = 0.001;
  AdamState adam;
  std::vector<int> order(utts.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 0; epoch < cfg.pretrain_epochs; ++epoch) {
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
      std::swap(order[i], order[rng->UniformInt(i + 1)]);
    const int batch = 8;
    for (size_t begin = 0; begin < order.size(); begin += batch) {
      size_t end = std::min(order.size(), begin + batch);
      AmGrads grads = ZeroAmGrads(*am);
      int frames = 0;
      for (size_t k = begin; k < end; ++k) {
        const Utterance &utt = utts[order[k]];
        AmCache cache;
        Mat spliced = Splice(utt.features, am->cfg.splice_left,
                             am->cfg.splice_right);
        Mat logp = AmForward(*am, spliced, &cache);
        Mat d_logits(logp.rows, logp.cols);
        for (int t = 0; t < logp.rows; ++t)
          for (int j = 0; j < logp.cols; ++j)
            d_logits(t, j) =
                std::exp(logp(t, j)) - (j == utt.frame_pdf[t] ? 1.0 : 0.0);
        AccumulateAmGrads(&grads, AmBackward(*am, cache, d_logits));
        frames += logp.rows;
      }
      ScaleAmGrads(&grads, 1.0 / frames);
      AdamStepDense(am, grads, &adam, opt);
    }
  }
}

}  // namespace

SynthResult Synthesize(const SynthConfig &cfg) {
  if (cfg.num_commands < 2 || cfg.num_phones < 2)
    throw ValidationError("need at least 2 commands and 2 phones");
  if (static_cast<long>(cfg.num_commands) >
      static_cast<long>(cfg.num_phones) * cfg.num_phones * cfg.num_phones)
    throw ValidationError("degenerate request: more commands than phone "
                          "strings of length 3");
  if (cfg.num_phones > 255)
    throw ValidationError("phone set too large");
  if (cfg.noise < 0.0 || cfg.noise > 1.0)
    throw ValidationError("noise must be in [0, 1]");

  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  fs::create_directories(cfg.out_dir + "/feats");

  Rng rng(cfg.seed ^ 0x73796e7468ULL);
  std::vector<std::vector<Label>> cores = MakeCommands(cfg, &rng);
  Wfst grammar = MakeGrammar(cores);

  SynthResult res;
  res.commands = cores;
  res.fst_path = cfg.out_dir + "/grammar.fst";
  res.ttable_path = cfg.out_dir + "/tt.txt";
  res.train_manifest = cfg.out_dir + "/train.tsv";
  res.eval_manifest = cfg.out_dir + "/eval.tsv";
  res.am_path = cfg.out_dir + "/am0.ckpt";
  res.words_path = cfg.out_dir + "/words.txt";
  res.phones_path = cfg.out_dir + "/phones.txt";

  SaveWfst(grammar, res.fst_path, WeightDomain::kTropical);
  WriteStringToFile(res.ttable_path, SerializeTransitionTable(
                                         TransitionTable::Identity(cfg.num_phones)));
  WriteStringToFile(res.words_path, SerializeSymbolTable(grammar.osyms));
  SymbolTable phones;
  phones.id_to_sym.push_back("<eps>");
  for (Label p = 1; p <= cfg.num_phones; ++p)
    phones.id_to_sym.push_back(PhoneName(p));
  WriteStringToFile(res.phones_path, SerializeSymbolTable(phones));

  auto make_split = [&](const std::string &prefix, int count,
                        const std::string &manifest_path,
                        std::vector<Utterance> *keep) {
    std::string manifest;
    for (int i = 0; i < count; ++i) {
      int label = i % cfg.num_commands;
      Utterance utt = MakeUtterance(cfg, cores[label], label, &rng);
      char name[64];
      std::snprintf(name, sizeof(name), "%s_%04d", prefix.c_str(), i);
      std::string rel = "feats/" + std::string(name) + ".mat";
      SaveMatrix(utt.features, cfg.out_dir + "/" + rel);
      manifest += std::string(name) + "\t" + rel + "\t" +
                  std::to_string(label) + "\n";
      if (keep != nullptr) keep->push_back(std::move(utt));
    }
    WriteStringToFile(manifest_path, manifest);
  };

  std::vector<Utterance> train_utts;
  make_split("train", cfg.train_utts, res.train_manifest, &train_utts);
  make_split("eval", cfg.eval_utts, res.eval_manifest, nullptr);

  AmConfig am_cfg;
  am_cfg.input_dim = cfg.num_phones;
  am_cfg.splice_left = cfg.am_splice;
  am_cfg.splice_right = cfg.am_splice;
  am_cfg.hidden_layers = cfg.am_hidden_layers;
  am_cfg.hidden_units = cfg.am_hidden_units;
  am_cfg.pdim = cfg.num_phones;
  AmModel am = InitAm(am_cfg, rng.Next());
  PretrainAm(&am, train_utts, cfg, &rng);
  SaveAm(am, res.am_path);

  return res;
}

}  // namespace vnet
