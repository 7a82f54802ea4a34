// vnet/synth.h

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

#ifndef VNET_SYNTH_H_
#define VNET_SYNTH_H_

#include <string>
#include <vector>

#include "vnet/am.h"
#include "vnet/wfst.h"

namespace vnet {

// Synthetic command-recognition task: random phone-string commands (some
// sharing prefixes), a star grammar with one branch per command and the
// command olabel on the branch's last arc, per-state self-loops so phones
// may stretch, and per-utterance posterior-like feature matrices (one-hot
// over the true phone mixed with uniform noise). Phone 1 is a silence
// shared as every command's first and last phone. A small feed-forward
// model pretrained on frame labels is written as the adaptation seed.
struct SynthConfig {
  uint64_t seed = 1;
  int num_commands = 5;
  int num_phones = 8;       // P; ilabels 1..P, pdf = ilabel - 1
  int frames_per_phone = 3;
  double noise = 0.6;       // 0 = exact one-hot posteriors
  int train_utts = 200;
  int eval_utts = 100;
  // Seed model shape.
  int am_hidden_layers = 1;
  int am_hidden_units = 32;
  int am_splice = 2;
  int pretrain_epochs = 6;
  std::string out_dir;
};

struct SynthResult {
  std::string fst_path;       // grammar.fst (tropical text)
  std::string ttable_path;    // tt.txt
  std::string train_manifest; // train.tsv
  std::string eval_manifest;  // eval.tsv
  std::string am_path;        // am0.ckpt
  std::string words_path;     // words.txt
  std::string phones_path;    // phones.txt
  std::vector<std::vector<Label>> commands;  // phone strings
};

// Writes the whole task under cfg.out_dir. Deterministic in cfg.seed.
// Throws ValidationError on degenerate requests (fewer than 2 commands or
// phones, or more commands than distinct phone strings of length 3).
SynthResult Synthesize(const SynthConfig &cfg);

}  // namespace vnet

#endif  // VNET_SYNTH_H_
