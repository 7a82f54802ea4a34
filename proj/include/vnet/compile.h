// vnet/compile.h

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

#ifndef VNET_COMPILE_H_
#define VNET_COMPILE_H_

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vnet/wfst.h"

namespace vnet {

// Map from ilabel id to acoustic pdf index in [0, pdim).
struct TransitionTable {
  std::unordered_map<Label, int32_t> to_pdf;

  bool Has(Label l) const { return to_pdf.count(l) != 0; }
  int32_t Pdf(Label l) const;

  // Identity mapping: ilabel id i -> pdf i - 1, for i in [1, pdim].
  static TransitionTable Identity(int pdim);
};

TransitionTable ParseTransitionTable(const std::string &text);
std::string SerializeTransitionTable(const TransitionTable &tt);
TransitionTable LoadTransitionTable(const std::string &path);

// One trainable transition: entry [dst][src] of the sparse matrix V.
// Parallel arcs between the same state pair stay distinct so gradients
// attach to individual arcs.
struct CompiledArc {
  StateId src = 0;
  StateId dst = 0;
  Label ilabel = 0;
  Label olabel = 0;
  double log_weight = 0.0;  // trainable
  ArcId orig_index = 0;     // position in the source Wfst's arc list
};

struct EpsArc {
  Arc arc;
  ArcId orig_index = 0;
};

// Trainable sparse representation of a normalized Wfst:
//  - the emission map W is stored as a per-state pdf gather (each row of W
//    has at most one 1),
//  - V is the arc list plus CSR-style indexes grouped by destination (for
//    the forward recursion) and by source (for the backward recursion),
//  - surviving epsilon arcs are kept on a side list, excluded from V and
//    used only by export and beam decoding,
//  - the initial score vector is the epsilon closure of the start state
//    (just {start: 0} when the start has no outgoing epsilon arcs).
struct CompiledGraph {
  int32_t num_states = 0;   // S
  int32_t pdim = 0;         // P
  int32_t num_commands = 0; // C; command u in [0, C) has olabel u + 1
  StateId start = 0;

  std::vector<int32_t> state_pdf;    // e(i) in [0, P), or -1 for no emission
  std::vector<CompiledArc> arcs;     // all non-epsilon arcs, file order

  // CSR indexes over `arcs`; bucket contents are in ascending arc order so
  // per-state reductions break ties toward the lowest arc.
  std::vector<int32_t> in_offsets;   // size S+1, buckets keyed by dst
  std::vector<int32_t> in_arcs;
  std::vector<int32_t> out_offsets;  // size S+1, buckets keyed by src
  std::vector<int32_t> out_arcs;

  std::vector<std::vector<ArcId>> olabel_arcs;  // per command, ascending
  std::vector<double> finals;                   // log weight, kLogZero if none
  std::vector<EpsArc> eps_arcs;                 // surviving epsilons
  std::vector<std::pair<StateId, double>> initial;  // start closure

  int NumInArcs(StateId s) const { return in_offsets[s + 1] - in_offsets[s]; }
  int NumOutArcs(StateId s) const { return out_offsets[s + 1] - out_offsets[s]; }
};

// Requires w normalized (single outgoing non-epsilon ilabel per state) and
// tt covering every non-epsilon ilabel in w. Throws ValidationError naming
// the offending state or ilabel otherwise.
CompiledGraph Compile(const Wfst &w, const TransitionTable &tt, int pdim);

// Rebuilds the source Wfst with current trained weights; epsilon arcs keep
// their original weights and the topology is unchanged.
Wfst ExportWfst(const CompiledGraph &g);

// Same, but validates arc identity against the Wfst the graph was compiled
// from. Throws ValidationError on any mismatch.
Wfst ExportWfst(const CompiledGraph &g, const Wfst &compiled_from);

// Versioned text container (.vng) with sections for the emission map, V,
// the olabel index, the epsilon side list and final weights.
std::string SerializeGraph(const CompiledGraph &g);
CompiledGraph ParseGraph(const std::string &text);
void SaveGraph(const CompiledGraph &g, const std::string &path);
CompiledGraph LoadGraph(const std::string &path);

}  // namespace vnet

#endif  // VNET_COMPILE_H_
