// vnet/wfst.h

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

#ifndef VNET_WFST_H_
#define VNET_WFST_H_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vnet/common.h"

namespace vnet {

// How weights are written in text files. Internally all scores are
// log-domain reals (log of a probability-like value, higher is better).
enum class WeightDomain {
  kTropical,     // file weight = -log score (lower is better)
  kProbability,  // file weight = linear score (> 0, higher is better)
};

inline double FileWeightToLog(double w, WeightDomain d) {
  return d == WeightDomain::kTropical ? -w : std::log(w);
}

inline double LogToFileWeight(double logv, WeightDomain d) {
  return d == WeightDomain::kTropical ? -logv : std::exp(logv);
}

struct Arc {
  StateId src = 0;
  StateId dst = 0;
  Label ilabel = 0;   // 0 = epsilon (consumes no frame)
  Label olabel = 0;   // 0 = epsilon (emits nothing)
  double log_weight = 0.0;
};

// Two-column `symbol id` table; id 0 is reserved for <eps>.
struct SymbolTable {
  std::vector<std::string> id_to_sym;            // index = id
  bool Empty() const { return id_to_sym.empty(); }
};

SymbolTable ParseSymbolTable(const std::string &text);
std::string SerializeSymbolTable(const SymbolTable &syms);

// Arc-list transducer. Arc order is file order and is preserved by
// serialization so that parse/serialize round-trips are stable.
struct Wfst {
  int32_t num_states = 0;
  StateId start = 0;
  std::vector<Arc> arcs;
  std::map<StateId, double> finals;  // state -> final log weight
  SymbolTable isyms, osyms;          // optional, not serialized with the graph

  bool IsFinal(StateId s) const { return finals.count(s) != 0; }
  double FinalLog(StateId s) const {
    auto it = finals.find(s);
    return it == finals.end() ? kLogZero : it->second;
  }
};

// Throws ValidationError if state references are out of range or weights
// are non-finite.
void Validate(const Wfst &w);

// Parses the AT&T-style text format:
//   arc line:   src dst ilabel olabel [weight]
//   final line: state [weight]
// The first arc line's src is the start state. Weights default to
// 0.0 (tropical) / 1.0 (probability).
Wfst ParseWfst(const std::string &text, WeightDomain domain);

std::string SerializeWfst(const Wfst &w, WeightDomain domain);

Wfst LoadWfst(const std::string &path, WeightDomain domain);
void SaveWfst(const Wfst &w, const std::string &path, WeightDomain domain);

struct EpsilonReport {
  int removed = 0;            // eliminated epsilon arcs
  int surviving_cycle = 0;    // epsilon arcs on epsilon cycles
  int surviving_olabel = 0;   // ilabel-0 arcs kept because they carry an olabel
  int Surviving() const { return surviving_cycle + surviving_olabel; }
};

// Max-semiring epsilon removal. Arcs with both labels epsilon and not on an
// epsilon cycle are eliminated: every kept arc reachable through an epsilon
// prefix is copied forward with the closure weight added, and final weights
// are propagated through the closure. Arcs on epsilon cycles survive, as do
// ilabel-0 arcs carrying a non-epsilon olabel (same policy as fstrmepsilon,
// which only removes double-epsilon arcs). The best complete-path score per
// (ilabel sequence, olabel sequence) is unchanged.
std::pair<Wfst, EpsilonReport> RemoveEpsilons(const Wfst &w);

// Ensures every state's outgoing non-epsilon arcs share a single ilabel by
// splitting offending states into one copy per distinct outgoing ilabel,
// duplicating incoming arcs to every copy and copying final weights. If the
// start state itself must split, a fresh super-start is prepended with
// weight-0 double-epsilon arcs to each copy; compilation folds these into
// the initial score vector. Preserves the best complete-path score per
// (ilabel sequence, olabel sequence).
Wfst NormalizeIlabels(const Wfst &w);

}  // namespace vnet

#endif  // VNET_WFST_H_
