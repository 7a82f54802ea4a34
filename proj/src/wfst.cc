// vnet/wfst.cc

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

#include "vnet/wfst.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace vnet {

namespace {

std::vector<std::string> SplitLines(const std::string &text) {
  std::vector<std::string> lines;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) {
      if (pos < text.size()) lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

StateId ParseStateField(const std::string &tok, int line_no) {
  int64_t v = ParseIntStrict(tok, "line " + std::to_string(line_no));
  if (v < 0 || v > 1000000000)
    throw ParseError("line " + std::to_string(line_no) +
                     ": state id out of range: " + tok);
  return static_cast<StateId>(v);
}

Label ParseLabelField(const std::string &tok, int line_no) {
  int64_t v = ParseIntStrict(tok, "line " + std::to_string(line_no));
  if (v < 0 || v > 1000000000)
    throw ParseError("line " + std::to_string(line_no) +
                     ": label id out of range: " + tok);
  return static_cast<Label>(v);
}

double ParseWeightField(const std::string &tok, WeightDomain domain,
                        int line_no) {
  double w = ParseDoubleStrict(tok, "line " + std::to_string(line_no));
  if (!std::isfinite(w))
    throw ParseError("line " + std::to_string(line_no) +
                     ": weight must be finite: " + tok);
  if (domain == WeightDomain::kProbability && w <= 0.0)
    throw ParseError("line " + std::to_string(line_no) +
                     ": probability weight must be > 0: " + tok);
  return FileWeightToLog(w, domain);
}

}  // namespace

SymbolTable ParseSymbolTable(const std::string &text) {
  SymbolTable syms;
  int line_no = 0;
  for (const std::string &line : SplitLines(text)) {
    ++line_no;
    std::vector<std::string> f = SplitFields(line);
    if (f.empty()) continue;
    if (f.size() != 2)
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected `symbol id`");
    int64_t id = ParseIntStrict(f[1], "line " + std::to_string(line_no));
    if (id < 0 || id > 10000000)
      throw ParseError("line " + std::to_string(line_no) +
                       ": symbol id out of range");
    if (static_cast<size_t>(id) >= syms.id_to_sym.size())
      syms.id_to_sym.resize(id + 1);
    syms.id_to_sym[id] = f[0];
  }
  return syms;
}

std::string SerializeSymbolTable(const SymbolTable &syms) {
  std::string out;
  for (size_t id = 0; id < syms.id_to_sym.size(); ++id) {
    if (syms.id_to_sym[id].empty()) continue;
    out += syms.id_to_sym[id];
    out += ' ';
    out += std::to_string(id);
    out += '\n';
  }
  return out;
}

void Validate(const Wfst &w) {
  if (w.num_states < 1) throw ValidationError("graph must have >= 1 state");
  if (w.start < 0 || w.start >= w.num_states)
    throw ValidationError("start state " + std::to_string(w.start) +
                          " out of range");
  for (size_t k = 0; k < w.arcs.size(); ++k) {
    const Arc &a = w.arcs[k];
    if (a.src < 0 || a.src >= w.num_states || a.dst < 0 ||
        a.dst >= w.num_states)
      throw ValidationError("arc " + std::to_string(k) +
                            " references a missing state");
    if (a.ilabel < 0 || a.olabel < 0)
      throw ValidationError("arc " + std::to_string(k) + " has negative label");
    if (!std::isfinite(a.log_weight))
      throw ValidationError("arc " + std::to_string(k) +
                            " has non-finite weight");
  }
  for (const auto &[s, wgt] : w.finals) {
    if (s < 0 || s >= w.num_states)
      throw ValidationError("final state " + std::to_string(s) +
                            " out of range");
    if (!std::isfinite(wgt))
      throw ValidationError("final weight of state " + std::to_string(s) +
                            " is non-finite");
  }
}

Wfst ParseWfst(const std::string &text, WeightDomain domain) {
  Wfst w;
  bool have_start = false;
  StateId max_state = 0;
  bool any_record = false;
  int line_no = 0;
  for (const std::string &line : SplitLines(text)) {
    ++line_no;
    std::vector<std::string> f = SplitFields(line);
    if (f.empty()) continue;
    any_record = true;
    if (f.size() == 4 || f.size() == 5) {
      Arc a;
      a.src = ParseStateField(f[0], line_no);
      a.dst = ParseStateField(f[1], line_no);
      a.ilabel = ParseLabelField(f[2], line_no);
      a.olabel = ParseLabelField(f[3], line_no);
      a.log_weight =
          f.size() == 5 ? ParseWeightField(f[4], domain, line_no) : 0.0;
      if (!have_start) {
        w.start = a.src;
        have_start = true;
      }
      max_state = std::max({max_state, a.src, a.dst});
      w.arcs.push_back(a);
    } else if (f.size() == 1 || f.size() == 2) {
      StateId s = ParseStateField(f[0], line_no);
      double logw =
          f.size() == 2 ? ParseWeightField(f[1], domain, line_no) : 0.0;
      max_state = std::max(max_state, s);
      auto it = w.finals.find(s);
      if (it == w.finals.end())
        w.finals.emplace(s, logw);
      else
        it->second = std::max(it->second, logw);
      if (!have_start && w.arcs.empty()) {
        w.start = s;
        have_start = true;
      }
    } else {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 4-5 fields (arc) or 1-2 fields (final), got " +
                       std::to_string(f.size()));
    }
  }
  if (!any_record) throw ParseError("no records in transducer text");
  w.num_states = max_state + 1;
  Validate(w);
  return w;
}

std::string SerializeWfst(const Wfst &w, WeightDomain domain) {
  Validate(w);
  if (!w.arcs.empty() && w.arcs.front().src != w.start)
    throw ValidationError(
        "text format requires the first arc to leave the start state");
  std::string out;
  for (const Arc &a : w.arcs) {
    out += std::to_string(a.src);
    out += ' ';
    out += std::to_string(a.dst);
    out += ' ';
    out += std::to_string(a.ilabel);
    out += ' ';
    out += std::to_string(a.olabel);
    out += ' ';
    out += FormatDouble(LogToFileWeight(a.log_weight, domain));
    out += '\n';
  }
  for (const auto &[s, wgt] : w.finals) {
    out += std::to_string(s);
    out += ' ';
    out += FormatDouble(LogToFileWeight(wgt, domain));
    out += '\n';
  }
  return out;
}

Wfst LoadWfst(const std::string &path, WeightDomain domain) {
  try {
    return ParseWfst(ReadFileToString(path), domain);
  } catch (const ParseError &e) {
    throw ParseError(path + ": " + e.what());
  }
}

void SaveWfst(const Wfst &w, const std::string &path, WeightDomain domain) {
  WriteStringToFile(path, SerializeWfst(w, domain));
}

namespace {

// Iterative Tarjan SCC over the subgraph of the given arcs.
std::vector<int> StronglyConnectedComponents(
    int num_states, const std::vector<std::pair<StateId, StateId>> &edges) {
  std::vector<std::vector<int>> adj(num_states);
  for (const auto &[u, v] : edges) adj[u].push_back(v);
  std::vector<int> comp(num_states, -1), low(num_states, 0),
      index(num_states, -1);
  std::vector<bool> on_stack(num_states, false);
  std::vector<int> stack;
  int next_index = 0, next_comp = 0;

  struct Frame {
    int v;
    size_t child;
  };
  for (int root = 0; root < num_states; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> call;
    call.push_back({root, 0});
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame &fr = call.back();
      if (fr.child < adj[fr.v].size()) {
        int wch = adj[fr.v][fr.child++];
        if (index[wch] == -1) {
          index[wch] = low[wch] = next_index++;
          stack.push_back(wch);
          on_stack[wch] = true;
          call.push_back({wch, 0});
        } else if (on_stack[wch]) {
          low[fr.v] = std::min(low[fr.v], index[wch]);
        }
      } else {
        if (low[fr.v] == index[fr.v]) {
          while (true) {
            int x = stack.back();
            stack.pop_back();
            on_stack[x] = false;
            comp[x] = next_comp;
            if (x == fr.v) break;
          }
          ++next_comp;
        }
        int v = fr.v;
        call.pop_back();
        if (!call.empty())
          low[call.back().v] = std::min(low[call.back().v], low[v]);
      }
    }
  }
  return comp;
}

// Best epsilon-path score from `source` to every state over the given
// epsilon arcs, bounded at num_states relaxation passes (positive-weight
// epsilon cycles cannot pump beyond a simple path).
std::vector<double> EpsilonClosureFrom(
    StateId source, int num_states,
    const std::vector<const Arc *> &eps_arcs) {
  std::vector<double> dist(num_states, kLogZero);
  dist[source] = 0.0;
  for (int pass = 0; pass < num_states; ++pass) {
    bool changed = false;
    for (const Arc *a : eps_arcs) {
      if (IsLogZero(dist[a->src])) continue;
      double cand = dist[a->src] + a->log_weight;
      if (cand > dist[a->dst]) {
        dist[a->dst] = cand;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return dist;
}

void RotateStartArcFirst(Wfst *w) {
  if (w->arcs.empty() || w->arcs.front().src == w->start) return;
  for (size_t k = 0; k < w->arcs.size(); ++k) {
    if (w->arcs[k].src == w->start) {
      std::rotate(w->arcs.begin(), w->arcs.begin() + k, w->arcs.begin() + k + 1);
      return;
    }
  }
  // No arc leaves the start; the graph has no complete paths and cannot be
  // serialized, but in-memory use is still fine.
}

}  // namespace

std::pair<Wfst, EpsilonReport> RemoveEpsilons(const Wfst &w) {
  Validate(w);
  EpsilonReport report;

  // Pure epsilons (both labels 0) are candidates. Cycle detection runs over
  // every ilabel-0 arc: removing a pure arc that closes a cycle with
  // olabel-carrying epsilons would compress the cycle and change what a
  // bounded epsilon closure can reach.
  std::vector<std::pair<StateId, StateId>> eps_edges;
  for (const Arc &a : w.arcs)
    if (a.ilabel == 0) eps_edges.push_back({a.src, a.dst});
  std::vector<int> comp;
  if (!eps_edges.empty())
    comp = StronglyConnectedComponents(w.num_states, eps_edges);

  std::vector<bool> removable(w.arcs.size(), false);
  std::vector<const Arc *> pure_eps;
  for (size_t k = 0; k < w.arcs.size(); ++k) {
    const Arc &a = w.arcs[k];
    if (a.ilabel != 0) continue;
    if (a.olabel != 0) {
      ++report.surviving_olabel;
      continue;
    }
    pure_eps.push_back(&a);
    bool on_cycle = a.src == a.dst || comp[a.src] == comp[a.dst];
    if (on_cycle) {
      ++report.surviving_cycle;
    } else {
      removable[k] = true;
      ++report.removed;
    }
  }

  Wfst out;
  out.num_states = w.num_states;
  out.start = w.start;
  out.isyms = w.isyms;
  out.osyms = w.osyms;
  out.finals = w.finals;

  // Kept arcs in original order.
  std::vector<std::vector<size_t>> kept_from(w.num_states);
  for (size_t k = 0; k < w.arcs.size(); ++k) {
    if (removable[k]) continue;
    out.arcs.push_back(w.arcs[k]);
    kept_from[w.arcs[k].src].push_back(k);
  }

  // States that lose at least one outgoing epsilon route get every kept arc
  // reachable through the epsilon closure copied forward, and final weights
  // propagated the same way.
  std::vector<bool> has_removable_out(w.num_states, false);
  for (size_t k = 0; k < w.arcs.size(); ++k)
    if (removable[k]) has_removable_out[w.arcs[k].src] = true;

  for (StateId q = 0; q < w.num_states; ++q) {
    if (!has_removable_out[q]) continue;
    std::vector<double> dist = EpsilonClosureFrom(q, w.num_states, pure_eps);
    for (StateId r = 0; r < w.num_states; ++r) {
      if (r == q || IsLogZero(dist[r])) continue;
      for (size_t k : kept_from[r]) {
        Arc copy = w.arcs[k];
        copy.src = q;
        copy.log_weight = dist[r] + copy.log_weight;
        out.arcs.push_back(copy);
      }
      auto fit = w.finals.find(r);
      if (fit != w.finals.end()) {
        double cand = dist[r] + fit->second;
        auto oit = out.finals.find(q);
        if (oit == out.finals.end())
          out.finals.emplace(q, cand);
        else
          oit->second = std::max(oit->second, cand);
      }
    }
  }

  RotateStartArcFirst(&out);
  Validate(out);
  return {out, report};
}

Wfst NormalizeIlabels(const Wfst &w) {
  Validate(w);

  // Distinct outgoing non-epsilon ilabels per state, ascending.
  std::vector<std::set<Label>> groups(w.num_states);
  for (const Arc &a : w.arcs)
    if (a.ilabel != 0) groups[a.src].insert(a.ilabel);

  bool any_split = false;
  for (StateId s = 0; s < w.num_states; ++s)
    if (groups[s].size() >= 2) any_split = true;
  if (!any_split) return w;

  // The smallest ilabel keeps the original id; further copies get fresh ids
  // in (state, ilabel) order.
  StateId next_id = w.num_states;
  std::vector<std::map<Label, StateId>> copy_id(w.num_states);
  std::vector<std::vector<StateId>> copies(w.num_states);
  for (StateId s = 0; s < w.num_states; ++s) {
    if (groups[s].size() < 2) {
      copies[s] = {s};
      continue;
    }
    bool first = true;
    for (Label l : groups[s]) {
      StateId id = first ? s : next_id++;
      first = false;
      copy_id[s][l] = id;
      copies[s].push_back(id);
    }
  }

  Wfst out;
  out.isyms = w.isyms;
  out.osyms = w.osyms;
  out.start = w.start;

  bool split_start = groups[w.start].size() >= 2;
  StateId super_start = -1;
  if (split_start) {
    // A single start cannot carry two emission pdfs; route the initial mass
    // through weight-0 epsilon arcs instead.
    super_start = next_id++;
    out.start = super_start;
    for (StateId c : copies[w.start])
      out.arcs.push_back(Arc{super_start, c, 0, 0, 0.0});
  }
  out.num_states = next_id;

  for (const Arc &a : w.arcs) {
    std::vector<StateId> srcs;
    if (a.ilabel == 0)
      srcs = copies[a.src];
    else
      srcs = {copy_id[a.src].empty() ? a.src : copy_id[a.src][a.ilabel]};
    for (StateId sc : srcs)
      for (StateId dc : copies[a.dst])
        out.arcs.push_back(Arc{sc, dc, a.ilabel, a.olabel, a.log_weight});
  }

  for (const auto &[s, wgt] : w.finals)
    for (StateId c : copies[s]) out.finals.emplace(c, wgt);

  RotateStartArcFirst(&out);
  Validate(out);
  return out;
}

}  // namespace vnet
