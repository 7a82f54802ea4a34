// vnet/compile.cc

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

#include "vnet/compile.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vnet {

int32_t TransitionTable::Pdf(Label l) const {
  auto it = to_pdf.find(l);
  if (it == to_pdf.end())
    throw ValidationError("ilabel " + std::to_string(l) +
                          " missing from transition table");
  return it->second;
}

TransitionTable TransitionTable::Identity(int pdim) {
  TransitionTable tt;
  for (int i = 1; i <= pdim; ++i) tt.to_pdf[i] = i - 1;
  return tt;
}

TransitionTable ParseTransitionTable(const std::string &text) {
  TransitionTable tt;
  int line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string> f = SplitFields(line);
    if (f.empty()) continue;
    if (f.size() != 2)
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected `ilabel pdf`");
    Label il = static_cast<Label>(
        ParseIntStrict(f[0], "line " + std::to_string(line_no)));
    int32_t pdf = static_cast<int32_t>(
        ParseIntStrict(f[1], "line " + std::to_string(line_no)));
    if (il <= 0 || pdf < 0)
      throw ParseError("line " + std::to_string(line_no) +
                       ": ilabel must be > 0 and pdf >= 0");
    tt.to_pdf[il] = pdf;
  }
  return tt;
}

std::string SerializeTransitionTable(const TransitionTable &tt) {
  std::vector<std::pair<Label, int32_t>> rows(tt.to_pdf.begin(),
                                              tt.to_pdf.end());
  std::sort(rows.begin(), rows.end());
  std::string out;
  for (const auto &[il, pdf] : rows) {
    out += std::to_string(il);
    out += ' ';
    out += std::to_string(pdf);
    out += '\n';
  }
  return out;
}

TransitionTable LoadTransitionTable(const std::string &path) {
  try {
    return ParseTransitionTable(ReadFileToString(path));
  } catch (const ParseError &e) {
    throw ParseError(path + ": " + e.what());
  }
}

namespace {

void BuildCsr(int num_states, const std::vector<CompiledArc> &arcs,
              bool key_by_dst, std::vector<int32_t> *offsets,
              std::vector<int32_t> *index) {
  offsets->assign(num_states + 1, 0);
  for (const CompiledArc &a : arcs) ++(*offsets)[(key_by_dst ? a.dst : a.src) + 1];
  for (int s = 0; s < num_states; ++s) (*offsets)[s + 1] += (*offsets)[s];
  index->assign(arcs.size(), 0);
  std::vector<int32_t> fill(offsets->begin(), offsets->end() - 1);
  // Arc ids ascend inside each bucket, so per-state reductions tie-break
  // toward the lowest arc.
  for (size_t k = 0; k < arcs.size(); ++k) {
    int key = key_by_dst ? arcs[k].dst : arcs[k].src;
    (*index)[fill[key]++] = static_cast<int32_t>(k);
  }
}

std::vector<std::pair<StateId, double>> StartClosure(
    StateId start, int num_states, const std::vector<EpsArc> &eps_arcs) {
  std::vector<double> dist(num_states, kLogZero);
  dist[start] = 0.0;
  for (int pass = 0; pass < num_states; ++pass) {
    bool changed = false;
    for (const EpsArc &e : eps_arcs) {
      if (e.arc.olabel != 0) continue;  // cannot emit before the first frame
      if (IsLogZero(dist[e.arc.src])) continue;
      double cand = dist[e.arc.src] + e.arc.log_weight;
      if (cand > dist[e.arc.dst]) {
        dist[e.arc.dst] = cand;
        changed = true;
      }
    }
    if (!changed) break;
  }
  std::vector<std::pair<StateId, double>> initial;
  for (StateId s = 0; s < num_states; ++s)
    if (!IsLogZero(dist[s])) initial.push_back({s, dist[s]});
  return initial;
}

void FinishGraph(CompiledGraph *g) {
  BuildCsr(g->num_states, g->arcs, /*key_by_dst=*/true, &g->in_offsets,
           &g->in_arcs);
  BuildCsr(g->num_states, g->arcs, /*key_by_dst=*/false, &g->out_offsets,
           &g->out_arcs);
  g->olabel_arcs.assign(g->num_commands, {});
  for (size_t k = 0; k < g->arcs.size(); ++k)
    if (g->arcs[k].olabel != 0)
      g->olabel_arcs[g->arcs[k].olabel - 1].push_back(static_cast<ArcId>(k));
  g->initial = StartClosure(g->start, g->num_states, g->eps_arcs);
}

}  // namespace

CompiledGraph Compile(const Wfst &w, const TransitionTable &tt, int pdim) {
  Validate(w);
  if (pdim < 1) throw ValidationError("pdim must be >= 1");

  CompiledGraph g;
  g.num_states = w.num_states;
  g.pdim = pdim;
  g.start = w.start;

  g.state_pdf.assign(w.num_states, -1);
  std::vector<Label> state_ilabel(w.num_states, 0);
  Label max_olabel = 0;
  for (size_t k = 0; k < w.arcs.size(); ++k) {
    const Arc &a = w.arcs[k];
    max_olabel = std::max(max_olabel, a.olabel);
    if (a.ilabel == 0) {
      g.eps_arcs.push_back(EpsArc{a, static_cast<ArcId>(k)});
      continue;
    }
    if (state_ilabel[a.src] != 0 && state_ilabel[a.src] != a.ilabel)
      throw ValidationError(
          "state " + std::to_string(a.src) +
          " has multiple outgoing ilabels (" +
          std::to_string(state_ilabel[a.src]) + ", " +
          std::to_string(a.ilabel) + "); normalize the graph first");
    state_ilabel[a.src] = a.ilabel;
    int32_t pdf = tt.Pdf(a.ilabel);
    if (pdf >= pdim)
      throw ValidationError("ilabel " + std::to_string(a.ilabel) +
                            " maps to pdf " + std::to_string(pdf) +
                            " outside [0, " + std::to_string(pdim) + ")");
    g.state_pdf[a.src] = pdf;
    g.arcs.push_back(
        CompiledArc{a.src, a.dst, a.ilabel, a.olabel, a.log_weight,
                    static_cast<ArcId>(k)});
  }
  g.num_commands = max_olabel;

  g.finals.assign(w.num_states, kLogZero);
  for (const auto &[s, wgt] : w.finals) g.finals[s] = wgt;

  FinishGraph(&g);
  return g;
}

Wfst ExportWfst(const CompiledGraph &g) {
  size_t total = g.arcs.size() + g.eps_arcs.size();
  Wfst w;
  w.num_states = g.num_states;
  w.start = g.start;
  w.arcs.assign(total, Arc{});
  std::vector<bool> filled(total, false);
  auto place = [&](ArcId orig, const Arc &a) {
    if (orig < 0 || static_cast<size_t>(orig) >= total || filled[orig])
      throw InternalError("corrupt original arc index " +
                          std::to_string(orig));
    w.arcs[orig] = a;
    filled[orig] = true;
  };
  for (const CompiledArc &a : g.arcs)
    place(a.orig_index, Arc{a.src, a.dst, a.ilabel, a.olabel, a.log_weight});
  for (const EpsArc &e : g.eps_arcs) place(e.orig_index, e.arc);
  for (StateId s = 0; s < g.num_states; ++s)
    if (!IsLogZero(g.finals[s])) w.finals.emplace(s, g.finals[s]);
  Validate(w);
  return w;
}

Wfst ExportWfst(const CompiledGraph &g, const Wfst &compiled_from) {
  if (compiled_from.arcs.size() != g.arcs.size() + g.eps_arcs.size())
    throw ValidationError(
        "arc count mismatch: graph has " +
        std::to_string(g.arcs.size() + g.eps_arcs.size()) +
        ", template has " + std::to_string(compiled_from.arcs.size()));
  Wfst w = ExportWfst(g);
  for (size_t k = 0; k < w.arcs.size(); ++k) {
    const Arc &a = w.arcs[k];
    const Arc &b = compiled_from.arcs[k];
    if (a.src != b.src || a.dst != b.dst || a.ilabel != b.ilabel ||
        a.olabel != b.olabel)
      throw ValidationError("arc " + std::to_string(k) +
                            " does not match the compile template");
  }
  return w;
}

namespace {

constexpr const char *kGraphMagic = "VNG";
constexpr int kGraphVersion = 1;

class SectionReader {
 public:
  explicit SectionReader(const std::string &text) : in_(text) {}

  std::vector<std::string> NextLine() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      std::vector<std::string> f = SplitFields(line);
      if (!f.empty()) return f;
    }
    throw ParseError("graph container truncated at line " +
                     std::to_string(line_no_));
  }

  int line_no() const { return line_no_; }

 private:
  std::istringstream in_;
  int line_no_ = 0;
};

int64_t ExpectSection(SectionReader *r, const std::string &name) {
  std::vector<std::string> f = r->NextLine();
  if (f.size() != 2 || f[0] != name)
    throw ParseError("graph container: expected section `" + name +
                     "` near line " + std::to_string(r->line_no()));
  return ParseIntStrict(f[1], "section " + name);
}

}  // namespace

std::string SerializeGraph(const CompiledGraph &g) {
  std::string out;
  out += kGraphMagic;
  out += ' ';
  out += std::to_string(kGraphVersion);
  out += '\n';
  out += "S " + std::to_string(g.num_states) + " P " + std::to_string(g.pdim) +
         " C " + std::to_string(g.num_commands) + " start " +
         std::to_string(g.start) + "\n";

  out += "emission " + std::to_string(g.num_states) + "\n";
  for (StateId s = 0; s < g.num_states; ++s)
    out += std::to_string(g.state_pdf[s]) + "\n";

  out += "arcs " + std::to_string(g.arcs.size()) + "\n";
  for (const CompiledArc &a : g.arcs)
    out += std::to_string(a.src) + " " + std::to_string(a.dst) + " " +
           std::to_string(a.ilabel) + " " + std::to_string(a.olabel) + " " +
           FormatDouble(a.log_weight) + " " + std::to_string(a.orig_index) +
           "\n";

  out += "olabels " + std::to_string(g.num_commands) + "\n";
  for (int u = 0; u < g.num_commands; ++u) {
    out += std::to_string(u + 1) + " " + std::to_string(g.olabel_arcs[u].size());
    for (ArcId a : g.olabel_arcs[u]) out += " " + std::to_string(a);
    out += "\n";
  }

  out += "eps " + std::to_string(g.eps_arcs.size()) + "\n";
  for (const EpsArc &e : g.eps_arcs)
    out += std::to_string(e.arc.src) + " " + std::to_string(e.arc.dst) + " " +
           std::to_string(e.arc.ilabel) + " " + std::to_string(e.arc.olabel) +
           " " + FormatDouble(e.arc.log_weight) + " " +
           std::to_string(e.orig_index) + "\n";

  int num_finals = 0;
  for (StateId s = 0; s < g.num_states; ++s)
    if (!IsLogZero(g.finals[s])) ++num_finals;
  out += "finals " + std::to_string(num_finals) + "\n";
  for (StateId s = 0; s < g.num_states; ++s)
    if (!IsLogZero(g.finals[s]))
      out += std::to_string(s) + " " + FormatDouble(g.finals[s]) + "\n";

  out += "end\n";
  return out;
}

CompiledGraph ParseGraph(const std::string &text) {
  SectionReader r(text);
  std::vector<std::string> f = r.NextLine();
  if (f.size() != 2 || f[0] != kGraphMagic)
    throw ParseError("not a graph container (bad magic)");
  if (ParseIntStrict(f[1], "version") != kGraphVersion)
    throw ParseError("unsupported graph container version " + f[1]);

  f = r.NextLine();
  if (f.size() != 8 || f[0] != "S" || f[2] != "P" || f[4] != "C" ||
      f[6] != "start")
    throw ParseError("graph container: bad header line");
  CompiledGraph g;
  g.num_states = static_cast<int32_t>(ParseIntStrict(f[1], "S"));
  g.pdim = static_cast<int32_t>(ParseIntStrict(f[3], "P"));
  g.num_commands = static_cast<int32_t>(ParseIntStrict(f[5], "C"));
  g.start = static_cast<StateId>(ParseIntStrict(f[7], "start"));
  if (g.num_states < 1 || g.pdim < 1 || g.num_commands < 0 || g.start < 0 ||
      g.start >= g.num_states)
    throw ParseError("graph container: implausible header");

  int64_t n = ExpectSection(&r, "emission");
  if (n != g.num_states)
    throw ParseError("graph container: emission section must list S states");
  g.state_pdf.resize(g.num_states);
  for (StateId s = 0; s < g.num_states; ++s) {
    f = r.NextLine();
    if (f.size() != 1) throw ParseError("graph container: bad emission row");
    int32_t pdf = static_cast<int32_t>(ParseIntStrict(f[0], "emission"));
    if (pdf < -1 || pdf >= g.pdim)
      throw ParseError("graph container: pdf out of range");
    g.state_pdf[s] = pdf;
  }

  auto parse_arc_row = [&](StateId *src, StateId *dst, Label *il, Label *ol,
                           double *lw, ArcId *orig) {
    f = r.NextLine();
    if (f.size() != 6) throw ParseError("graph container: bad arc row");
    *src = static_cast<StateId>(ParseIntStrict(f[0], "arc src"));
    *dst = static_cast<StateId>(ParseIntStrict(f[1], "arc dst"));
    *il = static_cast<Label>(ParseIntStrict(f[2], "arc ilabel"));
    *ol = static_cast<Label>(ParseIntStrict(f[3], "arc olabel"));
    *lw = ParseDoubleStrict(f[4], "arc weight");
    *orig = static_cast<ArcId>(ParseIntStrict(f[5], "arc orig"));
    if (*src < 0 || *src >= g.num_states || *dst < 0 || *dst >= g.num_states)
      throw ParseError("graph container: arc state out of range");
  };

  n = ExpectSection(&r, "arcs");
  g.arcs.resize(n);
  for (int64_t k = 0; k < n; ++k) {
    CompiledArc &a = g.arcs[k];
    parse_arc_row(&a.src, &a.dst, &a.ilabel, &a.olabel, &a.log_weight,
                  &a.orig_index);
    if (a.ilabel == 0)
      throw ParseError("graph container: epsilon arc in the V section");
  }

  n = ExpectSection(&r, "olabels");
  if (n != g.num_commands)
    throw ParseError("graph container: olabel index must list C commands");
  std::vector<std::vector<ArcId>> stored_index(g.num_commands);
  for (int u = 0; u < g.num_commands; ++u) {
    f = r.NextLine();
    if (f.size() < 2) throw ParseError("graph container: bad olabel row");
    if (ParseIntStrict(f[0], "olabel id") != u + 1)
      throw ParseError("graph container: olabel rows must be in order");
    int64_t count = ParseIntStrict(f[1], "olabel count");
    if (static_cast<int64_t>(f.size()) != 2 + count)
      throw ParseError("graph container: olabel row arity mismatch");
    for (int64_t k = 0; k < count; ++k)
      stored_index[u].push_back(
          static_cast<ArcId>(ParseIntStrict(f[2 + k], "olabel arc")));
  }

  n = ExpectSection(&r, "eps");
  g.eps_arcs.resize(n);
  for (int64_t k = 0; k < n; ++k) {
    EpsArc &e = g.eps_arcs[k];
    parse_arc_row(&e.arc.src, &e.arc.dst, &e.arc.ilabel, &e.arc.olabel,
                  &e.arc.log_weight, &e.orig_index);
    if (e.arc.ilabel != 0)
      throw ParseError("graph container: non-epsilon arc in the eps section");
  }

  n = ExpectSection(&r, "finals");
  g.finals.assign(g.num_states, kLogZero);
  for (int64_t k = 0; k < n; ++k) {
    f = r.NextLine();
    if (f.size() != 2) throw ParseError("graph container: bad final row");
    StateId s = static_cast<StateId>(ParseIntStrict(f[0], "final state"));
    if (s < 0 || s >= g.num_states)
      throw ParseError("graph container: final state out of range");
    g.finals[s] = ParseDoubleStrict(f[1], "final weight");
  }

  f = r.NextLine();
  if (f.size() != 1 || f[0] != "end")
    throw ParseError("graph container: missing end marker");

  FinishGraph(&g);
  if (stored_index != g.olabel_arcs)
    throw ParseError("graph container: olabel index does not match arcs");
  return g;
}

void SaveGraph(const CompiledGraph &g, const std::string &path) {
  WriteStringToFile(path, SerializeGraph(g));
}

CompiledGraph LoadGraph(const std::string &path) {
  try {
    return ParseGraph(ReadFileToString(path));
  } catch (const ParseError &e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace vnet
