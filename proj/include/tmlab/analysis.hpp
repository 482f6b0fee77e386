#pragma once

// Complexity metrics and structural checks over executions: non-overlapping
// RAW patterns, AWARs, memory stalls, the three disjoint-access-parallelism
// flavors, the syntactic invisible-reads condition and the two progress
// conditions.  Everything here is a pure function of the execution log.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tmlab/checker.hpp"
#include "tmlab/execution.hpp"

namespace tmlab {

// --- RAW / AWAR ---------------------------------------------------------------

// A RAW is a plain write to b followed by a plain read of b' != b with no
// intervening write to b' by the same transaction.  Cas events take part in
// neither side: an atomic read-modify-write is accounted separately as an
// AWAR.  Counted are pairwise non-overlapping pairs, maximized by taking the
// earliest-completing read first (optimal for disjoint intervals).
inline int count_raws(const Execution& e, TxId tx) {
  auto evs = e.base_events_of(tx);
  const int L = (int)evs.size();
  int count = 0;
  int last_end = -1;
  for (int j = 0; j < L; ++j) {
    if (evs[j]->kind != PrimKind::Read) continue;
    bool took = false;
    for (int i = last_end + 1; i < j && !took; ++i) {
      if (evs[i]->kind != PrimKind::Write) continue;
      if (evs[i]->obj == evs[j]->obj) continue;
      bool clobbered = false;
      for (int k = i + 1; k < j; ++k)
        if (evs[k]->kind == PrimKind::Write && evs[k]->obj == evs[j]->obj) {
          clobbered = true;
          break;
        }
      if (!clobbered) took = true;
    }
    if (took) {
      ++count;
      last_end = j;
    }
  }
  return count;
}

// Successful cas events: an event that atomically reads and writes.  A failed
// cas writes nothing; the lenient variant counts it anyway (the primitive is
// nontrivial by kind) and is reported alongside.
inline int count_awars(const Execution& e, TxId tx) {
  int n = 0;
  for (const BaseEvent* b : e.base_events_of(tx))
    if (b->kind == PrimKind::Cas && b->cas_ok) ++n;
  return n;
}

inline int count_awars_lenient(const Execution& e, TxId tx) {
  int n = 0;
  for (const BaseEvent* b : e.base_events_of(tx))
    if (b->kind == PrimKind::Cas) ++n;
  return n;
}

// Per-t-operation breakdown of both synchronization patterns.
struct SyncReport {
  int raws = 0;
  int awars = 0;
  int awars_lenient = 0;
  std::map<int, int> raws_per_op;
  std::map<int, int> awars_per_op;
};

inline SyncReport sync_report(const Execution& e, TxId tx) {
  SyncReport r;
  r.raws = count_raws(e, tx);
  r.awars = count_awars(e, tx);
  r.awars_lenient = count_awars_lenient(e, tx);
  std::set<int> ops;
  for (const BaseEvent* b : e.base_events_of(tx)) {
    ops.insert(b->op_index);
    if (b->kind == PrimKind::Cas && b->cas_ok) r.awars_per_op[b->op_index]++;
  }
  for (int op : ops) {
    Execution sub;
    sub.impl = e.impl;
    sub.n = e.n;
    for (const BaseEvent* b : e.base_events_of(tx))
      if (b->op_index == op) sub.entries.push_back(*b);
    int raws = count_raws(sub, tx);
    if (raws > 0) r.raws_per_op[op] = raws;
  }
  return r;
}

// --- memory stalls -------------------------------------------------------------

struct StallReport {
  int total = 0;
  std::map<int, int> per_op;                  // t-operation index -> stalls
  std::vector<std::pair<int, int>> per_event;  // (entry seq, stalls)
};

// An event e by process p on object b incurs m stalls when the m immediately
// preceding base events are consecutive nontrivial accesses of b by pairwise
// distinct processes other than p, all applied while p was already poised at
// e (after p's previous log entry).  The poised-window requirement mirrors
// the k-stall construction, where every obstructing process has an enabled
// nontrivial event on b when p is about to access it; without it a purely
// sequential execution could be charged for a write another transaction
// finished before this one even started.  Invocation/response markers carry
// no base-object access and are transparent for adjacency; any base event on
// another object, any trivial event, and any event by p break the run.
inline StallReport count_stalls(const Execution& e, TxId tx) {
  // Index of the transaction's preceding log entry, per base event.
  std::map<const BaseEvent*, int> poised_from;
  {
    std::map<TxId, int> prev;
    for (int i = 0; i < (int)e.entries.size(); ++i) {
      TxId t = entry_tx(e.entries[i]);
      if (auto* b = std::get_if<BaseEvent>(&e.entries[i]))
        poised_from[b] = prev.count(t) ? prev[t] : -1;
      prev[t] = i;
    }
  }
  // Positions of base events within the full entry list.
  std::vector<std::pair<const BaseEvent*, int>> all;
  for (int i = 0; i < (int)e.entries.size(); ++i)
    if (auto* b = std::get_if<BaseEvent>(&e.entries[i])) all.emplace_back(b, i);

  StallReport rep;
  for (int idx = 0; idx < (int)all.size(); ++idx) {
    const BaseEvent* ev = all[idx].first;
    if (ev->tx != tx) continue;
    const int window = poised_from.at(ev);
    int m = 0;
    std::set<ProcId> seen;
    for (int k = idx - 1; k >= 0; --k) {
      const BaseEvent* prev = all[k].first;
      if (all[k].second <= window) break;  // applied before p was poised here
      if (prev->obj != ev->obj || !is_nontrivial(*prev) || prev->proc == ev->proc) break;
      if (seen.count(prev->proc)) break;
      seen.insert(prev->proc);
      ++m;
    }
    if (m > 0) {
      rep.total += m;
      rep.per_op[ev->op_index] += m;
      rep.per_event.emplace_back(ev->seq, m);
    }
  }
  return rep;
}

// --- conflict graphs and DAP -----------------------------------------------------

enum class GraphMode { DataSet, WriteSet };
enum class DapFlavor { Strict, Rw, Weak };

inline const char* to_string(DapFlavor f) {
  switch (f) {
    case DapFlavor::Strict: return "strict";
    case DapFlavor::Rw: return "rw";
    case DapFlavor::Weak: return "weak";
  }
  return "?";
}

struct ConflictGraph {
  GraphMode mode{};
  std::set<TObjId> vertices;
  std::set<std::pair<TObjId, TObjId>> edges;  // normalized first < second

  bool connected(const std::set<TObjId>& from, const std::set<TObjId>& to) const {
    if (from.empty() || to.empty()) return false;
    std::set<TObjId> reached;
    std::vector<TObjId> frontier;
    for (TObjId x : from)
      if (vertices.count(x)) { reached.insert(x); frontier.push_back(x); }
    while (!frontier.empty()) {
      TObjId x = frontier.back();
      frontier.pop_back();
      for (const auto& [a, b] : edges) {
        TObjId other = -1;
        if (a == x) other = b;
        else if (b == x) other = a;
        if (other >= 0 && reached.insert(other).second) frontier.push_back(other);
      }
    }
    for (TObjId y : to)
      if (reached.count(y)) return true;
    return false;
  }
};

// G(Ti,Tj,E): vertices are the data sets of the transactions concurrent to Ti
// or Tj (both included); an edge joins X,Y iff some such transaction has both
// in its data set (DataSet mode) or write set (WriteSet mode).
inline ConflictGraph build_conflict_graph(const Execution& e, TxId ti, TxId tj, GraphMode mode) {
  ConflictGraph g;
  g.mode = mode;
  for (TxId t : e.txns()) {
    bool in_tau = t == ti || t == tj || e.concurrent(t, ti) || e.concurrent(t, tj);
    if (!in_tau) continue;
    auto d = e.dset(t);
    g.vertices.insert(d.begin(), d.end());
    auto span = (mode == GraphMode::DataSet) ? d : e.wset(t);
    for (auto a = span.begin(); a != span.end(); ++a)
      for (auto b = std::next(a); b != span.end(); ++b) g.edges.insert({*a, *b});
  }
  return g;
}

inline bool disjoint_access(const Execution& e, TxId ti, TxId tj, GraphMode mode) {
  ConflictGraph g = build_conflict_graph(e, ti, tj, mode);
  return !g.connected(e.dset(ti), e.dset(tj));
}

struct DapViolation {
  DapFlavor flavor{};
  TxId a = 0, b = 0;
  BaseObjId obj{};

  std::string describe() const {
    std::ostringstream s;
    s << to_string(flavor) << "-dap: T" << a << " and T" << b << " contend on "
      << to_string(obj);
    return s.str();
  }
};

namespace detail {

// Accesses per base object, by transaction.
struct ObjAccess {
  bool any = false;
  bool nontrivial = false;
};

inline std::map<BaseObjId, std::map<TxId, ObjAccess>> access_table(const Execution& e) {
  std::map<BaseObjId, std::map<TxId, ObjAccess>> t;
  for (const BaseEvent* b : e.base_events()) {
    auto& a = t[b->obj][b->tx];
    a.any = true;
    a.nontrivial |= is_nontrivial(*b);
  }
  return t;
}

// Poised intervals: transaction tx is poised to apply the base event logged
// at entry index `upto` for every prefix length in [from+1, upto], where
// `from` is the index of its immediately preceding log entry of any kind.
// Final poised annotations extend to the end of the execution.
struct PoisedInterval {
  TxId tx = 0;
  ProcId proc = 0;
  BaseObjId obj{};
  bool nontrivial = false;
  int lo = 0, hi = 0;  // inclusive prefix-length range
};

inline std::vector<PoisedInterval> poised_intervals(const Execution& e) {
  std::vector<PoisedInterval> out;
  std::map<TxId, int> prev;
  for (int i = 0; i < (int)e.entries.size(); ++i) {
    const Entry& entry = e.entries[i];
    TxId tx = entry_tx(entry);
    if (auto* b = std::get_if<BaseEvent>(&entry)) {
      int from = prev.count(tx) ? prev[tx] : -1;
      out.push_back({tx, b->proc, b->obj, is_nontrivial(*b), from + 1, i});
    }
    prev[tx] = i;
  }
  for (const auto& fp : e.final_poised) {
    int from = prev.count(fp.tx) ? prev[fp.tx] : -1;
    out.push_back({fp.tx, fp.proc, fp.obj, is_nontrivial(fp.kind), from + 1,
                   (int)e.entries.size()});
  }
  return out;
}

}  // namespace detail

// Violations of the requested DAP flavor.
//   strict: contention between transactions with disjoint data sets.
//   rw:     contention between read-write disjoint-access transactions with
//           no shared t-object.
//   weak:   concurrent contention (both poised on the object after a common
//           prefix) between disjoint-access transactions with no shared
//           t-object.
inline std::vector<DapViolation> check_dap(const Execution& e, DapFlavor flavor) {
  std::vector<DapViolation> out;
  auto txs = e.txns();
  std::map<TxId, std::set<TObjId>> dsets;
  for (TxId t : txs) dsets[t] = e.dset(t);

  if (flavor == DapFlavor::Weak) {
    auto ivs = detail::poised_intervals(e);
    std::set<std::pair<TxId, TxId>> flagged;
    for (std::size_t i = 0; i < ivs.size(); ++i)
      for (std::size_t j = i + 1; j < ivs.size(); ++j) {
        const auto& a = ivs[i];
        const auto& b = ivs[j];
        if (a.tx == b.tx || a.obj != b.obj) continue;
        if (!a.nontrivial && !b.nontrivial) continue;
        if (a.hi < b.lo || b.hi < a.lo) continue;  // never simultaneously poised
        TxId x = std::min(a.tx, b.tx), y = std::max(a.tx, b.tx);
        if (flagged.count({x, y})) continue;
        bool shared = false;
        for (TObjId o : dsets[x])
          if (dsets[y].count(o)) { shared = true; break; }
        if (shared) continue;
        if (!disjoint_access(e, x, y, GraphMode::DataSet)) continue;
        flagged.insert({x, y});
        out.push_back({flavor, x, y, a.obj});
      }
    return out;
  }

  auto table = detail::access_table(e);
  std::set<std::pair<TxId, TxId>> flagged;
  for (const auto& [obj, per_tx] : table) {
    for (auto a = per_tx.begin(); a != per_tx.end(); ++a)
      for (auto b = std::next(a); b != per_tx.end(); ++b) {
        if (!a->second.nontrivial && !b->second.nontrivial) continue;  // no contention
        TxId x = a->first, y = b->first;
        if (flagged.count({x, y})) continue;
        bool shared = false;
        for (TObjId o : dsets[x])
          if (dsets[y].count(o)) { shared = true; break; }
        if (shared) continue;
        if (flavor == DapFlavor::Strict) {
          flagged.insert({x, y});
          out.push_back({flavor, x, y, obj});
        } else {  // rw
          if (disjoint_access(e, x, y, GraphMode::WriteSet)) {
            flagged.insert({x, y});
            out.push_back({flavor, x, y, obj});
          }
        }
      }
  }
  return out;
}

// --- invisible reads (syntactic clause) ---------------------------------------

// True iff (a) read-only transactions apply no nontrivial primitive anywhere
// and (b) no transaction applies a nontrivial primitive inside a t-read.
inline bool check_invisible_reads_syntactic(const Execution& e) {
  std::map<TxId, std::set<int>> read_ops;
  for (const auto& entry : e.entries)
    if (auto* i = std::get_if<Invoke>(&entry))
      if (i->op.kind == TOpKind::Read) read_ops[i->tx].insert(i->op_index);
  for (const BaseEvent* b : e.base_events()) {
    if (!is_nontrivial(*b)) continue;
    if (e.read_only(b->tx)) return false;
    if (read_ops.count(b->tx) && read_ops[b->tx].count(b->op_index)) return false;
  }
  return true;
}

// --- progress conditions --------------------------------------------------------

// Progressive TM-progress: an aborted transaction must have a concurrent
// conflicting transaction (intersecting data sets, at least one side writing
// the shared object).
inline std::vector<TxId> check_progressiveness(const Execution& e) {
  std::vector<TxId> violations;
  auto txs = e.txns();
  for (TxId t : txs) {
    if (e.fate(t) != TxFate::Aborted) continue;
    auto dt = e.dset(t);
    auto wt = e.wset(t);
    bool witness = false;
    for (TxId k : txs) {
      if (k == t || !e.concurrent(k, t)) continue;
      auto dk = e.dset(k);
      auto wk = e.wset(k);
      for (TObjId x : dt)
        if (dk.count(x) && (wt.count(x) || wk.count(x))) { witness = true; break; }
      if (witness) break;
    }
    if (!witness) violations.push_back(t);
  }
  return violations;
}

// Obstruction-free TM-progress: a transaction whose events are contiguous in
// the execution must not abort.
inline std::vector<TxId> check_of_progress(const Execution& e) {
  std::vector<TxId> violations;
  for (TxId t : e.txns())
    if (e.fate(t) == TxFate::Aborted && e.step_contention_free_for(t)) violations.push_back(t);
  return violations;
}

// --- per-execution report --------------------------------------------------------

struct TxMetrics {
  TxId tx = 0;
  ProcId proc = 0;
  TxFate fate{};
  int rset = 0, wset = 0;
  int raws = 0, awars = 0, awars_lenient = 0;
  int stalls = 0;
  std::map<int, int> stalls_per_op;
};

struct AnalysisReport {
  Algo impl{};
  std::vector<TxMetrics> txs;
  std::size_t strict_violations = 0, rw_violations = 0, weak_violations = 0;
  bool invisible_reads = false;
  bool uses_cas = false;
  std::vector<TxId> progress_violations;  // progressive for lp, OF otherwise
  std::string opaque;                     // "yes" | "no" | "skipped (over bound)"
  std::string strictly_serializable;
};

inline AnalysisReport analyze(const Execution& e) {
  AnalysisReport r;
  r.impl = e.impl;
  for (TxId t : e.txns()) {
    TxMetrics m;
    m.tx = t;
    m.proc = e.proc_of(t);
    m.fate = e.fate(t);
    m.rset = (int)e.rset(t).size();
    m.wset = (int)e.wset(t).size();
    m.raws = count_raws(e, t);
    m.awars = count_awars(e, t);
    m.awars_lenient = count_awars_lenient(e, t);
    StallReport sr = count_stalls(e, t);
    m.stalls = sr.total;
    m.stalls_per_op = sr.per_op;
    r.txs.push_back(m);
  }
  r.strict_violations = check_dap(e, DapFlavor::Strict).size();
  r.rw_violations = check_dap(e, DapFlavor::Rw).size();
  r.weak_violations = check_dap(e, DapFlavor::Weak).size();
  r.invisible_reads = check_invisible_reads_syntactic(e);
  r.uses_cas = e.uses_cas();
  r.progress_violations =
      e.impl == Algo::Lp ? check_progressiveness(e) : check_of_progress(e);
  {
    History h = history_of(e);
    CheckerOptions opt;
    if (e.impl == Algo::Lp) opt.forced_tryc = lp_forced_outcomes(e);
    Verdict op = check_opacity(h, opt);
    Verdict ss = check_strict_serializability(h, opt);
    auto text = [](const Verdict& v) {
      return v.undecided() ? std::string("skipped (over bound)")
                           : std::string(v.yes() ? "yes" : "no");
    };
    r.opaque = text(op);
    r.strictly_serializable = text(ss);
  }
  return r;
}

inline const char* to_string(TxFate f) {
  switch (f) {
    case TxFate::Committed: return "C";
    case TxFate::Aborted: return "A";
    case TxFate::Incomplete: return "-";
  }
  return "?";
}

inline nlohmann::json to_json(const AnalysisReport& r) {
  nlohmann::json j;
  j["impl"] = to_string(r.impl);
  auto& txs = j["transactions"] = nlohmann::json::array();
  for (const auto& m : r.txs) {
    nlohmann::json t;
    t["tx"] = m.tx;
    t["proc"] = m.proc;
    t["fate"] = to_string(m.fate);
    t["rset"] = m.rset;
    t["wset"] = m.wset;
    t["raws"] = m.raws;
    t["awars"] = m.awars;
    t["awars_lenient"] = m.awars_lenient;
    t["stalls"] = m.stalls;
    txs.push_back(t);
  }
  j["dap_violations"] = {{"strict", r.strict_violations},
                         {"rw", r.rw_violations},
                         {"weak", r.weak_violations}};
  j["invisible_reads"] = r.invisible_reads;
  j["uses_cas"] = r.uses_cas;
  j["progress_violations"] = r.progress_violations;
  j["opaque"] = r.opaque;
  j["strictly_serializable"] = r.strictly_serializable;
  return j;
}

inline std::string to_text(const AnalysisReport& r) {
  std::ostringstream s;
  s << "impl: " << to_string(r.impl) << "\n";
  s << "tx   proc fate rset wset raws awars stalls\n";
  for (const auto& m : r.txs) {
    char line[128];
    std::snprintf(line, sizeof line, "T%-4d %-4d %-4s %-4d %-4d %-4d %-5d %-6d\n", m.tx,
                  m.proc, to_string(m.fate), m.rset, m.wset, m.raws, m.awars, m.stalls);
    s << line;
  }
  s << "dap violations: strict=" << r.strict_violations << " rw=" << r.rw_violations
    << " weak=" << r.weak_violations << "\n";
  s << "invisible reads: " << (r.invisible_reads ? "yes" : "no") << "\n";
  s << "primitives: " << (r.uses_cas ? "read/write/cas" : "read/write only") << "\n";
  s << "opaque: " << r.opaque << "\n";
  s << "strictly serializable: " << r.strictly_serializable << "\n";
  return s.str();
}

}  // namespace tmlab
