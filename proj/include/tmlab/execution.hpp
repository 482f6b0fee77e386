#pragma once

// The execution log: a totally ordered sequence of base events and
// t-operation invocation/response markers.  Every analyzer and the history
// checker read from this single source of truth.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <variant>
#include <vector>

#include "tmlab/memory.hpp"
#include "tmlab/program.hpp"

namespace tmlab {

struct Invoke {
  TxId tx = 0;
  ProcId proc = 0;
  int op_index = -1;
  TOp op{};
};

struct Respond {
  TxId tx = 0;
  ProcId proc = 0;
  int op_index = -1;
  TOp op{};
  TOpResult result{};
};

using Entry = std::variant<Invoke, Respond, BaseEvent>;

inline TxId entry_tx(const Entry& e) {
  if (auto* i = std::get_if<Invoke>(&e)) return i->tx;
  if (auto* r = std::get_if<Respond>(&e)) return r->tx;
  return std::get<BaseEvent>(e).tx;
}

inline ProcId entry_proc(const Entry& e) {
  if (auto* i = std::get_if<Invoke>(&e)) return i->proc;
  if (auto* r = std::get_if<Respond>(&e)) return r->proc;
  return std::get<BaseEvent>(e).proc;
}

// Enabled-but-not-applied base event of a t-incomplete transaction at the end
// of the log; used by the weak-DAP contention analysis.
struct PoisedNote {
  ProcId proc = 0;
  TxId tx = 0;
  BaseObjId obj{};
  PrimKind kind{};
  std::string marker;
};

enum class TxFate { Committed, Aborted, Incomplete };

struct Execution {
  Algo impl = Algo::Lp;
  int n = 1;
  int objects = 1;
  std::vector<Entry> entries;
  std::vector<PoisedNote> final_poised;

  bool operator==(const Execution& o) const;

  std::vector<TxId> txns() const {
    std::set<TxId> s;
    for (const auto& e : entries) s.insert(entry_tx(e));
    return {s.begin(), s.end()};
  }

  std::optional<int> first_index(TxId tx) const {
    for (int i = 0; i < (int)entries.size(); ++i)
      if (entry_tx(entries[i]) == tx) return i;
    return std::nullopt;
  }

  std::optional<int> last_index(TxId tx) const {
    for (int i = (int)entries.size() - 1; i >= 0; --i)
      if (entry_tx(entries[i]) == tx) return i;
    return std::nullopt;
  }

  ProcId proc_of(TxId tx) const {
    for (const auto& e : entries)
      if (entry_tx(e) == tx) return entry_proc(e);
    return 0;
  }

  TxFate fate(TxId tx) const {
    for (int i = (int)entries.size() - 1; i >= 0; --i) {
      if (entry_tx(entries[i]) != tx) continue;
      if (auto* r = std::get_if<Respond>(&entries[i])) {
        if (r->result.kind == TOpResult::Kind::Committed) return TxFate::Committed;
        if (r->result.kind == TOpResult::Kind::Aborted) return TxFate::Aborted;
      }
      return TxFate::Incomplete;
    }
    return TxFate::Incomplete;
  }

  bool t_complete(TxId tx) const { return fate(tx) != TxFate::Incomplete; }

  // Real-time order: T_a precedes T_b iff T_a is t-complete and its last
  // event precedes T_b's first.
  bool precedes_rt(TxId a, TxId b) const {
    if (!t_complete(a)) return false;
    auto la = last_index(a), fb = first_index(b);
    return la && fb && *la < *fb;
  }

  bool concurrent(TxId a, TxId b) const {
    return a != b && !precedes_rt(a, b) && !precedes_rt(b, a);
  }

  // Read/write sets are determined by invocations (a t-read that later aborts
  // still puts its object into the read set).
  std::set<TObjId> rset(TxId tx) const { return opset(tx, TOpKind::Read); }
  std::set<TObjId> wset(TxId tx) const { return opset(tx, TOpKind::Write); }
  std::set<TObjId> dset(TxId tx) const {
    auto d = rset(tx);
    auto w = wset(tx);
    d.insert(w.begin(), w.end());
    return d;
  }

  bool read_only(TxId tx) const { return wset(tx).empty(); }

  std::vector<const BaseEvent*> base_events() const {
    std::vector<const BaseEvent*> v;
    for (const auto& e : entries)
      if (auto* b = std::get_if<BaseEvent>(&e)) v.push_back(b);
    return v;
  }

  std::vector<const BaseEvent*> base_events_of(TxId tx) const {
    std::vector<const BaseEvent*> v;
    for (const auto& e : entries)
      if (auto* b = std::get_if<BaseEvent>(&e))
        if (b->tx == tx) v.push_back(b);
    return v;
  }

  // Step contention-free for tx: the events of E|tx are contiguous in E.
  bool step_contention_free_for(TxId tx) const {
    auto f = first_index(tx), l = last_index(tx);
    if (!f) return true;
    for (int i = *f; i <= *l; ++i)
      if (entry_tx(entries[i]) != tx) return false;
    return true;
  }

  bool uses_cas(std::optional<TxId> tx = std::nullopt) const {
    for (const auto& e : entries)
      if (auto* b = std::get_if<BaseEvent>(&e))
        if (b->kind == PrimKind::Cas && (!tx || b->tx == *tx)) return true;
    return false;
  }

 private:
  std::set<TObjId> opset(TxId tx, TOpKind k) const {
    std::set<TObjId> s;
    for (const auto& e : entries)
      if (auto* i = std::get_if<Invoke>(&e))
        if (i->tx == tx && i->op.kind == k) s.insert(i->op.obj);
    return s;
  }
};

inline bool operator==(const Invoke& a, const Invoke& b) {
  return a.tx == b.tx && a.proc == b.proc && a.op_index == b.op_index && a.op == b.op;
}

inline bool operator==(const Respond& a, const Respond& b) {
  return a.tx == b.tx && a.proc == b.proc && a.op_index == b.op_index && a.op == b.op &&
         a.result == b.result;
}

inline bool operator==(const BaseEvent& a, const BaseEvent& b) {
  auto args_eq = [](const PrimArgs& x, const PrimArgs& y) {
    if (x.index() != y.index()) return false;
    if (auto* bx = std::get_if<BaseValue>(&x)) return *bx == std::get<BaseValue>(y);
    if (auto* cx = std::get_if<CasArgs>(&x)) {
      const auto& cy = std::get<CasArgs>(y);
      return cx->expected == cy.expected && cx->desired == cy.desired;
    }
    return true;
  };
  return a.seq == b.seq && a.proc == b.proc && a.tx == b.tx && a.op_index == b.op_index &&
         a.obj == b.obj && a.kind == b.kind && args_eq(a.args, b.args) &&
         a.response == b.response && a.cas_ok == b.cas_ok &&
         std::string_view(a.marker) == std::string_view(b.marker);
}

inline bool Execution::operator==(const Execution& o) const {
  return impl == o.impl && n == o.n && objects == o.objects && entries == o.entries;
}

struct WellFormednessError : std::logic_error {
  using std::logic_error::logic_error;
};

// Structural check run after every produced execution: per transaction the
// log alternates Invoke/Respond, base events sit inside the t-operation they
// belong to, and nothing follows a commit or abort.
inline void assert_well_formed(const Execution& e) {
  struct St {
    bool open = false;
    int op_index = -1;
    bool done = false;
  };
  std::map<TxId, St> st;
  for (const auto& entry : e.entries) {
    TxId tx = entry_tx(entry);
    St& s = st[tx];
    if (s.done) throw WellFormednessError("events after C/A of tx " + std::to_string(tx));
    if (auto* i = std::get_if<Invoke>(&entry)) {
      if (s.open) throw WellFormednessError("nested invocation in tx " + std::to_string(tx));
      if (i->op_index != s.op_index + 1)
        throw WellFormednessError("op indexes not sequential in tx " + std::to_string(tx));
      s.open = true;
      s.op_index = i->op_index;
    } else if (auto* r = std::get_if<Respond>(&entry)) {
      if (!s.open || r->op_index != s.op_index)
        throw WellFormednessError("response without matching invocation in tx " +
                                  std::to_string(tx));
      s.open = false;
      if (r->result.kind == TOpResult::Kind::Committed ||
          r->result.kind == TOpResult::Kind::Aborted)
        s.done = true;
    } else {
      const auto& b = std::get<BaseEvent>(entry);
      if (!s.open || b.op_index != s.op_index)
        throw WellFormednessError("base event outside its t-operation in tx " +
                                  std::to_string(tx));
    }
  }
}

}  // namespace tmlab
