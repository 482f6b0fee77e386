#pragma once

// Opacity and strict serializability of finite histories, decided by
// completion construction and depth-first search over serialization orders
// that respect real-time precedence.  A transaction prefix whose reads are
// already illegal is pruned.  Histories above the transaction bound yield an
// explicit undecided verdict, never a wrong one.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tmlab/history.hpp"

namespace tmlab {

struct Verdict {
  enum class State { Yes, No, Undecided } state = State::Undecided;
  std::vector<TxId> witness_order;       // serialization, when positive
  std::map<TxId, bool> witness_commits;  // chosen outcome per pending tryCommit
  std::string certificate;               // explanation, when negative or undecided

  bool yes() const { return state == State::Yes; }
  bool no() const { return state == State::No; }
  bool undecided() const { return state == State::Undecided; }
};

struct CheckerOptions {
  int max_txns = 7;
  // Outcome of pending tryCommits when known from the execution (the
  // lock-based implementation pins them: committed iff the release writes
  // started).  Absent entries are explored both ways.
  std::map<TxId, bool> forced_tryc;
};

namespace detail {

struct SeqTx {
  TxId tx = 0;
  bool committed = false;
  std::vector<TxRecord::Op> ops;
};

// Legality of placing one transaction after a committed-state prefix: every
// non-abort read returns its own latest preceding write, else the latest
// committed write placed before it, else the initial value 0.
inline bool legal_here(const SeqTx& t, const std::map<TObjId, int>& committed) {
  std::map<TObjId, int> own;
  for (const auto& op : t.ops) {
    if (!op.result || op.result->is_abort()) continue;
    if (op.kind == TOpKind::Read) {
      int expect = 0;
      if (auto it = own.find(op.obj); it != own.end()) expect = it->second;
      else if (auto ic = committed.find(op.obj); ic != committed.end()) expect = ic->second;
      if (op.result->kind != TOpResult::Kind::Value || op.result->value != expect) return false;
    } else if (op.kind == TOpKind::Write) {
      own[op.obj] = op.wval;
    }
  }
  return true;
}

inline void fold_writes(const SeqTx& t, std::map<TObjId, int>& committed) {
  if (!t.committed) return;
  for (const auto& op : t.ops)
    if (op.kind == TOpKind::Write && op.result && !op.result->is_abort())
      committed[op.obj] = op.wval;
}

struct Search {
  std::vector<SeqTx> txs;
  // rt[i] = indexes that must precede i in any serialization.
  std::vector<std::vector<int>> rt_preds;
  std::vector<TxId> order;
  std::vector<bool> placed;

  bool dfs(std::map<TObjId, int>& committed) {
    if (order.size() == txs.size()) return true;
    for (int i = 0; i < (int)txs.size(); ++i) {
      if (placed[i]) continue;
      bool ready = true;
      for (int p : rt_preds[i])
        if (!placed[p]) { ready = false; break; }
      if (!ready) continue;
      if (!legal_here(txs[i], committed)) continue;  // prune: cannot become legal later
      placed[i] = true;
      order.push_back(txs[i].tx);
      std::map<TObjId, int> saved;
      bool folded = txs[i].committed;
      if (folded) { saved = committed; fold_writes(txs[i], committed); }
      if (dfs(committed)) return true;
      if (folded) committed = std::move(saved);
      order.pop_back();
      placed[i] = false;
    }
    return false;
  }
};

// One completion: a choice of C/A for each pending tryCommit.
inline Verdict search_serialization(const History& h, const std::map<TxId, TxRecord>& recs,
                                    const std::map<TxId, bool>& commits_choice,
                                    bool committed_only) {
  std::vector<SeqTx> txs;
  for (const auto& [tx, r] : recs) {
    bool committed = false;
    switch (r.end) {
      case TxRecord::End::Committed: committed = true; break;
      case TxRecord::End::Aborted: committed = false; break;
      case TxRecord::End::ForcedAbort: committed = false; break;
      case TxRecord::End::PendingTryCommit: committed = commits_choice.at(tx); break;
    }
    if (committed_only && !committed) continue;
    txs.push_back({tx, committed, r.ops});
  }

  Search s;
  s.txs = txs;
  s.rt_preds.resize(txs.size());
  for (int i = 0; i < (int)txs.size(); ++i)
    for (int j = 0; j < (int)txs.size(); ++j)
      if (i != j && h.precedes_rt(txs[j].tx, txs[i].tx)) s.rt_preds[i].push_back(j);
  s.placed.assign(txs.size(), false);

  std::map<TObjId, int> committed_vals;
  Verdict v;
  if (s.dfs(committed_vals)) {
    v.state = Verdict::State::Yes;
    v.witness_order = s.order;
    for (const auto& [tx, c] : commits_choice) v.witness_commits[tx] = c;
  } else {
    v.state = Verdict::State::No;
  }
  return v;
}

inline Verdict check(const History& h, const CheckerOptions& opt, bool committed_only) {
  std::map<TxId, TxRecord> recs;
  recs = tx_records(h);
  if ((int)recs.size() > opt.max_txns) {
    Verdict v;
    v.state = Verdict::State::Undecided;
    std::ostringstream c;
    c << "undecided: " << recs.size() << " transactions exceed bound " << opt.max_txns;
    v.certificate = c.str();
    return v;
  }

  std::vector<TxId> pendings;
  for (const auto& [tx, r] : recs)
    if (r.end == TxRecord::End::PendingTryCommit && !opt.forced_tryc.count(tx))
      pendings.push_back(tx);

  int completions = 1 << pendings.size();
  for (int mask = 0; mask < completions; ++mask) {
    std::map<TxId, bool> choice;
    for (const auto& [tx, forced] : opt.forced_tryc)
      if (recs.count(tx) && recs.at(tx).end == TxRecord::End::PendingTryCommit)
        choice[tx] = forced;
    for (std::size_t i = 0; i < pendings.size(); ++i) choice[pendings[i]] = (mask >> i) & 1;
    Verdict v = search_serialization(h, recs, choice, committed_only);
    if (v.yes()) return v;
  }

  Verdict v;
  v.state = Verdict::State::No;
  std::ostringstream c;
  c << "no legal " << (committed_only ? "committed-transaction " : "")
    << "serialization among " << completions << " completion(s) of " << recs.size()
    << " transaction(s)";
  v.certificate = c.str();
  return v;
}

}  // namespace detail

// A t-sequential, t-complete history given as transactions in serialization
// order; true iff every non-abort read returns the latest written value.
inline bool is_legal(const std::vector<TxRecord>& seq) {
  std::map<TObjId, int> committed;
  for (const auto& r : seq) {
    detail::SeqTx t{r.tx, r.end == TxRecord::End::Committed, r.ops};
    if (!detail::legal_here(t, committed)) return false;
    detail::fold_writes(t, committed);
  }
  return true;
}

inline Verdict check_opacity(const History& h, const CheckerOptions& opt = {}) {
  return detail::check(h, opt, /*committed_only=*/false);
}

inline Verdict check_strict_serializability(const History& h, const CheckerOptions& opt = {}) {
  return detail::check(h, opt, /*committed_only=*/true);
}

// Completion outcome of pending tryCommits pinned by a lock-based execution:
// committed iff the transaction started the commit-path release writes (their
// values are then visible to others), aborted otherwise.
inline std::map<TxId, bool> lp_forced_outcomes(const Execution& e) {
  std::map<TxId, bool> forced;
  for (TxId tx : e.txns()) {
    if (e.fate(tx) != TxFate::Incomplete) continue;
    bool released = false;
    for (const BaseEvent* b : e.base_events_of(tx)) {
      std::string_view m = b->marker;
      if (m == "rel-L" || m == "rel-r") { released = true; break; }
    }
    forced[tx] = released;
  }
  return forced;
}

}  // namespace tmlab
