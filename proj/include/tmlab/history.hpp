#pragma once

// TM histories: the projection of an execution to t-operation invocation and
// response events.  This is the input of the opacity and strict
// serializability checkers and the unit of the on-disk JSON format.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tmlab/execution.hpp"

namespace tmlab {

struct HistEvent {
  TxId tx = 0;
  ProcId proc = 0;
  bool invoke = true;
  TOp op{};
  TOpResult result{};  // responses only
};

struct HistoryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct History {
  std::vector<HistEvent> events;

  std::vector<TxId> txns() const {
    std::set<TxId> s;
    for (const auto& e : events) s.insert(e.tx);
    return {s.begin(), s.end()};
  }

  std::optional<int> first_index(TxId tx) const {
    for (int i = 0; i < (int)events.size(); ++i)
      if (events[i].tx == tx) return i;
    return std::nullopt;
  }

  std::optional<int> last_index(TxId tx) const {
    for (int i = (int)events.size() - 1; i >= 0; --i)
      if (events[i].tx == tx) return i;
    return std::nullopt;
  }

  bool t_complete(TxId tx) const {
    for (int i = (int)events.size() - 1; i >= 0; --i) {
      if (events[i].tx != tx) continue;
      if (!events[i].invoke)
        return events[i].result.kind == TOpResult::Kind::Committed ||
               events[i].result.kind == TOpResult::Kind::Aborted;
      return false;
    }
    return false;
  }

  bool precedes_rt(TxId a, TxId b) const {
    if (!t_complete(a)) return false;
    auto la = last_index(a), fb = first_index(b);
    return la && fb && *la < *fb;
  }

  bool concurrent(TxId a, TxId b) const {
    return a != b && !precedes_rt(a, b) && !precedes_rt(b, a);
  }
};

inline History history_of(const Execution& e) {
  History h;
  for (const auto& entry : e.entries) {
    if (auto* i = std::get_if<Invoke>(&entry))
      h.events.push_back({i->tx, i->proc, true, i->op, {}});
    else if (auto* r = std::get_if<Respond>(&entry))
      h.events.push_back({r->tx, r->proc, false, r->op, r->result});
  }
  return h;
}

// --- per-transaction summary used by the checkers ---------------------------

struct TxRecord {
  struct Op {
    TOpKind kind{};
    TObjId obj = -1;
    int wval = 0;                      // write argument
    std::optional<TOpResult> result;   // absent for a pending operation
  };

  TxId tx = 0;
  std::vector<Op> ops;

  enum class End {
    Committed,
    Aborted,
    PendingTryCommit,  // tryCommit invoked, response pending: completion explores C and A
    ForcedAbort        // pending read/write or complete-but-not-t-complete: completed as aborted
  } end = End::ForcedAbort;
};

inline std::map<TxId, TxRecord> tx_records(const History& h) {
  std::map<TxId, TxRecord> recs;
  std::map<TxId, bool> open;
  for (const auto& e : h.events) {
    TxRecord& r = recs[e.tx];
    r.tx = e.tx;
    if (e.invoke) {
      if (open[e.tx]) throw HistoryError("overlapping t-operations in tx " + std::to_string(e.tx));
      r.ops.push_back({e.op.kind, e.op.obj, e.op.value, std::nullopt});
      open[e.tx] = true;
    } else {
      if (!open[e.tx] || r.ops.empty() || r.ops.back().result)
        throw HistoryError("response without invocation in tx " + std::to_string(e.tx));
      if (r.ops.back().kind != e.op.kind)
        throw HistoryError("mismatched response kind in tx " + std::to_string(e.tx));
      r.ops.back().result = e.result;
      open[e.tx] = false;
    }
  }
  for (auto& [tx, r] : recs) {
    const bool pending = !r.ops.empty() && !r.ops.back().result;
    if (!pending && !r.ops.empty()) {
      const auto& last = *r.ops.back().result;
      if (last.kind == TOpResult::Kind::Committed) { r.end = TxRecord::End::Committed; continue; }
      if (last.kind == TOpResult::Kind::Aborted) { r.end = TxRecord::End::Aborted; continue; }
    }
    if (pending && r.ops.back().kind == TOpKind::TryCommit)
      r.end = TxRecord::End::PendingTryCommit;
    else
      r.end = TxRecord::End::ForcedAbort;
    for (auto& op : r.ops)
      if (!op.result) op.result = TOpResult::aborted();  // completion rule for pending read/write
  }
  return recs;
}

// --- JSON --------------------------------------------------------------------

inline nlohmann::json to_json(const History& h) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : h.events) {
    nlohmann::json j;
    j["tx"] = e.tx;
    j["proc"] = e.proc;
    j["event"] = e.invoke ? "inv" : "res";
    j["op"] = to_string(e.op.kind);
    if (e.op.kind != TOpKind::TryCommit) j["x"] = e.op.obj;
    if (e.invoke && e.op.kind == TOpKind::Write) j["v"] = e.op.value;
    if (!e.invoke) {
      switch (e.result.kind) {
        case TOpResult::Kind::Value: j["result"] = e.result.value; break;
        case TOpResult::Kind::Ok: j["result"] = "ok"; break;
        case TOpResult::Kind::Committed: j["result"] = "C"; break;
        case TOpResult::Kind::Aborted: j["result"] = "A"; break;
      }
    }
    arr.push_back(j);
  }
  return arr;
}

inline History history_from_json(const nlohmann::json& arr) {
  if (!arr.is_array()) throw HistoryError("history file must be a JSON array");
  History h;
  for (const auto& j : arr) {
    HistEvent e;
    e.tx = j.at("tx").get<int>();
    e.proc = j.value("proc", 0);
    const std::string ev = j.at("event").get<std::string>();
    if (ev != "inv" && ev != "res") throw HistoryError("event must be 'inv' or 'res'");
    e.invoke = (ev == "inv");
    const std::string op = j.at("op").get<std::string>();
    if (op == "read") e.op = TOp::read(j.at("x").get<int>());
    else if (op == "write") e.op = TOp::write(j.at("x").get<int>(), j.value("v", 0));
    else if (op == "tryc") e.op = TOp::tryc();
    else throw HistoryError("unknown op kind: " + op);
    if (!e.invoke) {
      const auto& r = j.at("result");
      if (r.is_number_integer()) e.result = TOpResult::val(r.get<int>());
      else if (r == "ok") e.result = TOpResult::ok();
      else if (r == "C") e.result = TOpResult::committed();
      else if (r == "A") e.result = TOpResult::aborted();
      else throw HistoryError("unknown result");
    }
    h.events.push_back(e);
  }
  tx_records(h);  // throws on ill-formed histories
  return h;
}

}  // namespace tmlab
