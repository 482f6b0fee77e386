#pragma once

// Scripted reproductions of the proof constructions and separation examples,
// the randomized fuzz harness, and the blocking-vs-non-blocking comparison
// table.  Every scenario builds a schedule, runs it, and evaluates its
// expectations purely through analyzer and checker outputs.

#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tmlab/analysis.hpp"
#include "tmlab/checker.hpp"
#include "tmlab/executor.hpp"

namespace tmlab {

struct ScenarioParams {
  int n = -1;     // process count, scenario default when negative
  int wset = -1;  // write-set size for the single-RAW scenario
};

struct ScenarioAssertion {
  std::string name;
  std::string expected;
  std::string measured;
  bool pass = true;
};

struct ScenarioReport {
  std::string name;
  std::string impl;
  nlohmann::json params = nlohmann::json::object();
  std::vector<ScenarioAssertion> assertions;
  std::string error;  // scheduling failure etc.; report fails, never crashes

  bool pass() const {
    if (!error.empty()) return false;
    for (const auto& a : assertions)
      if (!a.pass) return false;
    return true;
  }

  void expect_eq(const std::string& what, long long expected, long long measured) {
    assertions.push_back({what, std::to_string(expected), std::to_string(measured),
                          expected == measured});
  }

  void expect_le(const std::string& what, long long measured, long long bound) {
    assertions.push_back({what, "<= " + std::to_string(bound), std::to_string(measured),
                          measured <= bound});
  }

  void expect_ge(const std::string& what, long long measured, long long bound) {
    assertions.push_back({what, ">= " + std::to_string(bound), std::to_string(measured),
                          measured >= bound});
  }

  void expect_true(const std::string& what, bool measured) {
    assertions.push_back({what, "true", measured ? "true" : "false", measured});
  }

  void expect_false(const std::string& what, bool measured) {
    assertions.push_back({what, "false", measured ? "true" : "false", !measured});
  }

  std::optional<long long> measured(const std::string& what) const {
    for (const auto& a : assertions)
      if (a.name == what) return std::stoll(a.measured);
    return std::nullopt;
  }
};

inline nlohmann::json to_json(const ScenarioReport& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["impl"] = r.impl;
  j["params"] = r.params;
  j["pass"] = r.pass();
  if (!r.error.empty()) j["error"] = r.error;
  auto& as = j["assertions"] = nlohmann::json::array();
  for (const auto& a : r.assertions)
    as.push_back({{"name", a.name},
                  {"expected", a.expected},
                  {"measured", a.measured},
                  {"pass", a.pass}});
  return j;
}

inline std::string to_text(const ScenarioReport& r) {
  std::ostringstream s;
  s << "scenario " << r.name << " (" << r.impl << ")";
  if (!r.params.empty()) s << " " << r.params.dump();
  s << "\n";
  if (!r.error.empty()) s << "  error: " << r.error << "\n";
  for (const auto& a : r.assertions)
    s << "  [" << (a.pass ? "pass" : "FAIL") << "] " << a.name << ": expected " << a.expected
      << ", measured " << a.measured << "\n";
  s << (r.pass() ? "PASS" : "FAIL") << "\n";
  return s.str();
}

// --- helpers -----------------------------------------------------------------

inline std::optional<TOpResult> op_result(const Execution& e, TxId tx, int op_index) {
  for (const auto& entry : e.entries)
    if (auto* r = std::get_if<Respond>(&entry))
      if (r->tx == tx && r->op_index == op_index) return r->result;
  return std::nullopt;
}

inline int op_awars(const Execution& e, TxId tx, int op_index) {
  int n = 0;
  for (const BaseEvent* b : e.base_events_of(tx))
    if (b->op_index == op_index && b->kind == PrimKind::Cas && b->cas_ok) ++n;
  return n;
}

inline int op_base_events(const Execution& e, TxId tx, int op_index) {
  int n = 0;
  for (const BaseEvent* b : e.base_events_of(tx))
    if (b->op_index == op_index) ++n;
  return n;
}

inline int nontrivial_events(const Execution& e, TxId tx) {
  int n = 0;
  for (const BaseEvent* b : e.base_events_of(tx))
    if (is_nontrivial(*b)) ++n;
  return n;
}

// Largest per-t-read stall total across all transactions.
inline int max_tread_stalls(const Execution& e) {
  std::map<TxId, std::set<int>> read_ops;
  for (const auto& entry : e.entries)
    if (auto* i = std::get_if<Invoke>(&entry))
      if (i->op.kind == TOpKind::Read) read_ops[i->tx].insert(i->op_index);
  int best = 0;
  for (const auto& [tx, ops] : read_ops) {
    StallReport sr = count_stalls(e, tx);
    for (int op : ops)
      if (auto it = sr.per_op.find(op); it != sr.per_op.end()) best = std::max(best, it->second);
  }
  return best;
}

namespace scenario_impl {

using Builder = std::function<ScenarioReport(const ScenarioParams&)>;

// The (n-1)-stall construction: n-1 writers of the same t-object each poised
// at their first nontrivial event on its record, then the reader's t-read.
inline ScenarioReport stall_shape(Algo impl, int n) {
  ScenarioReport rep;
  rep.impl = to_string(impl);
  rep.params["n"] = n;
  if (n < 2) throw ScriptError("stall scenario needs n >= 2");

  ScheduleScript s;
  s.impl = impl;
  s.n = n;
  s.objects = 1;
  for (int i = 1; i < n; ++i)
    s.programs.push_back({{TOp::write(0, 10 + i), TOp::tryc()}});
  s.programs.push_back({{TOp::read(0)}});

  const char* write_poise = impl == Algo::Lp ? lp_marker::acq_write_r : of_marker::cas_tvar_install;
  const char* read_poise = impl == Algo::Lp ? lp_marker::read_v : of_marker::read_tvar;
  for (int i = 1; i < n; ++i) s.steps.push_back(ScheduleDirective::until(i, write_poise));
  s.steps.push_back(ScheduleDirective::until(n, read_poise));
  for (int i = 1; i < n; ++i) s.steps.push_back(ScheduleDirective::step(i));
  s.steps.push_back(ScheduleDirective::solo(n));
  for (int i = 1; i < n; ++i) s.steps.push_back(ScheduleDirective::solo(i));

  RunResult rr = run_schedule(s);
  const TxId reader = n;  // one transaction per process, ids assigned in process order
  StallReport sr = count_stalls(rr.exec, reader);
  int tread = sr.per_op.count(0) ? sr.per_op.at(0) : 0;
  rep.expect_eq("reader t-read stalls", impl == Algo::Lp ? 0 : n - 1, tread);
  rep.expect_le("max t-read stalls (any tx)", max_tread_stalls(rr.exec),
                impl == Algo::Lp ? 2 : n - 1);
  auto res = op_result(rr.exec, reader, 0);
  if (impl == Algo::OfWeakdap) {
    // The weak DAP read meets a live owner: it cas-aborts the owner and then
    // aborts itself, after having incurred the stalls on the record read.
    rep.expect_true("reader read aborted on live owner", res && res->is_abort());
  } else {
    rep.expect_true("reader read returned initial value",
                    res && res->kind == TOpResult::Kind::Value && res->value == 0);
  }
  if (impl == Algo::Lp)
    rep.expect_false("lp uses cas", rr.exec.uses_cas());
  else
    rep.expect_true("contended run applies cas", rr.exec.uses_cas());
  return rep;
}

// The linear-AWAR read pattern: m = n-3 live owners, then a reader of
// X_1..X_m; every contended t-read cas-aborts one owner.
inline ScenarioReport of_read_awar(int n) {
  ScenarioReport rep;
  rep.impl = to_string(Algo::OfRwdap);
  rep.params["n"] = n;
  if (n < 4) throw ScriptError("of-read-awar needs n >= 4");
  const int m = n - 3;

  ScheduleScript s;
  s.impl = Algo::OfRwdap;
  s.n = n;
  s.objects = 2 * m;  // X_j = j-1, Z_j = m + j - 1
  for (int j = 1; j <= m; ++j)
    s.programs.push_back({{TOp::read(m + j - 1), TOp::write(j - 1, 7), TOp::tryc()}});
  for (int p = m + 1; p < n; ++p) s.programs.push_back({});
  TmProgram reads;
  for (int j = 1; j <= m; ++j) reads.push_back(TOp::read(j - 1));
  s.programs.push_back({reads});

  for (int j = 1; j <= m; ++j)
    s.steps.push_back(ScheduleDirective::until(j, of_marker::cas_status_commit));
  s.steps.push_back(ScheduleDirective::solo(n));

  RunResult rr = run_schedule(s);
  const TxId reader = m + 1;  // processes m+1..n-1 run no transactions
  rep.expect_eq("reader awars", m, count_awars(rr.exec, reader));
  rep.expect_eq("reader awars (lenient)", m, count_awars_lenient(rr.exec, reader));
  rep.expect_eq("reader raws", 0, count_raws(rr.exec, reader));
  bool per_read_one = true;
  bool values_old = true;
  for (int j = 0; j < m; ++j) {
    per_read_one &= op_awars(rr.exec, reader, j) <= 1;
    auto res = op_result(rr.exec, reader, j);
    values_old &= res && res->kind == TOpResult::Kind::Value && res->value == 0;
  }
  rep.expect_true("each t-read performs <= 1 awar", per_read_one);
  rep.expect_true("each t-read returned the old value", values_old);
  return rep;
}

// Same read pattern against committed owners of the weak DAP TM: ownership
// transfer still costs one cas per t-read.
inline ScenarioReport weakdap_read_awar(int n) {
  ScenarioReport rep;
  rep.impl = to_string(Algo::OfWeakdap);
  rep.params["n"] = n;
  if (n < 2) throw ScriptError("weakdap-read-awar needs n >= 2");
  const int m = std::max(1, n - 3);

  ScheduleScript s;
  s.impl = Algo::OfWeakdap;
  s.n = n;
  s.objects = m;
  for (int j = 1; j <= m; ++j) s.programs.push_back({{TOp::write(j - 1, 7), TOp::tryc()}});
  for (int p = m + 1; p < n; ++p) s.programs.push_back({});
  TmProgram reads;
  for (int j = 1; j <= m; ++j) reads.push_back(TOp::read(j - 1));
  s.programs.push_back({reads});
  for (int j = 1; j <= m; ++j) s.steps.push_back(ScheduleDirective::solo(j));
  s.steps.push_back(ScheduleDirective::solo(n));

  RunResult rr = run_schedule(s);
  const TxId reader = m + 1;
  rep.expect_eq("reader awars", m, count_awars(rr.exec, reader));
  bool values_new = true;
  for (int j = 0; j < m; ++j) {
    auto res = op_result(rr.exec, reader, j);
    values_new &= res && res->kind == TOpResult::Kind::Value && res->value == 7;
  }
  rep.expect_true("each t-read returned the committed value", values_new);
  return rep;
}

// Single multi-RAW accounting: a solo updating transaction performs exactly the one
// multi-RAW of the acquire pattern; read-only transactions none.
inline ScenarioReport lp_single_raw(int wset) {
  ScenarioReport rep;
  rep.impl = to_string(Algo::Lp);
  rep.params["wset"] = wset;
  if (wset < 1) throw ScriptError("lp-single-raw needs wset >= 1");

  ScheduleScript s;
  s.impl = Algo::Lp;
  s.n = 3;
  s.objects = std::max(wset, 2);
  TmProgram upd;
  for (int i = 0; i < wset; ++i) upd.push_back(TOp::write(i, 5));
  upd.push_back(TOp::tryc());
  s.programs.push_back({upd});
  s.programs.push_back({{TOp::read(0), TOp::read(1), TOp::tryc()}});
  s.steps.push_back(ScheduleDirective::solo(1));
  s.steps.push_back(ScheduleDirective::solo(2));

  RunResult rr = run_schedule(s);
  rep.expect_eq("updating raw count", 1, count_raws(rr.exec, 1));
  rep.expect_eq("updating awar count", 0, count_awars(rr.exec, 1));
  rep.expect_eq("read-only raw count", 0, count_raws(rr.exec, 2));
  rep.expect_eq("read-only awar count", 0, count_awars(rr.exec, 2));
  rep.expect_false("lp uses cas", rr.exec.uses_cas());
  rep.expect_eq("solo stalls", 0,
                count_stalls(rr.exec, 1).total + count_stalls(rr.exec, 2).total);
  rep.expect_true("both committed", rr.exec.fate(1) == TxFate::Committed &&
                                        rr.exec.fate(2) == TxFate::Committed);
  return rep;
}

inline ScenarioReport lp_invisible_reads() {
  ScenarioReport rep;
  rep.impl = to_string(Algo::Lp);

  ScheduleScript s;
  s.impl = Algo::Lp;
  s.n = 2;
  s.objects = 3;
  s.programs.push_back({{TOp::read(0), TOp::read(1), TOp::tryc()}});
  s.programs.push_back({{TOp::write(2, 9), TOp::tryc()}});
  s.steps.push_back(ScheduleDirective::until(2, lp_marker::write_v));  // holds the lock on 2
  s.steps.push_back(ScheduleDirective::solo(1));
  s.steps.push_back(ScheduleDirective::solo(2));

  RunResult rr = run_schedule(s);
  rep.expect_true("syntactic invisible reads", check_invisible_reads_syntactic(rr.exec));
  rep.expect_eq("read-only tx nontrivial events", 0, nontrivial_events(rr.exec, 1));
  rep.expect_false("lp uses cas", rr.exec.uses_cas());
  rep.expect_true("reader committed", rr.exec.fate(1) == TxFate::Committed);
  rep.expect_eq("progressiveness violations", 0, (long long)check_progressiveness(rr.exec).size());
  return rep;
}

// Write-write conflict at acquire: the loser rolls its ready bits back and
// aborts; every abort has a conflict witness.
inline ScenarioReport lp_progressive_abort() {
  ScenarioReport rep;
  rep.impl = to_string(Algo::Lp);

  ScheduleScript s;
  s.impl = Algo::Lp;
  s.n = 3;
  s.objects = 2;
  s.programs.push_back({{TOp::write(0, 1), TOp::tryc()}});
  s.programs.push_back({{TOp::write(0, 2), TOp::tryc()}});
  s.steps.push_back(ScheduleDirective::until(1, lp_marker::acq_read_r));
  s.steps.push_back(ScheduleDirective::solo(2));
  s.steps.push_back(ScheduleDirective::solo(1));

  RunResult rr = run_schedule(s);
  rep.expect_true("contending writer aborted", rr.exec.fate(2) == TxFate::Aborted);
  rep.expect_true("lock holder committed", rr.exec.fate(1) == TxFate::Committed);
  rep.expect_eq("progressiveness violations", 0, (long long)check_progressiveness(rr.exec).size());
  auto v = rr.memory.at(BaseObjId::val(0));
  rep.expect_true("winner's value installed", std::get<PlainVal>(v) == PlainVal{1, 1});
  return rep;
}

// A t-read that observes a set lock bit aborts without any nontrivial event.
inline ScenarioReport lp_read_locked_aborts() {
  ScenarioReport rep;
  rep.impl = to_string(Algo::Lp);

  ScheduleScript s;
  s.impl = Algo::Lp;
  s.n = 2;
  s.objects = 1;
  s.programs.push_back({{TOp::write(0, 7), TOp::tryc()}});
  s.programs.push_back({{TOp::read(0)}});
  s.steps.push_back(ScheduleDirective::until(1, lp_marker::write_v));
  s.steps.push_back(ScheduleDirective::solo(2));
  s.steps.push_back(ScheduleDirective::solo(1));

  RunResult rr = run_schedule(s);
  auto res = op_result(rr.exec, 2, 0);
  rep.expect_true("read aborted on locked object", res && res->is_abort());
  rep.expect_eq("aborted reader nontrivial events", 0, nontrivial_events(rr.exec, 2));
  rep.expect_true("writer committed", rr.exec.fate(1) == TxFate::Committed);
  rep.expect_eq("progressiveness violations", 0, (long long)check_progressiveness(rr.exec).size());
  return rep;
}

// Separation of weak from rw DAP: T0 reads X and writes Y, left t-incomplete; T1
// writes X solo, T2 reads Y solo.  They contend on T0's status word with no
// path in the write-set conflict graph.
inline ScenarioReport weakdap_not_rwdap() {
  ScenarioReport rep;
  rep.impl = to_string(Algo::OfWeakdap);

  ScheduleScript s;
  s.impl = Algo::OfWeakdap;
  s.n = 3;
  s.objects = 2;  // X = 0, Y = 1
  s.programs.push_back({{TOp::read(0), TOp::write(1, 5)}});
  s.programs.push_back({{TOp::write(0, 6), TOp::tryc()}});
  s.programs.push_back({{TOp::read(1), TOp::tryc()}});
  s.steps.push_back(ScheduleDirective::solo(1));
  s.steps.push_back(ScheduleDirective::solo(2));
  s.steps.push_back(ScheduleDirective::solo(3));

  RunResult rr = run_schedule(s);
  rep.expect_ge("rw-dap violations", (long long)check_dap(rr.exec, DapFlavor::Rw).size(), 1);
  rep.expect_eq("weak-dap violations", 0, (long long)check_dap(rr.exec, DapFlavor::Weak).size());
  rep.expect_true("both solo transactions committed",
                  rr.exec.fate(2) == TxFate::Committed && rr.exec.fate(3) == TxFate::Committed);
  return rep;
}

// Separation of rw from strict DAP: T0 writes X and Y, left t-incomplete; T1 reads X
// solo, T2 reads Y solo.  They contend on T0's status word although their
// data sets are disjoint; the write-set graph connects X and Y.
inline ScenarioReport rwdap_not_strict() {
  ScenarioReport rep;
  rep.impl = to_string(Algo::OfRwdap);

  ScheduleScript s;
  s.impl = Algo::OfRwdap;
  s.n = 3;
  s.objects = 2;
  s.programs.push_back({{TOp::write(0, 3), TOp::write(1, 4)}});
  s.programs.push_back({{TOp::read(0), TOp::tryc()}});
  s.programs.push_back({{TOp::read(1), TOp::tryc()}});
  s.steps.push_back(ScheduleDirective::solo(1));
  s.steps.push_back(ScheduleDirective::solo(2));
  s.steps.push_back(ScheduleDirective::solo(3));

  RunResult rr = run_schedule(s);
  rep.expect_ge("strict-dap violations", (long long)check_dap(rr.exec, DapFlavor::Strict).size(), 1);
  rep.expect_eq("rw-dap violations", 0, (long long)check_dap(rr.exec, DapFlavor::Rw).size());
  rep.expect_true("both readers committed",
                  rr.exec.fate(2) == TxFate::Committed && rr.exec.fate(3) == TxFate::Committed);
  return rep;
}

inline History fig2d_history() {
  // Objects: X = 0, Z = 1.  T1 reads Z and writes X with its tryCommit left
  // pending; T2 commits a write to Z; T3 then T4 are committed readers of X
  // returning the initial and the new value.
  History h;
  auto inv = [&](TxId tx, TOp op) { h.events.push_back({tx, tx, true, op, {}}); };
  auto res = [&](TxId tx, TOp op, TOpResult r) { h.events.push_back({tx, tx, false, op, r}); };
  inv(1, TOp::read(1));  res(1, TOp::read(1), TOpResult::val(0));
  inv(1, TOp::write(0, 1)); res(1, TOp::write(0, 1), TOpResult::ok());
  inv(1, TOp::tryc());  // pending
  inv(2, TOp::write(1, 1)); res(2, TOp::write(1, 1), TOpResult::ok());
  inv(2, TOp::tryc()); res(2, TOp::tryc(), TOpResult::committed());
  inv(3, TOp::read(0)); res(3, TOp::read(0), TOpResult::val(0));
  inv(3, TOp::tryc()); res(3, TOp::tryc(), TOpResult::committed());
  inv(4, TOp::read(0)); res(4, TOp::read(0), TOpResult::val(1));
  inv(4, TOp::tryc()); res(4, TOp::tryc(), TOpResult::committed());
  return h;
}

inline History fig3d_history() {
  // Objects: X1 = 0, X2 = 1, Z1 = 2, Z2 = 3.  Writers T1, T2 read their Z
  // and write their X, tryCommits pending; T3 commits a write to Z2; the
  // reader T5 returns old values of X1, X2 while T4 returns the new X2.
  History h;
  auto inv = [&](TxId tx, TOp op) { h.events.push_back({tx, tx, true, op, {}}); };
  auto res = [&](TxId tx, TOp op, TOpResult r) { h.events.push_back({tx, tx, false, op, r}); };
  inv(1, TOp::read(2)); res(1, TOp::read(2), TOpResult::val(0));
  inv(1, TOp::write(0, 1)); res(1, TOp::write(0, 1), TOpResult::ok());
  inv(1, TOp::tryc());  // pending
  inv(2, TOp::read(3)); res(2, TOp::read(3), TOpResult::val(0));
  inv(2, TOp::write(1, 1)); res(2, TOp::write(1, 1), TOpResult::ok());
  inv(2, TOp::tryc());  // pending
  inv(3, TOp::write(3, 1)); res(3, TOp::write(3, 1), TOpResult::ok());
  inv(3, TOp::tryc()); res(3, TOp::tryc(), TOpResult::committed());
  inv(5, TOp::read(0)); res(5, TOp::read(0), TOpResult::val(0));
  inv(4, TOp::read(0)); res(4, TOp::read(0), TOpResult::val(0));
  inv(4, TOp::read(1)); res(4, TOp::read(1), TOpResult::val(1));
  inv(5, TOp::read(1)); res(5, TOp::read(1), TOpResult::val(0));
  return h;
}

inline ScenarioReport fig2d_not_ss() {
  ScenarioReport rep;
  rep.impl = "checker";
  History h = fig2d_history();
  Verdict ss = check_strict_serializability(h);
  Verdict op = check_opacity(h);
  rep.expect_true("strictly serializable = no", ss.no());
  rep.expect_true("opaque = no", op.no());
  return rep;
}

inline ScenarioReport fig3d_not_opaque() {
  ScenarioReport rep;
  rep.impl = "checker";
  History h = fig3d_history();
  Verdict op = check_opacity(h);
  Verdict ss = check_strict_serializability(h);
  rep.expect_true("opaque = no", op.no());
  rep.expect_true("strictly serializable = yes", ss.yes());
  return rep;
}

}  // namespace scenario_impl

inline const std::map<std::string, scenario_impl::Builder>& scenario_registry() {
  static const std::map<std::string, scenario_impl::Builder> reg = {
      {"of-read-stalls",
       [](const ScenarioParams& p) {
         return scenario_impl::stall_shape(Algo::OfRwdap, p.n > 0 ? p.n : 4);
       }},
      {"lp-read-stalls",
       [](const ScenarioParams& p) {
         return scenario_impl::stall_shape(Algo::Lp, p.n > 0 ? p.n : 4);
       }},
      {"weakdap-read-stalls",
       [](const ScenarioParams& p) {
         return scenario_impl::stall_shape(Algo::OfWeakdap, p.n > 0 ? p.n : 4);
       }},
      {"of-read-awar",
       [](const ScenarioParams& p) { return scenario_impl::of_read_awar(p.n > 0 ? p.n : 5); }},
      {"weakdap-read-awar",
       [](const ScenarioParams& p) {
         return scenario_impl::weakdap_read_awar(p.n > 0 ? p.n : 5);
       }},
      {"lp-single-raw",
       [](const ScenarioParams& p) {
         return scenario_impl::lp_single_raw(p.wset > 0 ? p.wset : 4);
       }},
      {"lp-invisible-reads",
       [](const ScenarioParams&) { return scenario_impl::lp_invisible_reads(); }},
      {"lp-progressive-abort",
       [](const ScenarioParams&) { return scenario_impl::lp_progressive_abort(); }},
      {"lp-read-locked-aborts",
       [](const ScenarioParams&) { return scenario_impl::lp_read_locked_aborts(); }},
      {"weakdap-not-rwdap",
       [](const ScenarioParams&) { return scenario_impl::weakdap_not_rwdap(); }},
      {"rwdap-not-strict",
       [](const ScenarioParams&) { return scenario_impl::rwdap_not_strict(); }},
      {"fig2d-not-ss", [](const ScenarioParams&) { return scenario_impl::fig2d_not_ss(); }},
      {"fig3d-not-opaque",
       [](const ScenarioParams&) { return scenario_impl::fig3d_not_opaque(); }},
  };
  return reg;
}

inline std::vector<std::string> scenario_names() {
  std::vector<std::string> v;
  for (const auto& [k, _] : scenario_registry()) v.push_back(k);
  return v;
}

inline ScenarioReport run_scenario(const std::string& name, const ScenarioParams& p = {}) {
  auto it = scenario_registry().find(name);
  if (it == scenario_registry().end()) throw ScriptError("unknown scenario: " + name);
  try {
    ScenarioReport r = it->second(p);
    r.name = name;
    return r;
  } catch (const std::exception& ex) {
    ScenarioReport r;
    r.name = name;
    r.error = ex.what();
    return r;
  }
}

// --- fuzz harness --------------------------------------------------------------

struct FuzzParams {
  Algo impl = Algo::Lp;
  int n = 3;
  int objects = 3;
  int seeds = 100;
  unsigned seed0 = 1;
  int length = 10;
  int history_bound = 6;
  bool check_opacity = true;
  bool check_dap = true;
  bool check_progress = true;
  bool check_metrics = true;  // stall/invisible-read side conditions
  // When set, flag violations of this flavor instead of the implementation's
  // own guarantee (e.g. rw against the weak DAP TM, which finds them).
  std::optional<DapFlavor> dap_flavor;
};

struct FuzzFailure {
  unsigned seed = 0;
  std::string kind;
  std::string detail;
};

struct FuzzReport {
  FuzzParams params{};
  int runs = 0;
  int opacity_checked = 0;
  int opacity_skipped = 0;  // over the transaction bound, reported explicitly
  int commits = 0;
  int aborts = 0;
  std::vector<FuzzFailure> failures;

  bool pass() const { return failures.empty(); }
};

namespace detail {

// The weak DAP TM's read of a live-owned object cas-aborts the owner and then
// aborts unconditionally, even without interference inside its own span; the
// obstruction-freedom check tolerates exactly that documented branch.
inline bool aborted_at_live_owner_read(const Execution& e, TxId tx) {
  if (e.impl != Algo::OfWeakdap) return false;
  auto evs = e.base_events_of(tx);
  if (evs.empty()) return false;
  const BaseEvent* last = evs.back();
  return last->kind == PrimKind::Cas &&
         std::string_view(last->marker) == of_marker::cas_status_abort;
}

}  // namespace detail

inline FuzzReport fuzz(const FuzzParams& p) {
  FuzzReport rep;
  rep.params = p;
  for (int i = 0; i < p.seeds; ++i) {
    unsigned seed = p.seed0 + (unsigned)i;
    RunResult rr = run_random(p.impl, p.n, p.objects, seed, p.length);
    const Execution& e = rr.exec;
    ++rep.runs;
    for (TxId t : e.txns()) {
      if (e.fate(t) == TxFate::Committed) ++rep.commits;
      if (e.fate(t) == TxFate::Aborted) ++rep.aborts;
    }
    auto fail = [&](const std::string& kind, const std::string& detail) {
      rep.failures.push_back({seed, kind, detail});
    };

    if (p.check_opacity) {
      History h = history_of(e);
      if ((int)h.txns().size() <= p.history_bound) {
        CheckerOptions opt;
        if (p.impl == Algo::Lp) opt.forced_tryc = lp_forced_outcomes(e);
        Verdict v = check_opacity(h, opt);
        ++rep.opacity_checked;
        if (!v.yes()) fail("opacity", v.certificate.empty() ? "not opaque" : v.certificate);
      } else {
        ++rep.opacity_skipped;
      }
    }

    if (p.check_dap) {
      auto strict = check_dap(e, DapFlavor::Strict);
      auto rw = check_dap(e, DapFlavor::Rw);
      auto weak = check_dap(e, DapFlavor::Weak);
      if (p.dap_flavor) {
        const auto& v = *p.dap_flavor == DapFlavor::Strict ? strict
                        : *p.dap_flavor == DapFlavor::Rw   ? rw
                                                           : weak;
        if (!v.empty()) fail(std::string(to_string(*p.dap_flavor)) + "-dap",
                             v.front().describe());
      } else {
        switch (p.impl) {
          case Algo::Lp:
            if (!strict.empty()) fail("strict-dap", strict.front().describe());
            break;
          case Algo::OfRwdap:
            if (!rw.empty()) fail("rw-dap", rw.front().describe());
            break;
          case Algo::OfWeakdap:
            if (!weak.empty()) fail("weak-dap", weak.front().describe());
            break;
        }
      }
      // Implication chain between the flavors on the same execution.
      if (strict.empty() && !rw.empty()) fail("dap-chain", "strict-clean but rw violation");
      if (rw.empty() && !weak.empty()) fail("dap-chain", "rw-clean but weak violation");
    }

    if (p.check_progress) {
      if (p.impl == Algo::Lp) {
        for (TxId t : check_progressiveness(e))
          fail("progressiveness", "abort of T" + std::to_string(t) + " without conflict");
      } else {
        for (TxId t : check_of_progress(e)) {
          if (detail::aborted_at_live_owner_read(e, t)) continue;
          fail("of-progress", "T" + std::to_string(t) + " aborted though step contention-free");
        }
      }
    }

    if (p.check_metrics) {
      if (p.impl == Algo::Lp) {
        if (e.uses_cas()) fail("primitives", "cas applied by the lock-based TM");
        if (!check_invisible_reads_syntactic(e)) fail("invisible-reads", "nontrivial event in a t-read");
        for (TxId t : e.txns())
          if (e.read_only(t) && (count_raws(e, t) != 0 || count_awars_lenient(e, t) != 0))
            fail("raw-awar", "read-only T" + std::to_string(t) + " performed a RAW or AWAR");
      }
      bool scf = true;
      for (TxId t : e.txns()) scf &= e.step_contention_free_for(t);
      if (scf) {
        for (TxId t : e.txns())
          if (count_stalls(e, t).total != 0)
            fail("stalls", "stalls in a step contention-free execution");
      }
    }
  }
  return rep;
}

inline nlohmann::json to_json(const FuzzReport& r) {
  nlohmann::json j;
  j["impl"] = to_string(r.params.impl);
  j["n"] = r.params.n;
  j["objects"] = r.params.objects;
  j["seeds"] = r.params.seeds;
  j["seed0"] = r.params.seed0;
  j["length"] = r.params.length;
  j["runs"] = r.runs;
  j["commits"] = r.commits;
  j["aborts"] = r.aborts;
  j["opacity_checked"] = r.opacity_checked;
  j["opacity_skipped"] = r.opacity_skipped;
  j["pass"] = r.pass();
  auto& f = j["failures"] = nlohmann::json::array();
  for (const auto& x : r.failures)
    f.push_back({{"seed", x.seed}, {"kind", x.kind}, {"detail", x.detail}});
  return j;
}

inline std::string to_text(const FuzzReport& r) {
  std::ostringstream s;
  s << "fuzz impl=" << to_string(r.params.impl) << " n=" << r.params.n
    << " objects=" << r.params.objects << " seeds=" << r.params.seeds
    << " length=" << r.params.length << "\n";
  s << "runs: " << r.runs << "  commits: " << r.commits << "  aborts: " << r.aborts << "\n";
  s << "opacity checked: " << r.opacity_checked << "  skipped (over bound): "
    << r.opacity_skipped << "\n";
  if (r.failures.empty()) {
    s << "no violations\n";
  } else {
    s << r.failures.size() << " violation(s); reproducer seeds:\n";
    for (const auto& f : r.failures)
      s << "  seed " << f.seed << " [" << f.kind << "] " << f.detail << "\n";
  }
  return s.str();
}

// --- comparison table ------------------------------------------------------------

struct TableColumn {
  Algo impl{};
  bool strict_dap = true;
  bool invisible_reads = true;
  bool read_write_only = true;
  std::vector<int> tread_stalls;  // per requested n
  std::vector<int> sync_cost;     // RAW+AWAR of the canonical transaction per n
};

struct TableReport {
  std::vector<int> ns;
  std::vector<TableColumn> columns;
};

inline TableReport comparison_table(const std::vector<int>& ns, int fuzz_seeds = 25) {
  TableReport t;
  t.ns = ns;
  for (Algo impl : {Algo::Lp, Algo::OfRwdap, Algo::OfWeakdap}) {
    TableColumn col;
    col.impl = impl;
    for (int n : ns) {
      ScenarioReport sr = scenario_impl::stall_shape(impl, std::max(n, 2));
      col.tread_stalls.push_back((int)sr.measured("reader t-read stalls").value_or(-1));
      if (impl == Algo::Lp) {
        ScenarioReport raw = scenario_impl::lp_single_raw(4);
        long long raws = raw.measured("updating raw count").value_or(-1);
        long long awars = raw.measured("updating awar count").value_or(-1);
        col.sync_cost.push_back((int)(raws + awars));
      } else if (impl == Algo::OfRwdap) {
        ScenarioReport aw = scenario_impl::of_read_awar(std::max(n, 4));
        col.sync_cost.push_back((int)aw.measured("reader awars").value_or(-1));
      } else {
        ScenarioReport aw = scenario_impl::weakdap_read_awar(std::max(n, 2));
        col.sync_cost.push_back((int)aw.measured("reader awars").value_or(-1));
      }
    }
    // DAP and read-visibility verdicts from the separation scripts plus a
    // deterministic fuzz battery.
    std::vector<Execution> battery;
    {
      ScheduleScript s;
      s.impl = impl;
      s.n = 3;
      s.objects = 2;
      s.programs.push_back({{TOp::write(0, 3), TOp::write(1, 4)}});
      s.programs.push_back({{TOp::read(0), TOp::tryc()}});
      s.programs.push_back({{TOp::read(1), TOp::tryc()}});
      s.steps = {ScheduleDirective::solo(1), ScheduleDirective::solo(2),
                 ScheduleDirective::solo(3)};
      battery.push_back(run_schedule(s).exec);
    }
    for (int i = 0; i < fuzz_seeds; ++i)
      battery.push_back(run_random(impl, 3, 3, 1000 + (unsigned)i, 8).exec);
    for (const Execution& e : battery) {
      if (!check_dap(e, DapFlavor::Strict).empty()) col.strict_dap = false;
      if (!check_invisible_reads_syntactic(e)) col.invisible_reads = false;
      if (e.uses_cas()) col.read_write_only = false;
    }
    t.columns.push_back(col);
  }
  return t;
}

inline nlohmann::json to_json(const TableReport& t) {
  nlohmann::json j;
  j["n"] = t.ns;
  auto& cols = j["implementations"] = nlohmann::json::array();
  for (const auto& c : t.columns) {
    nlohmann::json jc;
    jc["impl"] = to_string(c.impl);
    jc["strict_dap"] = c.strict_dap;
    jc["invisible_reads"] = c.invisible_reads;
    jc["read_write_primitives_only"] = c.read_write_only;
    jc["tread_stalls"] = c.tread_stalls;
    jc["raw_awar"] = c.sync_cost;
    cols.push_back(jc);
  }
  return j;
}

inline std::string to_text(const TableReport& t) {
  std::ostringstream s;
  auto cell = [](const std::string& v, std::size_t w = 13) {
    std::string out = v;
    if (out.size() < w) out.resize(w, ' ');
    out += "  ";
    return out;
  };
  auto label = [&](const std::string& v) { return cell(v, 30); };
  auto joined = [&](const std::vector<int>& v) {
    std::ostringstream o;
    for (std::size_t i = 0; i < v.size(); ++i) o << (i ? "," : "") << v[i];
    return o.str();
  };
  std::ostringstream nhdr;
  nhdr << "(n=" << joined(t.ns) << ")";
  s << label("") << cell("lp") << cell("of-rwdap") << cell("of-weakdap") << "\n";
  auto row = [&](const std::string& name, auto getter) {
    s << label(name);
    for (const auto& c : t.columns) s << cell(getter(c));
    s << "\n";
  };
  row("strict DAP", [](const TableColumn& c) { return std::string(c.strict_dap ? "yes" : "no"); });
  row("invisible reads",
      [](const TableColumn& c) { return std::string(c.invisible_reads ? "yes" : "no"); });
  row("t-read stalls " + nhdr.str(),
      [&](const TableColumn& c) { return joined(c.tread_stalls); });
  row("RAW+AWAR " + nhdr.str(), [&](const TableColumn& c) { return joined(c.sync_cost); });
  row("read-write primitives",
      [](const TableColumn& c) { return std::string(c.read_write_only ? "yes" : "no"); });
  return s.str();
}

}  // namespace tmlab
