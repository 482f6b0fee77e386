#pragma once

// Deterministic single-threaded scheduler.  Each step() advances one process
// by exactly one log entry: an Invoke marker when crossing into a
// t-operation, one base event, or a Respond marker.  Replaying the same
// sequence of (proc, step) choices from the initial configuration yields a
// bit-identical execution.

#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tmlab/execution.hpp"
#include "tmlab/tm_lp.hpp"
#include "tmlab/tm_of_rwdap.hpp"
#include "tmlab/tm_of_weakdap.hpp"

namespace tmlab {

struct SchedulingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::vector<const char*> line_markers(Algo a) {
  switch (a) {
    case Algo::Lp: return lp_markers();
    case Algo::OfRwdap: return of_rwdap_markers();
    case Algo::OfWeakdap: return of_weakdap_markers();
  }
  return {};
}

struct StepOutcome {
  enum class Kind { Invoked, Progressed, OpCompleted, TxFinished, Idle } kind{};
  TOpResult result{};            // OpCompleted / TxFinished
  const BaseEvent* event = nullptr;  // Progressed

  bool idle() const { return kind == Kind::Idle; }
};

class System {
 public:
  explicit System(const ScheduleScript& script) : script_(script) {
    script_.validate();
    procs_.resize(script_.n + 1);
    TxId next_tx = 1;
    for (int p = 1; p <= script_.n; ++p) {
      if (p - 1 < (int)script_.programs.size()) procs_[p].programs = script_.programs[p - 1];
      for (std::size_t i = 0; i < procs_[p].programs.size(); ++i)
        procs_[p].tx_ids.push_back(next_tx++);
    }
    init_memory(next_tx - 1);
    exec_.impl = script_.impl;
    exec_.n = script_.n;
    exec_.objects = script_.objects;
  }

  // The next enabled base event of the process, if its machine is poised at
  // one (local actions and t-operation boundaries yield nothing).
  std::optional<PoisedPrim> poised(ProcId p) const {
    const Proc& pr = procs_.at(p);
    if (!pr.machine || !pr.machine->op_active()) return std::nullopt;
    NextAction a = pr.machine->next();
    if (auto* prim = std::get_if<PoisedPrim>(&a)) return *prim;
    return std::nullopt;
  }

  StepOutcome step(ProcId p) {
    Proc& pr = procs_.at(p);
    // Start the next transaction if none is running.
    if (!pr.machine) {
      if (pr.tx_idx >= pr.programs.size()) return {StepOutcome::Kind::Idle};
      pr.machine = make_machine(pr.tx_ids[pr.tx_idx], p);
      pr.op_idx = 0;
    }
    TxMachine& m = *pr.machine;
    const TmProgram& prog = pr.programs[pr.tx_idx];

    if (!m.op_active()) {
      if (pr.op_idx >= prog.size()) return {StepOutcome::Kind::Idle};  // t-incomplete forever
      const TOp& op = prog[pr.op_idx];
      exec_.entries.push_back(Invoke{m.tx(), p, (int)pr.op_idx, op});
      m.begin_op(op);
      return {StepOutcome::Kind::Invoked};
    }

    NextAction a = m.next();
    if (auto* prim = std::get_if<PoisedPrim>(&a)) {
      BaseEvent ev = mem_.apply(p, m.tx(), prim->obj, prim->kind, prim->args, prim->marker);
      ev.seq = (int)exec_.entries.size();
      ev.op_index = (int)pr.op_idx;
      exec_.entries.push_back(ev);
      m.on_applied(std::get<BaseEvent>(exec_.entries.back()));
      StepOutcome out{StepOutcome::Kind::Progressed};
      out.event = &std::get<BaseEvent>(exec_.entries.back());
      return out;
    }

    const TOpResult r = std::get<OpFinish>(a).result;
    exec_.entries.push_back(Respond{m.tx(), p, (int)pr.op_idx, prog[pr.op_idx], r});
    m.finish_op(r);
    ++pr.op_idx;
    if (m.finished()) {
      pr.machine.reset();
      ++pr.tx_idx;
      return {StepOutcome::Kind::TxFinished, r};
    }
    return {StepOutcome::Kind::OpCompleted, r};
  }

  // Steps the process until its current transaction is t-complete or it has
  // nothing left to do.
  void run_solo(ProcId p) {
    while (true) {
      StepOutcome o = step(p);
      if (o.idle() || o.kind == StepOutcome::Kind::TxFinished) return;
    }
  }

  // Advances the process until its next enabled base event carries the named
  // marker; the event is left poised, not applied.
  void run_until(ProcId p, const std::string& marker) {
    check_marker(marker);
    while (true) {
      if (auto prim = poised(p)) {
        if (marker == prim->marker) return;
      }
      StepOutcome o = step(p);
      if (o.idle())
        throw SchedulingError("marker '" + marker + "' unreachable for process " +
                              std::to_string(p) + " (process idle)");
      if (o.kind == StepOutcome::Kind::TxFinished)
        throw SchedulingError("marker '" + marker + "' unreachable for process " +
                              std::to_string(p) + " (transaction finished with " +
                              to_string(o.result) + ")");
    }
  }

  void run_directives() {
    for (const auto& d : script_.steps) {
      switch (d.kind) {
        case ScheduleDirective::Kind::Step: step(d.proc); break;
        case ScheduleDirective::Kind::RunSolo: run_solo(d.proc); break;
        case ScheduleDirective::Kind::RunUntil: run_until(d.proc, d.marker); break;
      }
    }
  }

  // Finalizes the poised-event annotations for t-incomplete transactions.
  Execution finish() {
    exec_.final_poised.clear();
    for (int p = 1; p <= script_.n; ++p) {
      if (auto prim = poised(p)) {
        exec_.final_poised.push_back(
            {p, procs_[p].machine->tx(), prim->obj, prim->kind, prim->marker});
      }
    }
    assert_well_formed(exec_);
    return exec_;
  }

  const Execution& execution() const { return exec_; }
  const Memory& memory() const { return mem_; }
  TxId tx_id(ProcId p, std::size_t i) const { return procs_.at(p).tx_ids.at(i); }
  bool exhausted(ProcId p) const {
    const Proc& pr = procs_.at(p);
    if (pr.machine) return !pr.machine->op_active() && pr.op_idx >= pr.programs[pr.tx_idx].size();
    return pr.tx_idx >= pr.programs.size();
  }

 private:
  struct Proc {
    std::vector<TmProgram> programs;
    std::vector<TxId> tx_ids;
    std::size_t tx_idx = 0;
    std::size_t op_idx = 0;
    std::unique_ptr<TxMachine> machine;
  };

  std::unique_ptr<TxMachine> make_machine(TxId tx, ProcId p) const {
    switch (script_.impl) {
      case Algo::Lp: return std::make_unique<LpMachine>(tx, p, script_.n);
      case Algo::OfRwdap: return std::make_unique<OfRwdapMachine>(tx, p, script_.n);
      case Algo::OfWeakdap: return std::make_unique<OfWeakdapMachine>(tx, p, script_.n);
    }
    throw std::logic_error("unknown algorithm");
  }

  void init_memory(TxId max_tx) {
    if (script_.impl == Algo::Lp) {
      for (TObjId x = 0; x < script_.objects; ++x) {
        mem_.define(BaseObjId::val(x), PlainVal{0, 0});
        mem_.define(BaseObjId::lock(x), Bit{0});
        for (ProcId p = 1; p <= script_.n; ++p) mem_.define(BaseObjId::ready(p, x), Bit{0});
      }
    } else {
      for (TObjId x = 0; x < script_.objects; ++x)
        mem_.define(BaseObjId::tvar(x), TVarVal{0, 0, 0});
      mem_.define(BaseObjId::status(0), TxStatus::Committed);  // initializing transaction
      for (TxId k = 1; k <= max_tx; ++k) mem_.define(BaseObjId::status(k), TxStatus::Live);
    }
  }

  void check_marker(const std::string& m) const {
    for (const char* name : line_markers(script_.impl))
      if (m == name) return;
    throw SchedulingError("unknown line marker '" + m + "' for " + to_string(script_.impl));
  }

  ScheduleScript script_;
  std::vector<Proc> procs_;
  Memory mem_;
  Execution exec_;
};

struct RunResult {
  Execution exec;
  std::map<BaseObjId, BaseValue> memory;
};

inline RunResult run_schedule(const ScheduleScript& script) {
  System sys(script);
  sys.run_directives();
  RunResult r{sys.finish(), sys.memory().cells()};
  return r;
}

// Seed-deterministic random programs and interleaving.  For the lock-based
// implementation a transaction never reads a t-object it has already
// written: its read path goes to shared memory and would return the
// pre-commit value.
inline ScheduleScript random_script(Algo impl, int n, int objects, unsigned seed, int length) {
  std::mt19937 rng(seed);
  auto pick = [&rng](int k) { return (int)(rng() % (unsigned)k); };

  ScheduleScript s;
  s.impl = impl;
  s.n = n;
  s.objects = objects;
  const int max_body = std::max(1, std::min(length - 1, 6));
  for (int p = 1; p <= n; ++p) {
    std::vector<TmProgram> progs;
    const int ntx = 1 + pick(2);
    for (int t = 0; t < ntx; ++t) {
      TmProgram prog;
      std::set<TObjId> written;
      const int body = 1 + pick(max_body);
      for (int i = 0; i < body; ++i) {
        bool do_read = pick(100) < 55;
        if (do_read && impl == Algo::Lp) {
          std::vector<TObjId> readable;
          for (TObjId x = 0; x < objects; ++x)
            if (!written.count(x)) readable.push_back(x);
          if (readable.empty()) do_read = false;
          else prog.push_back(TOp::read(readable[pick((int)readable.size())]));
        } else if (do_read) {
          prog.push_back(TOp::read(pick(objects)));
        }
        if (!do_read) {
          TObjId x = pick(objects);
          prog.push_back(TOp::write(x, 1 + pick(3)));
          written.insert(x);
        }
      }
      if (pick(5) != 0) prog.push_back(TOp::tryc());
      progs.push_back(std::move(prog));
    }
    s.programs.push_back(std::move(progs));
  }
  return s;
}

inline RunResult run_random(Algo impl, int n, int objects, unsigned seed, int length) {
  ScheduleScript s = random_script(impl, n, objects, seed, length);
  System sys(s);
  std::mt19937 rng(seed ^ 0x9e3779b9u);
  // A third of the runs stop early, leaving transactions t-incomplete or
  // with pending operations; histories then exercise the completion rules
  // and the poised-event annotations.
  long budget = -1;
  if (rng() % 3 == 0) budget = 5 + (long)(rng() % 36);
  std::vector<ProcId> active;
  for (ProcId p = 1; p <= n; ++p) active.push_back(p);
  while (!active.empty() && budget != 0) {
    std::size_t i = rng() % active.size();
    StepOutcome o = sys.step(active[i]);
    if (o.idle()) active.erase(active.begin() + i);
    if (budget > 0) --budget;
  }
  RunResult r{sys.finish(), sys.memory().cells()};
  return r;
}

}  // namespace tmlab
