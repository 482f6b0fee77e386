#include <gtest/gtest.h>

#include "tmlab/executor.hpp"
#include "tmlab/history.hpp"

#include "helpers.hpp"

using namespace tmlab;

namespace {

ScheduleScript one_proc(Algo impl, TmProgram prog, int objects = 2) {
  ScheduleScript s;
  s.impl = impl;
  s.n = 1;
  s.objects = objects;
  s.programs.push_back({std::move(prog)});
  return s;
}

TEST(Executor, FreshLpReadFirstStepsInvokeThenReadEvent) {
  System sys(one_proc(Algo::Lp, {TOp::read(0)}));
  StepOutcome o1 = sys.step(1);
  EXPECT_EQ(o1.kind, StepOutcome::Kind::Invoked);
  StepOutcome o2 = sys.step(1);
  ASSERT_EQ(o2.kind, StepOutcome::Kind::Progressed);
  EXPECT_EQ(o2.event->obj, BaseObjId::val(0));
  EXPECT_EQ(o2.event->kind, PrimKind::Read);
  EXPECT_STREQ(o2.event->marker, "read-v");
}

TEST(Executor, ExhaustedProcessIsIdle) {
  System sys(one_proc(Algo::Lp, {TOp::write(0, 1)}));
  sys.run_solo(1);  // write is local, program has no tryCommit
  EXPECT_EQ(sys.step(1).kind, StepOutcome::Kind::Idle);
  EXPECT_EQ(sys.step(1).kind, StepOutcome::Kind::Idle);
}

TEST(Executor, LpReadOnlyCommitHasZeroBaseEvents) {
  System sys(one_proc(Algo::Lp, {TOp::read(0), TOp::tryc()}));
  sys.run_solo(1);
  Execution e = sys.finish();
  EXPECT_EQ(e.fate(1), TxFate::Committed);
  int tryc_events = 0;
  for (const BaseEvent* b : e.base_events_of(1))
    if (b->op_index == 1) ++tryc_events;
  EXPECT_EQ(tryc_events, 0);
}

TEST(Executor, SoloLpUpdaterCommitsAndWritesValue) {
  ScheduleScript s = one_proc(Algo::Lp, {TOp::write(0, 7), TOp::tryc()});
  s.steps.push_back(ScheduleDirective::solo(1));
  RunResult rr = run_schedule(s);
  EXPECT_EQ(rr.exec.fate(1), TxFate::Committed);
  EXPECT_EQ(std::get<PlainVal>(rr.memory.at(BaseObjId::val(0))), (PlainVal{7, 1}));
  // Lock and ready bits restored.
  EXPECT_EQ(std::get<Bit>(rr.memory.at(BaseObjId::lock(0))).value, 0);
  EXPECT_EQ(std::get<Bit>(rr.memory.at(BaseObjId::ready(1, 0))).value, 0);
}

TEST(Executor, TwoSoloProcessesYieldTSequentialHistory) {
  ScheduleScript s;
  s.impl = Algo::Lp;
  s.n = 2;
  s.objects = 2;
  s.programs.push_back({{TOp::write(0, 3), TOp::tryc()}});
  s.programs.push_back({{TOp::read(0), TOp::tryc()}});
  s.steps = {ScheduleDirective::solo(1), ScheduleDirective::solo(2)};
  RunResult rr = run_schedule(s);
  EXPECT_TRUE(rr.exec.precedes_rt(1, 2));
  auto res = op_result_or_die(rr.exec, 2, 0);
  EXPECT_EQ(res.value, 3);
}

TEST(Executor, RunUntilLeavesEventPoised) {
  ScheduleScript s = one_proc(Algo::Lp, {TOp::write(0, 7), TOp::tryc()});
  System sys(s);
  sys.run_until(1, "write-v");
  auto poised = sys.poised(1);
  ASSERT_TRUE(poised.has_value());
  EXPECT_STREQ(poised->marker, "write-v");
  EXPECT_EQ(poised->obj, BaseObjId::val(0));
  // The value cell is untouched while the event is only poised.
  EXPECT_EQ(std::get<PlainVal>(sys.memory().peek(BaseObjId::val(0))).value, 0);
  Execution e = sys.finish();
  ASSERT_EQ(e.final_poised.size(), 1u);
  EXPECT_EQ(e.final_poised[0].marker, "write-v");
}

TEST(Executor, UnreachableMarkerIsSchedulingError) {
  ScheduleScript s = one_proc(Algo::Lp, {TOp::read(0)});
  System sys(s);
  EXPECT_THROW(sys.run_until(1, "write-v"), SchedulingError);
  System sys2(s);
  EXPECT_THROW(sys2.run_until(1, "no-such-marker"), SchedulingError);
}

TEST(Executor, RunRandomIsDeterministic) {
  RunResult a = run_random(Algo::Lp, 2, 2, 1, 8);
  RunResult b = run_random(Algo::Lp, 2, 2, 1, 8);
  EXPECT_EQ(a.exec, b.exec);
  EXPECT_EQ(a.memory, b.memory);
  RunResult c = run_random(Algo::Lp, 2, 2, 2, 8);
  EXPECT_FALSE(a.exec == c.exec);
}

TEST(Executor, ReplayingProcChoicesIsBitIdentical) {
  ScheduleScript s = random_script(Algo::OfRwdap, 3, 3, 42, 8);
  System sys(s);
  std::mt19937 rng(7);
  std::vector<ProcId> choices;
  for (int i = 0; i < 200; ++i) {
    ProcId p = 1 + (int)(rng() % 3);
    choices.push_back(p);
    sys.step(p);
  }
  Execution e1 = sys.finish();
  System sys2(s);
  for (ProcId p : choices) sys2.step(p);
  Execution e2 = sys2.finish();
  EXPECT_EQ(e1, e2);
}

TEST(Executor, ReadPurity) {
  // Memory after a run equals the replay of write events and successful cas
  // events alone.
  for (unsigned seed : {1u, 2u, 3u, 4u, 5u}) {
    for (Algo impl : {Algo::Lp, Algo::OfRwdap, Algo::OfWeakdap}) {
      RunResult rr = run_random(impl, 3, 3, seed, 8);
      std::map<BaseObjId, BaseValue> replay;
      ScheduleScript s = random_script(impl, 3, 3, seed, 8);
      System fresh(s);
      replay = fresh.memory().cells();  // initial values
      for (const BaseEvent* b : rr.exec.base_events()) {
        if (b->kind == PrimKind::Write) replay[b->obj] = std::get<BaseValue>(b->args);
        if (b->kind == PrimKind::Cas && b->cas_ok)
          replay[b->obj] = std::get<CasArgs>(b->args).desired;
      }
      EXPECT_EQ(replay, rr.memory) << to_string(impl) << " seed " << seed;
    }
  }
}

TEST(Executor, ScheduleScriptJsonRoundTrip) {
  ScheduleScript s;
  s.impl = Algo::OfRwdap;
  s.n = 2;
  s.objects = 3;
  s.programs.push_back({{TOp::read(0), TOp::write(1, 5), TOp::tryc()}});
  s.programs.push_back({{TOp::read(2)}});
  s.steps = {ScheduleDirective::until(1, "cas-tvar-install"), ScheduleDirective::step(2),
             ScheduleDirective::solo(1)};
  nlohmann::json j = to_json(s);
  ScheduleScript t = script_from_json(j);
  EXPECT_EQ(to_json(t), j);
  EXPECT_EQ(run_schedule_safely(s), run_schedule_safely(t));
}

TEST(Executor, DocumentedScriptSchemaParses) {
  auto j = nlohmann::json::parse(R"({
    "impl": "lp", "n": 2, "objects": 2,
    "programs": [[[{"op":"write","x":0,"v":7},{"op":"tryc"}]],
                 [[{"op":"read","x":0},{"op":"tryc"}]]],
    "steps": [{"kind":"solo","p":1},{"kind":"until","p":2,"marker":"read-L"},
              {"kind":"step","p":2},{"kind":"solo","p":2}]
  })");
  ScheduleScript s = script_from_json(j);
  RunResult rr = run_schedule(s);
  EXPECT_EQ(rr.exec.fate(1), TxFate::Committed);
  EXPECT_EQ(rr.exec.fate(2), TxFate::Committed);
}

TEST(Executor, FlatOneTransactionPerProcessSchemaParses) {
  // Shorthand: each process's entry is a single flat transaction.
  auto j = nlohmann::json::parse(R"({
    "impl": "of-rwdap", "n": 2, "objects": 1,
    "programs": [[{"op":"write","x":0,"v":7},{"op":"tryc"}],
                 [{"op":"read","x":0},{"op":"tryc"}]],
    "steps": [{"kind":"solo","p":1},{"kind":"solo","p":2}]
  })");
  ScheduleScript s = script_from_json(j);
  RunResult rr = run_schedule(s);
  EXPECT_EQ(rr.exec.fate(1), TxFate::Committed);
  EXPECT_EQ(rr.exec.fate(2), TxFate::Committed);
  EXPECT_EQ(op_result_or_die(rr.exec, 2, 0), TOpResult::val(7));
}

TEST(Executor, ProgramValidationRejectsMidTryCommit) {
  ScheduleScript s = one_proc(Algo::Lp, {TOp::tryc(), TOp::read(0)});
  EXPECT_THROW(System{s}, ScriptError);
}

TEST(Executor, WellFormednessHoldsOnRandomRuns) {
  for (unsigned seed = 1; seed <= 20; ++seed)
    for (Algo impl : {Algo::Lp, Algo::OfRwdap, Algo::OfWeakdap})
      EXPECT_NO_THROW(run_random(impl, 3, 3, seed, 10));
}

}  // namespace
