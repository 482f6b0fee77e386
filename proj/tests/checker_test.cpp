#include <gtest/gtest.h>

#include <random>

#include "tmlab/checker.hpp"
#include "tmlab/scenarios.hpp"

#include "naive_checker.hpp"

using namespace tmlab;

namespace {

// Arbitrary well-formed histories over two objects and boolean values, with
// random read responses and endings; many are not opaque.
History random_history(std::mt19937& rng) {
  auto pick = [&rng](int k) { return (int)(rng() % (unsigned)k); };
  int ntx = 1 + pick(4);
  std::vector<std::vector<HistEvent>> streams;
  for (TxId tx = 1; tx <= ntx; ++tx) {
    std::vector<HistEvent> ev;
    int ops = 1 + pick(3);
    for (int i = 0; i < ops; ++i) {
      TOp op = pick(2) ? TOp::read(pick(2)) : TOp::write(pick(2), pick(2));
      ev.push_back({tx, tx, true, op, {}});
      TOpResult r = op.kind == TOpKind::Read ? TOpResult::val(pick(2)) : TOpResult::ok();
      if (pick(12) == 0) r = TOpResult::aborted();
      ev.push_back({tx, tx, false, op, r});
      if (r.is_abort()) break;
    }
    bool aborted_midway =
        !ev.empty() && !ev.back().invoke && ev.back().result.is_abort();
    if (!aborted_midway) {
      switch (pick(5)) {
        case 0: break;  // complete but not t-complete
        case 1: ev.push_back({tx, tx, true, TOp::tryc(), {}}); break;  // pending tryCommit
        case 2: ev.pop_back(); break;  // pending last operation
        case 3:
          ev.push_back({tx, tx, true, TOp::tryc(), {}});
          ev.push_back({tx, tx, false, TOp::tryc(), TOpResult::committed()});
          break;
        default:
          ev.push_back({tx, tx, true, TOp::tryc(), {}});
          ev.push_back({tx, tx, false, TOp::tryc(), TOpResult::aborted()});
          break;
      }
    }
    if (!ev.empty()) streams.push_back(std::move(ev));
  }
  History h;
  std::vector<std::size_t> cursor(streams.size(), 0);
  while (true) {
    std::vector<int> avail;
    for (int i = 0; i < (int)streams.size(); ++i)
      if (cursor[i] < streams[i].size()) avail.push_back(i);
    if (avail.empty()) break;
    int i = avail[pick((int)avail.size())];
    h.events.push_back(streams[i][cursor[i]++]);
  }
  return h;
}

History seq_tx(TxId tx, std::vector<std::pair<TOp, TOpResult>> ops, History base = {}) {
  for (auto& [op, r] : ops) {
    base.events.push_back({tx, tx, true, op, {}});
    base.events.push_back({tx, tx, false, op, r});
  }
  return base;
}

TEST(IsLegal, CommittedWriteVisibleToLaterRead) {
  std::vector<TxRecord> seq(2);
  seq[0].tx = 1;
  seq[0].ops = {{TOpKind::Write, 0, 1, TOpResult::ok()},
                {TOpKind::TryCommit, -1, 0, TOpResult::committed()}};
  seq[0].end = TxRecord::End::Committed;
  seq[1].tx = 2;
  seq[1].ops = {{TOpKind::Read, 0, 0, TOpResult::val(1)},
                {TOpKind::TryCommit, -1, 0, TOpResult::committed()}};
  seq[1].end = TxRecord::End::Committed;
  EXPECT_TRUE(is_legal(seq));
  // Aborted writes are invisible.
  seq[0].ops[1].result = TOpResult::aborted();
  seq[0].end = TxRecord::End::Aborted;
  EXPECT_FALSE(is_legal(seq));
}

TEST(IsLegal, OwnWritePrecedesRead) {
  std::vector<TxRecord> seq(1);
  seq[0].tx = 1;
  seq[0].ops = {{TOpKind::Read, 0, 0, TOpResult::val(0)},
                {TOpKind::Write, 0, 1, TOpResult::ok()},
                {TOpKind::Read, 0, 0, TOpResult::val(1)},
                {TOpKind::TryCommit, -1, 0, TOpResult::committed()}};
  seq[0].end = TxRecord::End::Committed;
  EXPECT_TRUE(is_legal(seq));
  seq[0].ops[2].result = TOpResult::val(0);  // ignores the own write
  EXPECT_FALSE(is_legal(seq));
}

TEST(Checker, EmptyHistoryIsOpaque) {
  History h;
  EXPECT_TRUE(check_opacity(h).yes());
  EXPECT_TRUE(check_strict_serializability(h).yes());
}

TEST(Checker, SequentialLegalHistoryIsOpaqueWithIdentityWitness) {
  History h = seq_tx(1, {{TOp::write(0, 1), TOpResult::ok()}, {TOp::tryc(), TOpResult::committed()}});
  h = seq_tx(2, {{TOp::read(0), TOpResult::val(1)}, {TOp::tryc(), TOpResult::committed()}}, h);
  Verdict v = check_opacity(h);
  ASSERT_TRUE(v.yes());
  EXPECT_EQ(v.witness_order, (std::vector<TxId>{1, 2}));
}

TEST(Checker, AbortedWritesAreInvisible) {
  History h = seq_tx(1, {{TOp::write(0, 1), TOpResult::ok()}, {TOp::tryc(), TOpResult::aborted()}});
  h = seq_tx(2, {{TOp::read(0), TOpResult::val(1)}, {TOp::tryc(), TOpResult::committed()}}, h);
  EXPECT_TRUE(check_opacity(h).no());
  EXPECT_TRUE(check_strict_serializability(h).no());
}

TEST(Checker, InconsistentAbortedReaderBreaksOpacityOnly) {
  // Committed transactions serialize; the aborted transaction saw an
  // impossible snapshot.
  History h;
  h = seq_tx(1, {{TOp::write(0, 1), TOpResult::ok()},
                 {TOp::write(1, 1), TOpResult::ok()},
                 {TOp::tryc(), TOpResult::committed()}},
             h);
  // Aborted reader saw the new value of 0 but the initial value of 1.
  h = seq_tx(2, {{TOp::read(0), TOpResult::val(1)}, {TOp::read(1), TOpResult::val(0)}}, h);
  h.events.push_back({2, 2, true, TOp::tryc(), {}});
  h.events.push_back({2, 2, false, TOp::tryc(), TOpResult::aborted()});
  EXPECT_TRUE(check_strict_serializability(h).yes());
  EXPECT_TRUE(check_opacity(h).no());
}

TEST(Checker, OpacityImpliesStrictSerializability) {
  std::mt19937 rng(99);
  int opaque_seen = 0;
  for (int i = 0; i < 4000; ++i) {
    History h = random_history(rng);  // defined below via helper
    Verdict op = check_opacity(h);
    Verdict ss = check_strict_serializability(h);
    if (op.yes()) {
      ++opaque_seen;
      EXPECT_TRUE(ss.yes()) << "opaque history must be strictly serializable";
    }
  }
  EXPECT_GT(opaque_seen, 100);
}

TEST(Checker, OverBoundIsExplicitlyUndecided) {
  History h;
  for (TxId t = 1; t <= 8; ++t)
    h = seq_tx(t, {{TOp::read(0), TOpResult::val(0)}, {TOp::tryc(), TOpResult::committed()}}, h);
  Verdict v = check_opacity(h);
  EXPECT_TRUE(v.undecided());
  EXPECT_NE(v.certificate.find("bound"), std::string::npos);
  CheckerOptions opt;
  opt.max_txns = 8;
  EXPECT_TRUE(check_opacity(h, opt).yes());
}

TEST(Checker, PendingTryCommitExploresBothOutcomes) {
  // The pending committer must be completed as committed for the reader's
  // value to be legal.
  History h;
  h.events.push_back({1, 1, true, TOp::write(0, 1), {}});
  h.events.push_back({1, 1, false, TOp::write(0, 1), TOpResult::ok()});
  h.events.push_back({1, 1, true, TOp::tryc(), {}});  // pending
  h = seq_tx(2, {{TOp::read(0), TOpResult::val(1)}, {TOp::tryc(), TOpResult::committed()}}, h);
  Verdict v = check_opacity(h);
  ASSERT_TRUE(v.yes());
  EXPECT_TRUE(v.witness_commits.at(1));
  // Forcing the abort completion flips the verdict.
  CheckerOptions opt;
  opt.forced_tryc[1] = false;
  EXPECT_TRUE(check_opacity(h, opt).no());
}

TEST(Checker, PendingReadCompletesAsAbort) {
  History h;
  h.events.push_back({1, 1, true, TOp::read(0), {}});  // never responds
  h = seq_tx(2, {{TOp::read(0), TOpResult::val(0)}, {TOp::tryc(), TOpResult::committed()}}, h);
  Verdict v = check_opacity(h);
  ASSERT_TRUE(v.yes());
}

TEST(Checker, WitnessReverifies) {
  std::mt19937 rng(7);
  int verified = 0;
  for (int i = 0; i < 2000; ++i) {
    History h = random_history(rng);
    Verdict v = check_opacity(h);
    if (!v.yes()) continue;
    ++verified;
    auto recs = tx_records(h);
    // Real-time order respected.
    for (std::size_t a = 0; a < v.witness_order.size(); ++a)
      for (std::size_t b = a + 1; b < v.witness_order.size(); ++b)
        EXPECT_FALSE(h.precedes_rt(v.witness_order[b], v.witness_order[a]));
    // Witness is legal under the public legality check.
    std::vector<TxRecord> seq;
    for (TxId t : v.witness_order) {
      TxRecord r = recs.at(t);
      if (r.end == TxRecord::End::PendingTryCommit)
        r.end = v.witness_commits.at(t) ? TxRecord::End::Committed : TxRecord::End::Aborted;
      if (r.end == TxRecord::End::ForcedAbort) r.end = TxRecord::End::Aborted;
      seq.push_back(r);
    }
    EXPECT_TRUE(is_legal(seq));
  }
  EXPECT_GT(verified, 200);
}

TEST(Checker, AgreesWithNaiveEnumeratorOnRandomHistories) {
  std::mt19937 rng(2024);
  for (int i = 0; i < 3000; ++i) {
    History h = random_history(rng);
    if ((int)h.txns().size() > 4) continue;
    auto nv = naive::naive_check(h);
    EXPECT_EQ(check_opacity(h).yes(), nv.opaque) << to_json(h).dump();
    EXPECT_EQ(check_strict_serializability(h).yes(), nv.strictly_serializable)
        << to_json(h).dump();
  }
}

TEST(Checker, NegativeControlsAgreeWithNaiveEnumerator) {
  // The two constructed control histories have 4 and 5 transactions, beyond
  // the exhaustive corpus; check them against the unpruned reference too.
  History f2 = scenario_impl::fig2d_history();
  auto n2 = naive::naive_check(f2);
  EXPECT_FALSE(n2.strictly_serializable);
  EXPECT_FALSE(n2.opaque);
  EXPECT_EQ(check_strict_serializability(f2).yes(), n2.strictly_serializable);
  EXPECT_EQ(check_opacity(f2).yes(), n2.opaque);

  History f3 = scenario_impl::fig3d_history();
  auto n3 = naive::naive_check(f3);
  EXPECT_FALSE(n3.opaque);
  EXPECT_TRUE(n3.strictly_serializable);
  EXPECT_EQ(check_opacity(f3).yes(), n3.opaque);
  EXPECT_EQ(check_strict_serializability(f3).yes(), n3.strictly_serializable);
}

TEST(Checker, HistoryJsonRoundTrip) {
  History h = scenario_impl::fig3d_history();
  nlohmann::json j = to_json(h);
  History g = history_from_json(j);
  EXPECT_EQ(to_json(g), j);
  EXPECT_TRUE(check_opacity(g).no());
}

TEST(Checker, MalformedHistoriesRejected) {
  EXPECT_THROW(history_from_json(nlohmann::json::object()), HistoryError);
  auto j = nlohmann::json::parse(R"([{"tx":1,"event":"res","op":"read","x":0,"result":0}])");
  EXPECT_THROW(history_from_json(j), HistoryError);  // response without invocation
  auto k = nlohmann::json::parse(R"([{"tx":1,"event":"inv","op":"nosuch","x":0}])");
  EXPECT_THROW(history_from_json(k), HistoryError);
}

}  // namespace
