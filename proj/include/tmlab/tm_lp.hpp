#pragma once

// Lock-based progressive TM over read/write base objects.  Per t-object X it
// keeps a value cell v[X] (value + writer id), a lock bit L[X], and one
// single-writer ready bit r[p,X] per process.  Reads are invisible: they
// apply only trivial primitives.  Writes buffer locally; tryCommit acquires
// the write set through the ready bits (one multi-RAW), locks it, revalidates
// the read set, publishes the values and releases.

#include <map>
#include <utility>
#include <vector>

#include "tmlab/machine.hpp"

namespace tmlab {

namespace lp_marker {
inline constexpr const char* read_v = "read-v";
inline constexpr const char* read_L = "read-L";
inline constexpr const char* validate_v = "validate-v";
inline constexpr const char* acq_write_r = "acq-write-r";
inline constexpr const char* acq_read_r = "acq-read-r";
inline constexpr const char* acq_rollback_r = "acq-rollback-r";
inline constexpr const char* write_L = "write-L";
inline constexpr const char* isab_read_L = "isab-read-L";
inline constexpr const char* isab_validate_v = "isab-validate-v";
inline constexpr const char* write_v = "write-v";
inline constexpr const char* rel_L = "rel-L";
inline constexpr const char* rel_r = "rel-r";
inline constexpr const char* relab_L = "relab-L";
inline constexpr const char* relab_r = "relab-r";
}  // namespace lp_marker

inline std::vector<const char*> lp_markers() {
  using namespace lp_marker;
  return {read_v,      read_L, validate_v,  acq_write_r,     acq_read_r, acq_rollback_r,
          write_L,     isab_read_L, isab_validate_v, write_v, rel_L,      rel_r,
          relab_L,     relab_r};
}

class LpMachine : public TxMachine {
 public:
  using TxMachine::TxMachine;

  const std::map<TObjId, std::pair<int, TxId>>& rset() const { return rset_; }
  const std::map<TObjId, int>& wset() const { return wset_; }

  NextAction next() const override {
    using namespace lp_marker;
    switch (ph_) {
      case Ph::RvalRead:
        return PoisedPrim{BaseObjId::val(cur_), PrimKind::Read, {}, read_v};
      case Ph::RlockRead:
        return PoisedPrim{BaseObjId::lock(cur_), PrimKind::Read, {}, read_L};
      case Ph::RvalidateScan:
        return PoisedPrim{BaseObjId::val(scan_[si_]), PrimKind::Read, {}, validate_v};
      case Ph::AcqWriteR:
        return PoisedPrim{BaseObjId::ready(proc_, scan_[si_]), PrimKind::Write,
                          BaseValue{Bit{1}}, acq_write_r};
      case Ph::AcqReadR:
        return PoisedPrim{BaseObjId::ready(rscan_[ri_].second, rscan_[ri_].first),
                          PrimKind::Read, {}, acq_read_r};
      case Ph::AcqRollback:
        return PoisedPrim{BaseObjId::ready(proc_, scan_[si_]), PrimKind::Write,
                          BaseValue{Bit{0}}, acq_rollback_r};
      case Ph::WriteLock:
        return PoisedPrim{BaseObjId::lock(scan_[si_]), PrimKind::Write, BaseValue{Bit{1}},
                          write_L};
      case Ph::IsabLockScan:
        return PoisedPrim{BaseObjId::lock(scan_[si_]), PrimKind::Read, {}, isab_read_L};
      case Ph::IsabValidate:
        return PoisedPrim{BaseObjId::val(scan_[si_]), PrimKind::Read, {}, isab_validate_v};
      case Ph::WriteVals:
        return PoisedPrim{BaseObjId::val(scan_[si_]), PrimKind::Write,
                          BaseValue{PlainVal{wset_.at(scan_[si_]), tx_}}, write_v};
      case Ph::RelLock:
        return PoisedPrim{BaseObjId::lock(scan_[si_]), PrimKind::Write, BaseValue{Bit{0}},
                          abort_path_ ? relab_L : rel_L};
      case Ph::RelReady:
        return PoisedPrim{BaseObjId::ready(proc_, scan_[si_]), PrimKind::Write,
                          BaseValue{Bit{0}}, abort_path_ ? relab_r : rel_r};
      case Ph::FinishValue:
        return OpFinish{TOpResult::val(out_)};
      case Ph::FinishOk:
        return OpFinish{TOpResult::ok()};
      case Ph::FinishC:
        return OpFinish{TOpResult::committed()};
      case Ph::FinishA:
        return OpFinish{TOpResult::aborted()};
      case Ph::None:
        break;
    }
    throw std::logic_error("LpMachine::next with no active op");
  }

  void on_applied(const BaseEvent& ev) override {
    switch (ph_) {
      case Ph::RvalRead: {
        const auto& pv = std::get<PlainVal>(ev.response);
        rset_[cur_] = {pv.value, pv.writer};
        out_ = pv.value;
        ph_ = Ph::RlockRead;
        break;
      }
      case Ph::RlockRead:
        if (std::get<Bit>(ev.response).value != 0) {
          ph_ = Ph::FinishA;
        } else {
          load_scan_rset();
          ph_ = Ph::RvalidateScan;  // the just-read object is in the read set
        }
        break;
      case Ph::RvalidateScan: {
        const auto& pv = std::get<PlainVal>(ev.response);
        const auto& seen = rset_.at(scan_[si_]);
        if (pv.value != seen.first || pv.writer != seen.second) {
          ph_ = Ph::FinishA;
        } else if (++si_ == scan_.size()) {
          ph_ = Ph::FinishValue;
        }
        break;
      }
      case Ph::AcqWriteR:
        if (++si_ == scan_.size()) {
          load_rscan();
          ph_ = rscan_.empty() ? after_acquire() : Ph::AcqReadR;
        }
        break;
      case Ph::AcqReadR:
        if (std::get<Bit>(ev.response).value != 0) {
          load_scan_wset();
          ph_ = Ph::AcqRollback;
        } else if (++ri_ == rscan_.size()) {
          load_scan_wset();
          ph_ = after_acquire();
        }
        break;
      case Ph::AcqRollback:
        if (++si_ == scan_.size()) ph_ = Ph::FinishA;
        break;
      case Ph::WriteLock:
        if (++si_ == scan_.size()) enter_is_abortable();
        break;
      case Ph::IsabLockScan:
        if (std::get<Bit>(ev.response).value != 0) {
          enter_release(true);
        } else if (++si_ == scan_.size()) {
          enter_isab_validate();
        }
        break;
      case Ph::IsabValidate: {
        const auto& pv = std::get<PlainVal>(ev.response);
        const auto& seen = rset_.at(scan_[si_]);
        if (pv.value != seen.first || pv.writer != seen.second) {
          enter_release(true);
        } else if (++si_ == scan_.size()) {
          load_scan_wset();
          ph_ = Ph::WriteVals;
        }
        break;
      }
      case Ph::WriteVals:
        if (++si_ == scan_.size()) enter_release(false);
        break;
      case Ph::RelLock:
        if (++si_ == scan_.size()) {
          load_scan_wset();
          ph_ = Ph::RelReady;
        }
        break;
      case Ph::RelReady:
        if (++si_ == scan_.size()) ph_ = abort_path_ ? Ph::FinishA : Ph::FinishC;
        break;
      default:
        throw std::logic_error("LpMachine::on_applied in non-primitive phase");
    }
  }

 protected:
  void start_op(const TOp& op) override {
    si_ = 0;
    ri_ = 0;
    abort_path_ = false;
    switch (op.kind) {
      case TOpKind::Read:
        cur_ = op.obj;
        if (auto it = rset_.find(cur_); it != rset_.end()) {
          // Repeat reads are served locally; the shared path runs once per
          // object.  A write does not put the object into the read set, so a
          // read after a buffered write still goes to shared memory.
          out_ = it->second.first;
          ph_ = Ph::FinishValue;
        } else {
          ph_ = Ph::RvalRead;
        }
        break;
      case TOpKind::Write:
        wset_[op.obj] = op.value;  // last write wins
        ph_ = Ph::FinishOk;
        break;
      case TOpKind::TryCommit:
        if (wset_.empty()) {
          ph_ = Ph::FinishC;  // read-only fast path, zero base events
        } else {
          load_scan_wset();
          ph_ = Ph::AcqWriteR;
        }
        break;
    }
  }

 private:
  enum class Ph {
    None,
    RvalRead,
    RlockRead,
    RvalidateScan,
    AcqWriteR,
    AcqReadR,
    AcqRollback,
    WriteLock,
    IsabLockScan,
    IsabValidate,
    WriteVals,
    RelLock,
    RelReady,
    FinishValue,
    FinishOk,
    FinishC,
    FinishA
  };

  Ph after_acquire() {
    load_scan_wset();
    return Ph::WriteLock;
  }

  void enter_is_abortable() {
    scan_.clear();
    for (const auto& [x, _] : rset_)
      if (!wset_.count(x)) scan_.push_back(x);
    si_ = 0;
    if (!scan_.empty()) {
      ph_ = Ph::IsabLockScan;
    } else {
      enter_isab_validate();
    }
  }

  void enter_isab_validate() {
    load_scan_rset();
    if (!scan_.empty()) {
      ph_ = Ph::IsabValidate;
    } else {
      load_scan_wset();
      ph_ = Ph::WriteVals;
    }
  }

  void enter_release(bool abort) {
    abort_path_ = abort;
    load_scan_wset();
    ph_ = Ph::RelLock;
  }

  void load_scan_wset() {
    scan_.clear();
    for (const auto& [x, _] : wset_) scan_.push_back(x);
    si_ = 0;
  }

  void load_scan_rset() {
    scan_.clear();
    for (const auto& [x, _] : rset_) scan_.push_back(x);
    si_ = 0;
  }

  void load_rscan() {
    rscan_.clear();
    for (const auto& [x, _] : wset_)
      for (ProcId t = 1; t <= n_procs_; ++t)
        if (t != proc_) rscan_.emplace_back(x, t);
    ri_ = 0;
  }

  std::map<TObjId, std::pair<int, TxId>> rset_;  // obj -> (value, writer)
  std::map<TObjId, int> wset_;                   // obj -> buffered value

  Ph ph_ = Ph::None;
  TObjId cur_ = -1;
  int out_ = 0;
  bool abort_path_ = false;
  std::vector<TObjId> scan_;
  std::size_t si_ = 0;
  std::vector<std::pair<TObjId, ProcId>> rscan_;  // (obj, other proc)
  std::size_t ri_ = 0;
};

}  // namespace tmlab
