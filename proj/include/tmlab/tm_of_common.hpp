#pragma once

// Shared core of the two obstruction-free TMs.  Both keep one ownership
// record tvar[X] = [owner, oval, nval] per t-object and one status word per
// transaction; both share the same t-write: resolve the previous owner's
// status (cas-aborting a live owner), then cas-install [self, curr, v].
// They differ in the read path and in tryCommit, implemented by the two
// subclasses.

#include <map>
#include <vector>

#include "tmlab/machine.hpp"

namespace tmlab {

namespace of_marker {
inline constexpr const char* read_tvar = "read-tvar";
inline constexpr const char* read_status = "read-status";
inline constexpr const char* cas_status_abort = "cas-status-abort";
inline constexpr const char* cas_tvar_install = "cas-tvar-install";
inline constexpr const char* cas_tvar_rewrite = "cas-tvar-rewrite";
inline constexpr const char* cas_tvar_own = "cas-tvar-own";
inline constexpr const char* read_own_status = "read-own-status";
inline constexpr const char* validate_tvar = "validate-tvar";
inline constexpr const char* cas_status_commit = "cas-status-commit";
}  // namespace of_marker

class OfCommonMachine : public TxMachine {
 public:
  using TxMachine::TxMachine;

  struct RsetEntry {
    TVarVal seen{};  // tvar value observed at the read's first base event
    int curr = 0;    // resolved value returned by the t-read
  };

  const std::map<TObjId, RsetEntry>& rset() const { return rset_; }
  const std::map<TObjId, TVarVal>& wset() const { return wset_; }

  NextAction next() const override {
    using namespace of_marker;
    switch (ph_) {
      case Ph::RdTvar:
      case Ph::WrTvar:
        return PoisedPrim{BaseObjId::tvar(cur_), PrimKind::Read, {}, read_tvar};
      case Ph::RdOwnerStatus:
      case Ph::WrOwnerStatus:
        return PoisedPrim{BaseObjId::status(tv_.owner), PrimKind::Read, {}, read_status};
      case Ph::RdCasAbortOwner:
      case Ph::WrCasAbortOwner:
        return PoisedPrim{BaseObjId::status(tv_.owner), PrimKind::Cas,
                          CasArgs{BaseValue{TxStatus::Live}, BaseValue{TxStatus::Aborted}},
                          cas_status_abort};
      case Ph::RdCasOwn:
        return PoisedPrim{BaseObjId::tvar(cur_), PrimKind::Cas,
                          CasArgs{BaseValue{tv_}, BaseValue{TVarVal{tx_, curr_, curr_}}},
                          cas_tvar_own};
      case Ph::RdOwnStatus:
      case Ph::WrOwnStatus:
        return PoisedPrim{BaseObjId::status(tx_), PrimKind::Read, {}, read_own_status};
      case Ph::RdValidate:
      case Ph::TcValidate:
        return PoisedPrim{BaseObjId::tvar(scan_[si_]), PrimKind::Read, {}, validate_tvar};
      case Ph::WrCasInstall:
        return PoisedPrim{BaseObjId::tvar(cur_), PrimKind::Cas,
                          CasArgs{BaseValue{tv_}, BaseValue{TVarVal{tx_, curr_, wval_}}},
                          cas_tvar_install};
      case Ph::WrCasRewrite:
        return PoisedPrim{BaseObjId::tvar(cur_), PrimKind::Cas,
                          CasArgs{BaseValue{expected_}, BaseValue{TVarVal{tx_, expected_.oval, wval_}}},
                          cas_tvar_rewrite};
      case Ph::TcCasCommit:
        return PoisedPrim{BaseObjId::status(tx_), PrimKind::Cas,
                          CasArgs{BaseValue{TxStatus::Live}, BaseValue{TxStatus::Committed}},
                          cas_status_commit};
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
    throw std::logic_error("OfMachine::next with no active op");
  }

  void on_applied(const BaseEvent& ev) override {
    switch (ph_) {
      // ---- t-read ----
      case Ph::RdTvar:
        tv_ = std::get<TVarVal>(ev.response);
        if (tv_.owner == tx_) {
          // Unreachable for a live transaction: self ownership implies the
          // object is in the local dictionaries, handled before any event.
          out_ = tv_.nval;
          ph_ = Ph::FinishValue;
        } else {
          ph_ = Ph::RdOwnerStatus;
        }
        break;
      case Ph::RdOwnerStatus:
        switch (std::get<TxStatus>(ev.response)) {
          case TxStatus::Committed: curr_ = tv_.nval; ph_ = read_after_resolve(); break;
          case TxStatus::Aborted: curr_ = tv_.oval; ph_ = read_after_resolve(); break;
          case TxStatus::Live: ph_ = Ph::RdCasAbortOwner; break;
        }
        break;
      case Ph::RdCasAbortOwner:
        ph_ = read_after_abort_cas(ev.cas_ok);
        break;
      case Ph::RdCasOwn:
        // Reader takes ownership; both branches of the record hold the
        // resolved value, so a later abort or commit of this transaction
        // leaves the t-object's value unchanged.
        ph_ = ev.cas_ok ? Ph::RdOwnStatus : Ph::FinishA;
        break;
      case Ph::RdOwnStatus:
        if (std::get<TxStatus>(ev.response) != TxStatus::Live) {
          ph_ = Ph::FinishA;
        } else {
          ph_ = read_after_own_status_live();
        }
        break;
      case Ph::RdValidate:
        if (std::get<TVarVal>(ev.response) != rset_.at(scan_[si_]).seen) {
          ph_ = Ph::FinishA;
        } else if (++si_ == scan_.size()) {
          record_read();
          ph_ = Ph::FinishValue;
        }
        break;

      // ---- t-write ----
      case Ph::WrTvar:
        tv_ = std::get<TVarVal>(ev.response);
        if (tv_.owner == tx_) {
          // Ownership taken by an earlier t-read: re-write keeping oval.
          expected_ = tv_;
          ph_ = Ph::WrCasRewrite;
        } else {
          ph_ = Ph::WrOwnerStatus;
        }
        break;
      case Ph::WrOwnerStatus:
        switch (std::get<TxStatus>(ev.response)) {
          case TxStatus::Committed: curr_ = tv_.nval; ph_ = Ph::WrCasInstall; break;
          case TxStatus::Aborted: curr_ = tv_.oval; ph_ = Ph::WrCasInstall; break;
          case TxStatus::Live: ph_ = Ph::WrCasAbortOwner; break;
        }
        break;
      case Ph::WrCasAbortOwner:
        if (ev.cas_ok) {
          curr_ = tv_.oval;
          ph_ = Ph::WrCasInstall;
        } else {
          ph_ = Ph::FinishA;
        }
        break;
      case Ph::WrCasInstall:
        ph_ = ev.cas_ok ? Ph::WrOwnStatus : Ph::FinishA;
        break;
      case Ph::WrOwnStatus:
        if (std::get<TxStatus>(ev.response) == TxStatus::Live) {
          record_write(tv_, TVarVal{tx_, curr_, wval_});
          ph_ = Ph::FinishOk;
        } else {
          ph_ = Ph::FinishA;
        }
        break;
      case Ph::WrCasRewrite:
        if (ev.cas_ok) {
          record_write(expected_, TVarVal{tx_, expected_.oval, wval_});
          ph_ = Ph::FinishOk;
        } else {
          ph_ = Ph::FinishA;
        }
        break;

      // ---- tryCommit ----
      case Ph::TcValidate:
        if (std::get<TVarVal>(ev.response) != rset_.at(scan_[si_]).seen) {
          ph_ = Ph::FinishA;
        } else if (++si_ == scan_.size()) {
          ph_ = Ph::TcCasCommit;
        }
        break;
      case Ph::TcCasCommit:
        ph_ = ev.cas_ok ? Ph::FinishC : Ph::FinishA;
        break;

      default:
        throw std::logic_error("OfMachine::on_applied in non-primitive phase");
    }
  }

 protected:
  enum class Ph {
    None,
    RdTvar,
    RdOwnerStatus,
    RdCasAbortOwner,
    RdCasOwn,
    RdOwnStatus,
    RdValidate,
    WrTvar,
    WrOwnerStatus,
    WrCasAbortOwner,
    WrCasInstall,
    WrOwnStatus,
    WrCasRewrite,
    TcValidate,
    TcCasCommit,
    FinishValue,
    FinishOk,
    FinishC,
    FinishA
  };

  void start_op(const TOp& op) override {
    si_ = 0;
    switch (op.kind) {
      case TOpKind::Read:
        cur_ = op.obj;
        start_read();
        break;
      case TOpKind::Write:
        cur_ = op.obj;
        wval_ = op.value;
        if (auto it = wset_.find(cur_); it != wset_.end()) {
          expected_ = it->second;
          ph_ = Ph::WrCasRewrite;
        } else {
          ph_ = Ph::WrTvar;
        }
        break;
      case TOpKind::TryCommit:
        start_tryc();
        break;
    }
  }

  // Subclass hooks: read path after owner resolution differs between the two
  // algorithms, as does tryCommit.
  virtual void start_read() = 0;
  virtual Ph read_after_resolve() = 0;
  virtual Ph read_after_abort_cas(bool ok) = 0;
  virtual Ph read_after_own_status_live() = 0;
  virtual void start_tryc() = 0;

  void record_read() { rset_[cur_] = {tv_, curr_}; }

  void record_write(const TVarVal& replaced, const TVarVal& installed) {
    wset_[cur_] = installed;
    // Follow the own install in the read-set record, but only when the
    // replaced triple is exactly the recorded one: then no other transaction
    // interfered since the read, and validation keeps detecting exactly the
    // foreign installs.  A stale record stays stale and aborts at validate.
    if (auto it = rset_.find(cur_); it != rset_.end() && it->second.seen == replaced)
      it->second.seen = installed;
  }

  void load_scan_rset() {
    scan_.clear();
    for (const auto& [x, _] : rset_) scan_.push_back(x);
    si_ = 0;
  }

  std::map<TObjId, RsetEntry> rset_;
  std::map<TObjId, TVarVal> wset_;  // obj -> installed triple

  Ph ph_ = Ph::None;
  TObjId cur_ = -1;
  int wval_ = 0;
  int curr_ = 0;
  int out_ = 0;
  TVarVal tv_{};        // triple read at the operation's first tvar access
  TVarVal expected_{};  // expected triple for the re-write cas
  std::vector<TObjId> scan_;
  std::size_t si_ = 0;
};

}  // namespace tmlab
