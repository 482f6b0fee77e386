#pragma once

// Weak DAP obstruction-free TM.  A t-read takes ownership of the record via
// cas, so repeat reads are local and no operation ever validates: every
// t-operation runs a constant number of steps.  Reading an object with a
// live owner cas-aborts the owner and then aborts the reader itself,
// unconditionally.  tryCommit is a single status cas.

#include "tmlab/tm_of_common.hpp"

namespace tmlab {

inline std::vector<const char*> of_weakdap_markers() {
  using namespace of_marker;
  return {read_tvar, read_status,      cas_status_abort, cas_tvar_own,
          cas_tvar_install, cas_tvar_rewrite, read_own_status, cas_status_commit};
}

class OfWeakdapMachine : public OfCommonMachine {
 public:
  using OfCommonMachine::OfCommonMachine;

 protected:
  void start_read() override {
    if (auto it = wset_.find(cur_); it != wset_.end()) {
      out_ = it->second.nval;
      ph_ = Ph::FinishValue;
    } else if (auto it = rset_.find(cur_); it != rset_.end()) {
      out_ = it->second.curr;
      ph_ = Ph::FinishValue;
    } else {
      ph_ = Ph::RdTvar;
    }
  }

  Ph read_after_resolve() override { return Ph::RdCasOwn; }

  Ph read_after_abort_cas(bool ok) override {
    if (ok) curr_ = tv_.oval;
    return Ph::FinishA;  // returned regardless of the cas outcome
  }

  Ph read_after_own_status_live() override {
    record_read();
    out_ = curr_;
    return Ph::FinishValue;
  }

  void start_tryc() override { ph_ = Ph::TcCasCommit; }
};

}  // namespace tmlab
