#pragma once

// Read-write DAP obstruction-free TM.  Reads are invisible to the ownership
// record (they never cas tvar) but abort a live owner through its status
// word and revalidate the whole read set, so a t-read costs a number of
// steps linear in |Rset|.  tryCommit validates and then cas-commits the own
// status.

#include "tmlab/tm_of_common.hpp"

namespace tmlab {

inline std::vector<const char*> of_rwdap_markers() {
  using namespace of_marker;
  return {read_tvar, read_status,      cas_status_abort, cas_tvar_install,
          cas_tvar_rewrite, read_own_status, validate_tvar, cas_status_commit};
}

class OfRwdapMachine : public OfCommonMachine {
 public:
  using OfCommonMachine::OfCommonMachine;

 protected:
  void start_read() override {
    if (auto it = wset_.find(cur_); it != wset_.end()) {
      // Own write: served locally from the write set.
      out_ = it->second.nval;
      ph_ = Ph::FinishValue;
    } else {
      // Repeat plain reads run the full shared path again (and revalidate).
      ph_ = Ph::RdTvar;
    }
  }

  Ph read_after_resolve() override { return Ph::RdOwnStatus; }

  Ph read_after_abort_cas(bool ok) override {
    if (!ok) return Ph::FinishA;
    curr_ = tv_.oval;
    return Ph::RdOwnStatus;
  }

  Ph read_after_own_status_live() override {
    load_scan_rset();
    if (scan_.empty()) {
      record_read();
      out_ = curr_;
      return Ph::FinishValue;
    }
    out_ = curr_;
    return Ph::RdValidate;
  }

  void start_tryc() override {
    load_scan_rset();
    ph_ = scan_.empty() ? Ph::TcCasCommit : Ph::TcValidate;
  }
};

}  // namespace tmlab
