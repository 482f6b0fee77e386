#pragma once

// Simulated shared memory for the TM lab: base objects, the three RMW
// primitive kinds (read / write / cas) and the event records every analyzer
// consumes.  The memory is single-threaded by construction; concurrency is
// expressed by the executor interleaving step calls.

#include <compare>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>

namespace tmlab {

using TObjId = int;  // transactional data items, numbered 0..objects-1
using TxId = int;    // 0 is the imaginary transaction that wrote initial values
using ProcId = int;  // processes are numbered 1..n

// Base object families.  Val/Lock/Ready exist only in the lock-based layout,
// TVar/Status only in the ownership-record layouts.
enum class ObjKind { Val, Lock, Ready, TVar, Status };

struct BaseObjId {
  ObjKind kind{};
  int id = 0;       // t-object id; transaction id for Status
  ProcId proc = 0;  // owning process for Ready, 0 otherwise

  auto operator<=>(const BaseObjId&) const = default;

  static BaseObjId val(TObjId x) { return {ObjKind::Val, x, 0}; }
  static BaseObjId lock(TObjId x) { return {ObjKind::Lock, x, 0}; }
  static BaseObjId ready(ProcId p, TObjId x) { return {ObjKind::Ready, x, p}; }
  static BaseObjId tvar(TObjId x) { return {ObjKind::TVar, x, 0}; }
  static BaseObjId status(TxId k) { return {ObjKind::Status, k, 0}; }
};

inline std::string to_string(const BaseObjId& o) {
  std::ostringstream s;
  switch (o.kind) {
    case ObjKind::Val: s << "v[" << o.id << "]"; break;
    case ObjKind::Lock: s << "L[" << o.id << "]"; break;
    case ObjKind::Ready: s << "r[" << o.proc << "," << o.id << "]"; break;
    case ObjKind::TVar: s << "tvar[" << o.id << "]"; break;
    case ObjKind::Status: s << "status[" << o.id << "]"; break;
  }
  return s.str();
}

enum class TxStatus { Live, Aborted, Committed };

inline const char* to_string(TxStatus s) {
  switch (s) {
    case TxStatus::Live: return "live";
    case TxStatus::Aborted: return "aborted";
    case TxStatus::Committed: return "committed";
  }
  return "?";
}

// Value of a Val cell: the t-object value plus the id of the committed
// transaction whose tryCommit wrote it (0 = initializing transaction).
struct PlainVal {
  int value = 0;
  TxId writer = 0;
  bool operator==(const PlainVal&) const = default;
};

struct Bit {
  int value = 0;
  bool operator==(const Bit&) const = default;
};

// Ownership record triple: [owner, oval, nval].
struct TVarVal {
  TxId owner = 0;
  int oval = 0;
  int nval = 0;
  bool operator==(const TVarVal&) const = default;
};

using BaseValue = std::variant<PlainVal, Bit, TVarVal, TxStatus>;

inline std::string to_string(const BaseValue& v) {
  std::ostringstream s;
  if (auto* p = std::get_if<PlainVal>(&v)) s << "(" << p->value << ",T" << p->writer << ")";
  else if (auto* b = std::get_if<Bit>(&v)) s << b->value;
  else if (auto* t = std::get_if<TVarVal>(&v))
    s << "[T" << t->owner << "," << t->oval << "," << t->nval << "]";
  else s << to_string(std::get<TxStatus>(v));
  return s.str();
}

enum class PrimKind { Read, Write, Cas };

inline const char* to_string(PrimKind k) {
  switch (k) {
    case PrimKind::Read: return "read";
    case PrimKind::Write: return "write";
    case PrimKind::Cas: return "cas";
  }
  return "?";
}

struct CasArgs {
  BaseValue expected;
  BaseValue desired;
};

// Read takes no arguments, write the new value, cas an (expected, desired) pair.
using PrimArgs = std::variant<std::monostate, BaseValue, CasArgs>;

// One primitive application.  `seq` is the entry index in the execution and
// `op_index` the ordinal of the enclosing t-operation within its transaction;
// both are filled by the executor when the event is appended to the log.
struct BaseEvent {
  int seq = -1;
  ProcId proc = 0;
  TxId tx = 0;
  int op_index = -1;
  BaseObjId obj{};
  PrimKind kind{};
  PrimArgs args{};
  BaseValue response{};  // value of the object before the update
  bool cas_ok = false;
  const char* marker = "";
};

// A write or cas primitive may change the object, a read never does.  The
// classification is by primitive kind, not by effect, so a failed cas still
// counts as nontrivial.
inline bool is_nontrivial(PrimKind k) { return k != PrimKind::Read; }
inline bool is_nontrivial(const BaseEvent& e) { return is_nontrivial(e.kind); }

// Type mismatches and single-writer violations are programming errors in the
// machines, not TM aborts.
struct MemoryFault : std::logic_error {
  using std::logic_error::logic_error;
};

class Memory {
 public:
  void define(BaseObjId obj, BaseValue initial) { cells_[obj] = std::move(initial); }

  bool defined(BaseObjId obj) const { return cells_.count(obj) != 0; }

  const BaseValue& peek(BaseObjId obj) const {
    auto it = cells_.find(obj);
    if (it == cells_.end()) throw MemoryFault("undefined base object " + to_string(obj));
    return it->second;
  }

  // Applies one primitive and returns the event record.  The response is
  // computed from the state before the update.
  BaseEvent apply(ProcId proc, TxId tx, BaseObjId obj, PrimKind kind, const PrimArgs& args,
                  const char* marker = "") {
    auto it = cells_.find(obj);
    if (it == cells_.end()) throw MemoryFault("undefined base object " + to_string(obj));
    BaseValue& cur = it->second;

    BaseEvent ev;
    ev.proc = proc;
    ev.tx = tx;
    ev.obj = obj;
    ev.kind = kind;
    ev.args = args;
    ev.response = cur;
    ev.marker = marker;

    switch (kind) {
      case PrimKind::Read:
        if (!std::holds_alternative<std::monostate>(args))
          throw MemoryFault("read takes no arguments");
        break;
      case PrimKind::Write: {
        auto* nv = std::get_if<BaseValue>(&args);
        if (!nv || nv->index() != cur.index())
          throw MemoryFault("write args do not match family of " + to_string(obj));
        if (obj.kind == ObjKind::Ready && obj.proc != proc)
          throw MemoryFault("single-writer violation: p" + std::to_string(proc) +
                            " writing " + to_string(obj));
        cur = *nv;
        break;
      }
      case PrimKind::Cas: {
        auto* ca = std::get_if<CasArgs>(&args);
        if (!ca || ca->expected.index() != cur.index() || ca->desired.index() != cur.index())
          throw MemoryFault("cas args do not match family of " + to_string(obj));
        ev.cas_ok = (cur == ca->expected);
        if (ev.cas_ok) cur = ca->desired;
        break;
      }
    }
    return ev;
  }

  const std::map<BaseObjId, BaseValue>& cells() const { return cells_; }

 private:
  std::map<BaseObjId, BaseValue> cells_;
};

}  // namespace tmlab
