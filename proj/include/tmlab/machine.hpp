#pragma once

// Resumable transaction state machines.  A machine advances one base event
// per step: the executor peeks the poised primitive via next(), applies it to
// memory, and feeds the resulting event back through on_applied().  Purely
// local t-operations (buffered writes, cached reads) finish without emitting
// base events.

#include <memory>
#include <stdexcept>
#include <variant>
#include <vector>

#include "tmlab/memory.hpp"
#include "tmlab/program.hpp"

namespace tmlab {

// The poised base event: fully determined by the machine's local state.
struct PoisedPrim {
  BaseObjId obj{};
  PrimKind kind{};
  PrimArgs args{};
  const char* marker = "";
};

struct OpFinish {
  TOpResult result{};
};

using NextAction = std::variant<PoisedPrim, OpFinish>;

class TxMachine {
 public:
  TxMachine(TxId tx, ProcId proc, int n_procs) : tx_(tx), proc_(proc), n_procs_(n_procs) {}
  virtual ~TxMachine() = default;

  TxId tx() const { return tx_; }
  ProcId proc() const { return proc_; }
  bool op_active() const { return op_active_; }
  bool finished() const { return finished_; }

  void begin_op(const TOp& op) {
    if (op_active_ || finished_) throw std::logic_error("begin_op on busy/finished machine");
    op_active_ = true;
    start_op(op);
  }

  // Pre: op_active().  What the machine does next inside the current t-op.
  virtual NextAction next() const = 0;

  // Pre: next() returned a PoisedPrim; ev is the applied event.
  virtual void on_applied(const BaseEvent& ev) = 0;

  // Pre: next() returned OpFinish.  Ends the t-operation.
  void finish_op(const TOpResult& r) {
    op_active_ = false;
    if (r.kind == TOpResult::Kind::Committed || r.kind == TOpResult::Kind::Aborted)
      finished_ = true;
  }

 protected:
  virtual void start_op(const TOp& op) = 0;

  TxId tx_;
  ProcId proc_;
  int n_procs_;
  bool op_active_ = false;
  bool finished_ = false;
};

}  // namespace tmlab
