#pragma once

// Small shared helpers for the test suites.

#include <stdexcept>

#include "tmlab/scenarios.hpp"

inline tmlab::TOpResult op_result_or_die(const tmlab::Execution& e, tmlab::TxId tx,
                                         int op_index) {
  auto r = tmlab::op_result(e, tx, op_index);
  if (!r) throw std::runtime_error("no response recorded for the t-operation");
  return *r;
}

inline tmlab::Execution run_schedule_safely(const tmlab::ScheduleScript& s) {
  return tmlab::run_schedule(s).exec;
}
