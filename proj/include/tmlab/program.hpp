#pragma once

// Transaction programs and schedule scripts.  A program is a straight-line
// list of t-operations; on abort the transaction terminates (retries are
// expressed as new transactions).  Scripts drive the executor either step by
// step or through run-solo / run-until-poised directives.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tmlab/memory.hpp"

namespace tmlab {

enum class Algo { Lp, OfRwdap, OfWeakdap };

inline const char* to_string(Algo a) {
  switch (a) {
    case Algo::Lp: return "lp";
    case Algo::OfRwdap: return "of-rwdap";
    case Algo::OfWeakdap: return "of-weakdap";
  }
  return "?";
}

inline std::optional<Algo> algo_from_string(const std::string& s) {
  if (s == "lp") return Algo::Lp;
  if (s == "of-rwdap") return Algo::OfRwdap;
  if (s == "of-weakdap") return Algo::OfWeakdap;
  return std::nullopt;
}

enum class TOpKind { Read, Write, TryCommit };

inline const char* to_string(TOpKind k) {
  switch (k) {
    case TOpKind::Read: return "read";
    case TOpKind::Write: return "write";
    case TOpKind::TryCommit: return "tryc";
  }
  return "?";
}

struct TOp {
  TOpKind kind{};
  TObjId obj = -1;
  int value = 0;

  static TOp read(TObjId x) { return {TOpKind::Read, x, 0}; }
  static TOp write(TObjId x, int v) { return {TOpKind::Write, x, v}; }
  static TOp tryc() { return {TOpKind::TryCommit, -1, 0}; }
  bool operator==(const TOp&) const = default;
};

struct TOpResult {
  enum class Kind { Value, Ok, Committed, Aborted } kind = Kind::Ok;
  int value = 0;

  static TOpResult val(int v) { return {Kind::Value, v}; }
  static TOpResult ok() { return {Kind::Ok, 0}; }
  static TOpResult committed() { return {Kind::Committed, 0}; }
  static TOpResult aborted() { return {Kind::Aborted, 0}; }
  bool is_abort() const { return kind == Kind::Aborted; }
  bool operator==(const TOpResult&) const = default;
};

inline std::string to_string(const TOpResult& r) {
  switch (r.kind) {
    case TOpResult::Kind::Value: return std::to_string(r.value);
    case TOpResult::Kind::Ok: return "ok";
    case TOpResult::Kind::Committed: return "C";
    case TOpResult::Kind::Aborted: return "A";
  }
  return "?";
}

using TmProgram = std::vector<TOp>;

struct ScriptError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A tryCommit, if present, must be last; nothing follows an abort anyway.
inline void validate_program(const TmProgram& prog) {
  for (std::size_t i = 0; i < prog.size(); ++i) {
    if (prog[i].kind == TOpKind::TryCommit && i + 1 != prog.size())
      throw ScriptError("tryCommit must be the last t-operation of a program");
    if (prog[i].kind != TOpKind::TryCommit && prog[i].obj < 0)
      throw ScriptError("read/write needs a t-object id");
  }
}

struct ScheduleDirective {
  enum class Kind { Step, RunSolo, RunUntil } kind{};
  ProcId proc = 0;
  std::string marker;  // RunUntil only

  static ScheduleDirective step(ProcId p) { return {Kind::Step, p, {}}; }
  static ScheduleDirective solo(ProcId p) { return {Kind::RunSolo, p, {}}; }
  static ScheduleDirective until(ProcId p, std::string m) {
    return {Kind::RunUntil, p, std::move(m)};
  }
};

struct ScheduleScript {
  Algo impl = Algo::Lp;
  int n = 1;        // process count
  int objects = 1;  // t-object count
  std::vector<std::vector<TmProgram>> programs;  // per process, a list of transactions
  std::vector<ScheduleDirective> steps;

  void validate() const {
    if (n < 1 || objects < 1) throw ScriptError("n and objects must be positive");
    if ((int)programs.size() > n) throw ScriptError("more program lists than processes");
    for (const auto& per_proc : programs)
      for (const auto& prog : per_proc) {
        validate_program(prog);
        for (const auto& op : prog)
          if (op.kind != TOpKind::TryCommit && op.obj >= objects)
            throw ScriptError("t-object id out of range");
      }
    for (const auto& d : steps)
      if (d.proc < 1 || d.proc > n) throw ScriptError("directive references unknown process");
  }
};

// --- JSON (see README for the schema) ---------------------------------------

inline nlohmann::json to_json(const TOp& op) {
  nlohmann::json j;
  j["op"] = to_string(op.kind);
  if (op.kind != TOpKind::TryCommit) j["x"] = op.obj;
  if (op.kind == TOpKind::Write) j["v"] = op.value;
  return j;
}

inline TOp top_from_json(const nlohmann::json& j) {
  const std::string k = j.at("op").get<std::string>();
  if (k == "read") return TOp::read(j.at("x").get<int>());
  if (k == "write") return TOp::write(j.at("x").get<int>(), j.at("v").get<int>());
  if (k == "tryc") return TOp::tryc();
  throw ScriptError("unknown t-operation kind: " + k);
}

inline nlohmann::json to_json(const ScheduleScript& s) {
  nlohmann::json j;
  j["impl"] = to_string(s.impl);
  j["n"] = s.n;
  j["objects"] = s.objects;
  auto& progs = j["programs"] = nlohmann::json::array();
  for (const auto& per_proc : s.programs) {
    nlohmann::json jp = nlohmann::json::array();
    for (const auto& prog : per_proc) {
      nlohmann::json jt = nlohmann::json::array();
      for (const auto& op : prog) jt.push_back(to_json(op));
      jp.push_back(jt);
    }
    progs.push_back(jp);
  }
  auto& steps = j["steps"] = nlohmann::json::array();
  for (const auto& d : s.steps) {
    nlohmann::json jd;
    switch (d.kind) {
      case ScheduleDirective::Kind::Step: jd["kind"] = "step"; break;
      case ScheduleDirective::Kind::RunSolo: jd["kind"] = "solo"; break;
      case ScheduleDirective::Kind::RunUntil: jd["kind"] = "until"; jd["marker"] = d.marker; break;
    }
    jd["p"] = d.proc;
    steps.push_back(jd);
  }
  return j;
}

inline ScheduleScript script_from_json(const nlohmann::json& j) {
  ScheduleScript s;
  auto impl = algo_from_string(j.at("impl").get<std::string>());
  if (!impl) throw ScriptError("unknown impl: " + j.at("impl").get<std::string>());
  s.impl = *impl;
  s.n = j.at("n").get<int>();
  s.objects = j.at("objects").get<int>();
  for (const auto& jp : j.at("programs")) {
    std::vector<TmProgram> per_proc;
    // Accept both a list of transactions and a single flat transaction.
    if (!jp.empty() && jp.front().is_object()) {
      TmProgram prog;
      for (const auto& jo : jp) prog.push_back(top_from_json(jo));
      per_proc.push_back(std::move(prog));
    } else {
      for (const auto& jt : jp) {
        TmProgram prog;
        for (const auto& jo : jt) prog.push_back(top_from_json(jo));
        per_proc.push_back(std::move(prog));
      }
    }
    s.programs.push_back(std::move(per_proc));
  }
  for (const auto& jd : j.at("steps")) {
    const std::string k = jd.at("kind").get<std::string>();
    ProcId p = jd.at("p").get<int>();
    if (k == "step") s.steps.push_back(ScheduleDirective::step(p));
    else if (k == "solo") s.steps.push_back(ScheduleDirective::solo(p));
    else if (k == "until") s.steps.push_back(ScheduleDirective::until(p, jd.at("marker").get<std::string>()));
    else throw ScriptError("unknown directive kind: " + k);
  }
  s.validate();
  return s;
}

}  // namespace tmlab
