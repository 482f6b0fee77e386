// tmlab: run scenarios and fuzz campaigns over the three TM implementations,
// check history files for opacity and strict serializability, replay schedule
// scripts and print the blocking-vs-non-blocking comparison table.
//
// Exit codes are the machine contract:
//   0 success (scenario/fuzz: all assertions hold; check: history opaque)
//   1 a check failed (scenario/fuzz violations; check: not opaque)
//   2 usage or input error (unknown scenario, unparsable file)
//   3 checker gave up: history over the transaction bound

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tmlab/analysis.hpp"
#include "tmlab/checker.hpp"
#include "tmlab/executor.hpp"
#include "tmlab/history.hpp"
#include "tmlab/scenarios.hpp"

namespace {

void emit(const std::string& text, const nlohmann::json& json, bool as_json,
          const std::string& out_path) {
  std::string payload = as_json ? json.dump(2) + "\n" : text;
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    f << payload;
  }
  std::cout << payload;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(std::stoi(item));
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tmlab: a deterministic software transactional memory laboratory"};
  app.require_subcommand(1);
  app.fallthrough();  // --json/--out may follow the subcommand
  bool as_json = false;
  std::string out_path;
  app.add_flag("--json", as_json, "emit JSON instead of text");
  app.add_option("--out", out_path, "also write the report to this path");

  // scenario
  auto* sc = app.add_subcommand("scenario", "run a registered scenario");
  std::string sc_name;
  tmlab::ScenarioParams sc_params;
  sc->add_option("name", sc_name, "scenario name")->required();
  sc->add_option("--n", sc_params.n, "process count");
  sc->add_option("--wset", sc_params.wset, "write-set size (lp-single-raw)");

  // fuzz
  auto* fz = app.add_subcommand("fuzz", "randomized runs with correctness checks");
  std::string fz_impl = "lp";
  tmlab::FuzzParams fp;
  std::string fz_checks;
  fz->add_option("--impl", fz_impl, "lp | of-rwdap | of-weakdap");
  fz->add_option("--n", fp.n, "process count");
  fz->add_option("--objects", fp.objects, "t-object count");
  fz->add_option("--seeds", fp.seeds, "number of seeds");
  fz->add_option("--seed", fp.seed0, "first seed");
  fz->add_option("--length", fp.length, "max t-operations per transaction");
  fz->add_option("--bound", fp.history_bound, "opacity-check transaction bound");
  fz->add_option("--check", fz_checks,
                 "comma list from {opacity,dap,progress,metrics}; default all");

  // check
  auto* ck = app.add_subcommand("check", "check a history file");
  std::string ck_file;
  int ck_bound = 7;
  ck->add_option("file", ck_file, "history JSON file")->required();
  ck->add_option("--bound", ck_bound, "transaction bound");

  // run
  auto* rn = app.add_subcommand("run", "replay a schedule script and analyze it");
  std::string rn_file;
  rn->add_option("file", rn_file, "schedule script JSON file")->required();

  // table
  auto* tb = app.add_subcommand("table", "blocking vs non-blocking comparison table");
  std::string tb_ns = "3,5,8";
  int tb_seeds = 25;
  tb->add_option("--n", tb_ns, "comma list of process counts");
  tb->add_option("--seeds", tb_seeds, "fuzz seeds behind the yes/no verdicts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (sc->parsed()) {
      if (!tmlab::scenario_registry().count(sc_name)) {
        std::cerr << "unknown scenario '" << sc_name << "'; available:\n";
        for (const auto& n : tmlab::scenario_names()) std::cerr << "  " << n << "\n";
        return 2;
      }
      tmlab::ScenarioReport r = tmlab::run_scenario(sc_name, sc_params);
      emit(to_text(r), to_json(r), as_json, out_path);
      return r.pass() ? 0 : 1;
    }

    if (fz->parsed()) {
      auto impl = tmlab::algo_from_string(fz_impl);
      if (!impl) {
        std::cerr << "unknown impl '" << fz_impl << "'\n";
        return 2;
      }
      fp.impl = *impl;
      if (!fz_checks.empty()) {
        fp.check_opacity = fp.check_dap = fp.check_progress = fp.check_metrics = false;
        std::stringstream ss(fz_checks);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
          if (tok == "opacity") fp.check_opacity = true;
          else if (tok == "dap") fp.check_dap = true;
          else if (tok == "strict-dap") { fp.check_dap = true; fp.dap_flavor = tmlab::DapFlavor::Strict; }
          else if (tok == "rw-dap") { fp.check_dap = true; fp.dap_flavor = tmlab::DapFlavor::Rw; }
          else if (tok == "weak-dap") { fp.check_dap = true; fp.dap_flavor = tmlab::DapFlavor::Weak; }
          else if (tok == "progress") fp.check_progress = true;
          else if (tok == "metrics" || tok == "stalls" || tok == "raw" || tok == "awar")
            fp.check_metrics = true;
          else {
            std::cerr << "unknown check '" << tok << "'\n";
            return 2;
          }
        }
      }
      tmlab::FuzzReport r = tmlab::fuzz(fp);
      emit(to_text(r), to_json(r), as_json, out_path);
      return r.pass() ? 0 : 1;
    }

    if (ck->parsed()) {
      std::ifstream f(ck_file);
      if (!f) {
        std::cerr << "cannot open " << ck_file << "\n";
        return 2;
      }
      tmlab::History h;
      try {
        nlohmann::json j;
        f >> j;
        h = tmlab::history_from_json(j);
      } catch (const std::exception& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
      }
      tmlab::CheckerOptions opt;
      opt.max_txns = ck_bound;
      tmlab::Verdict op = tmlab::check_opacity(h, opt);
      tmlab::Verdict ss = tmlab::check_strict_serializability(h, opt);
      if (op.undecided() || ss.undecided()) {
        std::cout << "undecided: " << (op.undecided() ? op.certificate : ss.certificate)
                  << "\n";
        return 3;
      }
      auto show = [&](const char* what, const tmlab::Verdict& v) {
        std::cout << what << ": " << (v.yes() ? "yes" : "no") << "\n";
        if (v.yes()) {
          std::cout << "  witness serialization:";
          for (tmlab::TxId t : v.witness_order) std::cout << " T" << t;
          for (const auto& [tx, c] : v.witness_commits)
            std::cout << "  (pending tryC of T" << tx << " completed as "
                      << (c ? "C)" : "A)");
          std::cout << "\n";
        } else {
          std::cout << "  certificate: " << v.certificate << "\n";
        }
      };
      if (as_json) {
        nlohmann::json j;
        j["opaque"] = op.yes();
        j["strictly_serializable"] = ss.yes();
        if (op.yes()) j["opacity_witness"] = op.witness_order;
        if (ss.yes()) j["ss_witness"] = ss.witness_order;
        emit("", j, true, out_path);
      } else {
        show("opaque", op);
        show("strictly serializable", ss);
      }
      return op.yes() ? 0 : 1;
    }

    if (rn->parsed()) {
      std::ifstream f(rn_file);
      if (!f) {
        std::cerr << "cannot open " << rn_file << "\n";
        return 2;
      }
      tmlab::ScheduleScript s;
      try {
        nlohmann::json j;
        f >> j;
        s = tmlab::script_from_json(j);
      } catch (const std::exception& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
      }
      tmlab::RunResult rr = tmlab::run_schedule(s);
      tmlab::AnalysisReport r = tmlab::analyze(rr.exec);
      emit(to_text(r), to_json(r), as_json, out_path);
      return 0;
    }

    if (tb->parsed()) {
      tmlab::TableReport r = tmlab::comparison_table(parse_int_list(tb_ns), tb_seeds);
      emit(to_text(r), to_json(r), as_json, out_path);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
