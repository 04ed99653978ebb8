// mecrelay: Monte Carlo runs, verification battery and single-instance solves
// for multi-hop MEC offloading.
//
//   mecrelay run    --config config/default.json --drops 2000 --out-dir out
//   mecrelay verify --verify-samples 100
//   mecrelay solve  --gains 1e-9,2e-9,1e-9 --gain-direct 1e-11 --gain-cross 1e-10 --tmax 0.5

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mecrelay/config.hpp"
#include "mecrelay/harness.hpp"
#include "mecrelay/oracle.hpp"
#include "mecrelay/scenario.hpp"
#include "mecrelay/schemes.hpp"
#include "mecrelay/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mecrelay;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kAuditFailure = 2, kVerificationFailure = 3 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> si_db;
  std::optional<std::string> common_set;
};

struct RunFlags {
  std::optional<std::size_t> drops;
  std::optional<std::string> tmax;
  std::optional<std::string> schemes;
  std::optional<std::string> out_dir;
  std::optional<unsigned> workers;
  bool oracle = false;
  bool write_drops = false;
  bool quiet = false;
};

struct VerifyFlags {
  std::size_t samples = 100;
  std::optional<std::size_t> hessian_points;
  std::optional<std::string> out_dir;
  bool json = false;
  bool inject_fault = false;
};

struct SolveFlags {
  std::string scenario_path;
  std::vector<double> gains;
  std::optional<double> gain_direct;
  std::optional<double> gain_cross;
  std::optional<double> gain_self;
  double data_bits = 1.25e6;
  double cycles_per_bit = 1750.0;
  double ue_speed = 1.25e9;
  std::optional<double> tmax;
  std::optional<std::string> schemes;
  bool json = false;
  bool oracle = false;
};

config::RunConfig load_config(const CommonFlags& f) {
  config::RunConfig cfg = f.config_path.empty() ? config::parse_run_config(json::object())
                                                : config::load_run_config(f.config_path);
  if (f.seed) cfg.seed = *f.seed;
  if (f.si_db) cfg.si_cancellation_db = *f.si_db;
  if (f.common_set) cfg.common_set = harness::parse_common_set(*f.common_set);
  return cfg;
}

/// Re-parses the echo so overrides get the same validation as file values.
config::RunConfig revalidate(const config::RunConfig& cfg) { return config::parse_run_config(config::to_json(cfg)); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

json energy_matrix(const harness::DropRecord& r) {
  json rows = json::array();
  for (const auto& row : r.energy) {
    json vals = json::array();
    for (double e : row) vals.push_back(std::isfinite(e) ? json(e) : json(nullptr));
    rows.push_back(vals);
  }
  return rows;
}

int cmd_run(const CommonFlags& common, const RunFlags& f) {
  config::RunConfig cfg = load_config(common);
  if (f.drops) cfg.drops = *f.drops;
  if (f.tmax) cfg.tmax_grid = config::parse_number_list(*f.tmax);
  if (f.schemes) cfg.schemes = config::parse_scheme_list(*f.schemes);
  if (f.out_dir) cfg.out_dir = *f.out_dir;
  if (f.workers) cfg.workers = *f.workers;
  if (f.oracle) cfg.oracle_mode = true;
  if (f.write_drops) cfg.write_drops = true;
  cfg = revalidate(cfg);

  const harness::ExperimentConfig exp = config::to_experiment(cfg);
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());

  harness::ProgressFn progress;
  if (!f.quiet) {
    progress = [](std::size_t done, std::size_t total) {
      if (done % 100 == 0 || done == total) std::fprintf(stderr, "\rdrops %zu/%zu", done, total);
      if (done == total) std::fputc('\n', stderr);
    };
  }
  const harness::ExperimentResult res = harness::run_experiment(exp, progress);

  std::ostringstream csv;
  harness::write_metrics_csv(csv, res.metrics);
  const fs::path dir(cfg.out_dir);
  write_text(dir / "metrics.csv", csv.str());

  json summary = {{"seed", cfg.seed},
                  {"config", config::to_json(cfg)},
                  {"audit_failures", res.audit_failures},
                  {"oracle_mismatches", res.oracle_mismatches},
                  {"shared_accepted", res.shared_accepted},
                  {"max_shared_residual", res.max_shared_residual}};
  json messages = json::array();
  for (const auto& r : res.records)
    for (const auto& m : r.audit_messages) messages.push_back(m);
  summary["audit_messages"] = messages;
  write_text(dir / "summary.json", summary.dump(2) + "\n");

  if (cfg.write_drops) {
    std::ofstream out(dir / "drops.ndjson", std::ios::binary);
    if (!out) throw IoError("cannot write drops.ndjson");
    const scenario::DropConfig dc = config::to_drop_config(cfg);
    json schemes = json::array();
    for (SchemeId id : cfg.schemes) schemes.push_back(std::string(scheme_token(id)));
    for (const auto& r : res.records) {
      json line = {{"drop", scenario::to_json(scenario::generate_drop(cfg.seed, r.index, dc))},
                   {"tmax_s", cfg.tmax_grid},
                   {"schemes", schemes},
                   {"energy_j", energy_matrix(r)}};
      out << line.dump() << '\n';
    }
  }

  if (res.audit_failures > 0) {
    std::cerr << "audit failures: " << res.audit_failures << "\n";
    for (const auto& m : messages) std::cerr << "  " << m.get<std::string>() << "\n";
    return kAuditFailure;
  }
  std::cout << "wrote " << (dir / "metrics.csv").string() << " (" << cfg.drops << " drops, "
            << cfg.tmax_grid.size() << " deadlines, " << cfg.schemes.size() << " schemes)\n";
  return kOk;
}

void print_verify_report(const verify::VerifyReport& rep) {
  std::cout << "solver vs grid oracle\n";
  std::cout << "  scheme   compared  feasible  feas_mismatch  value_mismatch  max_rel_dev\n";
  for (const auto& a : rep.agreement) {
    std::cout << "  " << std::left << std::setw(8) << scheme_token(a.scheme) << std::right << std::setw(9)
              << a.compared << std::setw(10) << a.feasible << std::setw(15) << a.feasibility_mismatches
              << std::setw(16) << a.value_mismatches << "  " << std::scientific << std::setprecision(3)
              << a.max_rel_deviation << std::defaultfloat << "\n";
  }
  if (!rep.hessian.empty()) {
    std::cout << "hessian PSD checks\n";
    for (const auto& h : rep.hessian) {
      std::cout << "  " << std::left << std::setw(18) << verify::objective_name(h.objective) << std::right
                << " points " << h.points << "  failures " << h.failures << "  worst min_eig/trace "
                << std::scientific << std::setprecision(3) << h.worst_ratio << std::defaultfloat << "\n";
    }
  }
  std::cout << "shared power residual: max " << std::scientific << std::setprecision(3) << rep.max_shared_residual
            << " over " << rep.shared_checked << " allocations\n";
  std::cout << "hd+hd marginal spread: max " << rep.max_kkt_spread << std::defaultfloat << " over "
            << rep.kkt_checked << " interior solutions\n";
  std::cout << (rep.passed ? "PASS" : "FAIL") << "\n";
}

int cmd_verify(const CommonFlags& common, const VerifyFlags& f) {
  const config::RunConfig cfg = revalidate(load_config(common));
  verify::VerifyOptions opts;
  opts.samples = f.samples;
  opts.hessian_points = f.hessian_points.value_or(f.samples);
  opts.seed = cfg.seed;
  opts.inject_fault = f.inject_fault;
  if (opts.samples < 1) throw config::ConfigError("--verify-samples must be >= 1");

  try {
    const verify::VerifyReport rep = verify::verify_or_throw(config::to_drop_config(cfg), opts);
    if (f.json)
      std::cout << verify::to_json(rep).dump(2) << "\n";
    else
      print_verify_report(rep);
    return kOk;
  } catch (const verify::VerificationFailure& e) {
    std::cerr << "verification failed: " << e.what() << "\n";
    std::cerr << "offending record (replay with `mecrelay solve --scenario FILE`):\n" << e.record().dump(2) << "\n";
    if (f.out_dir) {
      fs::create_directories(*f.out_dir);
      write_text(fs::path(*f.out_dir) / "verify_failure.json", e.record().dump(2) + "\n");
    }
    return kVerificationFailure;
  }
}

struct Instance {
  scenario::Drop drop;
  double tmax;
};

Instance instance_from_flags(const SolveFlags& f, const config::RunConfig& cfg) {
  if (!f.scenario_path.empty()) {
    std::ifstream in(f.scenario_path);
    if (!in) throw IoError("cannot open scenario file '" + f.scenario_path + "'");
    try {
      const json j = json::parse(in);
      Instance inst{scenario::drop_from_json(j.at("drop")), j.at("tmax_s").get<double>()};
      if (f.tmax) inst.tmax = *f.tmax;
      return inst;
    } catch (const json::exception& e) {
      throw config::ConfigError(f.scenario_path + ": " + e.what());
    }
  }
  if (f.gains.size() != 3) throw config::ConfigError("--gains needs three values g1,g2,g3 (or use --scenario)");
  if (!f.gain_direct) throw config::ConfigError("--gain-direct is required");
  if (!f.gain_cross) throw config::ConfigError("--gain-cross is required (R1 -> BS gain)");
  if (!f.tmax) throw config::ConfigError("--tmax is required");

  scenario::Drop d;
  d.data_bits = f.data_bits;
  d.cycles_per_bit = f.cycles_per_bit;
  d.ue_speed = f.ue_speed;
  d.server_speed = cfg.task.server_speed;
  d.gain_direct = *f.gain_direct;
  d.gains_three_hop = {f.gains[0], f.gains[1], f.gains[2]};
  d.gains_two_hop = {f.gains[0], *f.gain_cross};
  d.gain_cross = *f.gain_cross;
  d.gain_self = f.gain_self.value_or(schemes::si_gain_from_db(cfg.si_cancellation_db));
  return {d, *f.tmax};
}

json allocation_json(const Allocation& a) {
  return {{"scheme", std::string(scheme_token(a.scheme_id))},
          {"feasible", a.feasible},
          {"energy_j", a.feasible ? json(a.total_energy) : json(nullptr)},
          {"time_slots_s", a.time_slots},
          {"powers_w", a.powers},
          {"bandwidths_hz", a.bandwidths},
          {"comm_delay_s", a.comm_delay},
          {"processing_delay_s", a.processing_delay}};
}

void print_allocation(const Allocation& a, std::optional<double> oracle_energy) {
  std::cout << std::left << std::setw(8) << scheme_token(a.scheme_id) << std::right;
  if (!a.feasible) {
    std::cout << "  infeasible";
  } else {
    std::cout << "  energy " << std::scientific << std::setprecision(6) << a.total_energy << " J" << std::defaultfloat
              << "  delay " << a.processing_delay << " s";
  }
  if (oracle_energy) {
    std::cout << "  | oracle ";
    if (std::isfinite(*oracle_energy))
      std::cout << std::scientific << std::setprecision(6) << *oracle_energy << " J" << std::defaultfloat;
    else
      std::cout << "infeasible";
  }
  std::cout << "\n";
  if (!a.feasible) return;
  for (std::size_t i = 0; i < a.time_slots.size(); ++i) {
    std::cout << "    hop " << i + 1 << "  t " << std::scientific << std::setprecision(6) << a.time_slots[i]
              << " s  p " << a.powers[i] << " W  b " << a.bandwidths[i] << " Hz" << std::defaultfloat << "\n";
  }
}

int cmd_solve(const CommonFlags& common, const SolveFlags& f) {
  const config::RunConfig cfg = revalidate(load_config(common));
  const Instance inst = instance_from_flags(f, cfg);
  const std::vector<SchemeId> ids = f.schemes ? config::parse_scheme_list(*f.schemes) : cfg.schemes;
  const RadioParams radio = cfg.radio.to_params();
  const TaskSpec task = inst.drop.task(inst.tmax);

  json results = json::array();
  for (SchemeId id : ids) {
    Allocation a = Allocation::infeasible(id);
    std::optional<double> oracle_energy;
    if (id == SchemeId::Local) {
      a = schemes::baseline_local(task, inst.drop.ue_speed);
    } else {
      const ChannelSet ch = hop_count_of(id) == 1   ? inst.drop.direct_channels()
                            : hop_count_of(id) == 2 ? inst.drop.two_hop_channels()
                                                    : inst.drop.three_hop_channels();
      try {
        const Scenario sc = validate(radio, task, ch);
        a = schemes::solve(id, sc);
        if (f.oracle) {
          const auto rep = oracle::oracle_solve(id, sc);
          oracle_energy = rep.feasible() ? rep.value : std::numeric_limits<double>::infinity();
        }
      } catch (const ValidationError& e) {
        if (e.code() != ValidationErrorCode::DeadlineBelowComputeDelay) throw config::ConfigError(e.what());
        if (f.oracle) oracle_energy = std::numeric_limits<double>::infinity();
      }
    }
    if (f.json) {
      json r = allocation_json(a);
      if (oracle_energy) r["oracle_energy_j"] = std::isfinite(*oracle_energy) ? json(*oracle_energy) : json(nullptr);
      results.push_back(r);
    } else {
      print_allocation(a, oracle_energy);
    }
  }
  if (f.json) {
    std::cout << json{{"tmax_s", inst.tmax}, {"drop", scenario::to_json(inst.drop)}, {"results", results}}.dump(2)
              << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-optimal multi-hop MEC offloading: simulation, verification and single solves"};
  app.require_subcommand(1);

  CommonFlags common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON run configuration (defaults apply to missing keys)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "Base seed for drop generation");
    sub->add_option("--si-db", common.si_db, "Self-interference cancellation in dB");
    sub->add_option("--common-set", common.common_set, "Common success set: all | direct");
  };

  RunFlags run;
  CLI::App* run_cmd = app.add_subcommand("run", "Monte Carlo experiment, writes metrics.csv and summary.json");
  add_common(run_cmd);
  run_cmd->add_option("--drops", run.drops, "Number of random drops");
  run_cmd->add_option("--tmax", run.tmax, "Comma-separated deadlines in seconds");
  run_cmd->add_option("--schemes", run.schemes, "Comma-separated schemes: local,direct,hd2,unopt3,hdhd,hdfdo,hdfds");
  run_cmd->add_option("--out-dir", run.out_dir, "Output directory");
  run_cmd->add_option("--workers", run.workers, "Worker threads (0 = hardware concurrency)");
  run_cmd->add_flag("--oracle", run.oracle, "Cross-check every allocation against the grid oracle (slow)");
  run_cmd->add_flag("--write-drops", run.write_drops, "Also write drops.ndjson");
  run_cmd->add_flag("-q,--quiet", run.quiet, "No drop counter on stderr");

  VerifyFlags ver;
  CLI::App* verify_cmd = app.add_subcommand("verify", "Property battery: oracle agreement, Hessians, residuals");
  add_common(verify_cmd);
  verify_cmd->add_option("--verify-samples", ver.samples, "Random drops compared against the oracle");
  verify_cmd->add_option("--hessian-points", ver.hessian_points, "Feasible points per Hessian check (default: samples)");
  verify_cmd->add_option("--out-dir", ver.out_dir, "Where to write verify_failure.json on failure");
  verify_cmd->add_flag("--json", ver.json, "Machine-readable report");
  verify_cmd->add_flag("--inject-fault", ver.inject_fault, "Test hook: stretch one HD+HD slot by 5%")
      ->group("");

  SolveFlags sol;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve one instance and print the allocations");
  add_common(solve_cmd);
  solve_cmd->add_option("--scenario", sol.scenario_path, "Drop record JSON {\"drop\": ..., \"tmax_s\": ...}")
      ->check(CLI::ExistingFile);
  solve_cmd->add_option("--gains", sol.gains, "Three-hop gains g1,g2,g3 (linear)")->delimiter(',');
  solve_cmd->add_option("--gain-direct", sol.gain_direct, "UE -> BS gain");
  solve_cmd->add_option("--gain-cross", sol.gain_cross, "R1 -> BS gain (second hop of the 2-hop route)");
  solve_cmd->add_option("--gain-self", sol.gain_self, "Residual self-interference gain at R2");
  solve_cmd->add_option("--data-bits", sol.data_bits, "Task size D in bits");
  solve_cmd->add_option("--cycles-per-bit", sol.cycles_per_bit, "CPU cycles per bit");
  solve_cmd->add_option("--ue-speed", sol.ue_speed, "UE CPU speed in cycles/s");
  solve_cmd->add_option("--tmax", sol.tmax, "Deadline in seconds");
  solve_cmd->add_option("--schemes", sol.schemes, "Comma-separated schemes (default: all)");
  solve_cmd->add_flag("--json", sol.json, "Machine-readable output");
  solve_cmd->add_flag("--oracle", sol.oracle, "Append grid-oracle energies");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(common, run);
    if (*verify_cmd) return cmd_verify(common, ver);
    if (*solve_cmd) return cmd_solve(common, sol);
  } catch (const config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
