#include "mecrelay/harness.hpp"

#include <algorithm>
#include <atomic>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mecrelay/link.hpp"
#include "mecrelay/oracle.hpp"
#include "mecrelay/schemes.hpp"

namespace mecrelay::harness {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxAuditMessages = 8;
constexpr double kOracleRelTol = 1e-4;
}  // namespace

void check(const ExperimentConfig& cfg) {
  if (cfg.drops < 1) throw std::invalid_argument("experiment: drops must be >= 1");
  if (cfg.tmax_grid.empty()) throw std::invalid_argument("experiment: tmax grid is empty");
  for (double t : cfg.tmax_grid) {
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("experiment: tmax values must be positive");
  }
  if (!std::is_sorted(cfg.tmax_grid.begin(), cfg.tmax_grid.end()))
    throw std::invalid_argument("experiment: tmax grid must be ascending");
  if (cfg.schemes.empty()) throw std::invalid_argument("experiment: no schemes enabled");
  scenario::check(cfg.drop);
  // Surfaces non-positive radio constants before any drop is evaluated.
  validate(cfg.drop.radio, TaskSpec{1.0, 1.0, 1.0, 1e9}, ChannelSet::direct(1.0));
}

const MetricsRow& MetricsTable::find(double tmax, SchemeId scheme) const {
  for (const auto& r : rows) {
    if (r.scheme == scheme && std::abs(r.tmax - tmax) <= 1e-12 * std::max(1.0, tmax)) return r;
  }
  throw std::out_of_range("MetricsTable: no row for requested tmax/scheme");
}

DropRecord evaluate_drop(const scenario::Drop& drop, const ExperimentConfig& cfg) {
  DropRecord rec;
  rec.index = drop.index;
  rec.energy.assign(cfg.tmax_grid.size(), std::vector<double>(cfg.schemes.size(), kInf));
  const RadioParams& radio = cfg.drop.radio;

  auto note = [&](SchemeId id, double tmax, const std::vector<std::string>& issues) {
    if (issues.empty()) return;
    ++rec.audit_failures;
    if (rec.audit_messages.size() < kMaxAuditMessages) {
      std::ostringstream os;
      os << "drop " << drop.index << " tmax " << tmax << " " << scheme_token(id) << ": " << issues.front();
      rec.audit_messages.push_back(os.str());
    }
  };

  for (std::size_t ti = 0; ti < cfg.tmax_grid.size(); ++ti) {
    const double tmax = cfg.tmax_grid[ti];
    const TaskSpec task = drop.task(tmax);
    const bool offload_possible = task.compute_delay() < tmax;

    for (std::size_t si = 0; si < cfg.schemes.size(); ++si) {
      const SchemeId id = cfg.schemes[si];
      if (id == SchemeId::Local) {
        const Allocation a = schemes::baseline_local(task, drop.ue_speed);
        if (a.feasible && a.processing_delay > tmax) note(id, tmax, {"local delay exceeds deadline"});
        rec.energy[ti][si] = a.feasible ? 0.0 : kInf;
        continue;
      }
      if (!offload_possible) continue;

      const ChannelSet channels = hop_count_of(id) == 1   ? drop.direct_channels()
                                  : hop_count_of(id) == 2 ? drop.two_hop_channels()
                                                          : drop.three_hop_channels();
      const Scenario sc = validate(radio, task, channels);
      const Allocation a = schemes::solve(id, sc);
      note(id, tmax, audit_allocation(a, sc));
      if (cfg.oracle_check && id != SchemeId::ThreeHopUnopt) {
        const solver::SolveReport ref = oracle::oracle_solve(id, sc);
        const bool agree = ref.feasible() == a.feasible &&
                           (!a.feasible || std::abs(ref.value - a.total_energy) <= kOracleRelTol * ref.value);
        if (!agree) {
          ++rec.oracle_mismatches;
          std::ostringstream os;
          os << "oracle disagrees: solver " << a.total_energy << " J, grid " << ref.value << " J";
          note(id, tmax, {os.str()});
        }
      }
      if (!a.feasible) continue;
      rec.energy[ti][si] = a.total_energy;

      if (id == SchemeId::HDFDS) {
        const double r = link::fd_shared_residual({a.powers[1], a.powers[2]}, a.time_slots[1], a.bandwidths[1],
                                                  task.data_bits, channels, radio);
        rec.max_shared_residual = std::max(rec.max_shared_residual, r);
        ++rec.shared_accepted;
      }
    }
  }
  return rec;
}

std::vector<std::size_t> common_success_set(std::span<const std::vector<bool>> success_by_scheme) {
  if (success_by_scheme.size() < 2) throw std::invalid_argument("common_success_set: need at least two schemes");
  const std::size_t n = success_by_scheme.front().size();
  for (const auto& v : success_by_scheme) {
    if (v.size() != n) throw std::invalid_argument("common_success_set: length mismatch");
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    bool all = true;
    for (const auto& v : success_by_scheme) all = all && v[i];
    if (all) out.push_back(i);
  }
  return out;
}

MetricsTable aggregate(std::span<const DropRecord> records, const ExperimentConfig& cfg) {
  MetricsTable table;
  table.tmax_grid = cfg.tmax_grid;
  table.schemes = cfg.schemes;
  const std::size_t ns = cfg.schemes.size();

  // Schemes whose joint success defines the common population.
  std::vector<std::size_t> defining;
  for (std::size_t s = 0; s < ns; ++s) {
    const SchemeId id = cfg.schemes[s];
    if (is_relaying(id) || (cfg.common_set == CommonSetPolicy::Direct && id == SchemeId::Direct))
      defining.push_back(s);
  }
  const std::size_t relaying_count = std::count_if(cfg.schemes.begin(), cfg.schemes.end(), is_relaying);
  const bool common_defined = relaying_count >= 2 &&
                              (cfg.common_set == CommonSetPolicy::AllRelaying ||
                               std::find(cfg.schemes.begin(), cfg.schemes.end(), SchemeId::Direct) != cfg.schemes.end());

  for (std::size_t t = 0; t < cfg.tmax_grid.size(); ++t) {
    std::vector<std::size_t> common;
    if (common_defined) {
      std::vector<std::vector<bool>> flags;
      for (std::size_t s : defining) {
        std::vector<bool> f(records.size());
        for (std::size_t i = 0; i < records.size(); ++i) f[i] = records[i].success(t, s);
        flags.push_back(std::move(f));
      }
      common = common_success_set(flags);
    }

    for (std::size_t s = 0; s < ns; ++s) {
      const SchemeId id = cfg.schemes[s];
      MetricsRow row;
      row.tmax = cfg.tmax_grid[t];
      row.scheme = id;
      row.drop_count = records.size();
      double energy_sum = 0.0;
      for (const auto& r : records) {
        if (!r.success(t, s)) continue;
        ++row.success_count;
        energy_sum += r.energy[t][s];
      }
      row.success_probability = static_cast<double>(row.success_count) / static_cast<double>(row.drop_count);
      const bool has_energy = id != SchemeId::Local;
      row.mean_energy_success = (has_energy && row.success_count > 0) ? energy_sum / row.success_count : kNaN;

      const bool in_common = std::find(defining.begin(), defining.end(), s) != defining.end();
      row.mean_energy_common = kNaN;
      if (common_defined && in_common && !common.empty()) {
        double sum = 0.0;
        for (std::size_t i : common) sum += records[i].energy[t][s];
        row.mean_energy_common = sum / static_cast<double>(common.size());
        row.common_count = common.size();
      }
      table.rows.push_back(row);
    }
  }
  return table;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress) {
  check(cfg);
  ExperimentResult result;
  result.records.resize(cfg.drops);

  unsigned workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, cfg.drops));

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    try {
      for (std::size_t i = next++; i < cfg.drops; i = next++) {
        const scenario::Drop drop = scenario::generate_drop(cfg.seed, i, cfg.drop);
        result.records[i] = evaluate_drop(drop, cfg);
        const std::size_t n = ++done;
        if (progress) {
          std::lock_guard lock(progress_mutex);
          progress(n, cfg.drops);
        }
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = cfg.drops;
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  for (const auto& r : result.records) {
    result.audit_failures += r.audit_failures;
    result.max_shared_residual = std::max(result.max_shared_residual, r.max_shared_residual);
    result.shared_accepted += r.shared_accepted;
    result.oracle_mismatches += r.oracle_mismatches;
  }
  result.metrics = aggregate(result.records, cfg);
  return result;
}

namespace {

void put_number(std::ostream& os, double v) {
  if (std::isnan(v)) {
    os << "nan";
    return;
  }
  std::ostringstream tmp;
  tmp << std::setprecision(17) << v;
  os << tmp.str();
}

}  // namespace

void write_metrics_csv(std::ostream& os, const MetricsTable& table) {
  os << kMetricsSchemaTag << '\n';
  os << "tmax_s,scheme,drop_count,success_count,success_probability,mean_energy_success_j,"
        "mean_energy_common_j,common_count\n";
  for (const auto& r : table.rows) {
    put_number(os, r.tmax);
    os << ',' << scheme_token(r.scheme) << ',' << r.drop_count << ',' << r.success_count << ',';
    put_number(os, r.success_probability);
    os << ',';
    put_number(os, r.mean_energy_success);
    os << ',';
    put_number(os, r.mean_energy_common);
    os << ',' << r.common_count << '\n';
  }
}

std::string common_set_token(CommonSetPolicy p) {
  return p == CommonSetPolicy::Direct ? "direct" : "all";
}

CommonSetPolicy parse_common_set(const std::string& token) {
  if (token == "all") return CommonSetPolicy::AllRelaying;
  if (token == "direct") return CommonSetPolicy::Direct;
  throw std::invalid_argument("common_set must be 'all' or 'direct' (got '" + token + "')");
}

}  // namespace mecrelay::harness
