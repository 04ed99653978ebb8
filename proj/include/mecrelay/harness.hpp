#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mecrelay/model.hpp"
#include "mecrelay/scenario.hpp"

namespace mecrelay::harness {

/// Which drops define the "common success" population for the normalized energy.
enum class CommonSetPolicy {
  AllRelaying,  // every enabled relaying scheme succeeds
  Direct,       // direct offloading succeeds, and so does every enabled relaying scheme
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::size_t drops = 20000;
  std::vector<double> tmax_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<SchemeId> schemes{std::begin(kAllSchemes), std::end(kAllSchemes)};
  scenario::DropConfig drop;
  CommonSetPolicy common_set = CommonSetPolicy::AllRelaying;
  unsigned workers = 0;  // 0 = hardware concurrency
  bool oracle_check = false;  // re-solve every allocation with the grid oracle (slow)
};

/// Throws std::invalid_argument for an unusable experiment configuration.
void check(const ExperimentConfig& cfg);

/// Per-drop outcome: energy[t][s] for tmax_grid[t] and schemes[s]; +inf marks a
/// failed drop. Local computing reports 0 J on success.
struct DropRecord {
  std::uint64_t index = 0;
  std::vector<std::vector<double>> energy;
  std::size_t audit_failures = 0;
  std::vector<std::string> audit_messages;
  double max_shared_residual = 0.0;  // FD-Shared power back-substitution, over accepted allocations
  std::size_t shared_accepted = 0;
  std::size_t oracle_mismatches = 0;

  bool success(std::size_t t, std::size_t s) const { return std::isfinite(energy[t][s]); }
};

struct MetricsRow {
  double tmax = 0.0;
  SchemeId scheme = SchemeId::Local;
  std::size_t drop_count = 0;
  std::size_t success_count = 0;
  double success_probability = 0.0;
  double mean_energy_success = 0.0;  // NaN when undefined
  double mean_energy_common = 0.0;   // NaN when undefined
  std::size_t common_count = 0;
};

struct MetricsTable {
  std::vector<double> tmax_grid;
  std::vector<SchemeId> schemes;
  std::vector<MetricsRow> rows;  // tmax-major

  const MetricsRow& at(std::size_t t, std::size_t s) const { return rows[t * schemes.size() + s]; }
  /// Row lookup by value; throws std::out_of_range if absent.
  const MetricsRow& find(double tmax, SchemeId scheme) const;
};

struct ExperimentResult {
  MetricsTable metrics;
  std::vector<DropRecord> records;
  std::size_t audit_failures = 0;
  double max_shared_residual = 0.0;
  std::size_t shared_accepted = 0;
  std::size_t oracle_mismatches = 0;
};

/// Solves every enabled scheme for one drop at every deadline in the grid and
/// audits each allocation.
DropRecord evaluate_drop(const scenario::Drop& drop, const ExperimentConfig& cfg);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Deterministic given cfg: drops are generated from (seed, index) and the
/// aggregation runs in index order regardless of worker count.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = {});

/// Indices where every listed success vector is true. Needs at least two vectors
/// of equal length (std::invalid_argument otherwise).
std::vector<std::size_t> common_success_set(std::span<const std::vector<bool>> success_by_scheme);

MetricsTable aggregate(std::span<const DropRecord> records, const ExperimentConfig& cfg);

inline constexpr const char* kMetricsSchemaTag = "# mecrelay-metrics v1";

/// CSV with a schema tag line, a header row, and one row per (tmax, scheme).
void write_metrics_csv(std::ostream& os, const MetricsTable& table);

std::string common_set_token(CommonSetPolicy p);
CommonSetPolicy parse_common_set(const std::string& token);

}  // namespace mecrelay::harness
