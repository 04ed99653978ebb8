#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "mecrelay/model.hpp"
#include "mecrelay/scenario.hpp"
#include "mecrelay/solver.hpp"

namespace mecrelay::verify {

/// Which relaying objective a Hessian check evaluates.
///   HdHd:  sum of three full-band hop energies over (t1, t2, t3)
///   HdFdo: hop 1 full band plus hops 2, 3 on split bands over (t1, t2, b2, b3)
///   HdFds: hop 1 plus the coupled FD-Shared pair over (t1, t2)
enum class Objective { HdHd, HdFdo, HdFds };

std::string objective_name(Objective o);

struct HessianStats {
  Objective objective = Objective::HdHd;
  std::size_t points = 0;
  std::size_t failures = 0;
  double worst_ratio = 0.0;  // min over points of lambda_min / trace
};

/// Numerical Hessian (central differences, relative steps, long double) of an
/// objective at x. Rows/cols follow the variable order documented on Objective.
std::vector<std::vector<double>> numerical_hessian(Objective o, const Scenario& scenario,
                                                   const std::vector<double>& x);

/// Minimum eigenvalue and trace of a symmetric matrix.
struct Spectrum {
  double min_eigenvalue;
  double trace;
};
Spectrum spectrum(const std::vector<std::vector<double>>& h);

/// Draws feasible points for `o` from random drops until `points` are certified.
/// A point passes when lambda_min >= -psd_tol * trace.
HessianStats certify_convexity(Objective o, std::size_t points, std::uint64_t seed,
                               const scenario::DropConfig& cfg, double psd_tol = 1e-6);

struct SchemeAgreement {
  SchemeId scheme = SchemeId::Direct;
  std::size_t compared = 0;
  std::size_t feasible = 0;
  std::size_t feasibility_mismatches = 0;
  std::size_t value_mismatches = 0;
  std::size_t audit_failures = 0;
  double max_rel_deviation = 0.0;
};

struct VerifyOptions {
  std::size_t samples = 100;
  std::size_t hessian_points = 100;
  std::uint64_t seed = 1;
  double tmax_lo = 0.1;
  double tmax_hi = 1.0;
  double energy_rel_tol = 1e-4;
  double psd_tol = 1e-6;
  double residual_tol = 1e-9;
  double kkt_rel_tol = 1e-6;
  solver::GridOptions grid;
  /// Test hook: stretch the first HD+HD slot by 5% before auditing.
  bool inject_fault = false;
};

struct VerifyReport {
  std::vector<SchemeAgreement> agreement;
  std::vector<HessianStats> hessian;
  double max_shared_residual = 0.0;
  std::size_t shared_checked = 0;
  double max_kkt_spread = 0.0;  // relative spread of HD+HD marginal energies, interior solutions only
  std::size_t kkt_checked = 0;
  bool passed = true;
  std::vector<std::string> failures;
  nlohmann::json first_failure;  // drop record plus deadline, null when passed
};

nlohmann::json to_json(const VerifyReport& r);

class VerificationFailure : public std::runtime_error {
 public:
  VerificationFailure(const std::string& what, nlohmann::json record)
      : std::runtime_error(what), record_(std::move(record)) {}
  const nlohmann::json& record() const noexcept { return record_; }

 private:
  nlohmann::json record_;
};

/// Random drop and deadline for verification sample i.
struct Sample {
  scenario::Drop drop;
  double tmax;
};
Sample verification_sample(std::uint64_t seed, std::size_t i, const scenario::DropConfig& cfg,
                           double tmax_lo, double tmax_hi);

/// Relative spread (max - min) / |mean| of per-hop marginal energies
/// d(t p)/dt at an HD+HD allocation, or NaN when a hop sits at its P_max floor.
double hdhd_marginal_spread(const Allocation& a, const Scenario& scenario);

VerifyReport run_verification(const scenario::DropConfig& cfg, const VerifyOptions& opts);

/// Runs the battery and throws VerificationFailure (carrying the first failing
/// drop) unless every check passed.
VerifyReport verify_or_throw(const scenario::DropConfig& cfg, const VerifyOptions& opts);

}  // namespace mecrelay::verify
