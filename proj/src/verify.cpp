#include "mecrelay/verify.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mecrelay/link.hpp"
#include "mecrelay/oracle.hpp"
#include "mecrelay/schemes.hpp"

namespace mecrelay::verify {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr long double kInfL = std::numeric_limits<long double>::infinity();
constexpr long double kLn2 = 0.693147180559945309417232121458176568L;
constexpr long double kRelStep = 1e-4L;

// Energy of one hop with its own band: t * (b N0 / g) * (2^(D/(t b)) - 1).
long double hop_energy(long double t, long double b, long double d, long double g, long double n0) {
  if (!(t > 0) || !(b > 0)) return kInfL;
  return t * b * n0 / g * std::expm1(kLn2 * d / (t * b));
}

// Slot-times-powers of the two FD-Shared hops over one slot t.
long double shared_energy(long double t, long double b, long double d, const ChannelSet& ch, long double n0) {
  if (!(t > 0)) return kInfL;
  const long double gamma = std::expm1(kLn2 * d / (t * b));
  const long double g2 = ch.hop_gains[1], g3 = ch.hop_gains[2];
  const long double gs = ch.self_interference_gain, gc = ch.cross_interference_gain;
  const long double det = 1.0L - gs * gc * gamma * gamma / (g2 * g3);
  if (!(det > 0)) return kInfL;
  const long double k = b * n0;
  const long double p2 = k * gamma / g2 * (1.0L + gs * gamma / g3) / det;
  const long double p3 = k * gamma / g3 * (1.0L + gc * gamma / g2) / det;
  return t * (p2 + p3);
}

long double evaluate(Objective o, const Scenario& s, const std::vector<long double>& x) {
  const RadioParams& rp = s.params();
  const long double n0 = static_cast<long double>(rp.noise_psd) + rp.background_interference_psd;
  const long double b = rp.bandwidth_max;
  const long double d = s.task().data_bits;
  const auto& g = s.channels().hop_gains;
  switch (o) {
    case Objective::HdHd:
      return hop_energy(x[0], b, d, g[0], n0) + hop_energy(x[1], b, d, g[1], n0) + hop_energy(x[2], b, d, g[2], n0);
    case Objective::HdFdo:
      return hop_energy(x[0], b, d, g[0], n0) + hop_energy(x[1], x[2], d, g[1], n0) +
             hop_energy(x[1], x[3], d, g[2], n0);
    case Objective::HdFds:
      return hop_energy(x[0], b, d, g[0], n0) + shared_energy(x[1], b, d, s.channels(), n0);
  }
  return kInfL;
}

// Smallest value in (0, hi] satisfying a monotone predicate (false below, true above).
template <class Pred>
double smallest_true(Pred ok, double hi) {
  if (!ok(hi)) return kNaN;
  double lo = 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

const ChannelSet& three_hop(const Scenario& s) { return s.channels(); }

// Random feasible point of the objective's problem, or empty when the drop has none.
std::vector<double> feasible_point(Objective o, const Scenario& s, scenario::DropRng& rng) {
  const RadioParams& rp = s.params();
  const double bmax = rp.bandwidth_max;
  const double d = s.task().data_bits;
  const double budget = s.budget();
  const auto& g = three_hop(s).hop_gains;
  const double lb1 = link::min_slot_hd(bmax, d, g[0], rp);

  switch (o) {
    case Objective::HdHd: {
      const double lb[3] = {lb1, link::min_slot_hd(bmax, d, g[1], rp), link::min_slot_hd(bmax, d, g[2], rp)};
      const double slack = budget - lb[0] - lb[1] - lb[2];
      if (!(slack > 0.0)) return {};
      double w[4], sum = 0.0;
      for (double& wi : w) sum += (wi = rng.uniform(0.05, 1.0));
      return {lb[0] + slack * w[0] / sum, lb[1] + slack * w[1] / sum, lb[2] + slack * w[2] / sum};
    }
    case Objective::HdFdo: {
      auto fits = [&](double tau) {
        return link::min_bandwidth_hd(tau, d, g[1], rp) + link::min_bandwidth_hd(tau, d, g[2], rp) <= bmax;
      };
      if (!(budget - lb1 > 0.0)) return {};
      const double tau_min = smallest_true(fits, budget - lb1);
      if (std::isnan(tau_min) || !(budget - lb1 - tau_min > 0.0)) return {};
      const double t1 = lb1 + rng.uniform(0.02, 0.98) * (budget - tau_min - lb1);
      const double t2 = tau_min + rng.uniform(0.02, 1.0) * (budget - t1 - tau_min);
      const double bmin2 = link::min_bandwidth_hd(t2, d, g[1], rp);
      const double bmin3 = link::min_bandwidth_hd(t2, d, g[2], rp);
      const double b2 = bmin2 + rng.uniform(0.02, 0.98) * (bmax - bmin3 - bmin2);
      const double b3 = bmin3 + rng.uniform(0.02, 1.0) * (bmax - b2 - bmin3);
      return {t1, t2, b2, b3};
    }
    case Objective::HdFds: {
      auto fits = [&](double tau) {
        const auto p = link::fd_shared_powers(tau, bmax, d, s.channels(), rp);
        return p && std::max(p->p2, p->p3) <= rp.power_max;
      };
      if (!(budget - lb1 > 0.0)) return {};
      const double tau_min = smallest_true(fits, budget - lb1);
      if (std::isnan(tau_min) || !(budget - lb1 - tau_min > 0.0)) return {};
      const double t1 = lb1 + rng.uniform(0.02, 0.98) * (budget - tau_min - lb1);
      const double t2 = tau_min + rng.uniform(0.02, 1.0) * (budget - t1 - tau_min);
      return {t1, t2};
    }
  }
  return {};
}

json failure_record(const Sample& smp, SchemeId id, const std::string& reason) {
  return {{"drop", scenario::to_json(smp.drop)},
          {"tmax_s", smp.tmax},
          {"scheme", std::string(scheme_token(id))},
          {"reason", reason}};
}

constexpr SchemeId kCompared[] = {SchemeId::Direct, SchemeId::TwoHopHD, SchemeId::ThreeHopUnopt,
                                  SchemeId::HDHD,   SchemeId::HDFDO,    SchemeId::HDFDS};

ChannelSet channels_for(SchemeId id, const scenario::Drop& drop) {
  switch (hop_count_of(id)) {
    case 1: return drop.direct_channels();
    case 2: return drop.two_hop_channels();
    default: return drop.three_hop_channels();
  }
}

}  // namespace

std::string objective_name(Objective o) {
  switch (o) {
    case Objective::HdHd: return "hd_hd";
    case Objective::HdFdo: return "hd_fd_orthogonal";
    case Objective::HdFds: return "hd_fd_shared";
  }
  return "?";
}

std::vector<std::vector<double>> numerical_hessian(Objective o, const Scenario& s, const std::vector<double>& x) {
  // Differentiates in relative coordinates y_i = x_i / x0_i, which is a
  // congruence of the plain Hessian and so preserves its inertia.
  const std::size_t n = x.size();
  std::vector<long double> base(x.begin(), x.end());
  auto f = [&](std::size_t i, int si, std::size_t j, int sj) {
    std::vector<long double> y = base;
    y[i] *= 1.0L + si * kRelStep;
    y[j] *= 1.0L + sj * kRelStep;
    return evaluate(o, s, y);
  };
  const long double f0 = evaluate(o, s, base);
  const long double h2 = kRelStep * kRelStep;
  std::vector<std::vector<double>> h(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<long double> up = base, dn = base;
    up[i] *= 1.0L + kRelStep;
    dn[i] *= 1.0L - kRelStep;
    h[i][i] = static_cast<double>((evaluate(o, s, up) - 2.0L * f0 + evaluate(o, s, dn)) / h2);
    for (std::size_t j = 0; j < i; ++j) {
      const long double v = (f(i, 1, j, 1) - f(i, 1, j, -1) - f(i, -1, j, 1) + f(i, -1, j, -1)) / (4.0L * h2);
      h[i][j] = h[j][i] = static_cast<double>(v);
    }
  }
  return h;
}

Spectrum spectrum(const std::vector<std::vector<double>>& h) {
  const auto n = static_cast<Eigen::Index>(h.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = h[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), m.trace()};
}

Sample verification_sample(std::uint64_t seed, std::size_t i, const scenario::DropConfig& cfg, double tmax_lo,
                           double tmax_hi) {
  Sample smp{scenario::generate_drop(seed, i, cfg), 0.0};
  scenario::DropRng rng(seed ^ 0xa5a5a5a5f00dULL, i);
  smp.tmax = rng.uniform(tmax_lo, tmax_hi);
  return smp;
}

HessianStats certify_convexity(Objective o, std::size_t points, std::uint64_t seed, const scenario::DropConfig& cfg,
                               double psd_tol) {
  HessianStats st;
  st.objective = o;
  st.worst_ratio = std::numeric_limits<double>::infinity();
  const std::uint64_t stream = seed + 0x100 * (static_cast<std::uint64_t>(o) + 1);
  const std::size_t max_attempts = 200 * points + 1000;
  for (std::size_t i = 0; st.points < points; ++i) {
    if (i >= max_attempts) throw std::runtime_error("certify_convexity: too few feasible drops");
    const Sample smp = verification_sample(stream, i, cfg, 0.1, 1.0);
    const TaskSpec task = smp.drop.task(smp.tmax);
    if (!(task.comm_budget() > 0.0)) continue;
    const Scenario sc = validate(cfg.radio, task, smp.drop.three_hop_channels());
    scenario::DropRng rng(stream ^ 0x77ULL, i);
    const std::vector<double> x = feasible_point(o, sc, rng);
    if (x.empty()) continue;
    const Spectrum sp = spectrum(numerical_hessian(o, sc, x));
    const double ratio = sp.min_eigenvalue / sp.trace;
    st.worst_ratio = std::min(st.worst_ratio, ratio);
    if (!(sp.min_eigenvalue >= -psd_tol * sp.trace)) ++st.failures;
    ++st.points;
  }
  return st;
}

double hdhd_marginal_spread(const Allocation& a, const Scenario& s) {
  const RadioParams& rp = s.params();
  const long double n0 = static_cast<long double>(rp.noise_psd) + rp.background_interference_psd;
  const double d = s.task().data_bits;
  const auto& g = s.channels().hop_gains;
  long double m[3];
  for (std::size_t i = 0; i < 3; ++i) {
    const double t = a.time_slots[i];
    const double lb = link::min_slot_hd(rp.bandwidth_max, d, g[i], rp);
    if (t <= lb * (1.0 + 1e-7)) return kNaN;
    const long double h = 1e-6L * t;
    m[i] = (hop_energy(t + h, rp.bandwidth_max, d, g[i], n0) - hop_energy(t - h, rp.bandwidth_max, d, g[i], n0)) /
           (2.0L * h);
  }
  const long double lo = std::min({m[0], m[1], m[2]});
  const long double hi = std::max({m[0], m[1], m[2]});
  const long double mean = (m[0] + m[1] + m[2]) / 3.0L;
  return static_cast<double>((hi - lo) / std::abs(mean));
}

VerifyReport run_verification(const scenario::DropConfig& cfg, const VerifyOptions& opts) {
  if (opts.samples < 1) throw std::invalid_argument("verify: samples must be >= 1");
  if (!(opts.tmax_lo > 0.0) || !(opts.tmax_hi >= opts.tmax_lo))
    throw std::invalid_argument("verify: bad deadline range");
  scenario::check(cfg);

  VerifyReport rep;
  auto fail = [&](const Sample& smp, SchemeId id, const std::string& reason) {
    rep.passed = false;
    std::ostringstream os;
    os << "drop " << smp.drop.index << " tmax " << smp.tmax << " " << scheme_token(id) << ": " << reason;
    rep.failures.push_back(os.str());
    if (rep.first_failure.is_null()) rep.first_failure = failure_record(smp, id, reason);
  };

  for (SchemeId id : kCompared) rep.agreement.push_back({id});

  // Draws until `samples` drops leave a positive communication budget.
  std::size_t used = 0;
  for (std::size_t i = 0; used < opts.samples; ++i) {
    if (i >= 100 * opts.samples + 1000) throw std::runtime_error("verify: deadline range leaves no communication budget");
    const Sample smp = verification_sample(opts.seed, i, cfg, opts.tmax_lo, opts.tmax_hi);
    const TaskSpec task = smp.drop.task(smp.tmax);
    if (!(task.comm_budget() > 0.0)) continue;
    ++used;

    for (std::size_t k = 0; k < std::size(kCompared); ++k) {
      const SchemeId id = kCompared[k];
      SchemeAgreement& ag = rep.agreement[k];
      const ChannelSet ch = channels_for(id, smp.drop);
      const Scenario sc = validate(cfg.radio, task, ch);

      Allocation a = schemes::solve(id, sc);
      if (opts.inject_fault && id == SchemeId::HDHD && a.feasible) {
        a.time_slots[0] *= 1.05;
        a.comm_delay = a.time_slots[0] + a.time_slots[1] + a.time_slots[2];
        a.processing_delay = a.comm_delay + task.compute_delay();
        a.total_energy = link::energy_of(a.time_slots, a.powers);
      }
      const auto issues = audit_allocation(a, sc);
      if (!issues.empty()) {
        ++ag.audit_failures;
        fail(smp, id, "audit: " + issues.front());
      }

      const solver::SolveReport ref = oracle::oracle_solve(id, sc, opts.grid);
      ++ag.compared;
      if (a.feasible) ++ag.feasible;
      if (ref.feasible() != a.feasible) {
        ++ag.feasibility_mismatches;
        fail(smp, id, a.feasible ? "solver feasible, oracle infeasible" : "solver infeasible, oracle feasible");
        continue;
      }
      if (!a.feasible) continue;
      const double dev = std::abs(a.total_energy - ref.value) / ref.value;
      ag.max_rel_deviation = std::max(ag.max_rel_deviation, dev);
      if (!(dev <= opts.energy_rel_tol)) {
        ++ag.value_mismatches;
        std::ostringstream os;
        os << "energy " << a.total_energy << " J vs oracle " << ref.value << " J";
        fail(smp, id, os.str());
      }

      if (id == SchemeId::HDFDS) {
        const double r = link::fd_shared_residual({a.powers[1], a.powers[2]}, a.time_slots[1], a.bandwidths[1],
                                                  task.data_bits, ch, cfg.radio);
        rep.max_shared_residual = std::max(rep.max_shared_residual, r);
        ++rep.shared_checked;
        if (!(r < opts.residual_tol)) fail(smp, id, "shared power residual " + std::to_string(r));
      }
      if (id == SchemeId::HDHD) {
        const double spread = hdhd_marginal_spread(a, sc);
        if (!std::isnan(spread)) {
          ++rep.kkt_checked;
          rep.max_kkt_spread = std::max(rep.max_kkt_spread, spread);
          if (!(spread <= opts.kkt_rel_tol)) fail(smp, id, "marginal energies differ by " + std::to_string(spread));
        }
      }
    }
  }

  if (opts.hessian_points > 0) {
    for (Objective o : {Objective::HdHd, Objective::HdFdo, Objective::HdFds}) {
      const HessianStats st = certify_convexity(o, opts.hessian_points, opts.seed, cfg, opts.psd_tol);
      if (st.failures > 0) {
        rep.passed = false;
        rep.failures.push_back(objective_name(o) + ": " + std::to_string(st.failures) + " non-PSD Hessians");
      }
      rep.hessian.push_back(st);
    }
  }
  return rep;
}

VerifyReport verify_or_throw(const scenario::DropConfig& cfg, const VerifyOptions& opts) {
  VerifyReport rep = run_verification(cfg, opts);
  if (!rep.passed) {
    throw VerificationFailure(rep.failures.empty() ? "verification failed" : rep.failures.front(),
                              rep.first_failure);
  }
  return rep;
}

json to_json(const VerifyReport& r) {
  json agreement = json::array();
  for (const auto& a : r.agreement) {
    agreement.push_back({{"scheme", std::string(scheme_token(a.scheme))},
                         {"compared", a.compared},
                         {"feasible", a.feasible},
                         {"feasibility_mismatches", a.feasibility_mismatches},
                         {"value_mismatches", a.value_mismatches},
                         {"audit_failures", a.audit_failures},
                         {"max_rel_deviation", a.max_rel_deviation}});
  }
  json hessian = json::array();
  for (const auto& h : r.hessian) {
    hessian.push_back({{"objective", objective_name(h.objective)},
                       {"points", h.points},
                       {"failures", h.failures},
                       {"worst_min_eig_over_trace", h.worst_ratio}});
  }
  return {{"passed", r.passed},
          {"agreement", agreement},
          {"hessian", hessian},
          {"max_shared_residual", r.max_shared_residual},
          {"shared_checked", r.shared_checked},
          {"max_kkt_spread", r.max_kkt_spread},
          {"kkt_checked", r.kkt_checked},
          {"failures", r.failures},
          {"first_failure", r.first_failure}};
}

}  // namespace mecrelay::verify
