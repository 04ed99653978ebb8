#include "mecrelay/schemes.hpp"

#include <cmath>
#include <stdexcept>

#include "mecrelay/link.hpp"
#include "mecrelay/solver.hpp"

namespace mecrelay::schemes {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_hops(const Scenario& s, std::size_t n, const char* who) {
  if (s.channels().hop_count() != n)
    throw std::invalid_argument(std::string(who) + ": scenario has the wrong hop count");
}

Allocation finish(SchemeId id, const Scenario& s, std::vector<double> slots,
                  std::vector<double> powers, std::vector<double> bands, double comm_delay) {
  const double p_cap = s.params().power_max * (1.0 + kCapTolerance);
  for (double p : powers) {
    if (!(p <= p_cap)) return Allocation::infeasible(id);
  }
  Allocation a;
  a.scheme_id = id;
  a.total_energy = link::energy_of(slots, powers);
  a.time_slots = std::move(slots);
  a.powers = std::move(powers);
  a.bandwidths = std::move(bands);
  a.feasible = true;
  a.comm_delay = comm_delay;
  a.processing_delay = comm_delay + s.task().compute_delay();
  return a;
}

/// golden_minimize that tolerates a collapsed interval.
template <class F>
solver::SolveReport minimize_on(F&& f, double lo, double hi) {
  if (!(hi - lo > kSearchTolerance * std::max(std::abs(lo), std::abs(hi)))) {
    solver::SolveReport r;
    r.argmin = {lo};
    r.value = f(lo);
    r.certificate = std::isinf(r.value) ? solver::Certificate::Infeasible : solver::Certificate::HitBound;
    return r;
  }
  return solver::golden_minimize(std::forward<F>(f), solver::Bracket(lo, hi, kSearchTolerance));
}

/// Shortest FD slot tau in (0, tau_max] with f(tau) <= 0, for f decreasing in tau.
template <class F>
double shortest_feasible_slot(F&& f, double tau_max) {
  const solver::Bracket r = solver::bisect_bracket(f, solver::Bracket(tau_max * 1e-12, tau_max, 1e-15));
  return r.hi;
}

Allocation solve_hd_chain(SchemeId id, const Scenario& s) {
  const RadioParams& rp = s.params();
  const double b = rp.bandwidth_max;
  const double d = s.task().data_bits;
  const double budget = s.budget();
  const auto& gains = s.channels().hop_gains;
  const std::size_t n = gains.size();

  std::vector<double> lower(n);
  std::vector<solver::SeparableTerm> terms;
  terms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = gains[i];
    lower[i] = link::min_slot_hd(b, d, g, rp);
    terms.push_back({[=, &rp](double t) { return link::hd_energy(t, b, d, g, rp); },
                     [=, &rp](double t) { return link::hd_energy_slope(t, b, d, g, rp); }});
  }

  const solver::SolveReport rep = solver::dual_equalize(terms, lower, budget);
  if (!rep.feasible()) return Allocation::infeasible(id);

  std::vector<double> powers(n);
  double delay = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    powers[i] = link::required_power_hd(rep.argmin[i], b, d, gains[i], rp);
    delay += rep.argmin[i];
  }
  return finish(id, s, rep.argmin, std::move(powers), std::vector<double>(n, b), delay);
}

}  // namespace

double si_gain_from_db(double cancellation_db) {
  if (!(cancellation_db >= 0.0)) throw std::invalid_argument("SI cancellation must be >= 0 dB");
  return std::pow(10.0, -cancellation_db / 10.0);
}

double SchemeConfig::self_interference_gain() const { return si_gain_from_db(si_cancellation_db); }

Allocation solve_hd_hd(const Scenario& scenario) {
  require_hops(scenario, 3, "solve_hd_hd");
  return solve_hd_chain(SchemeId::HDHD, scenario);
}

Allocation baseline_two_hop_hd(const Scenario& scenario) {
  require_hops(scenario, 2, "baseline_two_hop_hd");
  return solve_hd_chain(SchemeId::TwoHopHD, scenario);
}

Allocation solve_hd_fdo(const Scenario& scenario) {
  require_hops(scenario, 3, "solve_hd_fdo");
  constexpr SchemeId id = SchemeId::HDFDO;
  const RadioParams& rp = scenario.params();
  const double bmax = rp.bandwidth_max;
  const double d = scenario.task().data_bits;
  const double budget = scenario.budget();
  const auto& g = scenario.channels().hop_gains;

  const double t1_min = link::min_slot_hd(bmax, d, g[0], rp);
  const double tau_max = budget - t1_min;
  if (!(tau_max > 0.0)) return Allocation::infeasible(id);

  // Band needed by hops 2 and 3 to fit under P_max in an FD slot tau.
  auto band_excess = [&](double tau) {
    return link::min_bandwidth_hd(tau, d, g[1], rp) + link::min_bandwidth_hd(tau, d, g[2], rp) - bmax;
  };
  if (band_excess(tau_max) > 0.0) return Allocation::infeasible(id);
  const double tau_min = shortest_feasible_slot(band_excess, tau_max);

  struct Split {
    double b2;
    double energy;
  };
  auto best_split = [&](double tau) -> Split {
    const double b2_lo = link::min_bandwidth_hd(tau, d, g[1], rp);
    const double b2_hi = bmax - link::min_bandwidth_hd(tau, d, g[2], rp);
    if (!(b2_lo <= b2_hi)) return {b2_lo, kInf};
    auto e = [&](double b2) {
      return link::hd_energy(tau, b2, d, g[1], rp) + link::hd_energy(tau, bmax - b2, d, g[2], rp);
    };
    const auto r = minimize_on(e, b2_lo, b2_hi);
    return {r.argmin[0], r.value};
  };
  auto total = [&](double t1) {
    const double tau = budget - t1;
    if (!(tau > 0.0)) return kInf;
    return link::hd_energy(t1, bmax, d, g[0], rp) + best_split(tau).energy;
  };

  const double t1_hi = std::max(t1_min, budget - tau_min);
  const auto rep = minimize_on(total, t1_min, t1_hi);
  if (!rep.feasible()) return Allocation::infeasible(id);

  const double t1 = rep.argmin[0];
  const double tau = budget - t1;
  const Split split = best_split(tau);
  if (std::isinf(split.energy)) return Allocation::infeasible(id);
  const double b3 = bmax - split.b2;
  std::vector<double> powers = {link::required_power_hd(t1, bmax, d, g[0], rp),
                                link::required_power_hd(tau, split.b2, d, g[1], rp),
                                link::required_power_hd(tau, b3, d, g[2], rp)};
  return finish(id, scenario, {t1, tau, tau}, std::move(powers), {bmax, split.b2, b3}, t1 + tau);
}

Allocation solve_hd_fds(const Scenario& scenario) {
  require_hops(scenario, 3, "solve_hd_fds");
  constexpr SchemeId id = SchemeId::HDFDS;
  const RadioParams& rp = scenario.params();
  const double bmax = rp.bandwidth_max;
  const double d = scenario.task().data_bits;
  const double budget = scenario.budget();
  const ChannelSet& ch = scenario.channels();

  const double t1_min = link::min_slot_hd(bmax, d, ch.hop_gains[0], rp);
  const double tau_max = budget - t1_min;
  if (!(tau_max > 0.0)) return Allocation::infeasible(id);

  // max(p2, p3)/P_max - 1, +inf where the coupled system has no positive solution.
  auto cap_excess = [&](double tau) {
    const auto p = link::fd_shared_powers(tau, bmax, d, ch, rp);
    if (!p) return kInf;
    return std::max(p->p2, p->p3) / rp.power_max - 1.0;
  };
  if (cap_excess(tau_max) > 0.0) return Allocation::infeasible(id);
  const double tau_min = shortest_feasible_slot(cap_excess, tau_max);

  auto total = [&](double t1) {
    const double tau = budget - t1;
    if (!(tau > 0.0)) return kInf;
    const auto p = link::fd_shared_powers(tau, bmax, d, ch, rp);
    if (!p || std::max(p->p2, p->p3) > rp.power_max) return kInf;
    return link::hd_energy(t1, bmax, d, ch.hop_gains[0], rp) + tau * (p->p2 + p->p3);
  };

  const double t1_hi = std::max(t1_min, budget - tau_min);
  const auto rep = minimize_on(total, t1_min, t1_hi);
  if (!rep.feasible()) return Allocation::infeasible(id);

  const double t1 = rep.argmin[0];
  const double tau = budget - t1;
  const auto p = link::fd_shared_powers(tau, bmax, d, ch, rp);
  if (!p) return Allocation::infeasible(id);
  std::vector<double> powers = {link::required_power_hd(t1, bmax, d, ch.hop_gains[0], rp), p->p2, p->p3};
  return finish(id, scenario, {t1, tau, tau}, std::move(powers), {bmax, bmax, bmax}, t1 + tau);
}

Allocation baseline_local(const TaskSpec& task, double ue_speed) {
  if (!(ue_speed > 0.0)) throw std::invalid_argument("baseline_local: ue_speed must be positive");
  Allocation a = Allocation::infeasible(SchemeId::Local);
  a.processing_delay = task.cycles_per_bit * task.data_bits / ue_speed;
  if (a.processing_delay <= task.deadline) {
    a.feasible = true;
    a.total_energy = 0.0;
  }
  return a;
}

Allocation baseline_direct(const Scenario& scenario) {
  require_hops(scenario, 1, "baseline_direct");
  const RadioParams& rp = scenario.params();
  const double b = rp.bandwidth_max;
  const double t = scenario.budget();
  const double p = link::required_power_hd(t, b, scenario.task().data_bits,
                                           scenario.channels().hop_gains[0], rp);
  if (!(p <= rp.power_max)) return Allocation::infeasible(SchemeId::Direct);
  return finish(SchemeId::Direct, scenario, {t}, {p}, {b}, t);
}

Allocation baseline_three_hop_unopt(const Scenario& scenario) {
  require_hops(scenario, 3, "baseline_three_hop_unopt");
  constexpr SchemeId id = SchemeId::ThreeHopUnopt;
  const RadioParams& rp = scenario.params();
  const double b = rp.bandwidth_max;
  const double budget = scenario.budget();
  const double t = budget / 3.0;
  std::vector<double> powers(3);
  for (std::size_t i = 0; i < 3; ++i) {
    powers[i] = link::required_power_hd(t, b, scenario.task().data_bits,
                                        scenario.channels().hop_gains[i], rp);
    if (!(powers[i] <= rp.power_max)) return Allocation::infeasible(id);
  }
  return finish(id, scenario, {t, t, t}, std::move(powers), {b, b, b}, 3.0 * t);
}

Allocation solve(SchemeId id, const Scenario& scenario) {
  switch (id) {
    case SchemeId::Direct: return baseline_direct(scenario);
    case SchemeId::TwoHopHD: return baseline_two_hop_hd(scenario);
    case SchemeId::ThreeHopUnopt: return baseline_three_hop_unopt(scenario);
    case SchemeId::HDHD: return solve_hd_hd(scenario);
    case SchemeId::HDFDO: return solve_hd_fdo(scenario);
    case SchemeId::HDFDS: return solve_hd_fds(scenario);
    case SchemeId::Local: break;
  }
  throw std::invalid_argument("solve: local computing has no offloading scenario");
}

}  // namespace mecrelay::schemes
