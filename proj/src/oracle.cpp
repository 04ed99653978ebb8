#include "mecrelay/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace mecrelay::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

long double snr_needed(long double slot, long double bandwidth, long double bits) {
  if (!(slot > 0) || !(bandwidth > 0)) return kInf;
  const long double x = bits / (slot * bandwidth);
  if (x > 1000) return kInf;
  return std::expm1(0.693147180559945309417232121458176568L * x);
}

long double hop_power(double slot, double bandwidth, double bits, double gain, const RadioParams& rp) {
  if (!(slot > 0) || !(bandwidth > 0)) return kInf;
  const long double k = static_cast<long double>(bandwidth) * rp.noise_floor_psd();
  return k / gain * snr_needed(slot, bandwidth, bits);
}

}  // namespace

double reference_hop_energy(double slot, double bandwidth, double data_bits, double gain,
                            const RadioParams& params) {
  if (!(slot > 0.0)) return kInf;
  return static_cast<double>(slot * hop_power(slot, bandwidth, data_bits, gain, params));
}

CoupledPowers reference_shared_powers(double slot, double bandwidth, double data_bits,
                                      const ChannelSet& ch, const RadioParams& rp) {
  const long double gamma = snr_needed(slot, bandwidth, data_bits);
  if (std::isinf(gamma)) return {kInf, kInf, false};
  const long double g2 = ch.hop_gains[1], g3 = ch.hop_gains[2];
  const long double k = static_cast<long double>(bandwidth) * rp.noise_floor_psd();
  // [1, -a; -c, 1] [p2; p3] = [r2; r3]
  const long double a = ch.self_interference_gain * gamma / g2;
  const long double c = ch.cross_interference_gain * gamma / g3;
  const long double r2 = k * gamma / g2;
  const long double r3 = k * gamma / g3;
  const long double det = 1.0L - a * c;
  if (!(det > 0)) return {kInf, kInf, false};
  const long double p2 = (r2 + a * r3) / det;
  const long double p3 = (r3 + c * r2) / det;
  return {static_cast<double>(p2), static_cast<double>(p3), true};
}

solver::SolveReport oracle_solve(SchemeId id, const Scenario& s, const solver::GridOptions& opts) {
  using solver::GridConstraint;
  const RadioParams& rp = s.params();
  const double bmax = rp.bandwidth_max;
  const double pmax = rp.power_max;
  const double d = s.task().data_bits;
  const double budget = s.budget();
  const ChannelSet& ch = s.channels();
  const auto& g = ch.hop_gains;

  auto cap = [pmax](long double p) { return static_cast<double>(p / pmax - 1.0L); };

  switch (id) {
    case SchemeId::Direct: {
      auto objective = [&](std::span<const double> x) { return reference_hop_energy(x[0], bmax, d, g[0], rp); };
      std::vector<GridConstraint> cons = {[&](std::span<const double> x) { return cap(hop_power(x[0], bmax, d, g[0], rp)); }};
      return solver::grid_solve(objective, cons, {{0.0}, {budget}}, opts);
    }
    case SchemeId::TwoHopHD: {
      auto objective = [&](std::span<const double> x) {
        return reference_hop_energy(x[0], bmax, d, g[0], rp) + reference_hop_energy(budget - x[0], bmax, d, g[1], rp);
      };
      std::vector<GridConstraint> cons = {
          [&](std::span<const double> x) { return cap(hop_power(x[0], bmax, d, g[0], rp)); },
          [&](std::span<const double> x) { return cap(hop_power(budget - x[0], bmax, d, g[1], rp)); }};
      return solver::grid_solve(objective, cons, {{0.0}, {budget}}, opts);
    }
    case SchemeId::HDHD: {
      auto t3 = [budget](std::span<const double> x) { return budget - x[0] - x[1]; };
      auto objective = [&](std::span<const double> x) {
        return reference_hop_energy(x[0], bmax, d, g[0], rp) + reference_hop_energy(x[1], bmax, d, g[1], rp) +
               reference_hop_energy(t3(x), bmax, d, g[2], rp);
      };
      std::vector<GridConstraint> cons = {
          [&](std::span<const double> x) { return cap(hop_power(x[0], bmax, d, g[0], rp)); },
          [&](std::span<const double> x) { return cap(hop_power(x[1], bmax, d, g[1], rp)); },
          [&](std::span<const double> x) { return cap(hop_power(t3(x), bmax, d, g[2], rp)); }};
      return solver::grid_solve(objective, cons, {{0.0, 0.0}, {budget, budget}}, opts);
    }
    case SchemeId::HDFDO: {
      // x = (t1, b2, b3); hops 2 and 3 share the FD slot budget - t1.
      auto objective = [&](std::span<const double> x) {
        const double tau = budget - x[0];
        return reference_hop_energy(x[0], bmax, d, g[0], rp) + reference_hop_energy(tau, x[1], d, g[1], rp) +
               reference_hop_energy(tau, x[2], d, g[2], rp);
      };
      std::vector<GridConstraint> cons = {
          [&](std::span<const double> x) { return (x[1] + x[2]) / bmax - 1.0; },
          [&](std::span<const double> x) { return cap(hop_power(x[0], bmax, d, g[0], rp)); },
          [&](std::span<const double> x) { return cap(hop_power(budget - x[0], x[1], d, g[1], rp)); },
          [&](std::span<const double> x) { return cap(hop_power(budget - x[0], x[2], d, g[2], rp)); }};
      return solver::grid_solve(objective, cons, {{0.0, 0.0, 0.0}, {budget, bmax, bmax}}, opts);
    }
    case SchemeId::HDFDS: {
      auto powers = [&](double t1) { return reference_shared_powers(budget - t1, bmax, d, ch, rp); };
      auto objective = [&](std::span<const double> x) {
        const CoupledPowers p = powers(x[0]);
        if (!p.valid) return kInf;
        return reference_hop_energy(x[0], bmax, d, g[0], rp) + (budget - x[0]) * (p.p2 + p.p3);
      };
      std::vector<GridConstraint> cons = {
          [&](std::span<const double> x) { return cap(hop_power(x[0], bmax, d, g[0], rp)); },
          [&](std::span<const double> x) {
            const CoupledPowers p = powers(x[0]);
            return p.valid ? cap(std::max(p.p2, p.p3)) : kInf;
          }};
      return solver::grid_solve(objective, cons, {{0.0}, {budget}}, opts);
    }
    case SchemeId::ThreeHopUnopt: {
      solver::SolveReport rep;
      const double t = budget / 3.0;
      double e = 0.0;
      for (double gi : g) {
        if (hop_power(t, bmax, d, gi, rp) > pmax) return rep;
        e += reference_hop_energy(t, bmax, d, gi, rp);
      }
      rep.argmin = {t, t, t};
      rep.value = e;
      rep.certificate = solver::Certificate::Converged;
      return rep;
    }
    case SchemeId::Local: break;
  }
  throw std::invalid_argument("oracle_solve: no offloading problem for local computing");
}

}  // namespace mecrelay::oracle
