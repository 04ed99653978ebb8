#include "mecrelay/link.hpp"

#include <cassert>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mecrelay::link {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = std::numbers::ln2;
// Above this Gamma, beta*Gamma^2 is compared in log-space.
constexpr double kLogSpaceGamma = 1e12;
}  // namespace

double hd_capacity(double bandwidth, double power, double gain, const RadioParams& params) {
  const double snr = power * gain / (bandwidth * params.noise_floor_psd());
  return bandwidth * std::log1p(snr) / kLn2;
}

RatePair fd_shared_capacities(double bandwidth, double p_tx1, double p_tx2,
                              const ChannelSet& channels, const RadioParams& params) {
  assert(channels.hop_count() == 3);
  const double k = HopNoiseFloor::over(bandwidth, params).k;
  const double g2 = channels.hop_gains[1];
  const double g3 = channels.hop_gains[2];
  const double sinr1 = p_tx1 * g2 / (k + p_tx2 * channels.self_interference_gain);
  const double sinr2 = p_tx2 * g3 / (k + p_tx1 * channels.cross_interference_gain);
  return {bandwidth * std::log1p(sinr1) / kLn2, bandwidth * std::log1p(sinr2) / kLn2};
}

double required_snr(double slot, double bandwidth, double data_bits) {
  const double x = data_bits / (slot * bandwidth);
  if (!(x <= kMaxSpectralEfficiency)) return kInf;
  return std::expm1(x * kLn2);
}

double required_power_hd(double slot, double bandwidth, double data_bits, double gain,
                         const RadioParams& params) {
  const double gamma = required_snr(slot, bandwidth, data_bits);
  if (std::isinf(gamma)) return kInf;
  return HopNoiseFloor::over(bandwidth, params).k / gain * gamma;
}

double min_slot_hd(double bandwidth, double data_bits, double gain, const RadioParams& params) {
  const double k = HopNoiseFloor::over(bandwidth, params).k;
  const double peak_rate = bandwidth * std::log1p(gain * params.power_max / k) / kLn2;
  return data_bits / peak_rate;
}

double hd_energy(double slot, double bandwidth, double data_bits, double gain,
                 const RadioParams& params) {
  return slot * required_power_hd(slot, bandwidth, data_bits, gain, params);
}

double hd_energy_slope(double slot, double bandwidth, double data_bits, double gain,
                       const RadioParams& params) {
  // e(t) = c t (2^{a/t} - 1)  =>  e'(t) = c (2^x - 1 - x ln2 2^x),  x = a/t
  const double x = data_bits / (slot * bandwidth);
  if (!(x <= kMaxSpectralEfficiency)) return -kInf;
  const double c = HopNoiseFloor::over(bandwidth, params).k / gain;
  const double u = x * kLn2;
  return c * (std::expm1(u) - u * std::exp(u));
}

double min_bandwidth_hd(double slot, double data_bits, double gain, const RadioParams& params) {
  // As b -> inf the required power falls to D ln2 (sigma+I_b) / (g t).
  const double floor_power = data_bits * kLn2 * params.noise_floor_psd() / (gain * slot);
  if (floor_power >= params.power_max) return kInf;

  auto over_cap = [&](double b) {
    return required_power_hd(slot, b, data_bits, gain, params) > params.power_max;
  };
  double hi = data_bits / slot;  // spectral efficiency 1
  while (over_cap(hi)) hi *= 2.0;
  double lo = hi / 2.0;
  while (!over_cap(lo)) {
    hi = lo;
    lo /= 2.0;
    if (lo < 1e-300) return hi;
  }
  for (int i = 0; i < 200 && (hi - lo) > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (over_cap(mid) ? lo : hi) = mid;
  }
  return hi;
}

std::optional<SharedPowers> fd_shared_powers(double slot, double bandwidth, double data_bits,
                                             const ChannelSet& channels,
                                             const RadioParams& params) {
  assert(channels.hop_count() == 3);
  const double g2 = channels.hop_gains[1];
  const double g3 = channels.hop_gains[2];
  const double g_self = channels.self_interference_gain;
  const double g_cross = channels.cross_interference_gain;

  const double gamma = required_snr(slot, bandwidth, data_bits);
  if (std::isinf(gamma)) return std::nullopt;
  const double beta = g_cross * g_self / (g2 * g3);

  if (beta > 0.0 && gamma > kLogSpaceGamma) {
    if (std::log(beta) + 2.0 * std::log(gamma) >= 0.0) return std::nullopt;
  }
  const double denom = 1.0 - beta * gamma * gamma;
  if (!(denom > 0.0)) return std::nullopt;

  const double k = HopNoiseFloor::over(bandwidth, params).k;
  const double p2 = k * gamma / (g2 * denom) * (1.0 + g_self * gamma / g3);
  const double p3 = k * gamma / (g3 * denom) * (1.0 + g_cross * gamma / g2);
  if (!std::isfinite(p2) || !std::isfinite(p3)) return std::nullopt;
  return SharedPowers{p2, p3};
}

double fd_shared_residual(const SharedPowers& powers, double slot, double bandwidth,
                          double data_bits, const ChannelSet& channels,
                          const RadioParams& params) {
  const double g2 = channels.hop_gains[1];
  const double g3 = channels.hop_gains[2];
  const double gamma = required_snr(slot, bandwidth, data_bits);
  const double k = HopNoiseFloor::over(bandwidth, params).k;
  const double rhs2 = (k + powers.p3 * channels.self_interference_gain) / g2 * gamma;
  const double rhs3 = (k + powers.p2 * channels.cross_interference_gain) / g3 * gamma;
  const double r2 = std::abs(powers.p2 - rhs2) / std::abs(powers.p2);
  const double r3 = std::abs(powers.p3 - rhs3) / std::abs(powers.p3);
  return std::max(r2, r3);
}

double compute_delay(const TaskSpec& task) { return task.compute_delay(); }

double energy_of(std::span<const double> slots, std::span<const double> powers) {
  if (slots.size() != powers.size()) throw std::invalid_argument("energy_of: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < slots.size(); ++i) total += slots[i] * powers[i];
  return total;
}

}  // namespace mecrelay::link
