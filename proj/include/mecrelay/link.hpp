#pragma once

#include <optional>
#include <span>
#include <utility>

#include "mecrelay/model.hpp"

namespace mecrelay::link {

/// Largest D/(t*b) exponent evaluated; beyond it the required power is +inf.
inline constexpr double kMaxSpectralEfficiency = 1020.0;

/// K_n = b_n (sigma + I_b): noise-plus-interference power over the hop's band.
struct HopNoiseFloor {
  double k;
  static HopNoiseFloor over(double bandwidth, const RadioParams& params) {
    return {bandwidth * params.noise_floor_psd()};
  }
};

/// Shannon rate of a hop with the whole band to itself.
double hd_capacity(double bandwidth, double power, double gain, const RadioParams& params);

struct RatePair {
  double first;   // hop 2 (R1 -> R2), impaired by R2's self-interference
  double second;  // hop 3 (R2 -> MEC), impaired by R1's transmission
};

/// Rates of hops 2 and 3 transmitting simultaneously in one shared band.
/// p_tx1 is R1's power, p_tx2 is R2's power. Uses hop_gains[1], hop_gains[2].
RatePair fd_shared_capacities(double bandwidth, double p_tx1, double p_tx2,
                              const ChannelSet& channels, const RadioParams& params);

/// Gamma = 2^(D/(t b)) - 1; +inf past kMaxSpectralEfficiency.
double required_snr(double slot, double bandwidth, double data_bits);

/// Minimum power that carries data_bits in slot over bandwidth. +inf when the
/// exponent guard trips.
double required_power_hd(double slot, double bandwidth, double data_bits, double gain,
                         const RadioParams& params);

/// Shortest slot at which the hop still fits under P_max.
double min_slot_hd(double bandwidth, double data_bits, double gain, const RadioParams& params);

/// Energy t * p_hd(t, b) of one HD/FD-Orthogonal hop.
double hd_energy(double slot, double bandwidth, double data_bits, double gain,
                 const RadioParams& params);

/// d/dt of hd_energy at fixed bandwidth. Always negative; tends to 0 as t grows.
double hd_energy_slope(double slot, double bandwidth, double data_bits, double gain,
                       const RadioParams& params);

/// Smallest bandwidth at which the hop fits under P_max within `slot`, or +inf if
/// none does (the infinite-bandwidth power limit already exceeds P_max).
double min_bandwidth_hd(double slot, double data_bits, double gain, const RadioParams& params);

struct SharedPowers {
  double p2;  // R1
  double p3;  // R2
};

/// Closed-form solution of the interference-coupled power pair for the
/// FD-Shared hops over one common slot and bandwidth. nullopt when
/// beta*Gamma^2 >= 1 (no positive solution).
std::optional<SharedPowers> fd_shared_powers(double slot, double bandwidth, double data_bits,
                                             const ChannelSet& channels,
                                             const RadioParams& params);

/// Relative residual of (p2, p3) substituted back into the coupled power
/// equations; max over the two equations.
double fd_shared_residual(const SharedPowers& powers, double slot, double bandwidth,
                          double data_bits, const ChannelSet& channels,
                          const RadioParams& params);

double compute_delay(const TaskSpec& task);

/// Sum of t_n * p_n.
double energy_of(std::span<const double> slots, std::span<const double> powers);

}  // namespace mecrelay::link
