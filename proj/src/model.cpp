#include "mecrelay/model.hpp"

#include <cmath>
#include <sstream>

#include "mecrelay/link.hpp"

namespace mecrelay {

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }

ChannelSet ChannelSet::direct(double g) { return ChannelSet{{g}, 0.0, 0.0}; }

ChannelSet ChannelSet::two_hop(double g1, double g2) { return ChannelSet{{g1, g2}, 0.0, 0.0}; }

ChannelSet ChannelSet::three_hop(double g1, double g2, double g3, double g_self,
                                 double g_cross) {
  return ChannelSet{{g1, g2, g3}, g_self, g_cross};
}

std::string_view scheme_token(SchemeId id) {
  switch (id) {
    case SchemeId::Local: return "local";
    case SchemeId::Direct: return "direct";
    case SchemeId::TwoHopHD: return "hd2";
    case SchemeId::ThreeHopUnopt: return "unopt3";
    case SchemeId::HDHD: return "hdhd";
    case SchemeId::HDFDO: return "hdfdo";
    case SchemeId::HDFDS: return "hdfds";
  }
  return "?";
}

std::optional<SchemeId> parse_scheme(std::string_view token) {
  for (SchemeId id : kAllSchemes) {
    if (scheme_token(id) == token) return id;
  }
  return std::nullopt;
}

bool is_relaying(SchemeId id) { return hop_count_of(id) >= 2; }

std::size_t hop_count_of(SchemeId id) {
  switch (id) {
    case SchemeId::Local: return 0;
    case SchemeId::Direct: return 1;
    case SchemeId::TwoHopHD: return 2;
    default: return 3;
  }
}

bool is_full_duplex(SchemeId id) { return id == SchemeId::HDFDO || id == SchemeId::HDFDS; }

Allocation Allocation::infeasible(SchemeId id) {
  Allocation a;
  a.scheme_id = id;
  return a;
}

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << name << " must be positive and finite (got " << v << ")";
    throw ValidationError(ValidationErrorCode::NonPositiveField, os.str());
  }
}

void require_gain(double g, const char* name, bool allow_zero) {
  const bool ok = std::isfinite(g) && g <= 1.0 && (allow_zero ? g >= 0.0 : g > 0.0);
  if (!ok) {
    std::ostringstream os;
    os << name << " must lie in " << (allow_zero ? "[0, 1]" : "(0, 1]") << " (got " << g << ")";
    throw ValidationError(ValidationErrorCode::NonPositiveField, os.str());
  }
}

}  // namespace

Scenario validate(const RadioParams& params, const TaskSpec& task, const ChannelSet& channels) {
  require_positive(params.bandwidth_max, "bandwidth_max");
  require_positive(params.power_max, "power_max");
  require_positive(params.noise_psd, "noise_psd");
  require_positive(params.background_interference_psd, "background_interference_psd");
  require_positive(params.carrier_freq, "carrier_freq");

  require_positive(task.data_bits, "data_bits");
  require_positive(task.cycles_per_bit, "cycles_per_bit");
  require_positive(task.deadline, "deadline");
  require_positive(task.server_speed, "server_speed");

  const std::size_t n = channels.hop_count();
  if (n < 1 || n > 3) {
    throw ValidationError(ValidationErrorCode::NonPositiveField,
                          "channel set must carry 1, 2 or 3 hop gains");
  }
  for (double g : channels.hop_gains) require_gain(g, "hop gain", false);
  require_gain(channels.self_interference_gain, "self_interference_gain", true);
  require_gain(channels.cross_interference_gain, "cross_interference_gain", true);

  if (!(task.compute_delay() < task.deadline)) {
    std::ostringstream os;
    os << "deadline " << task.deadline << " s does not exceed compute delay "
       << task.compute_delay() << " s";
    throw ValidationError(ValidationErrorCode::DeadlineBelowComputeDelay, os.str());
  }
  return Scenario(params, task, channels);
}

std::vector<std::string> audit_allocation(const Allocation& alloc, const Scenario& scenario) {
  std::vector<std::string> issues;
  if (!alloc.feasible) {
    if (!std::isinf(alloc.total_energy)) issues.push_back("infeasible allocation with finite energy");
    return issues;
  }

  const RadioParams& params = scenario.params();
  const TaskSpec& task = scenario.task();
  const double slack = 1.0 + kCapTolerance;
  auto report = [&](const std::string& msg) { issues.push_back(msg); };

  if (alloc.scheme_id == SchemeId::Local) {
    if (alloc.processing_delay > task.deadline * slack) report("local delay exceeds deadline");
    if (alloc.total_energy != 0.0) report("local allocation reports transmit energy");
    return issues;
  }

  const std::size_t n = hop_count_of(alloc.scheme_id);
  if (alloc.time_slots.size() != n || alloc.powers.size() != n || alloc.bandwidths.size() != n) {
    report("allocation vector length does not match scheme hop count");
    return issues;
  }
  if (scenario.channels().hop_count() != n) {
    report("scenario hop count does not match scheme");
    return issues;
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!(alloc.time_slots[i] > 0.0)) report("non-positive slot at hop " + std::to_string(i + 1));
    if (!(alloc.powers[i] >= 0.0) || alloc.powers[i] > params.power_max * slack)
      report("power cap violated at hop " + std::to_string(i + 1));
    if (!(alloc.bandwidths[i] > 0.0) || alloc.bandwidths[i] > params.bandwidth_max * slack)
      report("bandwidth cap violated at hop " + std::to_string(i + 1));
  }

  // Transmission time: HD hops are sequential, FD hops 2 and 3 overlap.
  double delay = 0.0;
  if (is_full_duplex(alloc.scheme_id)) {
    delay = alloc.time_slots[0] + std::max(alloc.time_slots[1], alloc.time_slots[2]);
    if (alloc.bandwidths[1] + alloc.bandwidths[2] > params.bandwidth_max * slack &&
        alloc.scheme_id == SchemeId::HDFDO)
      report("FD-Orthogonal bandwidth split exceeds B_max");
  } else {
    for (double t : alloc.time_slots) delay += t;
  }
  const double budget = task.comm_budget();
  if (delay > budget + kCapTolerance * task.deadline) report("communication delay exceeds budget");
  if (std::abs(delay - alloc.comm_delay) > 1e-12 * std::max(1.0, delay))
    report("reported comm_delay inconsistent with slots");

  // Every hop must carry the whole task.
  const ChannelSet& ch = scenario.channels();
  const double need = task.data_bits * (1.0 - kCapTolerance);
  if (alloc.scheme_id == SchemeId::HDFDS) {
    const double b = alloc.bandwidths[1];
    if (std::abs(alloc.bandwidths[2] - b) > 1e-12 * b) report("FD-Shared hops use different bands");
    const auto rates = link::fd_shared_capacities(b, alloc.powers[1], alloc.powers[2], ch, params);
    if (rates.first * alloc.time_slots[1] < need) report("hop 2 cannot deliver the task");
    if (rates.second * alloc.time_slots[2] < need) report("hop 3 cannot deliver the task");
    if (link::hd_capacity(alloc.bandwidths[0], alloc.powers[0], ch.hop_gains[0], params) *
            alloc.time_slots[0] < need)
      report("hop 1 cannot deliver the task");
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double rate = link::hd_capacity(alloc.bandwidths[i], alloc.powers[i], ch.hop_gains[i], params);
      if (rate * alloc.time_slots[i] < need)
        report("hop " + std::to_string(i + 1) + " cannot deliver the task");
    }
  }

  const double energy = link::energy_of(alloc.time_slots, alloc.powers);
  if (!(std::abs(energy - alloc.total_energy) <= 1e-9 * std::abs(energy)))
    report("total_energy differs from sum of slot*power");
  if (std::abs(alloc.processing_delay - (alloc.comm_delay + task.compute_delay())) >
      1e-12 * std::max(1.0, alloc.processing_delay))
    report("processing_delay inconsistent");
  return issues;
}

}  // namespace mecrelay
