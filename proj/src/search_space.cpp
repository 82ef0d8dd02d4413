#include "openloop/search_space.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace openloop {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ParamRange two_pi_times(double lo, double hi) { return ParamRange::uniform(kTwoPi * lo, kTwoPi * hi); }

std::string indexed(std::string_view base, std::size_t joint) {
  return std::string(base) + "[" + std::to_string(joint) + "]";
}

}  // namespace

std::optional<SearchRow> search_row_for_task(std::string_view task) {
  const ParamRange phase = two_pi_times(0.0, 1.0);
  if (task == "Ant-v4") {
    return SearchRow{ParamRange::uniform(-1, 1), ParamRange::uniform(-1, 1), phase, two_pi_times(0.4, 2)};
  }
  if (task == "HalfCheetah-v4") {
    return SearchRow{ParamRange::uniform(-2, 2), ParamRange::uniform(-1, 1), phase, two_pi_times(0.4, 5)};
  }
  if (task == "Hopper-v4") {
    return SearchRow{ParamRange::uniform(-1, 1), ParamRange::constant(0.0), phase, two_pi_times(0.4, 5)};
  }
  if (task == "Swimmer-v4") {
    return SearchRow{ParamRange::constant(1.0), ParamRange::constant(0.0), phase, two_pi_times(0.4, 2)};
  }
  if (task == "Walker2d-v4") {
    return SearchRow{ParamRange::uniform(-1, 1), ParamRange::uniform(-1, 1), phase, two_pi_times(0.4, 6)};
  }
  if (task == "Quadruped") {
    return SearchRow{ParamRange::uniform(-1, 1), ParamRange::uniform(-1, 1), phase, two_pi_times(0.4, 2)};
  }
  return std::nullopt;
}

SearchSpace::SearchSpace(std::size_t joint_count, std::vector<SearchEntry> entries)
    : joint_count_(joint_count), entries_(std::move(entries)) {
  if (joint_count_ == 0) throw std::invalid_argument("search space: joint count must be >= 1");
  std::vector<int> seen_amplitude(joint_count_, 0);
  std::vector<int> seen_offset(joint_count_, 0);
  std::vector<int> seen_phase(joint_count_, 0);
  int seen_swing = 0;
  int seen_stance = 0;
  for (const SearchEntry& entry : entries_) {
    if (!entry.range.fixed && !(entry.range.lo < entry.range.hi)) {
      throw std::invalid_argument("search space: empty range for " + entry.name);
    }
    if (!entry.range.fixed) ++free_dimension_;
    switch (entry.role) {
      case ParamRole::kAmplitude:
      case ParamRole::kOffset:
      case ParamRole::kPhaseShift: {
        if (entry.joint >= joint_count_) {
          throw std::invalid_argument("search space: joint index out of range for " + entry.name);
        }
        auto& seen = entry.role == ParamRole::kAmplitude ? seen_amplitude
                     : entry.role == ParamRole::kOffset  ? seen_offset
                                                         : seen_phase;
        ++seen[entry.joint];
        break;
      }
      case ParamRole::kOmegaSwing:
        ++seen_swing;
        if (!(entry.range.lo > 0.0)) throw std::invalid_argument("search space: frequency must be > 0");
        break;
      case ParamRole::kOmegaStance:
        ++seen_stance;
        if (!(entry.range.lo > 0.0)) throw std::invalid_argument("search space: frequency must be > 0");
        break;
    }
  }
  for (std::size_t j = 0; j < joint_count_; ++j) {
    if (seen_amplitude[j] != 1 || seen_offset[j] != 1 || seen_phase[j] != 1) {
      throw std::invalid_argument("search space: each joint needs exactly one amplitude, offset and phase entry");
    }
  }
  if (seen_swing != 1 || seen_stance > 1) {
    throw std::invalid_argument("search space: needs one omega_swing and at most one omega_stance");
  }
  has_stance_entry_ = seen_stance == 1;
}

SearchSpace SearchSpace::from_row(const SearchRow& row, std::size_t joint_count,
                                  PolicyVariant variant) {
  std::vector<SearchEntry> entries;
  for (std::size_t j = 0; j < joint_count; ++j) {
    entries.push_back({indexed("amplitude", j), ParamRole::kAmplitude, j, row.amplitude});
  }
  for (std::size_t j = 0; j < joint_count; ++j) {
    entries.push_back({indexed("offset", j), ParamRole::kOffset, j, row.offset});
  }
  for (std::size_t j = 0; j < joint_count; ++j) {
    // phi_0 = 0 by convention; it only fixes the origin of time.
    const bool free = j > 0 && uses_phase_shift(variant);
    entries.push_back({indexed("phase_shift", j), ParamRole::kPhaseShift, j,
                       free ? row.phase : ParamRange::constant(0.0)});
  }
  entries.push_back({"omega_swing", ParamRole::kOmegaSwing, 0, row.frequency});
  if (uses_swing_stance(variant)) {
    entries.push_back({"omega_stance", ParamRole::kOmegaStance, 0, row.frequency});
  }
  return SearchSpace(joint_count, std::move(entries));
}

OscillatorParams SearchSpace::decode(std::span<const double> unit_point) const {
  if (unit_point.size() != free_dimension_) {
    throw std::invalid_argument("search space: decode expects " + std::to_string(free_dimension_) +
                                " coordinates, got " + std::to_string(unit_point.size()));
  }
  OscillatorParams params;
  params.amplitudes.assign(joint_count_, 0.0);
  params.offsets.assign(joint_count_, 0.0);
  params.phase_shifts.assign(joint_count_, 0.0);

  std::size_t next = 0;
  for (const SearchEntry& entry : entries_) {
    double value = entry.range.lo;
    if (!entry.range.fixed) {
      const double x = unit_point[next++];
      if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("search space: coordinate outside [0,1]");
      value = entry.range.lo + x * (entry.range.hi - entry.range.lo);
    }
    switch (entry.role) {
      case ParamRole::kAmplitude: params.amplitudes[entry.joint] = value; break;
      case ParamRole::kOffset: params.offsets[entry.joint] = value; break;
      case ParamRole::kPhaseShift: params.phase_shifts[entry.joint] = value; break;
      case ParamRole::kOmegaSwing: params.omega_swing = value; break;
      case ParamRole::kOmegaStance: params.omega_stance = value; break;
    }
  }
  if (!has_stance_entry_) params.omega_stance = params.omega_swing;
  params.validate();
  return params;
}

std::size_t param_count(const SearchSpace& space) { return space.free_dimension(); }

}  // namespace openloop
