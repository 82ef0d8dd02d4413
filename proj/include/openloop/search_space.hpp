#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "openloop/oscillator.hpp"

namespace openloop {

/// A scalar that is either pinned to a value or sampled from [lo, hi].
struct ParamRange {
  double lo = 0.0;
  double hi = 0.0;
  bool fixed = true;

  static ParamRange constant(double value) { return {value, value, true}; }
  static ParamRange uniform(double lo, double hi) { return {lo, hi, false}; }

  friend bool operator==(const ParamRange&, const ParamRange&) = default;
};

/// One row of the per-task search-space table. The phase range applies to
/// every joint except the first, whose phase shift is pinned to zero.
struct SearchRow {
  ParamRange amplitude;
  ParamRange offset;
  ParamRange phase;
  ParamRange frequency;

  friend bool operator==(const SearchRow&, const SearchRow&) = default;
};

/// Known rows: Ant-v4, HalfCheetah-v4, Hopper-v4, Swimmer-v4, Walker2d-v4,
/// Quadruped. Returns nullopt for an unknown task.
[[nodiscard]] std::optional<SearchRow> search_row_for_task(std::string_view task);

enum class ParamRole { kAmplitude, kOffset, kPhaseShift, kOmegaSwing, kOmegaStance };

struct SearchEntry {
  std::string name;  // e.g. "amplitude[2]", "omega_swing"
  ParamRole role = ParamRole::kAmplitude;
  std::size_t joint = 0;
  ParamRange range;
};

/// Ordered parameter layout mapping a point of the unit box [0,1]^d onto
/// OscillatorParams. Free coordinates are the non-fixed entries, in order.
class SearchSpace {
 public:
  SearchSpace(std::size_t joint_count, std::vector<SearchEntry> entries);

  /// Layout for a task row and variant. Variants without swing/stance omit
  /// omega_stance (tied to omega_swing); variants without phase shifts pin
  /// every phase to zero.
  static SearchSpace from_row(const SearchRow& row, std::size_t joint_count,
                              PolicyVariant variant);

  [[nodiscard]] std::size_t joint_count() const { return joint_count_; }
  [[nodiscard]] const std::vector<SearchEntry>& entries() const { return entries_; }
  [[nodiscard]] std::size_t free_dimension() const { return free_dimension_; }

  /// Affine map lo + x * (hi - lo) for each free entry; x must lie in [0,1].
  [[nodiscard]] OscillatorParams decode(std::span<const double> unit_point) const;

 private:
  std::size_t joint_count_;
  std::vector<SearchEntry> entries_;
  std::size_t free_dimension_ = 0;
  bool has_stance_entry_ = false;
};

/// Number of free scalars; fixed entries are excluded.
[[nodiscard]] std::size_t param_count(const SearchSpace& space);

}  // namespace openloop
