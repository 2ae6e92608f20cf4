#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "ngrc/dynamics.hpp"

namespace ngrc {

enum class AttractorLabel : std::uint8_t { torus, chaos_neg, chaos_pos };

inline constexpr std::array<AttractorLabel, 3> kAllLabels{
    AttractorLabel::torus, AttractorLabel::chaos_neg, AttractorLabel::chaos_pos};

[[nodiscard]] std::string_view to_string(AttractorLabel label) noexcept;
/// Throws FormatError on an unknown name.
[[nodiscard]] AttractorLabel parse_label(std::string_view name);
/// Image of the label under the system symmetry (swaps the chaotic pair).
[[nodiscard]] AttractorLabel mirrored(AttractorLabel label) noexcept;

/// Time averages <v> and <|v|> per variable.
struct AttractorStats {
  std::array<double, kStateDim> mean{};
  std::array<double, kStateDim> mean_abs{};
  double duration = 0.0;
};

/// Plain sample means over every sample; duration is size * dt.
/// Throws std::invalid_argument on an empty trajectory.
[[nodiscard]] AttractorStats stats(const Trajectory& traj);

/// Center-of-mass (delta_v) and extent (delta_abs) differences, normalised by
/// the ground-truth <|v|>.
struct AttractorDeltas {
  std::array<double, kStateDim> center{};
  std::array<double, kStateDim> extent{};

  /// delta_x, delta_|x|, delta_y, delta_|y|, ...
  [[nodiscard]] std::array<double, 2 * kStateDim> flat() const noexcept;
};

/// Throws DegenerateTruth if any ground-truth <|v|> is zero.
[[nodiscard]] AttractorDeltas delta_pair(const AttractorStats& forecast,
                                         const AttractorStats& truth);

/// Euclidean norm of all eight deltas.
[[nodiscard]] double delta_att(std::span<const double> deltas) noexcept;
[[nodiscard]] double delta_att(const AttractorDeltas& deltas) noexcept;

/// Euclidean norm of the per-attractor metrics (torus, chaos_neg, chaos_pos).
[[nodiscard]] double delta_tot(std::span<const double, 3> att) noexcept;

inline constexpr double kDefaultValidThreshold = 0.4;

/// Time (index * dt from the first sample) at which the per-sample error
/// max_v |pred_v - truth_v| / std(truth_v) first exceeds `threshold`; the
/// full duration size * dt if it never does. std is over the whole truth
/// trajectory; components with zero spread use their absolute error.
/// Throws std::invalid_argument on a length or dt mismatch.
[[nodiscard]] double valid_time(const Trajectory& pred, const Trajectory& truth,
                                double threshold = kDefaultValidThreshold);

/// Per-component population standard deviation.
[[nodiscard]] State component_std(const Trajectory& traj);

}  // namespace ngrc
