#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "ngrc/dynamics.hpp"
#include "ngrc/metrics.hpp"
#include "ngrc/model.hpp"

namespace ngrc {

enum class Axis : std::uint8_t { x0 = 0, y0 = 1, z0 = 2, u0 = 3 };

[[nodiscard]] std::string_view to_string(Axis axis) noexcept;
[[nodiscard]] Axis parse_axis(std::string_view name);

/// Rectangular slice of initial-condition space. Grid nodes are uniformly
/// spaced with both endpoints included.
struct BasinRegion {
  Axis axis1 = Axis::y0;
  Axis axis2 = Axis::u0;
  State base = State::Zero();  // values of the two fixed coordinates
  double lo1 = 0.0, hi1 = 10.0;
  double lo2 = -2.0, hi2 = 2.0;
  std::size_t n1 = 100, n2 = 100;

  /// Throws ConfigError unless lo < hi, n >= 2 and the axes differ.
  void validate() const;

  [[nodiscard]] double coord1(std::size_t i) const noexcept;
  [[nodiscard]] double coord2(std::size_t j) const noexcept;
  [[nodiscard]] State initial_condition(std::size_t i, std::size_t j) const noexcept;

  /// Region holding the symmetry images of this region's nodes. Axes among
  /// x0, y0, u0 are negated, so along them the node order is reversed; the
  /// image coordinates are exact negations.
  [[nodiscard]] BasinRegion mirrored() const noexcept;

  friend bool operator==(const BasinRegion&, const BasinRegion&) = default;
};

/// Default window: y0 in [0, 10], u0 in [-2, 2] on the x0 = z0 = 0 plane,
/// where all three basins interleave. Its companion is mirrored().
[[nodiscard]] BasinRegion default_basin_region(std::size_t n = 100);

enum class EngineKind : std::uint8_t { oracle, ngrc_oracle_warmup, ngrc_bootstrap };

[[nodiscard]] std::string_view to_string(EngineKind kind) noexcept;
[[nodiscard]] EngineKind parse_engine(std::string_view name);

/// u < -2 -> chaos_neg, u > 2 -> chaos_pos, torus otherwise.
[[nodiscard]] AttractorLabel classify(double u_final) noexcept;

struct PointOutcome {
  AttractorLabel label = AttractorLabel::torus;
  bool diverged = false;
};

/// Evolves an initial condition to the classification horizon. Immutable and
/// safe to share between threads.
class BasinEngine {
 public:
  static BasinEngine oracle(SystemParams params, IntegratorOptions opts = {});
  /// k - 1 warm-up states come from the integrator.
  static BasinEngine ngrc_oracle_warmup(NgrcModel model, SystemParams params,
                                        IntegratorOptions opts = {});
  /// Warm-up from bootstrap_warmup; the last rung (k = K) forecasts.
  static BasinEngine ngrc_bootstrap(std::vector<NgrcModel> ladder);

  [[nodiscard]] EngineKind kind() const noexcept { return kind_; }
  /// Forecasting model for NG-RC engines, null for the oracle.
  [[nodiscard]] const NgrcModel* model() const noexcept;

  /// Label at t = horizon. NG-RC divergence is absorbed: the label comes from
  /// the last finite u if |u| > 2, torus otherwise.
  [[nodiscard]] PointOutcome evaluate(const State& ic, double horizon) const;

 private:
  EngineKind kind_ = EngineKind::oracle;
  SystemParams params_{};
  IntegratorOptions opts_{};
  std::shared_ptr<const std::vector<NgrcModel>> models_;  // ladder, forecaster last
};

inline constexpr double kDefaultHorizon = 200.0;

[[nodiscard]] AttractorLabel basin_point(const State& ic, const BasinEngine& engine,
                                         double horizon = kDefaultHorizon);

struct BasinGrid {
  BasinRegion region;
  EngineKind engine = EngineKind::oracle;
  std::vector<AttractorLabel> labels;  // row-major, index i * n2 + j
  std::size_t divergence_count = 0;

  [[nodiscard]] AttractorLabel at(std::size_t i, std::size_t j) const {
    return labels.at(i * region.n2 + j);
  }
  [[nodiscard]] std::size_t count(AttractorLabel label) const noexcept;

  friend bool operator==(const BasinGrid&, const BasinGrid&) = default;
};

/// Grid over region.mirrored() obtained by mapping every pixel through the
/// symmetry: chaotic labels swap, torus stays.
[[nodiscard]] BasinGrid mirrored(const BasinGrid& grid);

/// Evaluates every grid node. `workers` = 0 uses the hardware concurrency;
/// the result does not depend on the worker count.
[[nodiscard]] BasinGrid compute_basin(const BasinRegion& region, const BasinEngine& engine,
                                      double horizon = kDefaultHorizon, unsigned workers = 0);

/// Pixel agreement between a reference grid and a model grid, kept as counts
/// so several grid pairs can be pooled.
struct BasinAgreement {
  std::array<std::size_t, 3> matched{};  // per truth label
  std::array<std::size_t, 3> total{};    // per truth label

  /// Fraction of truth pixels of `label` that the model reproduces; nullopt
  /// when the truth grid has none.
  [[nodiscard]] std::optional<double> fraction(AttractorLabel label) const noexcept;
  [[nodiscard]] double overall() const noexcept;

  BasinAgreement& operator+=(const BasinAgreement& other) noexcept;
};

/// Throws GridMismatch unless both grids cover the same region.
[[nodiscard]] BasinAgreement agreement(const BasinGrid& truth, const BasinGrid& model);

}  // namespace ngrc
