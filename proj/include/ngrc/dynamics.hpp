#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace ngrc {

inline constexpr int kStateDim = 4;

/// One system state (x, y, z, u).
using State = Eigen::Matrix<double, kStateDim, 1>;

/// Right-hand side of an autonomous ODE. The Li-Sprott field is the default;
/// any other 4-component field can be plugged into the integrator.
using VectorField = std::function<State(const State&)>;

struct SystemParams {
  double a = 6.0;
  double b = 0.1;

  /// Throws ConfigError unless a > 0 and b > 0.
  void validate() const;
};

[[nodiscard]] bool is_finite(const State& s) noexcept;

/// Li-Sprott field: (-x + y, -x z + u, x y - a, -b y).
[[nodiscard]] State vector_field(const State& s, const SystemParams& p) noexcept;

/// Pi rotation about the z axis: (x, y, z, u) -> (-x, -y, z, -u).
[[nodiscard]] State symmetry_map(const State& s) noexcept;

[[nodiscard]] VectorField li_sprott_field(const SystemParams& p);

/// Uniformly sampled trajectory. Sample i sits at time t0 + i * dt.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(double dt, double t0, std::vector<State> samples)
      : dt_(dt), t0_(t0), samples_(std::move(samples)) {}

  [[nodiscard]] double dt() const noexcept { return dt_; }
  [[nodiscard]] double t0() const noexcept { return t0_; }
  [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
  [[nodiscard]] bool empty() const noexcept { return samples_.empty(); }
  [[nodiscard]] double time(std::size_t i) const noexcept {
    return t0_ + static_cast<double>(i) * dt_;
  }
  [[nodiscard]] const State& operator[](std::size_t i) const { return samples_[i]; }
  [[nodiscard]] const State& front() const { return samples_.front(); }
  [[nodiscard]] const State& back() const { return samples_.back(); }
  [[nodiscard]] std::span<const State> samples() const noexcept { return samples_; }

  /// Samples [first, first + count), re-based so the time grid is preserved.
  [[nodiscard]] Trajectory slice(std::size_t first, std::size_t count) const;
  /// Drops the first `n` samples.
  [[nodiscard]] Trajectory drop_front(std::size_t n) const { return slice(n, size() - n); }
  /// Pointwise symmetry_map.
  [[nodiscard]] Trajectory mirrored() const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  double dt_ = 0.0;
  double t0_ = 0.0;
  std::vector<State> samples_;
};

/// True iff the trajectory is non-empty, has a positive finite step and
/// only finite samples.
[[nodiscard]] bool resample_check(const Trajectory& traj) noexcept;

struct IntegratorOptions {
  double abs_tol = 1e-7;
  /// Zero means pure absolute error control.
  double rel_tol = 0.0;
  double min_step = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 100'000'000;
};

/// Number of dt intervals in t_span. Throws ConfigError if dt does not divide
/// t_span.
[[nodiscard]] std::size_t grid_intervals(double t_span, double dt);

/// Adaptive Dormand-Prince 5(4) integration sampled on the uniform dt grid
/// through the pair's 4th-order dense output. Returns floor(t_span/dt) + 1
/// samples including s0 at t = 0.
[[nodiscard]] Trajectory integrate(const VectorField& field, const State& s0, double t_span,
                                   double dt, const IntegratorOptions& opts = {});
[[nodiscard]] Trajectory integrate(const State& s0, const SystemParams& p, double t_span, double dt,
                                   const IntegratorOptions& opts = {});

/// State after `duration` time units; the final step lands exactly on it.
[[nodiscard]] State advance(const VectorField& field, const State& s0, double duration,
                            const IntegratorOptions& opts = {});
[[nodiscard]] State advance(const State& s0, const SystemParams& p, double duration,
                            const IntegratorOptions& opts = {});

}  // namespace ngrc
