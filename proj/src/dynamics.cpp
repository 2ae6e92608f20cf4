#include "ngrc/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "ngrc/errors.hpp"

namespace ngrc {

void SystemParams::validate() const {
  if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("system parameter a must be > 0");
  if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("system parameter b must be > 0");
}

bool is_finite(const State& s) noexcept { return s.allFinite(); }

State vector_field(const State& s, const SystemParams& p) noexcept {
  const double x = s[0], y = s[1], z = s[2], u = s[3];
  return State(-x + y, -x * z + u, x * y - p.a, -p.b * y);
}

State symmetry_map(const State& s) noexcept { return State(-s[0], -s[1], s[2], -s[3]); }

VectorField li_sprott_field(const SystemParams& p) {
  return [p](const State& s) { return vector_field(s, p); };
}

Trajectory Trajectory::slice(std::size_t first, std::size_t count) const {
  first = std::min(first, samples_.size());
  count = std::min(count, samples_.size() - first);
  std::vector<State> out(samples_.begin() + static_cast<std::ptrdiff_t>(first),
                         samples_.begin() + static_cast<std::ptrdiff_t>(first + count));
  return {dt_, time(first), std::move(out)};
}

Trajectory Trajectory::mirrored() const {
  std::vector<State> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(symmetry_map(s));
  return {dt_, t0_, std::move(out)};
}

bool resample_check(const Trajectory& traj) noexcept {
  if (traj.empty()) return false;
  if (!(traj.dt() > 0.0) || !std::isfinite(traj.dt()) || !std::isfinite(traj.t0())) return false;
  return std::all_of(traj.samples().begin(), traj.samples().end(),
                     [](const State& s) { return is_finite(s); });
}

std::size_t grid_intervals(double t_span, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (!(t_span > 0.0) || !std::isfinite(t_span)) throw ConfigError("t_span must be positive");
  const double ratio = t_span / dt;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-9 * std::max(1.0, n)) {
    throw ConfigError("dt does not divide t_span");
  }
  return static_cast<std::size_t>(n);
}

namespace {

// Dormand-Prince 5(4) tableau with Shampine's 4th-order continuous extension.
constexpr std::array<double, 6> kC{0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0};
constexpr double kA[6][5] = {
    {0, 0, 0, 0, 0},
    {1.0 / 5.0, 0, 0, 0, 0},
    {3.0 / 40.0, 9.0 / 40.0, 0, 0, 0},
    {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0, 0},
    {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0},
    {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0}};
constexpr std::array<double, 6> kB{35.0 / 384.0,     0.0, 500.0 / 1113.0, 125.0 / 192.0,
                                   -2187.0 / 6784.0, 11.0 / 84.0};
// 5th-order minus embedded 4th-order weights; the last entry multiplies the FSAL stage.
constexpr std::array<double, 7> kE{-71.0 / 57600.0,     0.0, 71.0 / 16695.0, -71.0 / 1920.0,
                                   17253.0 / 339200.0, -22.0 / 525.0, 1.0 / 40.0};
constexpr double kP[7][4] = {
    {1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0,
     -12715105075.0 / 11282082432.0},
    {0, 0, 0, 0},
    {0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0,
     87487479700.0 / 32700410799.0},
    {0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0,
     -10690763975.0 / 1880347072.0},
    {0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0,
     701980252875.0 / 199316789632.0},
    {0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0, -1453857185.0 / 822651844.0},
    {0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0}};

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;

class DormandPrince {
 public:
  DormandPrince(const VectorField& field, const State& y0, const IntegratorOptions& opts)
      : field_(field), opts_(opts), y_(y0), f_(field(y0)) {
    if (!(opts.abs_tol > 0.0) || opts.rel_tol < 0.0 || !(opts.min_step > 0.0)) {
      throw ConfigError("integrator tolerances must be positive");
    }
    if (!is_finite(y0)) throw NonFiniteState(0, "initial state");
    h_ = initial_step();
  }

  [[nodiscard]] double t() const noexcept { return t_; }
  [[nodiscard]] double t_prev() const noexcept { return t_prev_; }
  [[nodiscard]] const State& y() const noexcept { return y_; }

  // Takes one accepted step not exceeding t_end; t_end is hit exactly.
  void step_toward(double t_end, std::size_t sample_index) {
    for (;;) {
      if (++attempts_ > opts_.max_steps) throw StepSizeUnderflow(t_, h_);
      double h = std::min(h_, opts_.max_step);
      bool last = false;
      if (t_ + h >= t_end || t_ + 1.01 * h >= t_end) {
        h = t_end - t_;
        last = true;
      }
      if (h < opts_.min_step && !last) throw StepSizeUnderflow(t_, h);

      std::array<State, 7> k;
      k[0] = f_;
      for (int s = 1; s < 6; ++s) {
        State acc = State::Zero();
        for (int j = 0; j < s; ++j) acc += kA[s][j] * k[j];
        k[s] = field_(y_ + h * acc);
      }
      State incr = State::Zero();
      for (int j = 0; j < 6; ++j) incr += kB[j] * k[j];
      const State y_new = y_ + h * incr;
      if (!is_finite(y_new)) throw NonFiniteState(sample_index);
      k[6] = field_(y_new);

      State err = State::Zero();
      for (int j = 0; j < 7; ++j) err += kE[j] * k[j];
      err *= h;
      double err_norm = 0.0;
      for (int i = 0; i < kStateDim; ++i) {
        const double scale =
            opts_.abs_tol + opts_.rel_tol * std::max(std::abs(y_[i]), std::abs(y_new[i]));
        err_norm = std::max(err_norm, std::abs(err[i]) / scale);
      }

      if (err_norm <= 1.0) {
        double factor = err_norm == 0.0 ? kMaxFactor
                                         : std::min(kMaxFactor, kSafety * std::pow(err_norm, -0.2));
        if (rejected_) factor = std::min(factor, 1.0);
        rejected_ = false;
        y_prev_ = y_;
        t_prev_ = t_;
        h_last_ = h;
        k_ = k;
        y_ = y_new;
        f_ = k[6];
        t_ = last ? t_end : t_ + h;
        // Keep the controller's proposal from the full step, not a clipped one.
        if (!last || h >= h_) h_ = h * factor;
        return;
      }
      h_ = h * std::max(kMinFactor, kSafety * std::pow(err_norm, -0.2));
      rejected_ = true;
      if (h_ < opts_.min_step) throw StepSizeUnderflow(t_, h_);
    }
  }

  // 4th-order interpolant on the last accepted step, t in [t_prev, t].
  [[nodiscard]] State dense(double t) const {
    const double x = (t - t_prev_) / h_last_;
    const std::array<double, 4> pw{x, x * x, x * x * x, x * x * x * x};
    State acc = State::Zero();
    for (int j = 0; j < 7; ++j) {
      const double w = kP[j][0] * pw[0] + kP[j][1] * pw[1] + kP[j][2] * pw[2] + kP[j][3] * pw[3];
      acc += w * k_[j];
    }
    return y_prev_ + h_last_ * acc;
  }

 private:
  [[nodiscard]] double scaled_norm(const State& v, const State& ref) const {
    double n = 0.0;
    for (int i = 0; i < kStateDim; ++i) {
      n = std::max(n, std::abs(v[i]) / (opts_.abs_tol + opts_.rel_tol * std::abs(ref[i])));
    }
    return n;
  }

  // Hairer-Norsett-Wanner starting step heuristic.
  [[nodiscard]] double initial_step() const {
    const double d0 = scaled_norm(y_, y_);
    const double d1 = scaled_norm(f_, y_);
    const double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    const State y1 = y_ + h0 * f_;
    const State f1 = field_(y1);
    const double d2 = scaled_norm(f1 - f_, y_) / h0;
    const double h1 = (d1 <= 1e-15 && d2 <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                    : std::pow(0.01 / std::max(d1, d2), 0.2);
    return std::max(opts_.min_step, std::min(100.0 * h0, h1));
  }

  const VectorField& field_;
  IntegratorOptions opts_;
  State y_;
  State f_;
  State y_prev_ = State::Zero();
  std::array<State, 7> k_{};
  double t_ = 0.0;
  double t_prev_ = 0.0;
  double h_ = 0.0;
  double h_last_ = 1.0;
  bool rejected_ = false;
  std::size_t attempts_ = 0;
};

}  // namespace

Trajectory integrate(const VectorField& field, const State& s0, double t_span, double dt,
                     const IntegratorOptions& opts) {
  const std::size_t n = grid_intervals(t_span, dt);
  const double t_end = static_cast<double>(n) * dt;
  std::vector<State> samples;
  samples.reserve(n + 1);
  samples.push_back(s0);

  DormandPrince stepper(field, s0, opts);
  std::size_t next = 1;
  while (next <= n) {
    stepper.step_toward(t_end, next);
    while (next <= n) {
      const double tg = static_cast<double>(next) * dt;
      if (tg > stepper.t()) break;
      samples.push_back(tg == stepper.t() ? stepper.y() : stepper.dense(tg));
      ++next;
    }
  }
  return {dt, 0.0, std::move(samples)};
}

Trajectory integrate(const State& s0, const SystemParams& p, double t_span, double dt,
                     const IntegratorOptions& opts) {
  return integrate(li_sprott_field(p), s0, t_span, dt, opts);
}

State advance(const VectorField& field, const State& s0, double duration,
              const IntegratorOptions& opts) {
  if (duration == 0.0) return s0;
  if (!(duration > 0.0) || !std::isfinite(duration)) throw ConfigError("duration must be >= 0");
  DormandPrince stepper(field, s0, opts);
  std::size_t steps = 0;
  while (stepper.t() < duration) stepper.step_toward(duration, ++steps);
  return stepper.y();
}

State advance(const State& s0, const SystemParams& p, double duration,
              const IntegratorOptions& opts) {
  return advance(li_sprott_field(p), s0, duration, opts);
}

}  // namespace ngrc
