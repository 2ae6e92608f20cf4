#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ngrc/dynamics.hpp"
#include "ngrc/features.hpp"

namespace ngrc {

struct NgrcConfig {
  std::size_t d = kStateDim;
  std::size_t k = 2;
  double dt = 0.05;
  double alpha = 4e-5;
  double constant_term = 1.0;

  /// Throws ConfigError on d != 4, k == 0, dt <= 0 or alpha < 0.
  void validate() const;
  [[nodiscard]] std::size_t feature_dim() const noexcept { return ngrc::feature_dim(d, k); }
};

/// Trained next-generation reservoir computer: learns the one-step flow
/// increment x_{n+1} - x_n as a linear readout of delay-embedded polynomial
/// features. Immutable after construction.
class NgrcModel {
 public:
  /// Throws FormatError if w_out is not d x feature_dim or not finite.
  NgrcModel(NgrcConfig config, Eigen::MatrixXd w_out);

  [[nodiscard]] const NgrcConfig& config() const noexcept { return config_; }
  [[nodiscard]] const Eigen::MatrixXd& w_out() const noexcept { return w_out_; }
  [[nodiscard]] std::size_t taps() const noexcept { return config_.k; }
  [[nodiscard]] std::size_t feature_dim() const noexcept { return config_.feature_dim(); }
  [[nodiscard]] std::size_t weight_count() const noexcept {
    return static_cast<std::size_t>(w_out_.size());
  }

 private:
  NgrcConfig config_;
  Eigen::MatrixXd w_out_;
};

/// Ridge regression readout W = Y O^T (O O^T + alpha I)^-1, computed with a
/// Cholesky solve of the regularised normal equations. `features` is
/// (n_features x n_samples), `targets` is (n_outputs x n_samples).
/// Throws SingularSystem if the Gram matrix is not positive definite.
[[nodiscard]] Eigen::MatrixXd ridge_solve(const Eigen::MatrixXd& features,
                                          const Eigen::MatrixXd& targets, double alpha);

/// Feature matrix whose column c uses the window ending at sample k-1+c,
/// for every window that has a successor (N - k columns).
[[nodiscard]] Eigen::MatrixXd training_features(const Trajectory& traj, const NgrcConfig& cfg);

/// Fits W_out on every full window of `traj` against the next increment.
/// Throws InsufficientData if traj has fewer than k + 1 samples, ConfigError
/// if traj.dt() != cfg.dt.
[[nodiscard]] NgrcModel train(const Trajectory& traj, const NgrcConfig& cfg);

/// x_n + W_out O_total(window). Throws NonFiniteState on overflow.
[[nodiscard]] State step(const NgrcModel& model, const DelayWindow& w);

/// One-step predictions of samples k..N-1 of `traj`, each from the true
/// preceding window.
[[nodiscard]] Trajectory one_step_predictions(const NgrcModel& model, const Trajectory& traj);

/// NRMSE of one_step_predictions against the data.
[[nodiscard]] double training_nrmse(const NgrcModel& model, const Trajectory& traj);

/// Closed-loop forecast. `warmup` holds exactly k states, oldest first, the
/// first of them at time `t_start`. Returns the n_steps new states (warm-up
/// excluded), starting at t_start + k dt. Throws NonFiniteState with the
/// step index on divergence.
[[nodiscard]] Trajectory forecast(const NgrcModel& model, std::span<const State> warmup,
                                  std::size_t n_steps, double t_start = 0.0);

/// Result of a closed-loop run that is allowed to diverge.
struct ClosedLoopEnd {
  State last;                             // final state, or last finite one
  std::optional<std::size_t> diverged_at;  // forecast step that overflowed
};

/// Like forecast but keeps only the final state and reports divergence
/// instead of throwing.
[[nodiscard]] ClosedLoopEnd run_closed_loop(const NgrcModel& model, std::span<const State> warmup,
                                            std::size_t n_steps);

/// Builds a k = K warm-up from a single initial condition using a ladder of
/// models with k = 1..K: the k = j model produces state j + 1.
/// Throws LadderGap if a tap count is missing or the ladder is inconsistent.
[[nodiscard]] std::vector<State> bootstrap_warmup(std::span<const NgrcModel> ladder,
                                                  const State& ic);

/// Per component RMS(pred - truth) / std(truth) (population std), then RMS
/// across the four components. Throws DegenerateTruth on a constant truth
/// component, std::invalid_argument on a length or dt mismatch.
[[nodiscard]] double nrmse(const Trajectory& pred, const Trajectory& truth);

}  // namespace ngrc
