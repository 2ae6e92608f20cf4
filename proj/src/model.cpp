#include "ngrc/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

#include "ngrc/errors.hpp"

namespace ngrc {

void NgrcConfig::validate() const {
  if (d != static_cast<std::size_t>(kStateDim)) {
    throw ConfigError("state dimension d must be " + std::to_string(kStateDim));
  }
  if (k == 0) throw ConfigError("tap count k must be >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be >= 0");
  if (!std::isfinite(constant_term)) throw ConfigError("constant term must be finite");
}

NgrcModel::NgrcModel(NgrcConfig config, Eigen::MatrixXd w_out)
    : config_(config), w_out_(std::move(w_out)) {
  config_.validate();
  if (static_cast<std::size_t>(w_out_.rows()) != config_.d ||
      static_cast<std::size_t>(w_out_.cols()) != config_.feature_dim()) {
    throw FormatError("w_out must be " + std::to_string(config_.d) + " x " +
                      std::to_string(config_.feature_dim()) + ", got " +
                      std::to_string(w_out_.rows()) + " x " + std::to_string(w_out_.cols()));
  }
  if (!w_out_.allFinite()) throw FormatError("w_out contains non-finite weights");
}

Eigen::MatrixXd ridge_solve(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets,
                            double alpha) {
  if (features.cols() != targets.cols()) {
    throw std::invalid_argument("features and targets disagree on sample count");
  }
  if (alpha < 0.0) throw ConfigError("alpha must be >= 0");
  const Eigen::Index nf = features.rows();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(nf, nf);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(features);
  gram.diagonal().array() += alpha;
  const Eigen::MatrixXd rhs = features * targets.transpose();

  const Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw SingularSystem("regularised normal equations are not positive definite");
  }
  Eigen::MatrixXd w = llt.solve(rhs).transpose();
  if (!w.allFinite()) throw SingularSystem("ridge solution is not finite");
  return w;
}

Eigen::MatrixXd training_features(const Trajectory& traj, const NgrcConfig& cfg) {
  cfg.validate();
  const std::size_t n = traj.size();
  if (n < cfg.k + 1) {
    throw InsufficientData("need at least k+1 = " + std::to_string(cfg.k + 1) +
                           " samples, got " + std::to_string(n));
  }
  const std::size_t cols = n - cfg.k;
  Eigen::MatrixXd features(static_cast<Eigen::Index>(cfg.feature_dim()),
                           static_cast<Eigen::Index>(cols));
  DelayWindow window(cfg.k, traj.samples().first(cfg.k));
  for (std::size_t c = 0; c < cols; ++c) {
    if (c > 0) window.push(traj[cfg.k - 1 + c]);
    write_total_features(window, cfg.constant_term, features.col(static_cast<Eigen::Index>(c)));
  }
  return features;
}

NgrcModel train(const Trajectory& traj, const NgrcConfig& cfg) {
  cfg.validate();
  if (traj.dt() != cfg.dt) throw ConfigError("trajectory dt does not match model dt");
  const Eigen::MatrixXd features = training_features(traj, cfg);
  const Eigen::Index cols = features.cols();
  Eigen::MatrixXd targets(kStateDim, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    const std::size_t n = cfg.k - 1 + static_cast<std::size_t>(c);
    targets.col(c) = traj[n + 1] - traj[n];
  }
  return {cfg, ridge_solve(features, targets, cfg.alpha)};
}

namespace {

// Reusable closed-loop state; avoids per-step allocation.
class Stepper {
 public:
  explicit Stepper(const NgrcModel& model)
      : model_(model), features_(static_cast<Eigen::Index>(model.feature_dim())) {}

  [[nodiscard]] State next(const DelayWindow& w) {
    write_total_features(w, model_.config().constant_term, features_);
    return w.newest() + model_.w_out() * features_;
  }

 private:
  const NgrcModel& model_;
  Eigen::VectorXd features_;
};

DelayWindow checked_warmup(const NgrcModel& model, std::span<const State> warmup) {
  if (warmup.size() != model.taps()) throw WindowNotFull(warmup.size(), model.taps());
  for (const auto& s : warmup) {
    if (!is_finite(s)) throw NonFiniteState(0, "warm-up state");
  }
  return DelayWindow(model.taps(), warmup);
}

}  // namespace

State step(const NgrcModel& model, const DelayWindow& w) {
  if (w.capacity() != model.taps()) throw WindowNotFull(w.size(), model.taps());
  Stepper stepper(model);
  State next = stepper.next(w);
  if (!is_finite(next)) throw NonFiniteState(0);
  return next;
}

Trajectory one_step_predictions(const NgrcModel& model, const Trajectory& traj) {
  const NgrcConfig& cfg = model.config();
  if (traj.size() < cfg.k + 1) throw InsufficientData("trajectory shorter than k+1 samples");
  Stepper stepper(model);
  DelayWindow window(cfg.k, traj.samples().first(cfg.k));
  std::vector<State> out;
  out.reserve(traj.size() - cfg.k);
  for (std::size_t n = cfg.k - 1; n + 1 < traj.size(); ++n) {
    if (n >= cfg.k) window.push(traj[n]);
    out.push_back(stepper.next(window));
  }
  return {traj.dt(), traj.time(cfg.k), std::move(out)};
}

double training_nrmse(const NgrcModel& model, const Trajectory& traj) {
  const Trajectory pred = one_step_predictions(model, traj);
  return nrmse(pred, traj.drop_front(model.taps()));
}

Trajectory forecast(const NgrcModel& model, std::span<const State> warmup, std::size_t n_steps,
                    double t_start) {
  DelayWindow window = checked_warmup(model, warmup);
  Stepper stepper(model);
  std::vector<State> out;
  out.reserve(n_steps);
  for (std::size_t i = 0; i < n_steps; ++i) {
    const State next = stepper.next(window);
    if (!is_finite(next)) throw NonFiniteState(i, "forecast state");
    out.push_back(next);
    window.push(next);
  }
  const double dt = model.config().dt;
  return {dt, t_start + static_cast<double>(model.taps()) * dt, std::move(out)};
}

ClosedLoopEnd run_closed_loop(const NgrcModel& model, std::span<const State> warmup,
                              std::size_t n_steps) {
  DelayWindow window = checked_warmup(model, warmup);
  Stepper stepper(model);
  for (std::size_t i = 0; i < n_steps; ++i) {
    const State next = stepper.next(window);
    if (!is_finite(next)) return {window.newest(), i};
    window.push(next);
  }
  return {window.newest(), std::nullopt};
}

std::vector<State> bootstrap_warmup(std::span<const NgrcModel> ladder, const State& ic) {
  const std::size_t top = ladder.size();
  if (top == 0) throw LadderGap("bootstrap ladder is empty");
  std::vector<const NgrcModel*> by_taps(top + 1, nullptr);
  for (const auto& m : ladder) {
    const std::size_t k = m.taps();
    if (k == 0 || k > top || by_taps[k] != nullptr) {
      throw LadderGap("ladder must hold exactly one model for each k = 1.." + std::to_string(top));
    }
    by_taps[k] = &m;
  }
  const NgrcConfig& ref = by_taps[1]->config();
  for (std::size_t k = 2; k <= top; ++k) {
    const NgrcConfig& c = by_taps[k]->config();
    if (c.d != ref.d || c.dt != ref.dt) throw LadderGap("ladder models disagree on d or dt");
  }

  std::vector<State> states{ic};
  states.reserve(top);
  for (std::size_t k = 1; k < top; ++k) {
    const DelayWindow window(k, states);
    states.push_back(step(*by_taps[k], window));
  }
  return states;
}

double nrmse(const Trajectory& pred, const Trajectory& truth) {
  if (pred.size() != truth.size() || pred.empty()) {
    throw std::invalid_argument("nrmse needs equal-length, non-empty trajectories");
  }
  if (pred.dt() != truth.dt()) throw std::invalid_argument("nrmse needs equal dt");
  const auto n = static_cast<double>(truth.size());
  State mean = State::Zero();
  for (const auto& s : truth.samples()) mean += s;
  mean /= n;
  State var = State::Zero();
  State sq_err = State::Zero();
  for (std::size_t i = 0; i < truth.size(); ++i) {
    var += (truth[i] - mean).cwiseAbs2();
    sq_err += (pred[i] - truth[i]).cwiseAbs2();
  }
  double acc = 0.0;
  for (int c = 0; c < kStateDim; ++c) {
    if (!(var[c] > 0.0)) throw DegenerateTruth("truth component has zero variance");
    acc += sq_err[c] / var[c];  // (rms_err / std)^2, the 1/n cancels
  }
  return std::sqrt(acc / kStateDim);
}

}  // namespace ngrc
