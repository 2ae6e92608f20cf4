#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/LU>

#include "ngrc/dynamics.hpp"
#include "ngrc/errors.hpp"
#include "ngrc/model.hpp"

using namespace ngrc;

namespace {

const Trajectory& torus_data() {
  static const Trajectory traj = integrate(State(1, -1, 1, -1), SystemParams{}, 300.0, 0.05);
  return traj;
}

const NgrcModel& torus_model() {
  static const NgrcModel model = train(torus_data(), NgrcConfig{});
  return model;
}

// Ridge readout straight from the closed form, with an explicit inverse.
Eigen::MatrixXd ridge_explicit(const Eigen::MatrixXd& o, const Eigen::MatrixXd& y, double alpha) {
  const Eigen::MatrixXd gram =
      o * o.transpose() + alpha * Eigen::MatrixXd::Identity(o.rows(), o.rows());
  return y * o.transpose() * gram.inverse();
}

// Population standard deviation per component, computed by hand.
State population_std(const Trajectory& t) {
  State mean = State::Zero(), sq = State::Zero();
  for (const State& s : t.samples()) mean += s;
  mean /= static_cast<double>(t.size());
  for (const State& s : t.samples()) sq += (s - mean).cwiseAbs2();
  return (sq / static_cast<double>(t.size())).cwiseSqrt();
}

}  // namespace

TEST_SUITE("ngrc") {

TEST_CASE("weight count") {
  CHECK(torus_model().feature_dim() == 45);
  CHECK(torus_model().weight_count() == 180);
  CHECK(torus_model().w_out().rows() == 4);
}

TEST_CASE("config validation") {
  NgrcConfig c;
  c.k = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.alpha = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.dt = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("model rejects bad weights") {
  CHECK_THROWS_AS(NgrcModel(NgrcConfig{}, Eigen::MatrixXd::Zero(4, 44)), FormatError);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 45);
  w(1, 3) = std::nan("");
  CHECK_THROWS_AS(NgrcModel(NgrcConfig{}, w), FormatError);
}

TEST_CASE("ridge solve matches the explicit inverse") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> dist;
  std::uniform_int_distribution<int> rows(1, 10), cols(1, 20), outs(1, 4);
  for (int trial = 0; trial < 200; ++trial) {
    const int f = rows(rng), n = cols(rng), d = outs(rng);
    Eigen::MatrixXd o(f, n), y(d, n);
    for (auto& x : o.reshaped()) x = dist(rng);
    for (auto& x : y.reshaped()) x = dist(rng);
    const double alpha = std::pow(10.0, std::uniform_real_distribution<double>(-3, 1)(rng));
    const Eigen::MatrixXd w = ridge_solve(o, y, alpha);
    const Eigen::MatrixXd ref = ridge_explicit(o, y, alpha);
    CAPTURE(trial);
    CHECK((w - ref).norm() <= 1e-10 * ref.norm());
  }
}

TEST_CASE("ridge shrinkage is monotone in alpha") {
  double prev = std::numeric_limits<double>::infinity();
  double first = 0.0;
  for (double alpha = 1e-4; alpha <= 1e8; alpha *= 10) {
    NgrcConfig c;
    c.alpha = alpha;
    const double norm = train(torus_data().slice(0, 400), c).w_out().norm();
    CHECK(norm < prev);
    if (first == 0.0) first = norm;
    prev = norm;
  }
  CHECK(prev < 1e-3 * first);
}

TEST_CASE("singular system at alpha = 0") {
  Eigen::MatrixXd o = Eigen::MatrixXd::Ones(3, 5);
  CHECK_THROWS_AS((void)ridge_solve(o, Eigen::MatrixXd::Ones(1, 5), 0.0), SingularSystem);
}

TEST_CASE("exact fit of a known linear map") {
  // x_{n+1} = x_n + W O(x_n) with W touching only the constant and linear
  // features; a slowly decaying rotation keeps the data well conditioned.
  NgrcConfig cfg;
  cfg.k = 1;
  cfg.alpha = 0.0;
  Eigen::MatrixXd w_true = Eigen::MatrixXd::Zero(4, 15);
  w_true.col(0) << 0.01, -0.02, 0.03, 0.005;
  Eigen::Matrix4d a;
  a << -0.01, 0.2, 0, 0,
       -0.2, -0.01, 0, 0,
       0, 0, -0.02, 0.15,
       0, 0, -0.15, -0.02;
  w_true.block(0, 1, 4, 4) = a;
  std::vector<State> s{State(1, 0.5, -1, 2)};
  for (int i = 0; i < 300; ++i) {
    const State& x = s.back();
    s.push_back(x + w_true.col(0) + a * x);
  }
  const NgrcModel m = train(Trajectory(0.05, 0.0, s), cfg);
  CHECK((m.w_out() - w_true).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("train preconditions") {
  CHECK_THROWS_AS((void)train(torus_data().slice(0, 2), NgrcConfig{}), InsufficientData);
  NgrcConfig c;
  c.dt = 0.1;
  CHECK_THROWS_AS((void)train(torus_data(), c), ConfigError);
  CHECK(training_features(torus_data(), NgrcConfig{}).cols() == 5999);
}

TEST_CASE("training error on the torus") {
  CHECK(training_nrmse(torus_model(), torus_data()) <= 1e-4);
}

TEST_CASE("one-step residual stays near the NRMSE scale") {
  const Trajectory pred = one_step_predictions(torus_model(), torus_data());
  const Trajectory truth = torus_data().drop_front(2);
  REQUIRE(pred.size() == truth.size());
  CHECK(pred.t0() == truth.t0());
  const double scale = nrmse(pred, truth);
  const State sd = population_std(truth);
  double worst = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    worst = std::max(worst, ((pred[i] - truth[i]).array() / sd.array()).abs().maxCoeff());
  }
  CHECK(worst <= 10.0 * scale);
}

TEST_CASE("step") {
  const NgrcModel zero(NgrcConfig{}, Eigen::MatrixXd::Zero(4, 45));
  DelayWindow w(2);
  w.push(State(1, 2, 3, 4));
  w.push(State(5, 6, 7, 8));
  CHECK(step(zero, w) == State(5, 6, 7, 8));

  const Trajectory& data = torus_data();
  const auto tail = data.samples().last(2);
  const State next = step(torus_model(), DelayWindow(2, tail));
  const State truth = advance(data.back(), SystemParams{}, 0.05);
  CHECK((next - truth).cwiseAbs().maxCoeff() <= 1e-3);

  Eigen::MatrixXd huge = Eigen::MatrixXd::Zero(4, 45);
  huge(0, 0) = std::numeric_limits<double>::max();
  huge(0, 1) = std::numeric_limits<double>::max();
  CHECK_THROWS_AS((void)step(NgrcModel(NgrcConfig{}, huge), w), NonFiniteState);
}

TEST_CASE("step is equivariant when the model is") {
  // A readout built from odd features only commutes with the symmetry.
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 45);
  w(0, 1) = -0.05;
  w(0, 2) = 0.05;
  w(1, 4) = 0.05;
  w(2, 0) = -0.3;
  w(3, 2) = -0.005;
  const NgrcModel m(NgrcConfig{}, w);
  DelayWindow a(2), b(2);
  for (const State& s : {State(0.2, 3.1, -0.4, -4.5), State(0.4, 2.9, -0.6, -4.4)}) {
    a.push(s);
    b.push(symmetry_map(s));
  }
  CHECK(step(m, b) == symmetry_map(step(m, a)));
}

TEST_CASE("forecast generalizes on the torus") {
  const Trajectory& data = torus_data();
  const Trajectory pred = forecast(torus_model(), data.samples().last(2), 3000, data.time(5999));
  const Trajectory cont = integrate(data.back(), SystemParams{}, 150.0, 0.05).drop_front(1);
  CHECK(pred.size() == 3000);
  CHECK(pred.t0() == doctest::Approx(300.05));
  CHECK(nrmse(pred, Trajectory(0.05, pred.t0(), {cont.samples().begin(), cont.samples().end()})) <=
        1e-2);
}

TEST_CASE("forecast contracts") {
  const auto tail = torus_data().samples().last(2);
  CHECK_THROWS_AS((void)forecast(torus_model(), tail.last(1), 10), WindowNotFull);
  const Trajectory a = forecast(torus_model(), tail, 500);
  const Trajectory b = forecast(torus_model(), tail, 500);
  CHECK(a == b);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 45);
  w(3, 30) = 1e3;  // u += 1e3 u^2 overflows within a few steps
  try {
    (void)forecast(NgrcModel(NgrcConfig{}, w), tail, 100000);
    FAIL("expected divergence");
  } catch (const NonFiniteState& e) {
    CHECK(e.index < 100000);
  }
  const ClosedLoopEnd end = run_closed_loop(NgrcModel(NgrcConfig{}, w), tail, 100000);
  CHECK(end.diverged_at.has_value());
  CHECK(is_finite(end.last));
  CHECK(run_closed_loop(torus_model(), tail, 500).last == a.back());
}

TEST_CASE("bootstrap warm-up") {
  NgrcConfig c1;
  c1.k = 1;
  const NgrcModel k1 = train(torus_data(), c1);
  const State ic(0, 4, 0, -5);
  const std::vector<NgrcModel> ladder{k1, torus_model()};
  const auto warm = bootstrap_warmup(ladder, ic);
  REQUIRE(warm.size() == 2);
  CHECK(warm[0] == ic);
  DelayWindow w(1);
  w.push(ic);
  CHECK(warm[1] == step(k1, w));

  const std::vector<NgrcModel> only_k1{k1};
  CHECK(bootstrap_warmup(only_k1, ic) == std::vector<State>{ic});
  const std::vector<NgrcModel> gap{torus_model()};
  CHECK_THROWS_AS((void)bootstrap_warmup(gap, ic), LadderGap);
  CHECK_THROWS_AS((void)bootstrap_warmup(std::vector<NgrcModel>{k1, k1}, ic), LadderGap);
}

TEST_CASE("nrmse") {
  const Trajectory truth = torus_data().slice(0, 1000);
  CHECK(nrmse(truth, truth) == 0.0);
  const double eps = 0.37;
  std::vector<State> shifted(truth.samples().begin(), truth.samples().end());
  for (auto& s : shifted) s[0] += eps;
  // Closed form: only x contributes eps / sigma_x, and RMS over 4 halves it.
  const double sx = population_std(truth)[0];
  CHECK(nrmse(Trajectory(truth.dt(), truth.t0(), shifted), truth) ==
        doctest::Approx(eps / sx / 2.0).epsilon(1e-12));
  CHECK_THROWS_AS((void)nrmse(truth.slice(0, 10), truth), std::invalid_argument);
  const Trajectory flat(0.05, 0.0, std::vector<State>(5, State::Ones()));
  CHECK_THROWS_AS((void)nrmse(flat, flat), DegenerateTruth);
}

}
