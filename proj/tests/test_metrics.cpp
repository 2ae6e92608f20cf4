#include <doctest.h>

#include <array>
#include <random>

#include "ngrc/dynamics.hpp"
#include "ngrc/errors.hpp"
#include "ngrc/metrics.hpp"

using namespace ngrc;

namespace {

Trajectory random_traj(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> dist(0.5, 2.0);
  std::vector<State> s(n);
  for (auto& x : s) x = State(dist(rng), dist(rng), dist(rng), dist(rng));
  return {0.05, 0.0, s};
}

AttractorStats random_stats(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> m(-3.0, 3.0), extra(0.1, 2.0);
  AttractorStats s;
  for (int i = 0; i < 4; ++i) {
    s.mean[i] = m(rng);
    s.mean_abs[i] = std::abs(s.mean[i]) + extra(rng);
  }
  s.duration = 10.0;
  return s;
}

AttractorStats mirror(AttractorStats s) {
  for (int i : {0, 1, 3}) s.mean[i] = -s.mean[i];
  return s;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("labels") {
  for (auto l : kAllLabels) CHECK(parse_label(to_string(l)) == l);
  CHECK_THROWS_AS((void)parse_label("chaos"), FormatError);
  CHECK(mirrored(AttractorLabel::chaos_neg) == AttractorLabel::chaos_pos);
  CHECK(mirrored(AttractorLabel::torus) == AttractorLabel::torus);
}

TEST_CASE("stats examples") {
  const AttractorStats c = stats(Trajectory(0.05, 0.0, std::vector<State>(7, State(1, -1, 1, -1))));
  CHECK(c.mean == std::array<double, 4>{1, -1, 1, -1});
  CHECK(c.mean_abs == std::array<double, 4>{1, 1, 1, 1});
  CHECK(c.duration == doctest::Approx(0.35));

  std::vector<State> alt;
  for (int i = 0; i < 10; ++i) alt.push_back(State(i % 2 ? -1 : 1, 0, 0, 0));
  const AttractorStats a = stats(Trajectory(0.05, 0.0, alt));
  CHECK(a.mean[0] == 0.0);
  CHECK(a.mean_abs[0] == 1.0);
}

TEST_CASE("stats of a long chaos_neg run") {
  const Trajectory t = integrate(State(0, 4, 0, -5), SystemParams{}, 5000.0, 0.05);
  CHECK(stats(t).mean[3] < -2.0);
}

TEST_CASE("stats invariants") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Trajectory t = random_traj(rng, 200);
    const AttractorStats s = stats(t);
    const AttractorStats m = stats(t.mirrored());
    for (int i = 0; i < 4; ++i) {
      CHECK(s.mean_abs[i] >= std::abs(s.mean[i]));
      CHECK(m.mean_abs[i] == s.mean_abs[i]);
      CHECK(m.mean[i] == (i == 2 ? s.mean[i] : -s.mean[i]));
    }
    CHECK(s.duration > 0.0);
  }
}

TEST_CASE("delta pair") {
  std::mt19937_64 rng(9);
  const AttractorStats truth = random_stats(rng);
  for (double v : delta_pair(truth, truth).flat()) CHECK(v == 0.0);

  AttractorStats f = truth;
  f.mean[3] += 0.5;
  f.mean_abs[1] -= 0.25;
  const AttractorDeltas d = delta_pair(f, truth);
  CHECK(d.center[3] == doctest::Approx(0.5 / truth.mean_abs[3]));
  CHECK(d.extent[1] == doctest::Approx(-0.25 / truth.mean_abs[1]));
  const auto flat = d.flat();
  CHECK(flat[6] == d.center[3]);
  CHECK(flat[3] == d.extent[1]);

  AttractorStats degenerate = truth;
  degenerate.mean_abs[2] = 0.0;
  CHECK_THROWS_AS((void)delta_pair(f, degenerate), DegenerateTruth);
}

TEST_CASE("delta pair under the symmetry") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const AttractorStats f = random_stats(rng), t = random_stats(rng);
    const AttractorDeltas a = delta_pair(f, t);
    const AttractorDeltas b = delta_pair(mirror(f), mirror(t));
    for (int i = 0; i < 4; ++i) {
      CHECK(b.center[i] == (i == 2 ? a.center[i] : -a.center[i]));
      CHECK(b.extent[i] == a.extent[i]);
    }
  }
}

TEST_CASE("delta_att and delta_tot") {
  const std::array<double, 8> zeros{};
  CHECK(delta_att(zeros) == 0.0);
  std::array<double, 8> one{};
  one[5] = 0.3;
  CHECK(delta_att(one) == 0.3);
  CHECK(delta_tot(std::array<double, 3>{0, 0, 0}) == 0.0);
  CHECK(delta_tot(std::array<double, 3>{3, 4, 0}) == 5.0);
}

TEST_CASE("norm properties") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 100; ++trial) {
    std::array<double, 8> v;
    for (auto& x : v) x = dist(rng);
    const double n = delta_att(v);
    CHECK(n > 0.0);
    std::array<double, 8> scaled;
    for (std::size_t i = 0; i < 8; ++i) scaled[i] = -3.0 * v[i];
    CHECK(delta_att(scaled) == doctest::Approx(3.0 * n).epsilon(1e-14));
    std::array<double, 3> t{v[0], v[1], v[2]};
    std::array<double, 3> t2{2 * v[0], 2 * v[1], 2 * v[2]};
    CHECK(delta_tot(t) >= 0.0);
    CHECK(delta_tot(t2) == doctest::Approx(2.0 * delta_tot(t)).epsilon(1e-14));
  }
}

TEST_CASE("valid time") {
  std::mt19937_64 rng(21);
  const Trajectory truth = random_traj(rng, 400);
  CHECK(valid_time(truth, truth) == doctest::Approx(400 * 0.05));
  std::vector<State> s(truth.samples().begin(), truth.samples().end());
  s[100][2] += 10.0 * component_std(truth)[2];
  CHECK(valid_time(Trajectory(0.05, 0.0, s), truth) == doctest::Approx(100 * 0.05));
  s[100][2] = truth[100][2] + 0.39 * component_std(truth)[2];
  CHECK(valid_time(Trajectory(0.05, 0.0, s), truth) == doctest::Approx(400 * 0.05));
  CHECK(valid_time(Trajectory(0.05, 0.0, s), truth, 0.3) == doctest::Approx(100 * 0.05));
  CHECK_THROWS_AS((void)valid_time(truth.slice(0, 3), truth), std::invalid_argument);
}

}
