#include <doctest.h>

#include <random>

#include "ngrc/basin.hpp"
#include "ngrc/errors.hpp"

using namespace ngrc;

namespace {

const NgrcModel& torus_model() {
  static const NgrcModel m =
      train(integrate(State(1, -1, 1, -1), SystemParams{}, 300.0, 0.05), NgrcConfig{});
  return m;
}

const NgrcModel& k1_model() {
  static const NgrcModel m = [] {
    NgrcConfig c;
    c.k = 1;
    return train(integrate(State(1, -1, 1, -1), SystemParams{}, 300.0, 0.05), c);
  }();
  return m;
}

BasinRegion small_region(std::size_t n) {
  BasinRegion r = default_basin_region(n);
  return r;
}

}  // namespace

TEST_SUITE("basin") {

TEST_CASE("classify") {
  CHECK(classify(-5.0) == AttractorLabel::chaos_neg);
  CHECK(classify(0.0) == AttractorLabel::torus);
  CHECK(classify(-2.0) == AttractorLabel::torus);
  CHECK(classify(2.0) == AttractorLabel::torus);
  CHECK(classify(2.0001) == AttractorLabel::chaos_pos);
}

TEST_CASE("oracle basin points") {
  const BasinEngine oracle = BasinEngine::oracle(SystemParams{});
  CHECK(basin_point(State(0, 4, 0, -5), oracle) == AttractorLabel::chaos_neg);
  CHECK(basin_point(State(0, -4, 0, 5), oracle) == AttractorLabel::chaos_pos);
  CHECK(basin_point(State(1, -1, 1, -1), oracle) == AttractorLabel::torus);
  CHECK(oracle.model() == nullptr);
}

TEST_CASE("oracle symmetry on random initial conditions") {
  const BasinEngine oracle = BasinEngine::oracle(SystemParams{});
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> y(-10, 10), u(-6, 6), xz(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const State ic(xz(rng), y(rng), xz(rng), u(rng));
    CAPTURE(trial);
    CHECK(basin_point(symmetry_map(ic), oracle) == mirrored(basin_point(ic, oracle)));
  }
}

TEST_CASE("region nodes") {
  BasinRegion r;
  r.lo1 = 2;
  r.hi1 = 6;
  r.lo2 = -7;
  r.hi2 = -3;
  r.n1 = r.n2 = 5;
  CHECK(r.coord1(0) == 2.0);
  CHECK(r.coord1(4) == 6.0);
  CHECK(r.coord2(2) == -5.0);
  CHECK(r.initial_condition(1, 3) == State(0, 3, 0, -4));
  const BasinRegion m = r.mirrored();
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      CHECK(m.initial_condition(4 - i, 4 - j) == symmetry_map(r.initial_condition(i, j)));
    }
  }
  BasinRegion bad = r;
  bad.n1 = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = r;
  bad.hi2 = bad.lo2;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = r;
  bad.axis2 = bad.axis1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("names round-trip") {
  for (auto a : {Axis::x0, Axis::y0, Axis::z0, Axis::u0}) CHECK(parse_axis(to_string(a)) == a);
  for (auto e : {EngineKind::oracle, EngineKind::ngrc_oracle_warmup, EngineKind::ngrc_bootstrap}) {
    CHECK(parse_engine(to_string(e)) == e);
  }
  CHECK_THROWS_AS((void)parse_engine("rk4"), ConfigError);
}

TEST_CASE("2x2 smoke grid") {
  const BasinEngine oracle = BasinEngine::oracle(SystemParams{});
  const BasinGrid a = compute_basin(small_region(2), oracle, 50.0, 1);
  const BasinGrid b = compute_basin(small_region(2), oracle, 50.0, 3);
  CHECK(a.labels.size() == 4);
  CHECK(a == b);
  CHECK(a.count(AttractorLabel::torus) + a.count(AttractorLabel::chaos_neg) +
            a.count(AttractorLabel::chaos_pos) ==
        4);
}

TEST_CASE("order independence for every engine") {
  const BasinRegion r = small_region(8);
  const std::vector<BasinEngine> engines{
      BasinEngine::oracle(SystemParams{}),
      BasinEngine::ngrc_oracle_warmup(torus_model(), SystemParams{}),
      BasinEngine::ngrc_bootstrap({torus_model(), k1_model()})};
  for (const auto& e : engines) {
    const BasinGrid serial = compute_basin(r, e, 100.0, 1);
    for (unsigned w : {2u, 5u, 16u}) CHECK(compute_basin(r, e, 100.0, w) == serial);
    // Evaluating the pixels one by one in reverse order gives the same labels.
    for (std::size_t idx = r.n1 * r.n2; idx-- > 0;) {
      CHECK(e.evaluate(r.initial_condition(idx / r.n2, idx % r.n2), 100.0).label ==
            serial.labels[idx]);
    }
  }
}

TEST_CASE("oracle grid of the mirror region swaps chaotic labels") {
  const BasinEngine oracle = BasinEngine::oracle(SystemParams{});
  const BasinRegion r = small_region(12);
  const BasinGrid g = compute_basin(r, oracle);
  const BasinGrid m = compute_basin(r.mirrored(), oracle);
  CHECK(m == mirrored(g));
  CHECK(g.count(AttractorLabel::chaos_neg) == m.count(AttractorLabel::chaos_pos));
  // The default window mixes all three basins.
  for (auto l : kAllLabels) CHECK(g.count(l) > 0);
}

TEST_CASE("agreement") {
  const BasinEngine oracle = BasinEngine::oracle(SystemParams{});
  const BasinGrid g = compute_basin(small_region(6), oracle, 100.0);
  const BasinAgreement self = agreement(g, g);
  for (auto l : kAllLabels) {
    if (g.count(l) > 0) CHECK(*self.fraction(l) == 1.0);
  }
  CHECK(self.overall() == 1.0);

  BasinGrid h = g;
  std::size_t flipped = 0;
  for (auto& l : h.labels) {
    if (l == AttractorLabel::chaos_neg) {
      l = AttractorLabel::torus;
      ++flipped;
      break;
    }
  }
  const BasinAgreement a = agreement(g, h);
  if (flipped == 1) {
    const double n = static_cast<double>(g.count(AttractorLabel::chaos_neg));
    CHECK(*a.fraction(AttractorLabel::chaos_neg) == doctest::Approx((n - 1) / n));
  }
  BasinGrid other = g;
  other.region.hi1 = 11;
  CHECK_THROWS_AS((void)agreement(g, other), GridMismatch);

  BasinAgreement pooled = a;
  pooled += a;
  CHECK(pooled.overall() == doctest::Approx(a.overall()));
  CHECK_FALSE(BasinAgreement{}.fraction(AttractorLabel::torus).has_value());
}

TEST_CASE("divergent forecasts are absorbed and counted") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 45);
  w(3, 30) = 1e3;
  const BasinEngine e = BasinEngine::ngrc_oracle_warmup(NgrcModel(NgrcConfig{}, w), SystemParams{});
  const PointOutcome p = e.evaluate(State(0, 4, 0, -5), 200.0);
  CHECK(p.diverged);
  BasinRegion r = small_region(3);
  const BasinGrid g = compute_basin(r, e, 200.0);
  CHECK(g.divergence_count > 0);
  CHECK(g.labels.size() == 9);
}

TEST_CASE("bootstrap engine validates its ladder") {
  CHECK_THROWS_AS((void)BasinEngine::ngrc_bootstrap({torus_model()}), LadderGap);
  const BasinEngine e = BasinEngine::ngrc_bootstrap({k1_model(), torus_model()});
  REQUIRE(e.model() != nullptr);
  CHECK(e.model()->taps() == 2);
  CHECK(e.kind() == EngineKind::ngrc_bootstrap);
}

}
