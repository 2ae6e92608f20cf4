#include <doctest.h>

#include <random>

#include "ngrc/errors.hpp"
#include "ngrc/features.hpp"

using namespace ngrc;

TEST_SUITE("features") {

TEST_CASE("feature dimensions") {
  static_assert(feature_dim(4, 2) == 45);
  CHECK(feature_dim(4, 1) == 15);
  CHECK(feature_dim(4, 3) == 91);
  CHECK(quadratic_dim(8) == 36);
}

TEST_CASE("linear features put the newest state first") {
  DelayWindow w(2);
  w.push(State(1, 2, 3, 4));
  w.push(State(5, 6, 7, 8));
  const Eigen::VectorXd lin = linear_features(w);
  Eigen::VectorXd want(8);
  want << 5, 6, 7, 8, 1, 2, 3, 4;
  CHECK(lin == want);

  DelayWindow one(1);
  one.push(State(1, -1, 1, -1));
  CHECK(linear_features(one) == Eigen::Vector4d(1, -1, 1, -1));

  DelayWindow three(3);
  for (int i = 0; i < 3; ++i) three.push(State::Constant(i));
  CHECK(linear_features(three).size() == 12);
}

TEST_CASE("window must be full") {
  DelayWindow w(2);
  w.push(State::Ones());
  CHECK_FALSE(w.full());
  CHECK_THROWS_AS((void)linear_features(w), WindowNotFull);
  CHECK_THROWS_AS((void)total_features(w, 1.0), WindowNotFull);
}

TEST_CASE("window keeps the last k states") {
  DelayWindow w(2);
  for (int i = 0; i < 5; ++i) w.push(State::Constant(i));
  CHECK(w.newest() == State::Constant(4));
  CHECK(w.lagged(1) == State::Constant(3));
  const auto s = w.states();
  REQUIRE(s.size() == 2);
  CHECK(s[0] == State::Constant(3));
  std::vector<State> hist{State::Constant(0), State::Constant(1), State::Constant(2)};
  CHECK(DelayWindow(2, hist).states() == std::vector<State>{hist[1], hist[2]});
}

TEST_CASE("quadratic features") {
  Eigen::VectorXd ab(2);
  ab << 2, 7;
  Eigen::VectorXd want(3);
  want << 4, 14, 49;
  CHECK(quadratic_features(ab) == want);

  Eigen::VectorXd v(3);
  v << 2, 3, 5;
  Eigen::VectorXd q(6);
  q << 4, 6, 10, 9, 15, 25;
  CHECK(quadratic_features(v) == q);
  CHECK(quadratic_features(Eigen::VectorXd::Ones(8)).size() == 36);
}

TEST_CASE("quadratic length for m = 1..16") {
  for (Eigen::Index m = 1; m <= 16; ++m) {
    CHECK(quadratic_features(Eigen::VectorXd::Random(m)).size() == m * (m + 1) / 2);
  }
}

TEST_CASE("monomial index against a naive double loop") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist;
  for (std::size_t m = 1; m <= 16; ++m) {
    Eigen::VectorXd lin(static_cast<Eigen::Index>(m));
    for (auto& x : lin) x = dist(rng);
    const Eigen::VectorXd q = quadratic_features(lin);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i; j < m; ++j, ++pos) {
        CHECK(monomial_index(m, i, j) == pos);
        CHECK(q[static_cast<Eigen::Index>(pos)] ==
              lin[static_cast<Eigen::Index>(i)] * lin[static_cast<Eigen::Index>(j)]);
      }
    }
  }
}

TEST_CASE("total features layout") {
  DelayWindow w(2);
  w.push(State(1, 2, 3, 4));
  w.push(State(5, 6, 7, 8));
  const Eigen::VectorXd f = total_features(w, 1.0);
  REQUIRE(f.size() == 45);
  CHECK(f[0] == 1.0);
  CHECK(f.segment(1, 8) == linear_features(w));
  CHECK(f.tail(36) == quadratic_features(linear_features(w)));
  CHECK(total_features(w, 2.5)[0] == 2.5);

  Eigen::VectorXd buf(45);
  write_total_features(w, 1.0, buf);
  CHECK(buf == f);
}

}
