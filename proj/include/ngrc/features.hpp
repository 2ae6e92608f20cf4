#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ngrc/dynamics.hpp"

namespace ngrc {

[[nodiscard]] constexpr std::size_t quadratic_dim(std::size_t m) noexcept {
  return m * (m + 1) / 2;
}

/// 1 + d k + (d k)(d k + 1) / 2: constant, linear and unique quadratic terms.
[[nodiscard]] constexpr std::size_t feature_dim(std::size_t d, std::size_t k) noexcept {
  return 1 + d * k + quadratic_dim(d * k);
}

/// Position of lin[i] * lin[j] (i <= j) inside the quadratic block.
[[nodiscard]] constexpr std::size_t monomial_index(std::size_t m, std::size_t i,
                                                   std::size_t j) noexcept {
  return ((2 * m - i + 1) * i) / 2 + (j - i);
}

/// Fixed-capacity history of the k most recent states, newest last.
class DelayWindow {
 public:
  explicit DelayWindow(std::size_t k);
  /// Builds a window from states ordered oldest to newest; the window takes
  /// the last `k` of them.
  DelayWindow(std::size_t k, std::span<const State> oldest_first);

  void push(const State& s);

  [[nodiscard]] std::size_t capacity() const noexcept { return k_; }
  [[nodiscard]] std::size_t size() const noexcept { return count_; }
  [[nodiscard]] bool full() const noexcept { return count_ == k_; }

  /// lag 0 is the newest state, lag k-1 the oldest.
  [[nodiscard]] const State& lagged(std::size_t lag) const;
  [[nodiscard]] const State& newest() const { return lagged(0); }

  /// States oldest first.
  [[nodiscard]] std::vector<State> states() const;

 private:
  std::size_t k_;
  std::size_t head_ = 0;  // slot the next push writes to
  std::size_t count_ = 0;
  std::vector<State> slots_;
};

/// [x_n; x_{n-1}; ...; x_{n-k+1}], current state first. Throws WindowNotFull.
[[nodiscard]] Eigen::VectorXd linear_features(const DelayWindow& w);

/// All lin[i] * lin[j] with i <= j in row-major upper-triangular order.
[[nodiscard]] Eigen::VectorXd quadratic_features(const Eigen::Ref<const Eigen::VectorXd>& lin);

/// [c; linear; quadratic]. Throws WindowNotFull.
[[nodiscard]] Eigen::VectorXd total_features(const DelayWindow& w, double constant_term);

/// Allocation-free variant writing into `out`, which must already have
/// size feature_dim(kStateDim, w.capacity()).
void write_total_features(const DelayWindow& w, double constant_term,
                          Eigen::Ref<Eigen::VectorXd> out);

}  // namespace ngrc
