#include "ngrc/features.hpp"

#include <stdexcept>

#include "ngrc/errors.hpp"

namespace ngrc {

DelayWindow::DelayWindow(std::size_t k) : k_(k), slots_(k, State::Zero()) {
  if (k == 0) throw ConfigError("tap count k must be >= 1");
}

DelayWindow::DelayWindow(std::size_t k, std::span<const State> oldest_first) : DelayWindow(k) {
  const std::size_t skip = oldest_first.size() > k ? oldest_first.size() - k : 0;
  for (std::size_t i = skip; i < oldest_first.size(); ++i) push(oldest_first[i]);
}

void DelayWindow::push(const State& s) {
  slots_[head_] = s;
  head_ = (head_ + 1) % k_;
  if (count_ < k_) ++count_;
}

const State& DelayWindow::lagged(std::size_t lag) const {
  if (lag >= count_) throw std::out_of_range("delay window lag out of range");
  return slots_[(head_ + k_ - 1 - lag) % k_];
}

std::vector<State> DelayWindow::states() const {
  std::vector<State> out;
  out.reserve(count_);
  for (std::size_t lag = count_; lag-- > 0;) out.push_back(lagged(lag));
  return out;
}

namespace {

void fill_linear(const DelayWindow& w, double* out) {
  for (std::size_t lag = 0; lag < w.capacity(); ++lag) {
    const State& s = w.lagged(lag);
    for (int i = 0; i < kStateDim; ++i) out[lag * kStateDim + i] = s[i];
  }
}

void fill_quadratic(const double* lin, std::size_t m, double* out) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) out[idx++] = lin[i] * lin[j];
  }
}

}  // namespace

Eigen::VectorXd linear_features(const DelayWindow& w) {
  if (!w.full()) throw WindowNotFull(w.size(), w.capacity());
  Eigen::VectorXd lin(static_cast<Eigen::Index>(w.capacity() * kStateDim));
  fill_linear(w, lin.data());
  return lin;
}

Eigen::VectorXd quadratic_features(const Eigen::Ref<const Eigen::VectorXd>& lin) {
  const auto m = static_cast<std::size_t>(lin.size());
  if (m == 0) throw ConfigError("quadratic_features needs a non-empty vector");
  Eigen::VectorXd out(static_cast<Eigen::Index>(quadratic_dim(m)));
  // Ref may be strided; copy into contiguous storage first.
  const Eigen::VectorXd dense = lin;
  fill_quadratic(dense.data(), m, out.data());
  return out;
}

Eigen::VectorXd total_features(const DelayWindow& w, double constant_term) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(feature_dim(kStateDim, w.capacity())));
  write_total_features(w, constant_term, out);
  return out;
}

void write_total_features(const DelayWindow& w, double constant_term,
                          Eigen::Ref<Eigen::VectorXd> out) {
  if (!w.full()) throw WindowNotFull(w.size(), w.capacity());
  const std::size_t m = w.capacity() * kStateDim;
  if (static_cast<std::size_t>(out.size()) != 1 + m + quadratic_dim(m)) {
    throw std::invalid_argument("feature buffer has the wrong length");
  }
  double* p = out.data();
  p[0] = constant_term;
  fill_linear(w, p + 1);
  fill_quadratic(p + 1, m, p + 1 + m);
}

}  // namespace ngrc
