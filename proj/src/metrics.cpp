#include "ngrc/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ngrc/errors.hpp"

namespace ngrc {

std::string_view to_string(AttractorLabel label) noexcept {
  switch (label) {
    case AttractorLabel::torus:
      return "torus";
    case AttractorLabel::chaos_neg:
      return "chaos_neg";
    case AttractorLabel::chaos_pos:
      return "chaos_pos";
  }
  return "torus";
}

AttractorLabel parse_label(std::string_view name) {
  for (auto label : kAllLabels) {
    if (to_string(label) == name) return label;
  }
  throw FormatError("unknown attractor label '" + std::string(name) + "'");
}

AttractorLabel mirrored(AttractorLabel label) noexcept {
  switch (label) {
    case AttractorLabel::chaos_neg:
      return AttractorLabel::chaos_pos;
    case AttractorLabel::chaos_pos:
      return AttractorLabel::chaos_neg;
    default:
      return label;
  }
}

AttractorStats stats(const Trajectory& traj) {
  if (traj.empty()) throw std::invalid_argument("stats of an empty trajectory");
  State sum = State::Zero();
  State sum_abs = State::Zero();
  for (const auto& s : traj.samples()) {
    sum += s;
    sum_abs += s.cwiseAbs();
  }
  const auto n = static_cast<double>(traj.size());
  AttractorStats out;
  for (int i = 0; i < kStateDim; ++i) {
    out.mean[i] = sum[i] / n;
    out.mean_abs[i] = sum_abs[i] / n;
  }
  out.duration = n * traj.dt();
  return out;
}

std::array<double, 2 * kStateDim> AttractorDeltas::flat() const noexcept {
  std::array<double, 2 * kStateDim> out{};
  for (int i = 0; i < kStateDim; ++i) {
    out[2 * i] = center[i];
    out[2 * i + 1] = extent[i];
  }
  return out;
}

AttractorDeltas delta_pair(const AttractorStats& forecast, const AttractorStats& truth) {
  AttractorDeltas d;
  for (int i = 0; i < kStateDim; ++i) {
    const double scale = truth.mean_abs[i];
    if (!(scale > 0.0)) throw DegenerateTruth("ground-truth <|v|> is zero");
    d.center[i] = (forecast.mean[i] - truth.mean[i]) / scale;
    d.extent[i] = (forecast.mean_abs[i] - truth.mean_abs[i]) / scale;
  }
  return d;
}

double delta_att(std::span<const double> deltas) noexcept {
  double acc = 0.0;
  for (double v : deltas) acc += v * v;
  return std::sqrt(acc);
}

double delta_att(const AttractorDeltas& deltas) noexcept {
  const auto flat = deltas.flat();
  return delta_att(std::span<const double>(flat));
}

double delta_tot(std::span<const double, 3> att) noexcept {
  return std::sqrt(att[0] * att[0] + att[1] * att[1] + att[2] * att[2]);
}

State component_std(const Trajectory& traj) {
  if (traj.empty()) throw std::invalid_argument("std of an empty trajectory");
  const auto n = static_cast<double>(traj.size());
  State mean = State::Zero();
  for (const auto& s : traj.samples()) mean += s;
  mean /= n;
  State var = State::Zero();
  for (const auto& s : traj.samples()) var += (s - mean).cwiseAbs2();
  return (var / n).cwiseSqrt();
}

double valid_time(const Trajectory& pred, const Trajectory& truth, double threshold) {
  if (pred.size() != truth.size() || pred.dt() != truth.dt()) {
    throw std::invalid_argument("valid_time needs equal length and dt");
  }
  if (truth.empty()) return 0.0;
  State scale = component_std(truth);
  for (int i = 0; i < kStateDim; ++i) {
    if (!(scale[i] > 0.0)) scale[i] = 1.0;
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double err = (pred[i] - truth[i]).cwiseAbs().cwiseQuotient(scale).maxCoeff();
    if (!(err <= threshold)) return static_cast<double>(i) * truth.dt();
  }
  return static_cast<double>(truth.size()) * truth.dt();
}

}  // namespace ngrc
