#include "ngrc/basin.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "ngrc/errors.hpp"

namespace ngrc {

namespace {

constexpr std::array<std::string_view, 4> kAxisNames{"x0", "y0", "z0", "u0"};

bool negated_by_symmetry(Axis axis) noexcept { return axis != Axis::z0; }

// Node coordinate built from the nearer endpoint so that the mirrored region
// reproduces exact negations.
double node(double lo, double hi, std::size_t n, std::size_t i) noexcept {
  const double step = (hi - lo) / static_cast<double>(n - 1);
  const std::size_t twice = 2 * i;
  if (twice < n - 1) return lo + static_cast<double>(i) * step;
  if (twice > n - 1) return hi - static_cast<double>(n - 1 - i) * step;
  return (lo + hi) / 2.0;
}

}  // namespace

std::string_view to_string(Axis axis) noexcept { return kAxisNames[static_cast<int>(axis)]; }

Axis parse_axis(std::string_view name) {
  for (int i = 0; i < 4; ++i) {
    if (kAxisNames[i] == name) return static_cast<Axis>(i);
  }
  throw ConfigError("unknown basin axis '" + std::string(name) + "'");
}

void BasinRegion::validate() const {
  if (axis1 == axis2) throw ConfigError("basin axes must differ");
  if (!(lo1 < hi1) || !(lo2 < hi2)) throw ConfigError("basin ranges need lo < hi");
  if (n1 < 2 || n2 < 2) throw ConfigError("basin resolution must be >= 2 per axis");
  if (!is_finite(base)) throw ConfigError("basin base point must be finite");
}

double BasinRegion::coord1(std::size_t i) const noexcept { return node(lo1, hi1, n1, i); }
double BasinRegion::coord2(std::size_t j) const noexcept { return node(lo2, hi2, n2, j); }

State BasinRegion::initial_condition(std::size_t i, std::size_t j) const noexcept {
  State ic = base;
  ic[static_cast<int>(axis1)] = coord1(i);
  ic[static_cast<int>(axis2)] = coord2(j);
  return ic;
}

BasinRegion BasinRegion::mirrored() const noexcept {
  BasinRegion out = *this;
  out.base = symmetry_map(base);
  if (negated_by_symmetry(axis1)) {
    out.lo1 = -hi1;
    out.hi1 = -lo1;
  }
  if (negated_by_symmetry(axis2)) {
    out.lo2 = -hi2;
    out.hi2 = -lo2;
  }
  return out;
}

BasinRegion default_basin_region(std::size_t n) {
  BasinRegion r;
  r.n1 = n;
  r.n2 = n;
  return r;
}

std::string_view to_string(EngineKind kind) noexcept {
  switch (kind) {
    case EngineKind::oracle:
      return "oracle";
    case EngineKind::ngrc_oracle_warmup:
      return "ngrc_oracle_warmup";
    case EngineKind::ngrc_bootstrap:
      return "ngrc_bootstrap";
  }
  return "oracle";
}

EngineKind parse_engine(std::string_view name) {
  for (auto kind :
       {EngineKind::oracle, EngineKind::ngrc_oracle_warmup, EngineKind::ngrc_bootstrap}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown basin engine '" + std::string(name) + "'");
}

AttractorLabel classify(double u_final) noexcept {
  if (u_final < -2.0) return AttractorLabel::chaos_neg;
  if (u_final > 2.0) return AttractorLabel::chaos_pos;
  return AttractorLabel::torus;
}

BasinEngine BasinEngine::oracle(SystemParams params, IntegratorOptions opts) {
  params.validate();
  BasinEngine e;
  e.kind_ = EngineKind::oracle;
  e.params_ = params;
  e.opts_ = opts;
  return e;
}

BasinEngine BasinEngine::ngrc_oracle_warmup(NgrcModel model, SystemParams params,
                                            IntegratorOptions opts) {
  params.validate();
  BasinEngine e;
  e.kind_ = EngineKind::ngrc_oracle_warmup;
  e.params_ = params;
  e.opts_ = opts;
  e.models_ = std::make_shared<const std::vector<NgrcModel>>(std::vector<NgrcModel>{std::move(model)});
  return e;
}

BasinEngine BasinEngine::ngrc_bootstrap(std::vector<NgrcModel> ladder) {
  if (ladder.empty()) throw LadderGap("bootstrap ladder is empty");
  std::sort(ladder.begin(), ladder.end(),
            [](const NgrcModel& a, const NgrcModel& b) { return a.taps() < b.taps(); });
  // Validates the ladder once up front.
  (void)bootstrap_warmup(ladder, State::Zero());
  BasinEngine e;
  e.kind_ = EngineKind::ngrc_bootstrap;
  e.models_ = std::make_shared<const std::vector<NgrcModel>>(std::move(ladder));
  return e;
}

const NgrcModel* BasinEngine::model() const noexcept {
  return models_ ? &models_->back() : nullptr;
}

PointOutcome BasinEngine::evaluate(const State& ic, double horizon) const {
  if (kind_ == EngineKind::oracle) {
    return {classify(advance(ic, params_, horizon, opts_)[3]), false};
  }
  const NgrcModel& model = models_->back();
  const std::size_t k = model.taps();
  const double dt = model.config().dt;
  const auto total = static_cast<std::size_t>(std::llround(horizon / dt));

  std::vector<State> warmup;
  if (kind_ == EngineKind::ngrc_oracle_warmup) {
    if (k == 1) {
      warmup = {ic};
    } else {
      const Trajectory lead = integrate(ic, params_, static_cast<double>(k - 1) * dt, dt, opts_);
      warmup.assign(lead.samples().begin(), lead.samples().end());
    }
  } else {
    warmup = bootstrap_warmup(*models_, ic);
  }
  if (total + 1 <= k) return {classify(warmup[total][3]), false};

  const ClosedLoopEnd end = run_closed_loop(model, warmup, total - (k - 1));
  if (!end.diverged_at) return {classify(end.last[3]), false};
  const double u = end.last[3];
  return {std::abs(u) > 2.0 ? classify(u) : AttractorLabel::torus, true};
}

AttractorLabel basin_point(const State& ic, const BasinEngine& engine, double horizon) {
  return engine.evaluate(ic, horizon).label;
}

std::size_t BasinGrid::count(AttractorLabel label) const noexcept {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

BasinGrid mirrored(const BasinGrid& grid) {
  const BasinRegion& r = grid.region;
  if (grid.labels.size() != r.n1 * r.n2) throw GridMismatch("label count does not match grid");
  BasinGrid out;
  out.region = r.mirrored();
  out.engine = grid.engine;
  out.divergence_count = grid.divergence_count;
  out.labels.resize(grid.labels.size());
  const bool flip1 = negated_by_symmetry(r.axis1);
  const bool flip2 = negated_by_symmetry(r.axis2);
  for (std::size_t i = 0; i < r.n1; ++i) {
    for (std::size_t j = 0; j < r.n2; ++j) {
      const std::size_t mi = flip1 ? r.n1 - 1 - i : i;
      const std::size_t mj = flip2 ? r.n2 - 1 - j : j;
      out.labels[mi * r.n2 + mj] = mirrored(grid.labels[i * r.n2 + j]);
    }
  }
  return out;
}

BasinGrid compute_basin(const BasinRegion& region, const BasinEngine& engine, double horizon,
                        unsigned workers) {
  region.validate();
  if (!(horizon > 0.0)) throw ConfigError("basin horizon must be positive");
  const std::size_t total = region.n1 * region.n2;
  std::vector<PointOutcome> outcomes(total);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::size_t idx = next.fetch_add(1, std::memory_order_relaxed);
      if (idx >= total) return;
      try {
        outcomes[idx] = engine.evaluate(
            region.initial_condition(idx / region.n2, idx % region.n2), horizon);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };

  if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  BasinGrid grid;
  grid.region = region;
  grid.engine = engine.kind();
  grid.labels.reserve(total);
  for (const auto& o : outcomes) {
    grid.labels.push_back(o.label);
    if (o.diverged) ++grid.divergence_count;
  }
  return grid;
}

std::optional<double> BasinAgreement::fraction(AttractorLabel label) const noexcept {
  const auto i = static_cast<std::size_t>(label);
  if (total[i] == 0) return std::nullopt;
  return static_cast<double>(matched[i]) / static_cast<double>(total[i]);
}

double BasinAgreement::overall() const noexcept {
  const std::size_t all = total[0] + total[1] + total[2];
  if (all == 0) return 1.0;
  return static_cast<double>(matched[0] + matched[1] + matched[2]) / static_cast<double>(all);
}

BasinAgreement& BasinAgreement::operator+=(const BasinAgreement& other) noexcept {
  for (std::size_t i = 0; i < 3; ++i) {
    matched[i] += other.matched[i];
    total[i] += other.total[i];
  }
  return *this;
}

BasinAgreement agreement(const BasinGrid& truth, const BasinGrid& model) {
  if (!(truth.region == model.region) || truth.labels.size() != model.labels.size() ||
      truth.labels.size() != truth.region.n1 * truth.region.n2) {
    throw GridMismatch("basin grids cover different regions or resolutions");
  }
  BasinAgreement a;
  for (std::size_t i = 0; i < truth.labels.size(); ++i) {
    const auto t = static_cast<std::size_t>(truth.labels[i]);
    ++a.total[t];
    if (truth.labels[i] == model.labels[i]) ++a.matched[t];
  }
  return a;
}

}  // namespace ngrc
