#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ngrc/basin.hpp"
#include "ngrc/dynamics.hpp"
#include "ngrc/io.hpp"
#include "ngrc/metrics.hpp"
#include "ngrc/model.hpp"

namespace ngrc {

/// Every parameter of the pipeline. Defaults are the published settings and
/// are listed in docs/parameters.md.
struct ExperimentConfig {
  SystemParams system{};
  std::array<State, 3> ics{State(1, -1, 1, -1), State(0, 4, 0, -5), State(0, -4, 0, 5)};
  double dt = 0.05;
  double t_train = 300.0;
  double t_test = 150.0;
  double t_avg = 5000.0;
  std::size_t k = 2;
  double alpha = 4e-5;
  double constant_term = 1.0;
  std::optional<double> ladder_alpha;  // ridge parameter of the k < K rungs; alpha if unset
  bool alpha_search = false;
  double alpha_min = 1e-9;
  double alpha_max = 1e-1;
  std::size_t alpha_per_decade = 5;
  double abs_tol = 1e-7;
  BasinRegion basin_region = default_basin_region(100);
  bool basin_mirror = true;  // also run the symmetry-mapped companion region
  std::vector<EngineKind> basin_engines{EngineKind::oracle, EngineKind::ngrc_oracle_warmup};
  double horizon = kDefaultHorizon;
  unsigned workers = 0;  // 0 = all cores
  std::string output_dir = "out";

  /// Throws ConfigError on any out-of-range value.
  void validate() const;

  [[nodiscard]] const State& ic(AttractorLabel label) const {
    return ics[static_cast<std::size_t>(label)];
  }
  [[nodiscard]] NgrcConfig ngrc(std::size_t taps = 0) const;
  [[nodiscard]] IntegratorOptions integrator() const;
};

[[nodiscard]] nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// Unknown keys and wrong types throw ConfigError. Missing keys keep their
/// defaults.
[[nodiscard]] ExperimentConfig config_from_json(const nlohmann::json& j);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

/// Accepts an attractor name (torus, chaos_neg, chaos_pos) or four
/// comma-separated numbers.
[[nodiscard]] State resolve_ic(const ExperimentConfig& cfg, const std::string& spec);

[[nodiscard]] Trajectory simulate(const ExperimentConfig& cfg, const State& ic, double t_span);

/// Logarithmic grid alpha_min..alpha_max with alpha_per_decade points per
/// decade, both ends included.
[[nodiscard]] std::vector<double> alpha_grid(const ExperimentConfig& cfg);

struct AlphaScore {
  double alpha;
  double nrmse;  // infinity when the forecast diverged
};

struct TrainReport {
  NgrcModel model;
  std::vector<NgrcModel> ladder;  // k = 1 .. K-1
  double training_nrmse = 0.0;
  double wall_seconds = 0.0;
  std::vector<AlphaScore> search;  // empty unless alpha_search
};

/// Scores an alpha by closed-loop NRMSE on `holdout`, which must start one
/// step after the last sample of `train_data`.
[[nodiscard]] double holdout_nrmse(const Trajectory& train_data, const Trajectory& holdout,
                                   const NgrcConfig& cfg);

/// Trains the main model (after an optional alpha search on a t_test
/// continuation integrated from the last sample) and the bootstrap ladder.
[[nodiscard]] TrainReport train_pipeline(const ExperimentConfig& cfg, const Trajectory& data);

[[nodiscard]] nlohmann::json train_report_json(const TrainReport& report);

enum class WarmupSource : std::uint8_t { tail, oracle, bootstrap };

[[nodiscard]] WarmupSource parse_warmup(std::string_view name);

struct ForecastRun {
  Trajectory forecast;
  std::optional<Trajectory> truth;  // aligned with forecast when an oracle is available
  std::vector<State> warmup;
};

/// tail: warm-up is the last k samples of `data`, truth integrated onward
/// from its last sample. oracle / bootstrap: forecast from `ic`, warm-up from
/// the integrator or from the ladder; truth integrated from ic.
/// Throws NonFiniteState with the step index on divergence.
[[nodiscard]] ForecastRun run_forecast(const ExperimentConfig& cfg, const NgrcModel& model,
                                       std::span<const NgrcModel> ladder, WarmupSource source,
                                       const State& ic, const Trajectory* data, std::size_t n_steps,
                                       bool with_truth);

struct TrajectoryPair {
  AttractorLabel attractor;
  Trajectory forecast;
  Trajectory truth;
};

/// Throws ConfigError if a pair differs in length or dt.
[[nodiscard]] io::MetricsReport metrics_report(const std::vector<TrajectoryPair>& pairs);

struct BasinResult {
  std::vector<BasinGrid> grids;  // per engine, region then its mirror
  std::size_t region_count = 1;
  struct Score {
    EngineKind engine;
    BasinAgreement per_region[2];
    BasinAgreement pooled;
  };
  std::vector<Score> scores;  // NG-RC engines, when the oracle ran too
};

/// Runs every configured engine on the region (and its mirror) and scores
/// NG-RC grids against the oracle.
[[nodiscard]] BasinResult run_basin(const ExperimentConfig& cfg, const NgrcModel* model,
                                    std::span<const NgrcModel> ladder);

void write_agreement_csv(std::ostream& out, const BasinResult& result);

namespace cli {

/// Entry point of the `ngrc` tool. Returns 0 on success, 1 on runtime or
/// numerical failure, 2 on usage or configuration errors.
int run(int argc, const char* const* argv);

}  // namespace cli

}  // namespace ngrc
