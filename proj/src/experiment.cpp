#include "ngrc/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "ngrc/errors.hpp"

namespace ngrc {

using nlohmann::json;

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

json state_json(const State& s) { return json::array({s[0], s[1], s[2], s[3]}); }

State state_from(const json& j, const char* key) {
  if (!j.is_array() || j.size() != 4) {
    throw ConfigError(std::string("'") + key + "' must be an array of 4 numbers");
  }
  State s;
  for (int i = 0; i < 4; ++i) s[i] = j[static_cast<std::size_t>(i)].get<double>();
  return s;
}

}  // namespace

void ExperimentConfig::validate() const {
  system.validate();
  for (const auto& s : ics) require(is_finite(s), "initial conditions must be finite");
  require(positive_finite(dt), "dt must be positive");
  require(positive_finite(t_train), "t_train must be positive");
  require(positive_finite(t_test), "t_test must be positive");
  require(positive_finite(t_avg), "t_avg must be positive");
  (void)grid_intervals(t_train, dt);
  (void)grid_intervals(t_test, dt);
  (void)grid_intervals(t_avg, dt);
  require(k >= 1, "k must be at least 1");
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be nonnegative");
  require(std::isfinite(constant_term), "constant_term must be finite");
  if (ladder_alpha) {
    require(std::isfinite(*ladder_alpha) && *ladder_alpha >= 0.0,
            "ladder_alpha must be nonnegative");
  }
  require(positive_finite(alpha_min) && positive_finite(alpha_max) && alpha_min <= alpha_max,
          "alpha search needs 0 < alpha_min <= alpha_max");
  require(alpha_per_decade >= 1, "alpha_per_decade must be at least 1");
  require(positive_finite(abs_tol), "abs_tol must be positive");
  basin_region.validate();
  require(!basin_engines.empty(), "basin_engines must not be empty");
  require(positive_finite(horizon), "horizon must be positive");
  require(!output_dir.empty(), "output_dir must not be empty");
}

NgrcConfig ExperimentConfig::ngrc(std::size_t taps) const {
  NgrcConfig c;
  c.k = taps == 0 ? k : taps;
  c.dt = dt;
  c.alpha = (taps == 0 || taps == k) ? alpha : ladder_alpha.value_or(alpha);
  c.constant_term = constant_term;
  return c;
}

IntegratorOptions ExperimentConfig::integrator() const {
  IntegratorOptions o;
  o.abs_tol = abs_tol;
  return o;
}

json config_to_json(const ExperimentConfig& c) {
  json engines = json::array();
  for (auto e : c.basin_engines) engines.push_back(std::string(to_string(e)));
  return json{{"a", c.system.a},
              {"b", c.system.b},
              {"ic_torus", state_json(c.ics[0])},
              {"ic_chaos_neg", state_json(c.ics[1])},
              {"ic_chaos_pos", state_json(c.ics[2])},
              {"dt", c.dt},
              {"t_train", c.t_train},
              {"t_test", c.t_test},
              {"t_avg", c.t_avg},
              {"k", c.k},
              {"alpha", c.alpha},
              {"constant_term", c.constant_term},
              {"ladder_alpha", c.ladder_alpha ? json(*c.ladder_alpha) : json(nullptr)},
              {"alpha_search", c.alpha_search},
              {"alpha_min", c.alpha_min},
              {"alpha_max", c.alpha_max},
              {"alpha_per_decade", c.alpha_per_decade},
              {"abs_tol", c.abs_tol},
              {"basin_region", io::region_to_json(c.basin_region)},
              {"basin_mirror", c.basin_mirror},
              {"basin_engines", engines},
              {"horizon", c.horizon},
              {"workers", c.workers},
              {"output_dir", c.output_dir}};
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "a") c.system.a = v.get<double>();
      else if (key == "b") c.system.b = v.get<double>();
      else if (key == "ic_torus") c.ics[0] = state_from(v, "ic_torus");
      else if (key == "ic_chaos_neg") c.ics[1] = state_from(v, "ic_chaos_neg");
      else if (key == "ic_chaos_pos") c.ics[2] = state_from(v, "ic_chaos_pos");
      else if (key == "dt") c.dt = v.get<double>();
      else if (key == "t_train") c.t_train = v.get<double>();
      else if (key == "t_test") c.t_test = v.get<double>();
      else if (key == "t_avg") c.t_avg = v.get<double>();
      else if (key == "k") c.k = v.get<std::size_t>();
      else if (key == "alpha") c.alpha = v.get<double>();
      else if (key == "constant_term") c.constant_term = v.get<double>();
      else if (key == "ladder_alpha") {
        if (v.is_null()) c.ladder_alpha.reset();
        else c.ladder_alpha = v.get<double>();
      } else if (key == "alpha_search") c.alpha_search = v.get<bool>();
      else if (key == "alpha_min") c.alpha_min = v.get<double>();
      else if (key == "alpha_max") c.alpha_max = v.get<double>();
      else if (key == "alpha_per_decade") c.alpha_per_decade = v.get<std::size_t>();
      else if (key == "abs_tol") c.abs_tol = v.get<double>();
      else if (key == "basin_region") {
        try {
          c.basin_region = io::region_from_json(v);
        } catch (const FormatError& e) {
          throw ConfigError(e.what());
        }
      } else if (key == "basin_mirror") c.basin_mirror = v.get<bool>();
      else if (key == "basin_engines") {
        c.basin_engines.clear();
        for (const auto& e : v) c.basin_engines.push_back(parse_engine(e.get<std::string>()));
      } else if (key == "horizon") c.horizon = v.get<double>();
      else if (key == "workers") c.workers = v.get<unsigned>();
      else if (key == "output_dir") c.output_dir = v.get<std::string>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

State resolve_ic(const ExperimentConfig& cfg, const std::string& spec) {
  for (auto label : kAllLabels) {
    if (spec == to_string(label)) return cfg.ic(label);
  }
  std::vector<double> v;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad initial condition '" + spec + "'");
    }
  }
  if (v.size() != 4) throw ConfigError("initial condition needs 4 components: '" + spec + "'");
  State s(v[0], v[1], v[2], v[3]);
  if (!is_finite(s)) throw ConfigError("initial condition must be finite");
  return s;
}

Trajectory simulate(const ExperimentConfig& cfg, const State& ic, double t_span) {
  return integrate(ic, cfg.system, t_span, cfg.dt, cfg.integrator());
}

std::vector<double> alpha_grid(const ExperimentConfig& cfg) {
  const double lo = std::log10(cfg.alpha_min);
  const double hi = std::log10(cfg.alpha_max);
  const auto per = static_cast<double>(cfg.alpha_per_decade);
  const auto n = static_cast<std::size_t>(std::llround((hi - lo) * per));
  std::vector<double> grid;
  for (std::size_t i = 0; i <= n; ++i) {
    grid.push_back(std::pow(10.0, lo + static_cast<double>(i) / per));
  }
  return grid;
}

double holdout_nrmse(const Trajectory& train_data, const Trajectory& holdout,
                     const NgrcConfig& cfg) {
  const NgrcModel model = train(train_data, cfg);
  const auto tail = train_data.samples().last(cfg.k);
  try {
    const Trajectory pred = forecast(model, tail, holdout.size());
    return nrmse(pred, holdout);
  } catch (const NonFiniteState&) {
    return std::numeric_limits<double>::infinity();
  }
}

TrainReport train_pipeline(const ExperimentConfig& cfg, const Trajectory& data) {
  const auto start = std::chrono::steady_clock::now();
  NgrcConfig main = cfg.ngrc();
  std::vector<AlphaScore> search;
  if (cfg.alpha_search) {
    const Trajectory holdout =
        integrate(data.back(), cfg.system, cfg.t_test, cfg.dt, cfg.integrator()).drop_front(1);
    double best = std::numeric_limits<double>::infinity();
    for (double a : alpha_grid(cfg)) {
      NgrcConfig c = main;
      c.alpha = a;
      double score = std::numeric_limits<double>::infinity();
      try {
        score = holdout_nrmse(data, holdout, c);
      } catch (const SingularSystem&) {
      }
      search.push_back({a, score});
      if (score < best) {
        best = score;
        main.alpha = a;
      }
    }
    if (!std::isfinite(best)) throw Error("alpha search: every candidate diverged");
  }
  NgrcModel model = train(data, main);
  std::vector<NgrcModel> ladder;
  for (std::size_t taps = 1; taps < cfg.k; ++taps) ladder.push_back(train(data, cfg.ngrc(taps)));
  const double err = training_nrmse(model, data);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(model), std::move(ladder), err, secs, std::move(search)};
}

json train_report_json(const TrainReport& r) {
  json search = json::array();
  for (const auto& s : r.search) {
    search.push_back({{"alpha", s.alpha},
                      {"holdout_nrmse", std::isfinite(s.nrmse) ? json(s.nrmse) : json(nullptr)}});
  }
  return json{{"feature_dim", r.model.feature_dim()},
              {"weight_count", r.model.weight_count()},
              {"k", r.model.taps()},
              {"alpha", r.model.config().alpha},
              {"training_nrmse", r.training_nrmse},
              {"ladder", r.ladder.size()},
              {"alpha_search", search},
              {"wall_time_s", r.wall_seconds}};
}

WarmupSource parse_warmup(std::string_view name) {
  if (name == "tail") return WarmupSource::tail;
  if (name == "oracle") return WarmupSource::oracle;
  if (name == "bootstrap") return WarmupSource::bootstrap;
  throw ConfigError("unknown warm-up source '" + std::string(name) +
                    "' (expected tail, oracle or bootstrap)");
}

ForecastRun run_forecast(const ExperimentConfig& cfg, const NgrcModel& model,
                         std::span<const NgrcModel> ladder, WarmupSource source, const State& ic,
                         const Trajectory* data, std::size_t n_steps, bool with_truth) {
  const std::size_t k = model.taps();
  const double dt = model.config().dt;
  if (n_steps == 0) throw ConfigError("n_steps must be positive");
  ForecastRun run;
  if (source == WarmupSource::tail) {
    if (data == nullptr) throw ConfigError("tail warm-up needs the training trajectory");
    if (data->size() < k) throw InsufficientData("training trajectory shorter than k");
    const auto tail = data->samples().last(k);
    run.warmup.assign(tail.begin(), tail.end());
    const double t_start = data->time(data->size() - k);
    run.forecast = forecast(model, run.warmup, n_steps, t_start);
    if (with_truth) {
      const Trajectory cont = integrate(data->back(), cfg.system,
                                        static_cast<double>(n_steps) * dt, dt, cfg.integrator());
      run.truth = Trajectory(dt, run.forecast.t0(),
                             {cont.samples().begin() + 1, cont.samples().end()});
    }
    return run;
  }
  std::optional<Trajectory> oracle;
  if (with_truth || source == WarmupSource::oracle) {
    oracle = integrate(ic, cfg.system, static_cast<double>(n_steps + k - 1) * dt, dt,
                       cfg.integrator());
  }
  if (source == WarmupSource::oracle) {
    run.warmup.assign(oracle->samples().begin(), oracle->samples().begin() + k);
  } else {
    std::vector<NgrcModel> rungs(ladder.begin(), ladder.end());
    rungs.push_back(model);
    std::sort(rungs.begin(), rungs.end(),
              [](const NgrcModel& a, const NgrcModel& b) { return a.taps() < b.taps(); });
    run.warmup = bootstrap_warmup(rungs, ic);
  }
  run.forecast = forecast(model, run.warmup, n_steps, 0.0);
  if (with_truth) run.truth = oracle->drop_front(k);
  return run;
}

io::MetricsReport metrics_report(const std::vector<TrajectoryPair>& pairs) {
  std::vector<io::AttractorReport> reports;
  for (const auto& p : pairs) {
    if (p.forecast.size() != p.truth.size() || p.forecast.dt() != p.truth.dt()) {
      throw ConfigError(std::string(to_string(p.attractor)) +
                        ": forecast and truth differ in length or dt");
    }
    const AttractorDeltas d = delta_pair(stats(p.forecast), stats(p.truth));
    reports.push_back({p.attractor, d, delta_att(d)});
  }
  return io::make_metrics_report(std::move(reports));
}

BasinResult run_basin(const ExperimentConfig& cfg, const NgrcModel* model,
                      std::span<const NgrcModel> ladder) {
  std::vector<BasinRegion> regions{cfg.basin_region};
  if (cfg.basin_mirror) regions.push_back(cfg.basin_region.mirrored());

  BasinResult result;
  result.region_count = regions.size();
  const BasinGrid* oracle_grids = nullptr;
  std::vector<EngineKind> order = cfg.basin_engines;
  // The oracle runs first so later engines can be scored against it.
  std::stable_partition(order.begin(), order.end(),
                        [](EngineKind e) { return e == EngineKind::oracle; });
  for (EngineKind kind : order) {
    std::optional<BasinEngine> engine;
    switch (kind) {
      case EngineKind::oracle:
        engine = BasinEngine::oracle(cfg.system, cfg.integrator());
        break;
      case EngineKind::ngrc_oracle_warmup:
        if (model == nullptr) throw ConfigError("engine ngrc_oracle_warmup needs a model");
        engine = BasinEngine::ngrc_oracle_warmup(*model, cfg.system, cfg.integrator());
        break;
      case EngineKind::ngrc_bootstrap: {
        if (model == nullptr) throw ConfigError("engine ngrc_bootstrap needs a model");
        std::vector<NgrcModel> rungs(ladder.begin(), ladder.end());
        rungs.push_back(*model);
        engine = BasinEngine::ngrc_bootstrap(std::move(rungs));
        break;
      }
    }
    for (const auto& region : regions) {
      result.grids.push_back(compute_basin(region, *engine, cfg.horizon, cfg.workers));
    }
  }
  if (!order.empty() && order.front() == EngineKind::oracle) oracle_grids = &result.grids[0];
  if (oracle_grids == nullptr) return result;
  const std::size_t nr = regions.size();
  for (std::size_t e = 1; e < order.size(); ++e) {
    BasinResult::Score score{order[e], {}, {}};
    for (std::size_t r = 0; r < nr; ++r) {
      score.per_region[r] = agreement(oracle_grids[r], result.grids[e * nr + r]);
      score.pooled += score.per_region[r];
    }
    result.scores.push_back(score);
  }
  return result;
}

void write_agreement_csv(std::ostream& out, const BasinResult& result) {
  out << "engine,region,label,matched,total,fraction\n";
  auto rows = [&](std::string_view engine, std::string_view region, const BasinAgreement& a) {
    std::size_t matched = 0, total = 0;
    for (auto label : kAllLabels) {
      const auto i = static_cast<std::size_t>(label);
      const auto f = a.fraction(label);
      out << engine << ',' << region << ',' << to_string(label) << ',' << a.matched[i] << ','
          << a.total[i] << ',' << (f ? io::format_double(*f) : "") << '\n';
      matched += a.matched[i];
      total += a.total[i];
    }
    out << engine << ',' << region << ",all," << matched << ',' << total << ','
        << io::format_double(a.overall()) << '\n';
  };
  for (const auto& s : result.scores) {
    const auto name = to_string(s.engine);
    rows(name, "primary", s.per_region[0]);
    if (result.region_count == 2) {
      rows(name, "mirror", s.per_region[1]);
      rows(name, "pooled", s.pooled);
    }
  }
}

}  // namespace ngrc
