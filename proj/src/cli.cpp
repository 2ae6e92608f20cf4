#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "ngrc/errors.hpp"
#include "ngrc/experiment.hpp"

namespace ngrc::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

enum class Kind { number, integer, boolean, vec4, text, list, pair };

// Flags that override config keys. Nested region fields use a basin_ prefix.
const std::vector<std::pair<std::string, Kind>> kOverrides{
    {"a", Kind::number},           {"b", Kind::number},
    {"ic_torus", Kind::vec4},      {"ic_chaos_neg", Kind::vec4},
    {"ic_chaos_pos", Kind::vec4},  {"dt", Kind::number},
    {"t_train", Kind::number},     {"t_test", Kind::number},
    {"t_avg", Kind::number},       {"k", Kind::integer},
    {"alpha", Kind::number},       {"constant_term", Kind::number},
    {"ladder_alpha", Kind::number}, {"alpha_search", Kind::boolean},
    {"alpha_min", Kind::number},   {"alpha_max", Kind::number},
    {"alpha_per_decade", Kind::integer}, {"abs_tol", Kind::number},
    {"basin_axis1", Kind::text},   {"basin_axis2", Kind::text},
    {"basin_base", Kind::vec4},    {"basin_range1", Kind::pair},
    {"basin_range2", Kind::pair},  {"basin_resolution", Kind::pair},
    {"basin_mirror", Kind::boolean}, {"basin_engines", Kind::list},
    {"horizon", Kind::number},     {"workers", Kind::integer},
    {"output_dir", Kind::text},
};

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

double to_number(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("--" + key + ": not a number: '" + s + "'");
}

json override_value(const std::string& key, Kind kind, const std::string& raw) {
  switch (kind) {
    case Kind::number:
      return to_number(key, raw);
    case Kind::integer: {
      const double v = to_number(key, raw);
      if (v < 0 || v != std::floor(v)) throw ConfigError("--" + key + ": not a count: " + raw);
      return static_cast<std::size_t>(v);
    }
    case Kind::boolean:
      if (raw == "true" || raw == "1") return true;
      if (raw == "false" || raw == "0") return false;
      throw ConfigError("--" + key + ": expected true or false");
    case Kind::text:
      return raw;
    case Kind::list:
      return split_commas(raw);
    case Kind::vec4:
    case Kind::pair: {
      const auto parts = split_commas(raw);
      const std::size_t want = kind == Kind::vec4 ? 4 : 2;
      if (parts.size() != want) {
        throw ConfigError("--" + key + ": expected " + std::to_string(want) +
                          " comma-separated numbers");
      }
      json arr = json::array();
      for (const auto& p : parts) arr.push_back(to_number(key, p));
      return arr;
    }
  }
  return nullptr;
}

struct Common {
  std::string config_path;
  std::map<std::string, std::string> overrides;
};

void add_common(CLI::App* sub, Common& common) {
  sub->add_option("--config", common.config_path, "experiment config (JSON)");
  for (const auto& [key, kind] : kOverrides) {
    sub->add_option_function<std::string>(
        "--" + key, [&common, key = key](const std::string& v) { common.overrides[key] = v; },
        "override config key " + key);
  }
}

ExperimentConfig resolve_config(const Common& common) {
  json j = common.config_path.empty() ? config_to_json(ExperimentConfig{})
                                      : config_to_json(load_config(common.config_path));
  for (const auto& [key, kind] : kOverrides) {
    const auto it = common.overrides.find(key);
    if (it == common.overrides.end()) continue;
    json value = override_value(key, kind, it->second);
    if (key.rfind("basin_", 0) == 0 && key != "basin_mirror" && key != "basin_engines") {
      j["basin_region"][key.substr(6)] = std::move(value);
    } else {
      j[key] = std::move(value);
    }
  }
  return config_from_json(j);
}

fs::path or_default(const std::string& given, const fs::path& fallback) {
  return given.empty() ? fallback : fs::path(given);
}

fs::path ladder_path(const fs::path& model_path, std::size_t taps) {
  fs::path p = model_path;
  p.replace_filename(model_path.stem().string() + ".k" + std::to_string(taps) +
                     model_path.extension().string());
  return p;
}

std::vector<NgrcModel> load_ladder(const std::vector<std::string>& given, const fs::path& model_path,
                                   std::size_t k) {
  std::vector<NgrcModel> ladder;
  if (!given.empty()) {
    for (const auto& p : given) ladder.push_back(io::load_model(p));
    return ladder;
  }
  for (std::size_t taps = 1; taps < k; ++taps) {
    const fs::path p = ladder_path(model_path, taps);
    if (!fs::exists(p)) throw LadderGap("missing ladder model " + p.string());
    ladder.push_back(io::load_model(p));
  }
  return ladder;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt_fraction(const std::optional<double>& f) {
  if (!f) return "n/a";
  std::ostringstream os;
  os.precision(4);
  os << *f;
  return os.str();
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Next-generation reservoir computing for the Li-Sprott system", "ngrc"};
  app.require_subcommand(1);

  Common common;

  auto* sim = app.add_subcommand("simulate", "integrate a ground-truth trajectory");
  add_common(sim, common);
  std::string sim_ic = "torus", sim_out;
  std::optional<double> sim_span;
  sim->add_option("--ic", sim_ic, "attractor name or x,y,z,u");
  sim->add_option("--t_span", sim_span, "duration (default t_train)");
  sim->add_option("--out", sim_out, "output CSV (default <output_dir>/<ic>.csv)");

  auto* trn = app.add_subcommand("train", "fit an NG-RC model");
  add_common(trn, common);
  std::string trn_data, trn_model, trn_report;
  trn->add_option("--data", trn_data, "training trajectory CSV (default: simulate the torus)");
  trn->add_option("--model", trn_model, "model JSON (default <output_dir>/model.json)");
  trn->add_option("--report", trn_report, "report JSON (default <output_dir>/train_report.json)");

  auto* fc = app.add_subcommand("forecast", "closed-loop forecast");
  add_common(fc, common);
  std::string fc_model, fc_warmup = "oracle", fc_ic = "chaos_neg", fc_data, fc_out, fc_truth,
              fc_report;
  std::optional<std::size_t> fc_steps;
  std::vector<std::string> fc_ladder;
  bool fc_no_truth = false;
  fc->add_option("--model", fc_model, "model JSON")->required();
  fc->add_option("--warmup", fc_warmup, "tail, oracle or bootstrap");
  fc->add_option("--ic", fc_ic, "attractor name or x,y,z,u (oracle/bootstrap)");
  fc->add_option("--data", fc_data, "training trajectory CSV (tail)");
  fc->add_option("--n_steps", fc_steps, "forecast steps (default t_test/dt)");
  fc->add_option("--ladder", fc_ladder, "ladder models k=1..K-1 (default <model>.k<j>.json)");
  fc->add_option("--out", fc_out, "forecast CSV (default <output_dir>/forecast.csv)");
  fc->add_option("--truth_out", fc_truth, "truth CSV (default <output_dir>/truth.csv)");
  fc->add_option("--report", fc_report, "report JSON");
  fc->add_flag("--no_truth", fc_no_truth, "skip the ground-truth comparison");

  auto* met = app.add_subcommand("metrics", "attractor error metrics");
  add_common(met, common);
  std::map<AttractorLabel, std::vector<std::string>> met_pairs;
  for (auto label : kAllLabels) {
    met->add_option("--" + std::string(to_string(label)), met_pairs[label],
                    "FORECAST TRUTH trajectory CSVs")
        ->expected(2);
  }
  std::string met_out;
  met->add_option("--out", met_out, "metrics CSV (default <output_dir>/metrics.csv)");

  auto* bas = app.add_subcommand("basin", "basin-of-attraction grids");
  add_common(bas, common);
  std::string bas_model, bas_dir;
  std::vector<std::string> bas_ladder;
  bas->add_option("--model", bas_model, "model JSON (NG-RC engines)");
  bas->add_option("--ladder", bas_ladder, "ladder models k=1..K-1 (default <model>.k<j>.json)");
  bas->add_option("--out_dir", bas_dir, "output directory (default <output_dir>/basin)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const ExperimentConfig cfg = resolve_config(common);
    const fs::path out_dir = cfg.output_dir;

    if (*sim) {
      const State ic = resolve_ic(cfg, sim_ic);
      const double span = sim_span.value_or(cfg.t_train);
      if (!(span > 0.0)) throw ConfigError("--t_span must be positive");
      const Trajectory traj = simulate(cfg, ic, span);
      const fs::path path = or_default(sim_out, out_dir / (sim_ic + ".csv"));
      io::write_trajectory_csv(path, traj);
      std::cout << "wrote " << traj.size() << " samples to " << path.string() << '\n';
    } else if (*trn) {
      const Trajectory data = trn_data.empty()
                                  ? simulate(cfg, cfg.ic(AttractorLabel::torus), cfg.t_train)
                                  : io::read_trajectory_csv(fs::path(trn_data), cfg.dt);
      if (data.dt() != cfg.dt) {
        throw ConfigError("trajectory dt " + io::format_double(data.dt()) +
                          " does not match config dt " + io::format_double(cfg.dt));
      }
      const TrainReport report = train_pipeline(cfg, data);
      const fs::path model_path = or_default(trn_model, out_dir / "model.json");
      io::save_model(model_path, report.model);
      for (const auto& rung : report.ladder) {
        io::save_model(ladder_path(model_path, rung.taps()), rung);
      }
      const json rep = train_report_json(report);
      write_text(or_default(trn_report, out_dir / "train_report.json"), rep.dump(2) + "\n");
      std::cout << "feature_dim " << report.model.feature_dim() << ", weights "
                << report.model.weight_count() << ", alpha "
                << io::format_double(report.model.config().alpha) << '\n'
                << "training NRMSE " << report.training_nrmse << ", wall time "
                << report.wall_seconds << " s\n"
                << "model written to " << model_path.string() << '\n';
    } else if (*fc) {
      const NgrcModel model = io::load_model(fc_model);
      if (model.config().dt != cfg.dt) throw ConfigError("model dt differs from config dt");
      const WarmupSource source = parse_warmup(fc_warmup);
      std::vector<NgrcModel> ladder;
      if (source == WarmupSource::bootstrap) ladder = load_ladder(fc_ladder, fc_model, model.taps());
      std::optional<Trajectory> data;
      if (source == WarmupSource::tail) {
        if (fc_data.empty()) throw ConfigError("--warmup tail needs --data");
        data = io::read_trajectory_csv(fs::path(fc_data), cfg.dt);
      }
      const State ic = resolve_ic(cfg, fc_ic);
      const std::size_t n = fc_steps.value_or(grid_intervals(cfg.t_test, cfg.dt));
      const ForecastRun run = run_forecast(cfg, model, ladder, source, ic,
                                           data ? &*data : nullptr, n, !fc_no_truth);
      const fs::path fpath = or_default(fc_out, out_dir / "forecast.csv");
      io::write_trajectory_csv(fpath, run.forecast);
      json rep{{"warmup", fc_warmup}, {"n_steps", n}, {"forecast", fpath.string()}};
      if (run.truth) {
        const fs::path tpath = or_default(fc_truth, out_dir / "truth.csv");
        io::write_trajectory_csv(tpath, *run.truth);
        rep["truth"] = tpath.string();
        rep["nrmse"] = nrmse(run.forecast, *run.truth);
        rep["valid_time"] = valid_time(run.forecast, *run.truth);
      }
      if (!fc_report.empty()) write_text(fc_report, rep.dump(2) + "\n");
      std::cout << rep.dump(2) << '\n';
    } else if (*met) {
      std::vector<TrajectoryPair> pairs;
      for (auto label : kAllLabels) {
        const auto& files = met_pairs[label];
        if (files.empty()) continue;
        pairs.push_back({label, io::read_trajectory_csv(fs::path(files[0]), cfg.dt),
                         io::read_trajectory_csv(fs::path(files[1]), cfg.dt)});
      }
      if (pairs.empty()) throw ConfigError("metrics needs at least one --<attractor> pair");
      const io::MetricsReport report = metrics_report(pairs);
      std::ostringstream csv;
      io::write_metrics_csv(csv, report);
      const fs::path path = or_default(met_out, out_dir / "metrics.csv");
      write_text(path, csv.str());
      std::cout << csv.str();
    } else if (*bas) {
      std::optional<NgrcModel> model;
      std::vector<NgrcModel> ladder;
      bool needs_model = false;
      for (auto e : cfg.basin_engines) needs_model |= e != EngineKind::oracle;
      if (needs_model) {
        if (bas_model.empty()) throw ConfigError("NG-RC basin engines need --model");
        model = io::load_model(bas_model);
        if (model->config().dt != cfg.dt) throw ConfigError("model dt differs from config dt");
        for (auto e : cfg.basin_engines) {
          if (e == EngineKind::ngrc_bootstrap && ladder.empty()) {
            ladder = load_ladder(bas_ladder, bas_model, model->taps());
          }
        }
      }
      const BasinResult result = run_basin(cfg, model ? &*model : nullptr, ladder);
      const fs::path dir = or_default(bas_dir, out_dir / "basin");
      io::BasinMetadata meta;
      meta.horizon = cfg.horizon;
      meta.created = utc_now();
      for (std::size_t g = 0; g < result.grids.size(); ++g) {
        const BasinGrid& grid = result.grids[g];
        meta.model_hash = grid.engine == EngineKind::oracle ? "" : io::model_hash(*model);
        const std::string stem = "basin_" + std::string(to_string(grid.engine)) +
                                 (g % result.region_count == 0 ? "_primary" : "_mirror");
        io::write_basin(dir / (stem + ".csv"), dir / (stem + ".meta.json"), grid, meta);
        std::cout << stem << ": torus " << grid.count(AttractorLabel::torus) << ", chaos_neg "
                  << grid.count(AttractorLabel::chaos_neg) << ", chaos_pos "
                  << grid.count(AttractorLabel::chaos_pos) << ", diverged "
                  << grid.divergence_count << '\n';
      }
      if (!result.scores.empty()) {
        std::ostringstream csv;
        write_agreement_csv(csv, result);
        write_text(dir / "agreement.csv", csv.str());
        for (const auto& s : result.scores) {
          std::cout << to_string(s.engine) << " agreement: chaos_neg "
                    << fmt_fraction(s.pooled.fraction(AttractorLabel::chaos_neg)) << ", chaos_pos "
                    << fmt_fraction(s.pooled.fraction(AttractorLabel::chaos_pos)) << ", overall "
                    << fmt_fraction(s.pooled.overall()) << '\n';
        }
      }
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "ngrc: " << e.what() << '\n';
    return 2;
  } catch (const NonFiniteState& e) {
    std::cerr << "ngrc: forecast diverged: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ngrc: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace ngrc::cli
