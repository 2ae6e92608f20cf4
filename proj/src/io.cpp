#include "ngrc/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ngrc/errors.hpp"

namespace ngrc::io {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return {buf, static_cast<std::size_t>(n)};
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

double parse_double(std::string_view s, std::size_t line_no) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

// Shortest decimal that reproduces `v` to 1e-10 relative.
double snap_decimal(double v) {
  for (int digits = 1; digits <= 17; ++digits) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    const double candidate = std::strtod(buf, nullptr);
    if (std::abs(candidate - v) <= 1e-10 * std::abs(v)) return candidate;
  }
  return v;
}

template <typename T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,x,y,z,u\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out << format_double(traj.time(i));
    for (int c = 0; c < kStateDim; ++c) out << ',' << format_double(traj[i][c]);
    out << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  auto out = open_out(path);
  write_trajectory_csv(out, traj);
  if (!out) throw Error("failed writing " + path.string());
}

Trajectory read_trajectory_csv(std::istream& in, std::optional<double> fallback_dt) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "t,x,y,z,u") {
    throw FormatError("trajectory CSV must start with header 't,x,y,z,u'");
  }
  std::vector<double> times;
  std::vector<State> samples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 5) {
      throw FormatError("line " + std::to_string(line_no) + ": expected 5 columns");
    }
    times.push_back(parse_double(fields[0], line_no));
    State s;
    for (int c = 0; c < kStateDim; ++c) s[c] = parse_double(fields[c + 1], line_no);
    samples.push_back(s);
  }
  if (samples.empty()) throw FormatError("trajectory CSV has no samples");

  double dt = 0.0;
  if (samples.size() == 1) {
    if (!fallback_dt) throw FormatError("single-row trajectory needs an explicit dt");
    dt = *fallback_dt;
  } else {
    dt = snap_decimal((times.back() - times.front()) / static_cast<double>(times.size() - 1));
  }
  if (!(dt > 0.0)) throw FormatError("trajectory times must increase");
  const double t0 = times.front();
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double expect = t0 + static_cast<double>(i) * dt;
    if (std::abs(times[i] - expect) > 1e-9 * std::max(1.0, std::abs(expect))) {
      throw FormatError("trajectory is not on a uniform time grid (row " + std::to_string(i + 2) +
                        ")");
    }
  }
  return {dt, t0, std::move(samples)};
}

Trajectory read_trajectory_csv(const std::filesystem::path& path, std::optional<double> fallback_dt) {
  auto in = open_in(path);
  return read_trajectory_csv(in, fallback_dt);
}

json model_to_json(const NgrcModel& model) {
  const NgrcConfig& c = model.config();
  std::vector<double> flat;
  flat.reserve(model.weight_count());
  const Eigen::MatrixXd& w = model.w_out();
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index col = 0; col < w.cols(); ++col) flat.push_back(w(r, col));
  }
  return json{{"version", kModelFormatVersion},
              {"d", c.d},
              {"k", c.k},
              {"dt", c.dt},
              {"alpha", c.alpha},
              {"constant_term", c.constant_term},
              {"w_out", flat}};
}

NgrcModel model_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("model file must be a JSON object");
  const int version = require<int>(j, "version");
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported model version " + std::to_string(version));
  }
  NgrcConfig c;
  c.d = require<std::size_t>(j, "d");
  c.k = require<std::size_t>(j, "k");
  c.dt = require<double>(j, "dt");
  c.alpha = require<double>(j, "alpha");
  c.constant_term = require<double>(j, "constant_term");
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("model config: ") + e.what());
  }
  const auto flat = require<std::vector<double>>(j, "w_out");
  const std::size_t cols = c.feature_dim();
  if (flat.size() != c.d * cols) {
    throw FormatError("w_out has " + std::to_string(flat.size()) + " entries, expected d * " +
                      std::to_string(cols) + " = " + std::to_string(c.d * cols));
  }
  Eigen::MatrixXd w(static_cast<Eigen::Index>(c.d), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < c.d; ++r) {
    for (std::size_t col = 0; col < cols; ++col) {
      w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) = flat[r * cols + col];
    }
  }
  return {c, std::move(w)};
}

void save_model(const std::filesystem::path& path, const NgrcModel& model) {
  auto out = open_out(path);
  out << model_to_json(model).dump(2) << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

NgrcModel load_model(const std::filesystem::path& path) {
  auto in = open_in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("model file " + path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

std::string model_hash(const NgrcModel& model) {
  const std::string text = model_to_json(model).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json region_to_json(const BasinRegion& r) {
  return json{{"axis1", std::string(to_string(r.axis1))},
              {"axis2", std::string(to_string(r.axis2))},
              {"base", {r.base[0] + 0.0, r.base[1] + 0.0, r.base[2] + 0.0, r.base[3] + 0.0}},
              {"range1", {r.lo1 + 0.0, r.hi1 + 0.0}},
              {"range2", {r.lo2 + 0.0, r.hi2 + 0.0}},
              {"resolution", {r.n1, r.n2}}};
}

BasinRegion region_from_json(const json& j) {
  BasinRegion r;
  try {
    r.axis1 = parse_axis(require<std::string>(j, "axis1"));
    r.axis2 = parse_axis(require<std::string>(j, "axis2"));
  } catch (const ConfigError& e) {
    throw FormatError(e.what());
  }
  const auto base = require<std::vector<double>>(j, "base");
  const auto r1 = require<std::vector<double>>(j, "range1");
  const auto r2 = require<std::vector<double>>(j, "range2");
  const auto res = require<std::vector<std::size_t>>(j, "resolution");
  if (base.size() != 4 || r1.size() != 2 || r2.size() != 2 || res.size() != 2) {
    throw FormatError("basin region arrays have the wrong length");
  }
  r.base = State(base[0], base[1], base[2], base[3]);
  r.lo1 = r1[0];
  r.hi1 = r1[1];
  r.lo2 = r2[0];
  r.hi2 = r2[1];
  r.n1 = res[0];
  r.n2 = res[1];
  try {
    r.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("basin region: ") + e.what());
  }
  return r;
}

void write_basin_csv(std::ostream& out, const BasinGrid& grid) {
  const BasinRegion& r = grid.region;
  out << "axis1,axis2,label\n";
  for (std::size_t i = 0; i < r.n1; ++i) {
    for (std::size_t j = 0; j < r.n2; ++j) {
      out << format_double(r.coord1(i)) << ',' << format_double(r.coord2(j)) << ','
          << to_string(grid.at(i, j)) << '\n';
    }
  }
}

json basin_metadata_json(const BasinGrid& grid, const BasinMetadata& meta) {
  return json{{"region", region_to_json(grid.region)},
              {"engine", std::string(to_string(grid.engine))},
              {"model_hash", meta.model_hash},
              {"horizon", meta.horizon},
              {"divergence_count", grid.divergence_count},
              {"colors", {{"chaos_pos", "red"}, {"chaos_neg", "green"}, {"torus", "paleblue"}}},
              {"created", meta.created}};
}

void write_basin(const std::filesystem::path& csv_path, const std::filesystem::path& meta_path,
                 const BasinGrid& grid, const BasinMetadata& meta) {
  {
    auto out = open_out(csv_path);
    write_basin_csv(out, grid);
    if (!out) throw Error("failed writing " + csv_path.string());
  }
  auto out = open_out(meta_path);
  out << basin_metadata_json(grid, meta).dump(2) << '\n';
  if (!out) throw Error("failed writing " + meta_path.string());
}

BasinGrid read_basin(const std::filesystem::path& csv_path, const std::filesystem::path& meta_path) {
  json meta;
  {
    auto in = open_in(meta_path);
    try {
      in >> meta;
    } catch (const json::exception& e) {
      throw FormatError("basin metadata: " + std::string(e.what()));
    }
  }
  BasinGrid grid;
  grid.region = region_from_json(require<json>(meta, "region"));
  try {
    grid.engine = parse_engine(require<std::string>(meta, "engine"));
  } catch (const ConfigError& e) {
    throw FormatError(e.what());
  }
  grid.divergence_count = require<std::size_t>(meta, "divergence_count");

  auto in = open_in(csv_path);
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "axis1,axis2,label") {
    throw FormatError("basin CSV must start with header 'axis1,axis2,label'");
  }
  const BasinRegion& r = grid.region;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 3) throw FormatError("basin CSV line " + std::to_string(line_no));
    const std::size_t idx = grid.labels.size();
    if (idx >= r.n1 * r.n2) throw FormatError("basin CSV has more rows than the grid");
    const double a1 = parse_double(fields[0], line_no);
    const double a2 = parse_double(fields[1], line_no);
    if (a1 != r.coord1(idx / r.n2) || a2 != r.coord2(idx % r.n2)) {
      throw FormatError("basin CSV row " + std::to_string(line_no) + " is off the grid");
    }
    grid.labels.push_back(parse_label(fields[2]));
  }
  if (grid.labels.size() != r.n1 * r.n2) throw FormatError("basin CSV is missing rows");
  return grid;
}

MetricsReport make_metrics_report(std::vector<AttractorReport> attractors) {
  std::sort(attractors.begin(), attractors.end(),
            [](const AttractorReport& a, const AttractorReport& b) {
              return a.attractor < b.attractor;
            });
  MetricsReport report;
  std::array<bool, 3> seen{};
  std::array<double, 3> att{};
  for (auto& a : attractors) {
    const auto i = static_cast<std::size_t>(a.attractor);
    if (seen[i]) throw ConfigError("attractor '" + std::string(to_string(a.attractor)) + "' given twice");
    seen[i] = true;
    att[i] = a.delta_att;
  }
  if (seen[0] && seen[1] && seen[2]) report.delta_tot = delta_tot(att);
  report.attractors = std::move(attractors);
  return report;
}

void write_metrics_csv(std::ostream& out, const MetricsReport& report) {
  static constexpr std::array<const char*, 4> kVars{"x", "y", "z", "u"};
  out << "attractor,variable,delta_v,delta_abs_v\n";
  for (const auto& a : report.attractors) {
    const auto name = to_string(a.attractor);
    for (int i = 0; i < kStateDim; ++i) {
      out << name << ',' << kVars[i] << ',' << format_double(a.deltas.center[i]) << ','
          << format_double(a.deltas.extent[i]) << '\n';
    }
    out << name << ",delta_att," << format_double(a.delta_att) << ",\n";
  }
  out << "all,delta_tot," << (report.delta_tot ? format_double(*report.delta_tot) : "incomplete")
      << ",\n";
}

}  // namespace ngrc::io
