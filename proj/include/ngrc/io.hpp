#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ngrc/basin.hpp"
#include "ngrc/dynamics.hpp"
#include "ngrc/metrics.hpp"
#include "ngrc/model.hpp"

namespace ngrc::io {

// Trajectory CSV: header `t,x,y,z,u`, one row per sample, 17 significant digits.

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

/// Parses a trajectory CSV and checks the uniform time grid. The step is
/// recovered from the time column and snapped to its shortest decimal form;
/// `fallback_dt` is used for single-row files. Throws FormatError.
[[nodiscard]] Trajectory read_trajectory_csv(std::istream& in,
                                             std::optional<double> fallback_dt = std::nullopt);
[[nodiscard]] Trajectory read_trajectory_csv(const std::filesystem::path& path,
                                             std::optional<double> fallback_dt = std::nullopt);

// Model file: JSON with version, d, k, dt, alpha, constant_term and w_out as a
// row-major array of d * feature_dim numbers.

inline constexpr int kModelFormatVersion = 1;

[[nodiscard]] nlohmann::json model_to_json(const NgrcModel& model);
/// Throws FormatError on missing fields, unknown version or inconsistent
/// dimensions.
[[nodiscard]] NgrcModel model_from_json(const nlohmann::json& j);
void save_model(const std::filesystem::path& path, const NgrcModel& model);
[[nodiscard]] NgrcModel load_model(const std::filesystem::path& path);

/// 64-bit FNV-1a of the canonical model JSON, as 16 hex digits.
[[nodiscard]] std::string model_hash(const NgrcModel& model);

// Basin grid: CSV `axis1,axis2,label` (axis1-major) plus a JSON sidecar.

struct BasinMetadata {
  std::string model_hash;  // empty for the oracle engine
  double horizon = kDefaultHorizon;
  std::string created;     // timestamp; the only non-deterministic field
};

void write_basin_csv(std::ostream& out, const BasinGrid& grid);
[[nodiscard]] nlohmann::json basin_metadata_json(const BasinGrid& grid, const BasinMetadata& meta);
void write_basin(const std::filesystem::path& csv_path, const std::filesystem::path& meta_path,
                 const BasinGrid& grid, const BasinMetadata& meta);
/// Reads a grid back; labels must appear in grid order. Throws FormatError.
[[nodiscard]] BasinGrid read_basin(const std::filesystem::path& csv_path,
                                   const std::filesystem::path& meta_path);

[[nodiscard]] nlohmann::json region_to_json(const BasinRegion& region);
[[nodiscard]] BasinRegion region_from_json(const nlohmann::json& j);

// Metrics report: CSV `attractor,variable,delta_v,delta_abs_v` with one
// summary row per attractor (variable `delta_att`) and a final `all,delta_tot`
// row whose value is `incomplete` unless all three attractors are present.

struct AttractorReport {
  AttractorLabel attractor;
  AttractorDeltas deltas;
  double delta_att = 0.0;
};

struct MetricsReport {
  std::vector<AttractorReport> attractors;
  std::optional<double> delta_tot;  // set only when all three are present
};

/// Orders reports torus, chaos_neg, chaos_pos and fills delta_tot.
[[nodiscard]] MetricsReport make_metrics_report(std::vector<AttractorReport> attractors);
void write_metrics_csv(std::ostream& out, const MetricsReport& report);

/// Formats with 17 significant digits.
[[nodiscard]] std::string format_double(double v);

}  // namespace ngrc::io
