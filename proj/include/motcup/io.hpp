#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "motcup/conformal.hpp"
#include "motcup/core.hpp"
#include "motcup/metrics.hpp"
#include "motcup/simgen.hpp"
#include "motcup/tracker.hpp"

namespace motcup::io {

// Shortest round-trip decimal for a 64-bit float. Throws DataError on
// non-finite values (they have no JSON representation).
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Line-delimited record files (UTF-8, LF). One JSON object per line; writers
// emit fields in a fixed order so identical data produces identical bytes.
// A detections file starts with an optional {"meta": ...} line carrying
// n_frames / frame_rate / field_extent / seed so empty frames survive the
// round trip.
// ---------------------------------------------------------------------------
void write_gt(const std::string& path, std::span<const GtObject> gt);
std::vector<GtObject> read_gt(const std::string& path);

void write_detections(const std::string& path, const Scene& scene);
Scene read_detections(const std::string& path);

void write_tracks(const std::string& path, std::span<const TrackRecord> records);
std::vector<TrackRecord> read_tracks(const std::string& path);

void write_quantiles(const std::string& path, const QuantileSet& q);
QuantileSet read_quantiles(const std::string& path);

void write_report(const std::string& path, const EvalReport& report);

void write_timings(const std::string& path, std::span<const double> seconds);

struct RunManifest {
  std::string command;
  std::string config_path;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::optional<std::uint64_t> seed;
  double wall_seconds = 0.0;
};

void write_manifest(const std::string& path, const RunManifest& m);

// ---------------------------------------------------------------------------
// Plain-text key/value configs; keys mirror the config struct fields.
// Scenario files may repeat a [zone] section per occlusion zone.
// ---------------------------------------------------------------------------
ScenarioConfig read_scenario_config(const std::string& path);
TrackerConfig read_tracker_config(const std::string& path);
void write_scenario_config(const std::string& path, const ScenarioConfig& cfg);

}  // namespace motcup::io
