#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "motcup/conformal.hpp"
#include "motcup/core.hpp"
#include "motcup/motion.hpp"

namespace motcup {

enum class BaseTracker { kSort, kByteTrack };

struct TrackerConfig {
  BaseTracker base = BaseTracker::kSort;
  bool use_cp = false;
  bool use_sdkf = false;
  bool use_nllai = false;
  std::optional<double> tau;  // defaults to 1000 (sort) / 80 (bytetrack)
  double iou_threshold = 0.3;
  double score_high = 0.5;
  double score_low = 0.1;
  int max_age = 2;
  int min_hits = 2;
  Vec4 fixed_r{1.0, 1.0, 1.0, 1.0};  // measurement variance with SDKF off
  MotionParams motion;

  double resolved_tau() const;
  void validate() const;  // throws ConfigError
};

struct TrackRecord {
  int frame = 0;
  int track_id = 0;
  BoxState box;
  Vec4 sigma{};  // last associated detection sigma (CP-adjusted when CP on)
  double score = 0.0;
};

// Per-frame pipeline: CP adjustment, predict, base association, NLL
// recovery, measurement update, pruning and births. Owned by a single
// thread; feed frames in increasing order.
class Tracker {
 public:
  Tracker(TrackerConfig cfg, std::optional<QuantileSet> quantiles);

  std::vector<TrackRecord> step(int frame, std::span<const Detection> dets);

  const std::vector<Tracklet>& tracklets() const { return tracks_; }

 private:
  TrackerConfig cfg_;
  std::optional<QuantileSet> quantiles_;
  std::vector<Tracklet> tracks_;
  int next_id_ = 1;
  std::int64_t last_frame_ = 0;
  bool started_ = false;
};

struct RunResult {
  std::vector<TrackRecord> records;
  std::vector<double> frame_seconds;  // wall clock per frame
};

RunResult run_scene(const Scene& scene, const TrackerConfig& cfg,
                    const std::optional<QuantileSet>& quantiles);

}  // namespace motcup
