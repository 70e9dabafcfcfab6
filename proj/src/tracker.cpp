#include "motcup/tracker.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "motcup/association.hpp"

namespace motcup {

double TrackerConfig::resolved_tau() const {
  if (tau) return *tau;
  return base == BaseTracker::kSort ? 1000.0 : 80.0;
}

void TrackerConfig::validate() const {
  if (!(iou_threshold >= 0.0 && iou_threshold < 1.0)) {
    throw ConfigError("tracker: iou_threshold must lie in [0,1)");
  }
  if (!(score_low >= 0.0 && score_low < score_high && score_high <= 1.0)) {
    throw ConfigError("tracker: require 0 <= score_low < score_high <= 1");
  }
  if (max_age < 1) throw ConfigError("tracker: max_age must be >= 1");
  if (min_hits < 1) throw ConfigError("tracker: min_hits must be >= 1");
  if (tau && !std::isfinite(*tau)) throw ConfigError("tracker: tau must be finite");
  for (int i = 0; i < kNumVars; ++i) {
    if (!(fixed_r[i] > 0.0)) {
      throw ConfigError("tracker: fixed_r entries must be positive");
    }
  }
}

Tracker::Tracker(TrackerConfig cfg, std::optional<QuantileSet> quantiles)
    : cfg_(std::move(cfg)), quantiles_(std::move(quantiles)) {
  cfg_.validate();
  if (cfg_.use_cp && !quantiles_) {
    throw ConfigError("tracker: use_cp requires a quantile set");
  }
  if (quantiles_ &&
      quantiles_->quantiles.size() != static_cast<std::size_t>(kNumVars)) {
    throw ShapeError("tracker: quantile set must hold 4 entries");
  }
}

std::vector<TrackRecord> Tracker::step(int frame,
                                       std::span<const Detection> dets) {
  if (started_ && frame <= last_frame_) {
    throw SequencingError("tracker: frames must be fed in increasing order");
  }
  started_ = true;
  last_frame_ = frame;

  // (a) conformal rectification of reported sigmas
  std::vector<Detection> adjusted(dets.begin(), dets.end());
  if (cfg_.use_cp) {
    for (auto& d : adjusted) d = apply_quantiles(d, *quantiles_);
  }

  // (b) motion prediction
  std::vector<BoxState> pred_boxes;
  std::vector<Vec4> pred_vecs;
  pred_boxes.reserve(tracks_.size());
  pred_vecs.reserve(tracks_.size());
  for (auto& t : tracks_) {
    predict(t, cfg_.motion);
    const BoxState b = tracklet_box(t);
    pred_boxes.push_back(b);
    pred_vecs.push_back(Vec4{b.cx, b.cy, b.w, b.h});
  }

  // (c) base association
  AssociationResult assoc =
      cfg_.base == BaseTracker::kSort
          ? associate_base_sort(adjusted, pred_boxes, cfg_.iou_threshold)
          : associate_base_byte(adjusted, pred_boxes, cfg_.score_high,
                                cfg_.score_low, cfg_.iou_threshold);

  // (d) NLL-based recovery of leftovers
  if (cfg_.use_nllai) {
    assoc = nllai(assoc, adjusted, pred_vecs, cfg_.resolved_tau());
  }

  // (e) measurement update
  for (const auto& [di, ti] : assoc.matched) {
    if (cfg_.use_sdkf) {
      sdkf_update(tracks_[ti], adjusted[di], cfg_.motion);
    } else {
      kf_update(tracks_[ti], adjusted[di], cfg_.fixed_r, cfg_.motion);
    }
  }

  // (f) prune stale tracklets
  std::erase_if(tracks_, [this](const Tracklet& t) {
    return t.time_since_update > cfg_.max_age;
  });

  // (g) births from unmatched detections; the fixed-R baseline keeps
  // detection sigmas out of the filter here too
  const std::optional<Vec4> birth_var =
      cfg_.use_sdkf ? std::nullopt : std::optional<Vec4>(cfg_.fixed_r);
  for (int di : assoc.unmatched_detections) {
    tracks_.push_back(
        init_tracklet(adjusted[di], next_id_++, cfg_.motion, birth_var));
  }

  std::vector<TrackRecord> out;
  for (const auto& t : tracks_) {
    if (t.time_since_update != 0) continue;
    if (t.hits < cfg_.min_hits && t.age >= cfg_.min_hits) continue;
    TrackRecord r;
    r.frame = frame;
    r.track_id = t.track_id;
    r.box = tracklet_box(t);
    r.sigma = t.last_sigma;
    r.score = cfg_.base == BaseTracker::kSort ? t.last_class_prob : t.last_score;
    out.push_back(r);
  }
  return out;
}

RunResult run_scene(const Scene& scene, const TrackerConfig& cfg,
                    const std::optional<QuantileSet>& quantiles) {
  validate_scene(scene);
  Tracker tracker(cfg, quantiles);
  RunResult res;
  res.frame_seconds.reserve(scene.frames.size());
  for (const auto& [frame, dets] : scene.frames) {
    const auto t0 = std::chrono::steady_clock::now();
    auto records = tracker.step(frame, dets);
    const auto t1 = std::chrono::steady_clock::now();
    res.frame_seconds.push_back(
        std::chrono::duration<double>(t1 - t0).count());
    res.records.insert(res.records.end(), records.begin(), records.end());
  }
  return res;
}

}  // namespace motcup
