#include "motcup/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

#include "motcup/association.hpp"

namespace motcup {

namespace {

constexpr double kInadmissible = 1e6;
constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kInvSqrtPi = 0.56418958354775628695;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

struct FrameView {
  int frame = 0;
  std::vector<int> gt_ids;
  std::vector<BoxState> gt_boxes;
  std::vector<int> track_ids;
  std::vector<BoxState> track_boxes;
  Eigen::MatrixXd overlap;  // gt rows x track cols
};

std::vector<FrameView> build_frames(std::span<const GtObject> gt,
                                    std::span<const TrackRecord> records) {
  std::map<int, FrameView> by_frame;
  std::set<std::pair<int, int>> gt_keys, rec_keys;
  for (const auto& g : gt) {
    if (!gt_keys.insert({g.frame, g.object_id}).second) {
      throw DataError("ground truth ids must be unique within a frame");
    }
    auto& fv = by_frame[g.frame];
    fv.frame = g.frame;
    fv.gt_ids.push_back(g.object_id);
    fv.gt_boxes.push_back(g.box);
  }
  for (const auto& r : records) {
    if (!rec_keys.insert({r.frame, r.track_id}).second) {
      throw DataError("track records must be unique per (frame, track_id)");
    }
    auto& fv = by_frame[r.frame];
    fv.frame = r.frame;
    fv.track_ids.push_back(r.track_id);
    fv.track_boxes.push_back(r.box);
  }
  std::vector<FrameView> frames;
  frames.reserve(by_frame.size());
  for (auto& [f, fv] : by_frame) {
    fv.overlap.resize(fv.gt_ids.size(), fv.track_ids.size());
    for (std::size_t r = 0; r < fv.gt_ids.size(); ++r) {
      for (std::size_t c = 0; c < fv.track_ids.size(); ++c) {
        fv.overlap(r, c) = iou(fv.gt_boxes[r], fv.track_boxes[c]);
      }
    }
    frames.push_back(std::move(fv));
  }
  return frames;
}

// Gated Hungarian on a precomputed overlap matrix: pairs below `thr` are
// inadmissible, surviving pairs are returned as (gt row, track col).
std::vector<std::pair<int, int>> gated_match(const Eigen::MatrixXd& overlap,
                                             double thr,
                                             std::span<const char> gt_free,
                                             std::span<const char> tr_free) {
  std::vector<int> rows, cols;
  for (int r = 0; r < overlap.rows(); ++r) {
    if (gt_free.empty() || gt_free[r]) rows.push_back(r);
  }
  for (int c = 0; c < overlap.cols(); ++c) {
    if (tr_free.empty() || tr_free[c]) cols.push_back(c);
  }
  if (rows.empty() || cols.empty()) return {};
  Eigen::MatrixXd cost(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double ov = overlap(rows[r], cols[c]);
      cost(r, c) = ov >= thr ? 1.0 - ov : kInadmissible;
    }
  }
  std::vector<std::pair<int, int>> out;
  for (const auto& [r, c] : hungarian(cost)) {
    if (overlap(rows[r], cols[c]) >= thr) {
      out.emplace_back(rows[r], cols[c]);
    }
  }
  return out;
}

}  // namespace

ClearResult clear_metrics(std::span<const GtObject> gt,
                          std::span<const TrackRecord> records,
                          double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw ConfigError("clear_metrics: iou_threshold must lie in (0,1)");
  }
  if (gt.empty()) {
    throw UndefinedMetricError("clear_metrics: MOTA undefined on empty ground truth");
  }
  const auto frames = build_frames(gt, records);

  std::map<int, int> corr;        // active gt id -> track id correspondence
  std::map<int, int> last_match;  // most recent matched track id per gt id
  ClearResult res;
  double iou_sum = 0.0;

  for (const auto& fv : frames) {
    std::map<int, int> gt_pos, tr_pos;
    for (std::size_t i = 0; i < fv.gt_ids.size(); ++i) gt_pos[fv.gt_ids[i]] = static_cast<int>(i);
    for (std::size_t i = 0; i < fv.track_ids.size(); ++i) tr_pos[fv.track_ids[i]] = static_cast<int>(i);

    std::vector<char> gt_free(fv.gt_ids.size(), 1);
    std::vector<char> tr_free(fv.track_ids.size(), 1);

    // keep prior correspondences that still overlap
    for (const auto& [gid, tid] : corr) {
      auto gi = gt_pos.find(gid);
      auto ti = tr_pos.find(tid);
      if (gi == gt_pos.end() || ti == tr_pos.end()) continue;
      if (!gt_free[gi->second] || !tr_free[ti->second]) continue;
      const double ov = fv.overlap(gi->second, ti->second);
      if (ov >= iou_threshold) {
        gt_free[gi->second] = 0;
        tr_free[ti->second] = 0;
        ++res.matches;
        iou_sum += ov;
      }
    }

    for (const auto& [r, c] : gated_match(fv.overlap, iou_threshold, gt_free, tr_free)) {
      gt_free[r] = 0;
      tr_free[c] = 0;
      ++res.matches;
      iou_sum += fv.overlap(r, c);
      const int gid = fv.gt_ids[r];
      const int tid = fv.track_ids[c];
      auto prev = last_match.find(gid);
      if (prev != last_match.end() && prev->second != tid) {
        ++res.id_switches;
      }
      corr[gid] = tid;
      last_match[gid] = tid;
    }

    for (char f : gt_free) res.false_negatives += f;
    for (char f : tr_free) res.false_positives += f;
  }

  const auto gt_total = static_cast<double>(gt.size());
  res.mota = 1.0 - static_cast<double>(res.false_positives +
                                       res.false_negatives + res.id_switches) /
                       gt_total;
  res.motp = res.matches > 0 ? iou_sum / static_cast<double>(res.matches) : 0.0;
  return res;
}

HotaResult hota(std::span<const GtObject> gt,
                std::span<const TrackRecord> records) {
  if (gt.empty()) {
    throw UndefinedMetricError("hota: undefined on empty ground truth");
  }
  const auto frames = build_frames(gt, records);

  std::map<int, std::int64_t> gt_count, tr_count;
  for (const auto& fv : frames) {
    for (int g : fv.gt_ids) ++gt_count[g];
    for (int t : fv.track_ids) ++tr_count[t];
  }
  const std::int64_t total_gt = static_cast<std::int64_t>(gt.size());
  std::int64_t total_tr = 0;
  for (const auto& [t, n] : tr_count) total_tr += n;

  constexpr int kGrid = 19;
  HotaResult res;
  res.alphas.resize(kGrid);
  res.hota_alpha.resize(kGrid);
  res.deta_alpha.resize(kGrid);
  res.assa_alpha.resize(kGrid);

#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < kGrid; ++k) {
    const double alpha = 0.05 * (k + 1);
    std::map<std::pair<int, int>, std::int64_t> pair_tp;
    std::map<int, std::int64_t> gt_tp, tr_tp;
    std::int64_t tp = 0;
    for (const auto& fv : frames) {
      for (const auto& [r, c] : gated_match(fv.overlap, alpha, {}, {})) {
        const int gid = fv.gt_ids[r];
        const int tid = fv.track_ids[c];
        ++pair_tp[{gid, tid}];
        ++gt_tp[gid];
        ++tr_tp[tid];
        ++tp;
      }
    }
    const std::int64_t fn = total_gt - tp;
    const std::int64_t fp = total_tr - tp;
    const double deta =
        tp + fn + fp > 0
            ? static_cast<double>(tp) / static_cast<double>(tp + fn + fp)
            : 0.0;
    double assa = 0.0;
    if (tp > 0) {
      double acc = 0.0;
      for (const auto& [key, n] : pair_tp) {
        const auto& [gid, tid] = key;
        const double denom =
            static_cast<double>(gt_count.at(gid) + tr_count.at(tid) - n);
        acc += static_cast<double>(n) * (static_cast<double>(n) / denom);
      }
      assa = acc / static_cast<double>(tp);
    }
    res.alphas[k] = alpha;
    res.deta_alpha[k] = deta;
    res.assa_alpha[k] = assa;
    res.hota_alpha[k] = std::sqrt(deta * assa);
  }

  for (int k = 0; k < kGrid; ++k) {
    res.hota += res.hota_alpha[k];
    res.deta += res.deta_alpha[k];
    res.assa += res.assa_alpha[k];
  }
  res.hota /= kGrid;
  res.deta /= kGrid;
  res.assa /= kGrid;
  return res;
}

double crps_gaussian(double mu, double sigma, double y) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw DomainError("crps_gaussian: sigma must be positive");
  }
  const double z = (y - mu) / sigma;
  const double cdf = 0.5 * std::erfc(-z / kSqrt2);
  const double pdf = kInvSqrt2Pi * std::exp(-0.5 * z * z);
  return sigma * (z * (2.0 * cdf - 1.0) + 2.0 * pdf - kInvSqrtPi);
}

std::vector<BoxedOutput> boxed_from_records(
    std::span<const TrackRecord> records) {
  std::vector<BoxedOutput> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back(BoxedOutput{
        r.frame, Vec4{r.box.cx, r.box.cy, r.box.w, r.box.h}, r.sigma});
  }
  return out;
}

std::vector<BoxedOutput> boxed_from_scene(const Scene& scene) {
  std::vector<BoxedOutput> out;
  for (const auto& [frame, dets] : scene.frames) {
    for (const auto& d : dets) {
      out.push_back(BoxedOutput{frame, d.mean, d.sigma});
    }
  }
  return out;
}

UncertaintyResult uncertainty_metrics(std::span<const GtObject> gt,
                                      std::span<const BoxedOutput> outputs,
                                      double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw ConfigError("uncertainty_metrics: iou_threshold must lie in (0,1)");
  }
  for (const auto& o : outputs) {
    for (int i = 0; i < kNumVars; ++i) {
      if (!(o.sigma[i] > 0.0)) {
        throw DomainError("uncertainty_metrics: sigma must be positive");
      }
    }
  }

  std::map<int, std::vector<const BoxedOutput*>> out_by_frame;
  std::map<int, std::vector<const GtObject*>> gt_by_frame;
  for (const auto& o : outputs) out_by_frame[o.frame].push_back(&o);
  for (const auto& g : gt) gt_by_frame[g.frame].push_back(&g);

  UncertaintyResult res;
  double nll_sum = 0.0, crps_sum = 0.0;
  for (const auto& [frame, outs] : out_by_frame) {
    auto git = gt_by_frame.find(frame);
    if (git == gt_by_frame.end()) continue;
    std::vector<BoxState> oboxes, gboxes;
    for (const auto* o : outs) {
      oboxes.push_back(BoxState{o->mean[0], o->mean[1], o->mean[2], o->mean[3]});
    }
    for (const auto* g : git->second) gboxes.push_back(g->box);

    for (const auto& [oi, gi] : match_boxes_iou(oboxes, gboxes, iou_threshold)) {
      const BoxedOutput& o = *outs[oi];
      const BoxState& gb = git->second[gi]->box;
      const Vec4 truth{gb.cx, gb.cy, gb.w, gb.h};
      for (int i = 0; i < kNumVars; ++i) {
        nll_sum += -gaussian_logpdf(truth[i], o.mean[i], o.sigma[i]);
        crps_sum += crps_gaussian(o.mean[i], o.sigma[i], truth[i]);
      }
      ++res.matched_tp;
    }
  }
  if (res.matched_tp == 0) {
    throw NoTpError("uncertainty_metrics: no output matched ground truth");
  }
  const double denom = static_cast<double>(res.matched_tp * kNumVars);
  res.nll = nll_sum / denom;
  res.crps = crps_sum / denom;
  return res;
}

double throughput(std::span<const double> frame_seconds) {
  if (frame_seconds.empty()) {
    throw EmptyInputError("throughput: no timings");
  }
  double total = 0.0;
  for (double t : frame_seconds) total += t;
  return static_cast<double>(frame_seconds.size()) / total;
}

EvalReport evaluate_tracks(std::span<const GtObject> gt,
                           std::span<const TrackRecord> records, double fps) {
  EvalReport rep;
  const ClearResult clear = clear_metrics(gt, records, kClearIou);
  rep.mota = clear.mota;
  rep.motp = clear.motp;
  rep.id_switches = clear.id_switches;
  rep.false_positives = clear.false_positives;
  rep.false_negatives = clear.false_negatives;
  const HotaResult h = hota(gt, records);
  rep.hota = h.hota;
  rep.deta = h.deta;
  rep.assa = h.assa;
  rep.fps = fps;

  const auto boxed = boxed_from_records(records);
  for (const char* key : {"0.5", "0.7"}) {
    try {
      const UncertaintyResult u =
          uncertainty_metrics(gt, boxed, std::stod(key));
      rep.nll_at[key] = u.nll;
      rep.crps_at[key] = u.crps;
      rep.matched_tp[key] = u.matched_tp;
    } catch (const NoTpError&) {
      rep.matched_tp[key] = 0;
    }
  }
  return rep;
}

EvalReport evaluate_detections(std::span<const GtObject> gt,
                               const Scene& scene) {
  EvalReport rep;
  const auto boxed = boxed_from_scene(scene);
  for (const char* key : {"0.5", "0.7"}) {
    try {
      const UncertaintyResult u =
          uncertainty_metrics(gt, boxed, std::stod(key));
      rep.nll_at[key] = u.nll;
      rep.crps_at[key] = u.crps;
      rep.matched_tp[key] = u.matched_tp;
    } catch (const NoTpError&) {
      rep.matched_tp[key] = 0;
    }
  }
  return rep;
}

}  // namespace motcup
