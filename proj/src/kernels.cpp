#include "motcup/kernels.hpp"

#include <cmath>
#include <map>

#include "motcup/association.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace motcup::kernels {

namespace {

// Parallelism only pays off once a work item is large enough.
constexpr std::ptrdiff_t kMinParallelCells = 4096;
constexpr std::size_t kMinParallelFrames = 8;

// Per-frame calibration work item: score every IoU-matched (detection,
// truth) pair on all four variables.
CalibrationScores score_frame(std::span<const Detection> dets,
                              std::span<const BoxState> gt_boxes,
                              double match_iou) {
  CalibrationScores out;
  std::vector<BoxState> det_boxes;
  det_boxes.reserve(dets.size());
  for (const auto& d : dets) det_boxes.push_back(d.box());

  for (const auto& [di, gi] : match_boxes_iou(det_boxes, gt_boxes, match_iou)) {
    const Detection& d = dets[di];
    const BoxState& g = gt_boxes[gi];
    const Vec4 truth{g.cx, g.cy, g.w, g.h};
    for (int i = 0; i < kNumVars; ++i) {
      out.scores[i].push_back(std::abs(truth[i] - d.mean[i]) / d.sigma[i]);
    }
    ++out.matched_pairs;
  }
  return out;
}

struct FrameWork {
  std::span<const Detection> dets;
  std::vector<BoxState> gt_boxes;
};

std::vector<FrameWork> collect_frames(const Scene& scene,
                                      std::span<const GtObject> gt) {
  std::map<int, std::vector<BoxState>> gt_by_frame;
  for (const auto& g : gt) gt_by_frame[g.frame].push_back(g.box);

  std::vector<FrameWork> work;
  work.reserve(scene.frames.size());
  for (const auto& [frame, dets] : scene.frames) {
    auto it = gt_by_frame.find(frame);
    work.push_back(FrameWork{
        dets, it == gt_by_frame.end() ? std::vector<BoxState>{} : it->second});
  }
  return work;
}

CalibrationScores merge(std::vector<CalibrationScores>& per_frame) {
  CalibrationScores out;
  for (auto& f : per_frame) {
    for (int i = 0; i < kNumVars; ++i) {
      out.scores[i].insert(out.scores[i].end(), f.scores[i].begin(),
                           f.scores[i].end());
    }
    out.matched_pairs += f.matched_pairs;
  }
  return out;
}

}  // namespace

bool openmp_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

Eigen::MatrixXd iou_cost_serial(std::span<const BoxState> rows,
                                std::span<const BoxState> cols) {
  Eigen::MatrixXd cost(rows.size(), cols.size());
  for (std::ptrdiff_t r = 0; r < cost.rows(); ++r) {
    for (std::ptrdiff_t c = 0; c < cost.cols(); ++c) {
      cost(r, c) = 1.0 - iou(rows[r], cols[c]);
    }
  }
  return cost;
}

Eigen::MatrixXd iou_cost_parallel(std::span<const BoxState> rows,
                                  std::span<const BoxState> cols) {
  Eigen::MatrixXd cost(rows.size(), cols.size());
  const std::ptrdiff_t nr = cost.rows(), nc = cost.cols();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < nr; ++r) {
    for (std::ptrdiff_t c = 0; c < nc; ++c) {
      cost(r, c) = 1.0 - iou(rows[r], cols[c]);
    }
  }
  return cost;
}

Eigen::MatrixXd iou_cost(std::span<const BoxState> rows,
                         std::span<const BoxState> cols) {
  const std::ptrdiff_t cells =
      static_cast<std::ptrdiff_t>(rows.size()) * cols.size();
  if (openmp_enabled() && cells >= kMinParallelCells) {
    return iou_cost_parallel(rows, cols);
  }
  return iou_cost_serial(rows, cols);
}

Eigen::MatrixXd snll_matrix_serial(std::span<const Detection> dets,
                                   std::span<const Vec4> preds) {
  Eigen::MatrixXd sim(dets.size(), preds.size());
  for (std::ptrdiff_t r = 0; r < sim.rows(); ++r) {
    for (std::ptrdiff_t c = 0; c < sim.cols(); ++c) {
      sim(r, c) = snll(preds[c], dets[r]);
    }
  }
  return sim;
}

Eigen::MatrixXd snll_matrix_parallel(std::span<const Detection> dets,
                                     std::span<const Vec4> preds) {
  Eigen::MatrixXd sim(dets.size(), preds.size());
  const std::ptrdiff_t nr = sim.rows(), nc = sim.cols();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < nr; ++r) {
    for (std::ptrdiff_t c = 0; c < nc; ++c) {
      sim(r, c) = snll(preds[c], dets[r]);
    }
  }
  return sim;
}

Eigen::MatrixXd snll_matrix(std::span<const Detection> dets,
                            std::span<const Vec4> preds) {
  const std::ptrdiff_t cells =
      static_cast<std::ptrdiff_t>(dets.size()) * preds.size();
  if (openmp_enabled() && cells >= kMinParallelCells) {
    return snll_matrix_parallel(dets, preds);
  }
  return snll_matrix_serial(dets, preds);
}

CalibrationScores calibration_scores_serial(const Scene& dets,
                                            std::span<const GtObject> gt,
                                            double match_iou) {
  auto work = collect_frames(dets, gt);
  std::vector<CalibrationScores> per_frame(work.size());
  for (std::size_t f = 0; f < work.size(); ++f) {
    per_frame[f] = score_frame(work[f].dets, work[f].gt_boxes, match_iou);
  }
  return merge(per_frame);
}

CalibrationScores calibration_scores_parallel(const Scene& dets,
                                              std::span<const GtObject> gt,
                                              double match_iou) {
  auto work = collect_frames(dets, gt);
  std::vector<CalibrationScores> per_frame(work.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(work.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t f = 0; f < n; ++f) {
    per_frame[f] = score_frame(work[f].dets, work[f].gt_boxes, match_iou);
  }
  return merge(per_frame);
}

CalibrationScores calibration_scores(const Scene& dets,
                                     std::span<const GtObject> gt,
                                     double match_iou) {
  if (openmp_enabled() && dets.frames.size() >= kMinParallelFrames) {
    return calibration_scores_parallel(dets, gt, match_iou);
  }
  return calibration_scores_serial(dets, gt, match_iou);
}

}  // namespace motcup::kernels
