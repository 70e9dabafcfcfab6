#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "motcup/core.hpp"

namespace motcup::kernels {

// True when the library was built with OpenMP.
bool openmp_enabled();

// ---------------------------------------------------------------------------
// Data-parallel kernels. Each comes as a serial reference and an
// OpenMP-parallel variant; both are pure per cell (or per frame), so the
// outputs are bit-identical and the unsuffixed entry point may dispatch to
// either. The serial variants are kept as the reference for tests and for
// the benchmark target.
// ---------------------------------------------------------------------------

// (1 - IoU) cost matrix; rows index `rows`, columns index `cols`.
Eigen::MatrixXd iou_cost_serial(std::span<const BoxState> rows,
                                std::span<const BoxState> cols);
Eigen::MatrixXd iou_cost_parallel(std::span<const BoxState> rows,
                                  std::span<const BoxState> cols);
Eigen::MatrixXd iou_cost(std::span<const BoxState> rows,
                         std::span<const BoxState> cols);

// Pairwise snll similarity; rows index detections, columns index predicted
// tracklet boxes.
Eigen::MatrixXd snll_matrix_serial(std::span<const Detection> dets,
                                   std::span<const Vec4> preds);
Eigen::MatrixXd snll_matrix_parallel(std::span<const Detection> dets,
                                     std::span<const Vec4> preds);
Eigen::MatrixXd snll_matrix(std::span<const Detection> dets,
                            std::span<const Vec4> preds);

// Per-variable nonconformity scores of a scene against ground truth.
// Detections are matched to truth frame by frame (Hungarian on 1 - IoU,
// gated at match_iou); every matched pair contributes one score per
// variable. Frames are independent, so the parallel variant processes them
// concurrently and concatenates per-frame results in frame order — output
// is identical to the serial reference.
struct CalibrationScores {
  std::array<std::vector<double>, kNumVars> scores;
  std::size_t matched_pairs = 0;
};

CalibrationScores calibration_scores_serial(const Scene& dets,
                                            std::span<const GtObject> gt,
                                            double match_iou);
CalibrationScores calibration_scores_parallel(const Scene& dets,
                                              std::span<const GtObject> gt,
                                              double match_iou);
CalibrationScores calibration_scores(const Scene& dets,
                                     std::span<const GtObject> gt,
                                     double match_iou);

}  // namespace motcup::kernels
