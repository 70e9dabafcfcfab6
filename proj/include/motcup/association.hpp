#pragma once

#include <Eigen/Dense>
#include <span>
#include <utility>
#include <vector>

#include "motcup/core.hpp"

namespace motcup {

// Output of one association pass. Index pairs are (detection, tracklet).
struct AssociationResult {
  std::vector<std::pair<int, int>> matched;
  std::vector<int> unmatched_detections;
  std::vector<int> unmatched_tracklets;
};

// Intersection over union of two axis-aligned boxes, in [0,1].
double iou(const BoxState& a, const BoxState& b);

// Min-cost assignment of size min(rows, cols). Among equal-cost optima the
// lexicographically smallest (row, col) sequence is returned whenever the
// candidate space is small enough to enumerate (see association.cpp); larger
// solves are still fully deterministic. Throws InvalidCostError on
// non-finite entries.
std::vector<std::pair<int, int>> hungarian(const Eigen::MatrixXd& cost);

// Mean per-variable Gaussian negative log density of the tracklet's
// predicted box under the detection's distribution.
double snll(const Vec4& track_pred, const Detection& d);

AssociationResult associate_base_sort(std::span<const Detection> dets,
                                      std::span<const BoxState> preds,
                                      double iou_threshold);

// Two-stage score-split association. Detections with score below score_low
// are discarded outright; stage-2 leftovers never spawn tracks, so
// unmatched_detections holds stage-1 leftovers only.
AssociationResult associate_base_byte(std::span<const Detection> dets,
                                      std::span<const BoxState> preds,
                                      double score_high, double score_low,
                                      double iou_threshold);

// Recovery pass over leftover detections and tracklets: assignment on the
// pairwise snll matrix, then pairs with snll > tau are undone. Pairs already
// matched in `base` are passed through untouched.
AssociationResult nllai(const AssociationResult& base,
                        std::span<const Detection> dets,
                        std::span<const Vec4> track_preds, double tau);

// Hungarian matching of two box lists on (1 - IoU) with pairs below min_iou
// inadmissible. Used by calibration and by the evaluation metrics.
std::vector<std::pair<int, int>> match_boxes_iou(std::span<const BoxState> a,
                                                 std::span<const BoxState> b,
                                                 double min_iou);

}  // namespace motcup
