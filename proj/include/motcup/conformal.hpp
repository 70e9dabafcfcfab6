#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "motcup/core.hpp"

namespace motcup {

// One calibration/test observation for one box variable.
struct MatchedPair {
  double gt_value = 0.0;
  double pred_mean = 0.0;
  double pred_sigma = 1.0;
  int variable_index = 0;
};

// Split-conformal quantiles, one per box variable. `clamped[i]` records
// that the order-statistic index exceeded the score count and the maximum
// score was used instead.
struct QuantileSet {
  double alpha = 0.1;
  std::vector<double> quantiles;  // size kNumVars, all > 0
  std::vector<bool> clamped;      // size kNumVars
  std::int64_t calibration_count = 0;
};

struct QuantileResult {
  double q = 0.0;
  bool clamped = false;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct CoverageReport {
  std::array<double, kNumVars> coverage{};
  std::array<std::size_t, kNumVars> pairs{};
};

// |y - y_hat| / sigma_hat. Throws DomainError for sigma <= 0.
double nonconformity_score(double gt_value, double pred_mean,
                           double pred_sigma);

// The ceil((1-alpha)(M+1))-th smallest score (1-based, ties kept). When the
// index exceeds M the maximum score is returned with clamped = true.
QuantileResult conformal_quantile(std::span<const double> scores,
                                  double alpha);

// Split-conformal calibration over a detection scene and its ground truth.
// Detections are matched to truth per frame by Hungarian assignment on
// (1 - IoU) gated at match_iou; unmatched detections are excluded. Degenerate
// all-zero quantiles are floored at 1e-9 and reported through `warnings`.
QuantileSet calibrate(const Scene& cal_detections,
                      std::span<const GtObject> cal_gt, double alpha,
                      double match_iou,
                      std::vector<std::string>* warnings = nullptr);

// Copy of `d` with sigma[i] scaled by q.quantiles[i].
Detection apply_quantiles(const Detection& d, const QuantileSet& q);

// [y_hat - sigma*q, y_hat + sigma*q]
Interval prediction_interval(double pred_mean, double pred_sigma, double q);

// Per-variable fraction of pairs whose truth lies inside the calibrated
// prediction interval.
CoverageReport empirical_coverage(std::span<const MatchedPair> test_pairs,
                                  const QuantileSet& q);

// (y - y_hat)^2 / (2 sigma^2) + log(sigma); minimized over sigma at |y - y_hat|.
double kl_regression_loss(double gt_value, double pred_mean,
                          double pred_sigma);

}  // namespace motcup
