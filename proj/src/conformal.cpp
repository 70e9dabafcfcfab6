#include "motcup/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "motcup/kernels.hpp"

namespace motcup {

namespace {
constexpr double kQuantileFloor = 1e-9;
}

double nonconformity_score(double gt_value, double pred_mean,
                           double pred_sigma) {
  if (!(pred_sigma > 0.0) || !std::isfinite(pred_sigma)) {
    throw DomainError("nonconformity_score: sigma must be positive");
  }
  return std::abs(gt_value - pred_mean) / pred_sigma;
}

QuantileResult conformal_quantile(std::span<const double> scores,
                                  double alpha) {
  if (scores.empty()) {
    throw EmptyCalibrationError("conformal_quantile: empty score set");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("conformal_quantile: alpha must lie in (0,1)");
  }
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const auto m = static_cast<std::int64_t>(sorted.size());

  // ceil((1-alpha)(M+1)); the slack keeps mathematically integral values
  // from being pushed up a rank by floating-point rounding.
  const double v = (1.0 - alpha) * static_cast<double>(m + 1);
  auto k = static_cast<std::int64_t>(std::ceil(v - 1e-9));
  if (k < 1) k = 1;
  if (k <= m) return {sorted[static_cast<std::size_t>(k - 1)], false};
  return {sorted.back(), true};
}

QuantileSet calibrate(const Scene& cal_detections,
                      std::span<const GtObject> cal_gt, double alpha,
                      double match_iou, std::vector<std::string>* warnings) {
  if (cal_detections.frames.empty()) {
    throw EmptyCalibrationError("calibrate: no frames in calibration scene");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("calibrate: alpha must lie in (0,1)");
  }
  if (!(match_iou > 0.0 && match_iou < 1.0)) {
    throw ConfigError("calibrate: match_iou must lie in (0,1)");
  }

  const kernels::CalibrationScores collected =
      kernels::calibration_scores(cal_detections, cal_gt, match_iou);
  if (collected.matched_pairs == 0) {
    throw EmptyCalibrationError(
        "calibrate: no detection matched ground truth at the IoU gate");
  }

  QuantileSet qs;
  qs.alpha = alpha;
  qs.calibration_count = static_cast<std::int64_t>(collected.matched_pairs);
  qs.quantiles.resize(kNumVars);
  qs.clamped.resize(kNumVars);
  for (int i = 0; i < kNumVars; ++i) {
    const QuantileResult r = conformal_quantile(collected.scores[i], alpha);
    qs.clamped[i] = r.clamped;
    if (r.q < kQuantileFloor) {
      qs.quantiles[i] = kQuantileFloor;
      if (warnings) {
        warnings->push_back("degenerate quantile for variable " +
                            std::to_string(i) + " floored at 1e-9");
      }
    } else {
      qs.quantiles[i] = r.q;
    }
  }
  return qs;
}

Detection apply_quantiles(const Detection& d, const QuantileSet& q) {
  if (q.quantiles.size() != static_cast<std::size_t>(kNumVars)) {
    throw ShapeError("apply_quantiles: quantile set must hold " +
                     std::to_string(kNumVars) + " entries, got " +
                     std::to_string(q.quantiles.size()));
  }
  Detection out = d;
  for (int i = 0; i < kNumVars; ++i) {
    out.sigma[i] = d.sigma[i] * q.quantiles[i];
  }
  return out;
}

Interval prediction_interval(double pred_mean, double pred_sigma, double q) {
  if (!(pred_sigma > 0.0)) {
    throw DomainError("prediction_interval: sigma must be positive");
  }
  if (!(q >= 0.0)) {
    throw DomainError("prediction_interval: quantile must be nonnegative");
  }
  return {pred_mean - pred_sigma * q, pred_mean + pred_sigma * q};
}

CoverageReport empirical_coverage(std::span<const MatchedPair> test_pairs,
                                  const QuantileSet& q) {
  if (test_pairs.empty()) {
    throw EmptyInputError("empirical_coverage: no test pairs");
  }
  if (q.quantiles.size() != static_cast<std::size_t>(kNumVars)) {
    throw ShapeError("empirical_coverage: quantile set must hold 4 entries");
  }
  std::array<std::size_t, kNumVars> inside{};
  CoverageReport rep;
  for (const auto& p : test_pairs) {
    if (p.variable_index < 0 || p.variable_index >= kNumVars) {
      throw ShapeError("empirical_coverage: variable_index out of range");
    }
    const Interval iv = prediction_interval(p.pred_mean, p.pred_sigma,
                                            q.quantiles[p.variable_index]);
    ++rep.pairs[p.variable_index];
    if (p.gt_value >= iv.lo && p.gt_value <= iv.hi) {
      ++inside[p.variable_index];
    }
  }
  for (int i = 0; i < kNumVars; ++i) {
    rep.coverage[i] = rep.pairs[i] == 0
                          ? std::numeric_limits<double>::quiet_NaN()
                          : static_cast<double>(inside[i]) /
                                static_cast<double>(rep.pairs[i]);
  }
  return rep;
}

double kl_regression_loss(double gt_value, double pred_mean,
                          double pred_sigma) {
  if (!(pred_sigma > 0.0) || !std::isfinite(pred_sigma)) {
    throw DomainError("kl_regression_loss: sigma must be positive");
  }
  const double e = gt_value - pred_mean;
  return e * e / (2.0 * pred_sigma * pred_sigma) + std::log(pred_sigma);
}

}  // namespace motcup
