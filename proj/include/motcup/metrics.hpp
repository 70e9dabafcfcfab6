#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "motcup/core.hpp"
#include "motcup/tracker.hpp"

namespace motcup {

// CLEAR protocol counts. motp is mean IoU over matches, in [0,1].
struct ClearResult {
  double mota = 0.0;
  double motp = 0.0;
  std::int64_t false_positives = 0;
  std::int64_t false_negatives = 0;
  std::int64_t id_switches = 0;
  std::int64_t matches = 0;
};

ClearResult clear_metrics(std::span<const GtObject> gt,
                          std::span<const TrackRecord> records,
                          double iou_threshold);

// Averages over the 19-point localization-threshold grid {0.05, ..., 0.95};
// the per-alpha components are kept for diagnostics and tests.
struct HotaResult {
  double hota = 0.0;
  double deta = 0.0;
  double assa = 0.0;
  std::vector<double> alphas, hota_alpha, deta_alpha, assa_alpha;
};

HotaResult hota(std::span<const GtObject> gt,
                std::span<const TrackRecord> records);

// Closed-form CRPS of a Gaussian forecast N(mu, sigma^2) against outcome y.
double crps_gaussian(double mu, double sigma, double y);

// A distribution-carrying box output to score against truth; built either
// from raw detections or from track records.
struct BoxedOutput {
  int frame = 0;
  Vec4 mean{};
  Vec4 sigma{};
};

std::vector<BoxedOutput> boxed_from_records(std::span<const TrackRecord> records);
std::vector<BoxedOutput> boxed_from_scene(const Scene& scene);

struct UncertaintyResult {
  double nll = 0.0;
  double crps = 0.0;
  std::int64_t matched_tp = 0;
};

// NLL / CRPS averaged over all four variables of every output matched to
// truth at the IoU gate. Throws NoTpError when nothing matches.
UncertaintyResult uncertainty_metrics(std::span<const GtObject> gt,
                                      std::span<const BoxedOutput> outputs,
                                      double iou_threshold);

double throughput(std::span<const double> frame_seconds);

// Assembled evaluation record. Accuracy fields are optional so raw-detection
// evaluations (no identities) can omit them; uncertainty maps are keyed by
// the IoU threshold ("0.5", "0.7") and omit thresholds with no matched TP.
struct EvalReport {
  std::optional<double> hota, deta, assa;  // [0,1]
  std::optional<double> mota, motp;        // motp in [0,1]
  std::int64_t id_switches = 0;
  std::int64_t false_positives = 0;
  std::int64_t false_negatives = 0;
  std::map<std::string, double> nll_at, crps_at;
  std::map<std::string, std::int64_t> matched_tp;
  double fps = 0.0;
};

inline constexpr double kClearIou = 0.5;

EvalReport evaluate_tracks(std::span<const GtObject> gt,
                           std::span<const TrackRecord> records, double fps);
EvalReport evaluate_detections(std::span<const GtObject> gt,
                               const Scene& scene);

}  // namespace motcup
