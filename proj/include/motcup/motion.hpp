#pragma once

#include <Eigen/Dense>
#include <optional>

#include "motcup/core.hpp"

namespace motcup {

using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

// Filter constants. The paper-side defaults follow SORT-magnitude values;
// all of them are exposed through the tracker config.
struct MotionParams {
  double velocity_prior_var = 100.0;
  double process_noise_pos = 1e-2;
  double process_noise_vel = 1e-4;
  double extent_floor = 1e-3;  // meters
};

// Constant-velocity track hypothesis over [cx, cy, w, h] and their rates.
struct Tracklet {
  int track_id = 0;
  Vec8 state = Vec8::Zero();
  Mat8 covariance = Mat8::Zero();
  Vec4 last_sigma{1.0, 1.0, 1.0, 1.0};
  double last_class_prob = 0.0;
  double last_score = 0.0;
  int hits = 0;
  int age = 0;
  int time_since_update = 0;
};

// New track from an unassociated detection. The position block of the
// covariance is seeded from the detection's sigma; pass `position_var` to
// seed from fixed values instead (the classical-baseline path, which keeps
// detection sigmas out of the filter entirely).
Tracklet init_tracklet(const Detection& d, int id, const MotionParams& p = {},
                       const std::optional<Vec4>& position_var = {});

// One constant-velocity step (dt = 1 frame): state <- F state,
// P <- F P F^T + Q. Ages the tracklet.
void predict(Tracklet& t, const MotionParams& p = {});

// Kalman update observing the four box variables with measurement noise
// R = diag(r_var). Throws FilterDegenerateError when the innovation
// covariance is numerically singular.
void kf_update(Tracklet& t, const Detection& d, const Vec4& r_var,
               const MotionParams& p = {});

// Standard-deviation-driven update: R built from the detection's own
// (calibrated) sigma instead of fixed values.
void sdkf_update(Tracklet& t, const Detection& d, const MotionParams& p = {});

BoxState tracklet_box(const Tracklet& t);

}  // namespace motcup
