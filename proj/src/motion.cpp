#include "motcup/motion.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace motcup {

namespace {

using Mat4 = Eigen::Matrix4d;
using Vec4e = Eigen::Vector4d;

void symmetrize(Mat8& p) { p = ((p + p.transpose()) * 0.5).eval(); }

void clamp_extents(Vec8& state, double floor) {
  state[2] = std::max(state[2], floor);
  state[3] = std::max(state[3], floor);
}

}  // namespace

Tracklet init_tracklet(const Detection& d, int id, const MotionParams& p,
                       const std::optional<Vec4>& position_var) {
  validate_detection(d);
  Tracklet t;
  t.track_id = id;
  for (int i = 0; i < kNumVars; ++i) {
    t.state[i] = d.mean[i];
    t.covariance(i, i) =
        position_var ? (*position_var)[i] : d.sigma[i] * d.sigma[i];
    t.covariance(i + 4, i + 4) = p.velocity_prior_var;
  }
  t.last_sigma = d.sigma;
  t.last_class_prob = d.class_prob;
  t.last_score = d.score;
  t.hits = 1;
  t.age = 0;
  t.time_since_update = 0;
  return t;
}

void predict(Tracklet& t, const MotionParams& p) {
  // F = [I I; 0 I], applied blockwise.
  t.state.head<4>() += t.state.tail<4>();
  clamp_extents(t.state, p.extent_floor);

  const Mat4 pxx = t.covariance.topLeftCorner<4, 4>();
  const Mat4 pxv = t.covariance.topRightCorner<4, 4>();
  const Mat4 pvx = t.covariance.bottomLeftCorner<4, 4>();
  const Mat4 pvv = t.covariance.bottomRightCorner<4, 4>();
  t.covariance.topLeftCorner<4, 4>() = pxx + pxv + pvx + pvv;
  t.covariance.topRightCorner<4, 4>() = pxv + pvv;
  t.covariance.bottomLeftCorner<4, 4>() = pvx + pvv;

  for (int i = 0; i < 4; ++i) {
    t.covariance(i, i) += p.process_noise_pos;
    t.covariance(i + 4, i + 4) += p.process_noise_vel;
  }
  symmetrize(t.covariance);

  t.age += 1;
  t.time_since_update += 1;
}

void kf_update(Tracklet& t, const Detection& d, const Vec4& r_var,
               const MotionParams& p) {
  validate_detection(d);
  for (int i = 0; i < kNumVars; ++i) {
    if (!(r_var[i] > 0.0) || !std::isfinite(r_var[i])) {
      throw DomainError("kf_update: measurement variance must be positive");
    }
  }

  Mat4 s = t.covariance.topLeftCorner<4, 4>();
  for (int i = 0; i < 4; ++i) s(i, i) += r_var[i];

  Eigen::SelfAdjointEigenSolver<Mat4> eig(s);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    throw FilterDegenerateError(
        "kf_update: innovation covariance numerically singular");
  }

  const Eigen::Matrix<double, 8, 4> pht = t.covariance.leftCols<4>();
  const Eigen::Matrix<double, 8, 4> gain = pht * s.inverse();

  Vec4e innovation;
  for (int i = 0; i < 4; ++i) innovation[i] = d.mean[i] - t.state[i];

  t.state += gain * innovation;
  clamp_extents(t.state, p.extent_floor);
  t.covariance -= gain * t.covariance.topRows<4>();
  symmetrize(t.covariance);

  t.hits = t.time_since_update <= 1 ? t.hits + 1 : 1;
  t.time_since_update = 0;
  t.last_sigma = d.sigma;
  t.last_class_prob = d.class_prob;
  t.last_score = d.score;
}

void sdkf_update(Tracklet& t, const Detection& d, const MotionParams& p) {
  Vec4 r_var;
  for (int i = 0; i < kNumVars; ++i) r_var[i] = d.sigma[i] * d.sigma[i];
  kf_update(t, d, r_var, p);
}

BoxState tracklet_box(const Tracklet& t) {
  const BoxState b{t.state[0], t.state[1], t.state[2], t.state[3]};
  validate_box(b);
  return b;
}

}  // namespace motcup
