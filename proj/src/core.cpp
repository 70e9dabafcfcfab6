#include "motcup/core.hpp"

#include <cmath>

namespace motcup {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))
}

bool box_valid(const BoxState& b) {
  return std::isfinite(b.cx) && std::isfinite(b.cy) && std::isfinite(b.w) &&
         std::isfinite(b.h) && b.w > 0.0 && b.h > 0.0;
}

void validate_box(const BoxState& b) {
  if (!box_valid(b)) {
    throw InvalidBoxError("invalid box: extents must be positive and all fields finite");
  }
}

Corners box_corners(const BoxState& b) {
  validate_box(b);
  return Corners{b.cx - b.w / 2.0, b.cy - b.h / 2.0, b.cx + b.w / 2.0,
                 b.cy + b.h / 2.0};
}

BoxState box_from_corners(const Corners& c) {
  BoxState b;
  b.w = c.x_max - c.x_min;
  b.h = c.y_max - c.y_min;
  b.cx = c.x_min + b.w / 2.0;
  b.cy = c.y_min + b.h / 2.0;
  validate_box(b);
  return b;
}

void validate_detection(const Detection& d) {
  for (int i = 0; i < kNumVars; ++i) {
    if (!(d.sigma[i] > 0.0) || !std::isfinite(d.sigma[i])) {
      throw DomainError("detection sigma must be positive and finite");
    }
    if (!std::isfinite(d.mean[i])) {
      throw DomainError("detection mean must be finite");
    }
  }
  if (!(d.class_prob >= 0.0 && d.class_prob <= 1.0)) {
    throw DomainError("detection class_prob must lie in [0,1]");
  }
  if (!(d.score >= 0.0 && d.score <= 1.0)) {
    throw DomainError("detection score must lie in [0,1]");
  }
  validate_box(d.box());
}

void validate_scene(const Scene& s) {
  int prev = -1;
  bool first = true;
  for (const auto& [frame, dets] : s.frames) {
    if (!first && frame <= prev) {
      throw SequencingError("scene frame indices must be strictly increasing");
    }
    first = false;
    prev = frame;
    for (const auto& d : dets) validate_detection(d);
  }
}

double gaussian_logpdf(double y, double mu, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw DomainError("gaussian_logpdf: sigma must be positive");
  }
  const double z = (y - mu) / sigma;
  return -(kLogSqrt2Pi + std::log(sigma)) - 0.5 * z * z;
}

}  // namespace motcup
