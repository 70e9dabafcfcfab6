#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace motcup {

inline constexpr const char* kVersion = "0.1.0";

// Number of measured box variables: cx, cy, w, h.
inline constexpr int kNumVars = 4;
using Vec4 = std::array<double, kNumVars>;

// ---------------------------------------------------------------------------
// Error taxonomy. All failures the toolkit reports derive from Error so the
// CLI can map them to exit codes (data errors -> 1, usage errors -> 2).
// ---------------------------------------------------------------------------
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};
class InvalidBoxError : public Error {
 public:
  using Error::Error;
};
class ShapeError : public Error {
 public:
  using Error::Error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};
class DataError : public Error {
 public:
  using Error::Error;
};
class EmptyCalibrationError : public Error {
 public:
  using Error::Error;
};
class EmptyInputError : public Error {
 public:
  using Error::Error;
};
class SequencingError : public Error {
 public:
  using Error::Error;
};
class FilterDegenerateError : public Error {
 public:
  using Error::Error;
};
class InvalidCostError : public Error {
 public:
  using Error::Error;
};
class NoTpError : public Error {
 public:
  using Error::Error;
};
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

// Axis-aligned box in the bird's-eye plane, center parameterization.
struct BoxState {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
};

struct Corners {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
};

bool box_valid(const BoxState& b);
void validate_box(const BoxState& b);  // throws InvalidBoxError

Corners box_corners(const BoxState& b);
BoxState box_from_corners(const Corners& c);

// One detector output: Gaussian location belief per variable plus scores.
struct Detection {
  double class_prob = 0.0;
  Vec4 mean{};   // cx, cy, w, h
  Vec4 sigma{};  // per-variable standard deviation, all > 0
  double score = 0.0;

  BoxState box() const { return BoxState{mean[0], mean[1], mean[2], mean[3]}; }
};

void validate_detection(const Detection& d);

struct GtObject {
  int frame = 0;
  int object_id = 0;
  BoxState box;
};

struct SceneMeta {
  double frame_rate = 10.0;     // frames / second
  double field_extent = 100.0;  // meters, square side
  std::optional<std::uint64_t> seed;
};

// Ordered detector output of a sequence. Frame indices strictly increasing;
// frames with no detections carry an empty list so the tracker still steps.
struct Scene {
  std::vector<std::pair<int, std::vector<Detection>>> frames;
  SceneMeta meta;
};

void validate_scene(const Scene& s);

// log N(y; mu, sigma^2). Throws DomainError for sigma <= 0.
double gaussian_logpdf(double y, double mu, double sigma);

}  // namespace motcup
