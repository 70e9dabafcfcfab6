#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "motcup/core.hpp"

namespace motcup {

// Deterministic pseudo-random stream. The bit generator is splitmix64
// (Steele, Lea & Flood's published constants); uniforms take the top 53
// bits, normals come from Box-Muller, Poisson counts from Knuth's product
// method. Fixing the whole chain keeps generated scenes reproducible
// byte-for-byte from the seed alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();  // standard normal
  int poisson(double rate);

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct OcclusionZone {
  BoxState box;
  double noise_multiplier = 1.0;  // > 1 inflates detection noise
  double drop_prob_in_zone = 0.0;
  double score_penalty = 0.0;
};

struct ScenarioConfig {
  int n_objects = 20;
  int n_frames = 100;
  double field_size = 100.0;             // meters, square side
  double speed_min = 0.2, speed_max = 1.0;  // meters/frame
  double box_size_min = 1.5, box_size_max = 4.0;
  Vec4 sigma_true_base{0.25, 0.25, 0.15, 0.15};
  double miscalibration = 0.5;  // reported sigma = c * true noise std
  std::vector<OcclusionZone> occlusion_zones;
  double base_drop_prob = 0.02;
  double clutter_rate = 0.5;  // expected false positives per frame
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
};

struct GeneratedScene {
  std::vector<GtObject> gt;
  Scene scene;
};

// Constant-velocity objects with small heading jitter, reflecting at the
// field boundary. The detector emulation drops, perturbs and mis-reports
// per the config; everything is a pure function of the config (seed
// included).
GeneratedScene generate_scene(const ScenarioConfig& cfg);

struct OcclusionSplit {
  std::vector<GtObject> high_gt, low_gt;
  Scene high_scene, low_scene;
  std::vector<int> high_frames, low_frames;
};

// Frames whose fraction of truth objects inside any zone exceeds 0.25 form
// the high-occlusion subset.
OcclusionSplit split_occlusion(std::span<const GtObject> gt, const Scene& scene,
                               std::span<const OcclusionZone> zones);

}  // namespace motcup
