#include "motcup/simgen.hpp"

#include <algorithm>
#include <cmath>

namespace motcup {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kHeadingJitterStd = 0.03;  // radians per frame
constexpr double kSigmaFloor = 1e-9;
constexpr double kExtentFloor = 1e-3;

bool center_in_zone(double x, double y, const BoxState& zone) {
  const Corners c = box_corners(zone);
  return x >= c.x_min && x <= c.x_max && y >= c.y_min && y <= c.y_max;
}
}  // namespace

std::uint64_t Rng::next_u64() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = kTwoPi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

int Rng::poisson(double rate) {
  if (rate <= 0.0) return 0;
  const double limit = std::exp(-rate);
  int k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= uniform();
  } while (p > limit);
  return k - 1;
}

void ScenarioConfig::validate() const {
  if (n_objects < 1 || n_frames < 1) {
    throw ConfigError("scenario: n_objects and n_frames must be positive");
  }
  if (!(field_size > 0.0)) throw ConfigError("scenario: field_size must be positive");
  if (!(speed_min >= 0.0 && speed_min <= speed_max)) {
    throw ConfigError("scenario: speed range must be ordered and nonnegative");
  }
  if (!(box_size_min > 0.0 && box_size_min <= box_size_max)) {
    throw ConfigError("scenario: box size range must be ordered and positive");
  }
  for (int i = 0; i < kNumVars; ++i) {
    if (!(sigma_true_base[i] >= 0.0)) {
      throw ConfigError("scenario: sigma_true_base must be nonnegative");
    }
  }
  if (!(miscalibration > 0.0)) {
    throw ConfigError("scenario: miscalibration factor must be positive");
  }
  if (!(base_drop_prob >= 0.0 && base_drop_prob <= 1.0)) {
    throw ConfigError("scenario: base_drop_prob must lie in [0,1]");
  }
  if (!(clutter_rate >= 0.0)) {
    throw ConfigError("scenario: clutter_rate must be nonnegative");
  }
  for (const auto& z : occlusion_zones) {
    validate_box(z.box);
    if (!(z.noise_multiplier >= 1.0)) {
      throw ConfigError("scenario: zone noise_multiplier must be >= 1");
    }
    if (!(z.drop_prob_in_zone >= 0.0 && z.drop_prob_in_zone <= 1.0)) {
      throw ConfigError("scenario: zone drop probability must lie in [0,1]");
    }
    if (!(z.score_penalty >= 0.0 && z.score_penalty <= 1.0)) {
      throw ConfigError("scenario: zone score_penalty must lie in [0,1]");
    }
  }
}

GeneratedScene generate_scene(const ScenarioConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);

  struct Mover {
    double x, y, vx, vy, w, h;
  };
  std::vector<Mover> movers;
  movers.reserve(cfg.n_objects);
  for (int k = 0; k < cfg.n_objects; ++k) {
    Mover m;
    m.w = rng.uniform(cfg.box_size_min, cfg.box_size_max);
    m.h = rng.uniform(cfg.box_size_min, cfg.box_size_max);
    m.x = rng.uniform(0.05 * cfg.field_size, 0.95 * cfg.field_size);
    m.y = rng.uniform(0.05 * cfg.field_size, 0.95 * cfg.field_size);
    const double speed = rng.uniform(cfg.speed_min, cfg.speed_max);
    const double heading = rng.uniform(0.0, kTwoPi);
    m.vx = speed * std::cos(heading);
    m.vy = speed * std::sin(heading);
    movers.push_back(m);
  }

  GeneratedScene out;
  out.scene.meta.field_extent = cfg.field_size;
  out.scene.meta.seed = cfg.seed;
  out.scene.frames.reserve(cfg.n_frames);

  for (int f = 0; f < cfg.n_frames; ++f) {
    std::vector<Detection> dets;

    for (int k = 0; k < cfg.n_objects; ++k) {
      const Mover& m = movers[k];
      out.gt.push_back(GtObject{f, k, BoxState{m.x, m.y, m.w, m.h}});

      // worst containing zone wins on every knob
      double mult = 1.0, drop = cfg.base_drop_prob, penalty = 0.0;
      bool in_zone = false;
      for (const auto& z : cfg.occlusion_zones) {
        if (center_in_zone(m.x, m.y, z.box)) {
          if (!in_zone) drop = 0.0;
          in_zone = true;
          mult = std::max(mult, z.noise_multiplier);
          drop = std::max(drop, z.drop_prob_in_zone);
          penalty = std::max(penalty, z.score_penalty);
        }
      }

      const bool dropped = rng.uniform() < drop;
      if (!dropped) {
        Detection d;
        const Vec4 truth{m.x, m.y, m.w, m.h};
        for (int i = 0; i < kNumVars; ++i) {
          const double sigma_eff = cfg.sigma_true_base[i] * mult;
          d.mean[i] = truth[i] + rng.normal() * sigma_eff;
          d.sigma[i] = std::max(cfg.miscalibration * sigma_eff, kSigmaFloor);
        }
        d.mean[2] = std::max(d.mean[2], kExtentFloor);
        d.mean[3] = std::max(d.mean[3], kExtentFloor);
        d.score = std::clamp(0.9 - penalty, 0.05, 1.0);
        d.class_prob = d.score;
        dets.push_back(d);
      }
    }

    const int n_clutter = rng.poisson(cfg.clutter_rate);
    for (int k = 0; k < n_clutter; ++k) {
      Detection d;
      d.mean[0] = rng.uniform(0.0, cfg.field_size);
      d.mean[1] = rng.uniform(0.0, cfg.field_size);
      d.mean[2] = rng.uniform(cfg.box_size_min, cfg.box_size_max);
      d.mean[3] = rng.uniform(cfg.box_size_min, cfg.box_size_max);
      for (int i = 0; i < kNumVars; ++i) {
        d.sigma[i] =
            std::max(cfg.miscalibration * cfg.sigma_true_base[i], kSigmaFloor);
      }
      d.score = 0.3;
      d.class_prob = 0.3;
      dets.push_back(d);
    }

    out.scene.frames.emplace_back(f, std::move(dets));

    // advance to the next frame: jitter heading, move, reflect
    for (auto& m : movers) {
      const double jitter = rng.normal() * kHeadingJitterStd;
      const double c = std::cos(jitter), s = std::sin(jitter);
      const double vx = m.vx * c - m.vy * s;
      const double vy = m.vx * s + m.vy * c;
      m.vx = vx;
      m.vy = vy;
      m.x += m.vx;
      m.y += m.vy;
      const double lo_x = m.w / 2.0, hi_x = cfg.field_size - m.w / 2.0;
      const double lo_y = m.h / 2.0, hi_y = cfg.field_size - m.h / 2.0;
      if (m.x < lo_x) {
        m.x = 2.0 * lo_x - m.x;
        m.vx = -m.vx;
      } else if (m.x > hi_x) {
        m.x = 2.0 * hi_x - m.x;
        m.vx = -m.vx;
      }
      if (m.y < lo_y) {
        m.y = 2.0 * lo_y - m.y;
        m.vy = -m.vy;
      } else if (m.y > hi_y) {
        m.y = 2.0 * hi_y - m.y;
        m.vy = -m.vy;
      }
    }
  }
  return out;
}

OcclusionSplit split_occlusion(std::span<const GtObject> gt, const Scene& scene,
                               std::span<const OcclusionZone> zones) {
  OcclusionSplit out;
  std::vector<int> high_flags;

  for (const auto& [frame, dets] : scene.frames) {
    int total = 0, inside = 0;
    for (const auto& g : gt) {
      if (g.frame != frame) continue;
      ++total;
      for (const auto& z : zones) {
        if (center_in_zone(g.box.cx, g.box.cy, z.box)) {
          ++inside;
          break;
        }
      }
    }
    const bool high =
        total > 0 && static_cast<double>(inside) / total > 0.25;
    if (high) {
      out.high_frames.push_back(frame);
      out.high_scene.frames.emplace_back(frame, dets);
    } else {
      out.low_frames.push_back(frame);
      out.low_scene.frames.emplace_back(frame, dets);
    }
  }

  out.high_scene.meta = scene.meta;
  out.low_scene.meta = scene.meta;
  for (const auto& g : gt) {
    const bool high = std::binary_search(out.high_frames.begin(),
                                         out.high_frames.end(), g.frame);
    (high ? out.high_gt : out.low_gt).push_back(g);
  }
  return out;
}

}  // namespace motcup
