#include "motcup/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace motcup::io {

namespace {

using json = nlohmann::json;

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  return out;
}

std::string vec4_json(const Vec4& v) {
  std::string out = "[";
  for (int i = 0; i < kNumVars; ++i) {
    if (i) out += ",";
    out += format_double(v[i]);
  }
  out += "]";
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);  // LF line endings everywhere
  if (!f) throw DataError("cannot open for writing: " + path);
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open: " + path);
  return f;
}

json parse_line(const std::string& path, const std::string& line, int lineno) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(path + ":" + std::to_string(lineno) +
                    ": malformed record: " + e.what());
  }
}

Vec4 get_vec4(const json& j, const char* key, const std::string& path,
              int lineno) {
  try {
    const auto arr = j.at(key).get<std::vector<double>>();
    if (arr.size() != static_cast<std::size_t>(kNumVars)) {
      throw DataError(path + ":" + std::to_string(lineno) + ": field '" +
                      key + "' must hold 4 numbers");
    }
    return Vec4{arr[0], arr[1], arr[2], arr[3]};
  } catch (const json::exception& e) {
    throw DataError(path + ":" + std::to_string(lineno) + ": field '" + key +
                    "': " + e.what());
  }
}

template <typename T>
T get_field(const json& j, const char* key, const std::string& path,
            int lineno) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(path + ":" + std::to_string(lineno) + ": field '" + key +
                    "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// key = value config format
// ---------------------------------------------------------------------------
struct ConfigLine {
  int lineno = 0;
  std::string section;  // empty at top level
  std::string key;
  std::vector<std::string> values;
};

std::vector<ConfigLine> read_config_lines(const std::string& path) {
  auto f = open_in(path);
  std::vector<ConfigLine> out;
  std::string raw;
  std::string section;
  int section_count = 0;
  int lineno = 0;
  while (std::getline(f, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream is(raw);
    std::string first;
    if (!(is >> first)) continue;
    if (first.front() == '[') {
      if (first.back() != ']') {
        throw ConfigError(path + ":" + std::to_string(lineno) +
                          ": malformed section header");
      }
      section = first.substr(1, first.size() - 2);
      ++section_count;
      out.push_back(ConfigLine{lineno, section, "", {}});
      continue;
    }
    ConfigLine cl;
    cl.lineno = lineno;
    cl.section = section;
    cl.key = first;
    std::string tok;
    bool saw_eq = false;
    while (is >> tok) {
      if (!saw_eq && tok == "=") {
        saw_eq = true;
        continue;
      }
      cl.values.push_back(tok);
    }
    if (!saw_eq) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    out.push_back(std::move(cl));
  }
  return out;
}

double to_double(const ConfigLine& cl, const std::string& path,
                 std::size_t idx = 0) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(cl.values.at(idx), &pos);
    if (pos != cl.values[idx].size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(path + ":" + std::to_string(cl.lineno) +
                      ": expected a number for '" + cl.key + "'");
  }
}

std::int64_t to_int(const ConfigLine& cl, const std::string& path) {
  try {
    return std::stoll(cl.values.at(0));
  } catch (const std::exception&) {
    throw ConfigError(path + ":" + std::to_string(cl.lineno) +
                      ": expected an integer for '" + cl.key + "'");
  }
}

bool to_bool(const ConfigLine& cl, const std::string& path) {
  const std::string& v = cl.values.empty() ? "" : cl.values[0];
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(path + ":" + std::to_string(cl.lineno) +
                    ": expected true/false for '" + cl.key + "'");
}

void expect_count(const ConfigLine& cl, const std::string& path,
                  std::size_t n) {
  if (cl.values.size() != n) {
    throw ConfigError(path + ":" + std::to_string(cl.lineno) + ": '" + cl.key +
                      "' expects " + std::to_string(n) + " value(s)");
  }
}

}  // namespace

std::string format_double(double v) {
  if (!std::isfinite(v)) {
    throw DataError("cannot serialize non-finite number");
  }
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_gt(const std::string& path, std::span<const GtObject> gt) {
  auto f = open_out(path);
  for (const auto& g : gt) {
    f << "{\"frame\":" << g.frame << ",\"id\":" << g.object_id << ",\"box\":["
      << format_double(g.box.cx) << "," << format_double(g.box.cy) << ","
      << format_double(g.box.w) << "," << format_double(g.box.h) << "]}\n";
  }
}

std::vector<GtObject> read_gt(const std::string& path) {
  auto f = open_in(path);
  std::vector<GtObject> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json j = parse_line(path, line, lineno);
    GtObject g;
    g.frame = get_field<int>(j, "frame", path, lineno);
    g.object_id = get_field<int>(j, "id", path, lineno);
    const Vec4 b = get_vec4(j, "box", path, lineno);
    g.box = BoxState{b[0], b[1], b[2], b[3]};
    try {
      validate_box(g.box);
    } catch (const Error& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(g);
  }
  return out;
}

void write_detections(const std::string& path, const Scene& scene) {
  auto f = open_out(path);
  f << "{\"meta\":{\"n_frames\":" << scene.frames.size()
    << ",\"frame_rate\":" << format_double(scene.meta.frame_rate)
    << ",\"field_extent\":" << format_double(scene.meta.field_extent);
  if (scene.meta.seed) f << ",\"seed\":" << *scene.meta.seed;
  f << "}}\n";
  for (const auto& [frame, dets] : scene.frames) {
    for (const auto& d : dets) {
      f << "{\"frame\":" << frame
        << ",\"class_prob\":" << format_double(d.class_prob)
        << ",\"mean\":" << vec4_json(d.mean)
        << ",\"sigma\":" << vec4_json(d.sigma)
        << ",\"score\":" << format_double(d.score) << "}\n";
    }
  }
}

Scene read_detections(const std::string& path) {
  auto f = open_in(path);
  std::string line;
  int lineno = 0;
  std::optional<int> n_frames;
  Scene scene;
  std::vector<std::pair<int, Detection>> rows;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json j = parse_line(path, line, lineno);
    if (j.contains("meta")) {
      if (lineno != 1) {
        throw DataError(path + ":" + std::to_string(lineno) +
                        ": meta record only allowed on the first line");
      }
      const json& m = j["meta"];
      n_frames = get_field<int>(m, "n_frames", path, lineno);
      if (m.contains("frame_rate")) scene.meta.frame_rate = m["frame_rate"].get<double>();
      if (m.contains("field_extent")) scene.meta.field_extent = m["field_extent"].get<double>();
      if (m.contains("seed")) scene.meta.seed = m["seed"].get<std::uint64_t>();
      continue;
    }
    Detection d;
    const int frame = get_field<int>(j, "frame", path, lineno);
    d.class_prob = get_field<double>(j, "class_prob", path, lineno);
    d.mean = get_vec4(j, "mean", path, lineno);
    d.sigma = get_vec4(j, "sigma", path, lineno);
    d.score = get_field<double>(j, "score", path, lineno);
    try {
      validate_detection(d);
    } catch (const Error& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (frame < 0 || (n_frames && frame >= *n_frames)) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": frame index out of range");
    }
    rows.emplace_back(frame, std::move(d));
  }

  if (n_frames) {
    scene.frames.resize(*n_frames);
    for (int k = 0; k < *n_frames; ++k) scene.frames[k].first = k;
  } else {
    // no meta: frames are the distinct indices present
    std::vector<int> idx;
    for (const auto& [frame, d] : rows) idx.push_back(frame);
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    scene.frames.reserve(idx.size());
    for (int k : idx) scene.frames.emplace_back(k, std::vector<Detection>{});
  }
  for (auto& [frame, d] : rows) {
    auto it = std::lower_bound(
        scene.frames.begin(), scene.frames.end(), frame,
        [](const auto& entry, int f) { return entry.first < f; });
    it->second.push_back(std::move(d));
  }
  return scene;
}

void write_tracks(const std::string& path,
                  std::span<const TrackRecord> records) {
  auto f = open_out(path);
  for (const auto& r : records) {
    f << "{\"frame\":" << r.frame << ",\"track_id\":" << r.track_id
      << ",\"box\":[" << format_double(r.box.cx) << ","
      << format_double(r.box.cy) << "," << format_double(r.box.w) << ","
      << format_double(r.box.h) << "],\"sigma\":" << vec4_json(r.sigma)
      << ",\"score\":" << format_double(r.score) << "}\n";
  }
}

std::vector<TrackRecord> read_tracks(const std::string& path) {
  auto f = open_in(path);
  std::vector<TrackRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json j = parse_line(path, line, lineno);
    TrackRecord r;
    r.frame = get_field<int>(j, "frame", path, lineno);
    r.track_id = get_field<int>(j, "track_id", path, lineno);
    const Vec4 b = get_vec4(j, "box", path, lineno);
    r.box = BoxState{b[0], b[1], b[2], b[3]};
    r.sigma = get_vec4(j, "sigma", path, lineno);
    r.score = get_field<double>(j, "score", path, lineno);
    try {
      validate_box(r.box);
    } catch (const Error& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(r);
  }
  return out;
}

void write_quantiles(const std::string& path, const QuantileSet& q) {
  auto f = open_out(path);
  f << "{\"alpha\":" << format_double(q.alpha)
    << ",\"calibration_count\":" << q.calibration_count << ",\"quantiles\":[";
  for (std::size_t i = 0; i < q.quantiles.size(); ++i) {
    if (i) f << ",";
    f << format_double(q.quantiles[i]);
  }
  f << "],\"clamped\":[";
  for (std::size_t i = 0; i < q.clamped.size(); ++i) {
    if (i) f << ",";
    f << (q.clamped[i] ? "true" : "false");
  }
  f << "]}\n";
}

QuantileSet read_quantiles(const std::string& path) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line) || line.empty()) {
    throw DataError(path + ": empty quantile file");
  }
  const json j = parse_line(path, line, 1);
  QuantileSet q;
  q.alpha = get_field<double>(j, "alpha", path, 1);
  q.calibration_count = get_field<std::int64_t>(j, "calibration_count", path, 1);
  try {
    const auto quant = j.at("quantiles").get<std::vector<double>>();
    const auto clamp = j.at("clamped").get<std::vector<bool>>();
    q.quantiles = quant;
    q.clamped = clamp;
  } catch (const json::exception& e) {
    throw DataError(path + ":1: " + e.what());
  }
  if (q.quantiles.size() != q.clamped.size()) {
    throw DataError(path + ":1: quantiles/clamped length mismatch");
  }
  for (double v : q.quantiles) {
    if (!(v > 0.0)) throw DataError(path + ":1: quantiles must be positive");
  }
  if (q.calibration_count < 1) {
    throw DataError(path + ":1: calibration_count must be >= 1");
  }
  return q;
}

void write_report(const std::string& path, const EvalReport& report) {
  auto f = open_out(path);
  // accuracy scores are presented on the conventional 0-100 scale
  auto pct = [](double v) { return format_double(v * 100.0); };
  f << "{\n";
  f << "  \"hota\": " << (report.hota ? pct(*report.hota) : "null") << ",\n";
  f << "  \"deta\": " << (report.deta ? pct(*report.deta) : "null") << ",\n";
  f << "  \"assa\": " << (report.assa ? pct(*report.assa) : "null") << ",\n";
  f << "  \"mota\": " << (report.mota ? pct(*report.mota) : "null") << ",\n";
  f << "  \"motp\": " << (report.motp ? pct(*report.motp) : "null") << ",\n";
  f << "  \"id_switches\": " << report.id_switches << ",\n";
  f << "  \"false_positives\": " << report.false_positives << ",\n";
  f << "  \"false_negatives\": " << report.false_negatives << ",\n";
  auto map_block = [&f](const char* name, const std::map<std::string, double>& m) {
    f << "  \"" << name << "\": {";
    bool first = true;
    for (const auto& [k, v] : m) {
      if (!first) f << ", ";
      first = false;
      f << "\"" << escape(k) << "\": " << format_double(v);
    }
    f << "},\n";
  };
  map_block("nll_at", report.nll_at);
  map_block("crps_at", report.crps_at);
  f << "  \"matched_tp\": {";
  bool first = true;
  for (const auto& [k, v] : report.matched_tp) {
    if (!first) f << ", ";
    first = false;
    f << "\"" << escape(k) << "\": " << v;
  }
  f << "},\n";
  f << "  \"fps\": " << format_double(report.fps) << "\n";
  f << "}\n";
}

void write_timings(const std::string& path, std::span<const double> seconds) {
  auto f = open_out(path);
  for (double s : seconds) f << format_double(s) << "\n";
}

void write_manifest(const std::string& path, const RunManifest& m) {
  auto f = open_out(path);
  auto str_list = [&f](const std::vector<std::string>& xs) {
    f << "[";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) f << ", ";
      f << "\"" << escape(xs[i]) << "\"";
    }
    f << "]";
  };
  f << "{\n";
  f << "  \"command\": \"" << escape(m.command) << "\",\n";
  f << "  \"config\": \"" << escape(m.config_path) << "\",\n";
  f << "  \"inputs\": ";
  str_list(m.inputs);
  f << ",\n  \"outputs\": ";
  str_list(m.outputs);
  f << ",\n";
  if (m.seed) {
    f << "  \"seed\": " << *m.seed << ",\n";
  }
  f << "  \"wall_seconds\": " << format_double(m.wall_seconds) << ",\n";
  f << "  \"version\": \"" << kVersion << "\"\n";
  f << "}\n";
}

ScenarioConfig read_scenario_config(const std::string& path) {
  ScenarioConfig cfg;
  cfg.occlusion_zones.clear();
  OcclusionZone* zone = nullptr;
  for (const auto& cl : read_config_lines(path)) {
    if (cl.key.empty()) {  // section header
      if (cl.section != "zone") {
        throw ConfigError(path + ":" + std::to_string(cl.lineno) +
                          ": unknown section [" + cl.section + "]");
      }
      cfg.occlusion_zones.emplace_back();
      zone = &cfg.occlusion_zones.back();
      continue;
    }
    if (cl.section == "zone") {
      if (cl.key == "box") {
        expect_count(cl, path, 4);
        zone->box = BoxState{to_double(cl, path, 0), to_double(cl, path, 1),
                             to_double(cl, path, 2), to_double(cl, path, 3)};
      } else if (cl.key == "noise_multiplier") {
        zone->noise_multiplier = to_double(cl, path);
      } else if (cl.key == "drop_prob_in_zone") {
        zone->drop_prob_in_zone = to_double(cl, path);
      } else if (cl.key == "score_penalty") {
        zone->score_penalty = to_double(cl, path);
      } else {
        throw ConfigError(path + ":" + std::to_string(cl.lineno) +
                          ": unknown zone key '" + cl.key + "'");
      }
      continue;
    }
    if (cl.key == "n_objects") {
      cfg.n_objects = static_cast<int>(to_int(cl, path));
    } else if (cl.key == "n_frames") {
      cfg.n_frames = static_cast<int>(to_int(cl, path));
    } else if (cl.key == "field_size") {
      cfg.field_size = to_double(cl, path);
    } else if (cl.key == "speed_range") {
      expect_count(cl, path, 2);
      cfg.speed_min = to_double(cl, path, 0);
      cfg.speed_max = to_double(cl, path, 1);
    } else if (cl.key == "box_size_range") {
      expect_count(cl, path, 2);
      cfg.box_size_min = to_double(cl, path, 0);
      cfg.box_size_max = to_double(cl, path, 1);
    } else if (cl.key == "sigma_true_base") {
      expect_count(cl, path, 4);
      for (int i = 0; i < kNumVars; ++i) {
        cfg.sigma_true_base[i] = to_double(cl, path, i);
      }
    } else if (cl.key == "miscalibration") {
      cfg.miscalibration = to_double(cl, path);
    } else if (cl.key == "base_drop_prob") {
      cfg.base_drop_prob = to_double(cl, path);
    } else if (cl.key == "clutter_rate") {
      cfg.clutter_rate = to_double(cl, path);
    } else if (cl.key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(to_int(cl, path));
    } else {
      throw ConfigError(path + ":" + std::to_string(cl.lineno) +
                        ": unknown key '" + cl.key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

TrackerConfig read_tracker_config(const std::string& path) {
  TrackerConfig cfg;
  for (const auto& cl : read_config_lines(path)) {
    if (cl.key.empty()) {
      throw ConfigError(path + ":" + std::to_string(cl.lineno) +
                        ": tracker configs have no sections");
    }
    if (cl.key == "base") {
      const std::string& v = cl.values.at(0);
      if (v == "sort") {
        cfg.base = BaseTracker::kSort;
      } else if (v == "bytetrack") {
        cfg.base = BaseTracker::kByteTrack;
      } else {
        throw ConfigError(path + ":" + std::to_string(cl.lineno) +
                          ": base must be sort or bytetrack");
      }
    } else if (cl.key == "use_cp") {
      cfg.use_cp = to_bool(cl, path);
    } else if (cl.key == "use_sdkf") {
      cfg.use_sdkf = to_bool(cl, path);
    } else if (cl.key == "use_nllai") {
      cfg.use_nllai = to_bool(cl, path);
    } else if (cl.key == "tau") {
      cfg.tau = to_double(cl, path);
    } else if (cl.key == "iou_threshold") {
      cfg.iou_threshold = to_double(cl, path);
    } else if (cl.key == "score_high") {
      cfg.score_high = to_double(cl, path);
    } else if (cl.key == "score_low") {
      cfg.score_low = to_double(cl, path);
    } else if (cl.key == "max_age") {
      cfg.max_age = static_cast<int>(to_int(cl, path));
    } else if (cl.key == "min_hits") {
      cfg.min_hits = static_cast<int>(to_int(cl, path));
    } else if (cl.key == "fixed_r") {
      expect_count(cl, path, 4);
      for (int i = 0; i < kNumVars; ++i) cfg.fixed_r[i] = to_double(cl, path, i);
    } else if (cl.key == "velocity_prior_var") {
      cfg.motion.velocity_prior_var = to_double(cl, path);
    } else if (cl.key == "process_noise_pos") {
      cfg.motion.process_noise_pos = to_double(cl, path);
    } else if (cl.key == "process_noise_vel") {
      cfg.motion.process_noise_vel = to_double(cl, path);
    } else {
      throw ConfigError(path + ":" + std::to_string(cl.lineno) +
                        ": unknown key '" + cl.key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

void write_scenario_config(const std::string& path, const ScenarioConfig& cfg) {
  auto f = open_out(path);
  f << "n_objects = " << cfg.n_objects << "\n";
  f << "n_frames = " << cfg.n_frames << "\n";
  f << "field_size = " << format_double(cfg.field_size) << "\n";
  f << "speed_range = " << format_double(cfg.speed_min) << " "
    << format_double(cfg.speed_max) << "\n";
  f << "box_size_range = " << format_double(cfg.box_size_min) << " "
    << format_double(cfg.box_size_max) << "\n";
  f << "sigma_true_base =";
  for (int i = 0; i < kNumVars; ++i) f << " " << format_double(cfg.sigma_true_base[i]);
  f << "\n";
  f << "miscalibration = " << format_double(cfg.miscalibration) << "\n";
  f << "base_drop_prob = " << format_double(cfg.base_drop_prob) << "\n";
  f << "clutter_rate = " << format_double(cfg.clutter_rate) << "\n";
  f << "seed = " << cfg.seed << "\n";
  for (const auto& z : cfg.occlusion_zones) {
    f << "\n[zone]\n";
    f << "box = " << format_double(z.box.cx) << " " << format_double(z.box.cy)
      << " " << format_double(z.box.w) << " " << format_double(z.box.h) << "\n";
    f << "noise_multiplier = " << format_double(z.noise_multiplier) << "\n";
    f << "drop_prob_in_zone = " << format_double(z.drop_prob_in_zone) << "\n";
    f << "score_penalty = " << format_double(z.score_penalty) << "\n";
  }
}

}  // namespace motcup::io
