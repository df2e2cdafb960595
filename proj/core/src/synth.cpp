#include "trajad/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <type_traits>
#include <numbers>
#include <sstream>

#include "trajad/errors.hpp"
#include "trajad/textio.hpp"

namespace trajad {

std::uint64_t PortableRng::below(std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v = 0;
  do {
    v = engine_();
  } while (v >= limit);
  return v % n;
}

double PortableRng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string_view to_string(AnomalyType type) noexcept {
  switch (type) {
    case AnomalyType::kSprint:
      return "sprint";
    case AnomalyType::kReversal:
      return "reversal";
    case AnomalyType::kZigzag:
      return "zigzag";
    case AnomalyType::kFreezeDash:
      return "freeze-dash";
  }
  return "?";
}

AnomalyType parse_anomaly_type(std::string_view text) {
  for (const AnomalyType t : {AnomalyType::kSprint, AnomalyType::kReversal, AnomalyType::kZigzag,
                              AnomalyType::kFreezeDash}) {
    if (text == to_string(t)) return t;
  }
  throw ConfigError("unknown anomaly type '" + std::string(text) + "'");
}

void validate(const SceneSpec& spec) {
  if (spec.frame_count == 0 || spec.pedestrians == 0) {
    throw ConfigError("scene needs at least one frame and one pedestrian");
  }
  const WalkerParams& w = spec.walker;
  if (!(w.speed_min >= 0.0 && w.speed_max >= w.speed_min) || !(w.box_w_min > 0.0) ||
      !(w.box_w_max >= w.box_w_min) || !(w.box_h_min > 0.0) || !(w.box_h_max >= w.box_h_min) ||
      w.heading_jitter < 0.0 || w.center_jitter < 0.0 || w.size_jitter < 0.0) {
    throw ConfigError("invalid walker parameters");
  }
  if (!(spec.width > 2.0 * w.box_w_max) || !(spec.height > 2.0 * w.box_h_max)) {
    throw ConfigError("frame must be larger than twice the largest box");
  }
  if (spec.kinematics.zigzag_period < 1) throw ConfigError("zigzag period must be at least 1");
  const auto n = static_cast<std::int64_t>(spec.frame_count);
  for (const AnomalySpec& a : spec.anomalies) {
    if (a.pedestrian >= spec.pedestrians) {
      throw ConfigError("anomaly references pedestrian " + std::to_string(a.pedestrian) +
                        " but the scene has " + std::to_string(spec.pedestrians));
    }
    if (a.duration < 1 || a.start < 0 || a.start + a.duration > n) {
      throw ConfigError("anomaly interval [" + std::to_string(a.start) + ", " +
                        std::to_string(a.start + a.duration) + ") outside [0, " +
                        std::to_string(n) + ")");
    }
  }
}

namespace {

constexpr double kBorderPad = 4.0;
constexpr int kHeadingTries = 16;

struct Walker {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;
  double w = 0.0;
  double h = 0.0;
};

// Keeps `pos` in [lo, hi] by mirroring; returns true if it bounced.
bool reflect(double& pos, double lo, double hi) {
  bool bounced = false;
  for (int guard = 0; guard < 8 && (pos < lo || pos > hi); ++guard) {
    pos = pos < lo ? 2.0 * lo - pos : 2.0 * hi - pos;
    bounced = true;
  }
  pos = std::clamp(pos, lo, hi);
  return bounced;
}

Walker spawn(PortableRng& rng, const SceneSpec& spec) {
  const WalkerParams& p = spec.walker;
  Walker walker;
  walker.speed = rng.uniform(p.speed_min, p.speed_max);
  walker.w = rng.uniform(p.box_w_min, p.box_w_max);
  walker.h = rng.uniform(p.box_h_min, p.box_h_max);
  const double lo_x = walker.w / 2.0 + kBorderPad;
  const double hi_x = spec.width - walker.w / 2.0 - kBorderPad;
  const double lo_y = walker.h / 2.0 + kBorderPad;
  const double hi_y = spec.height - walker.h / 2.0 - kBorderPad;
  const double travel = walker.speed * static_cast<double>(spec.frame_count);

  // Prefer a heading whose nominal straight path fits inside the frame.
  double dx = 0.0;
  double dy = 0.0;
  bool fits = false;
  for (int attempt = 0; attempt < kHeadingTries && !fits; ++attempt) {
    walker.heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    dx = travel * std::cos(walker.heading);
    dy = travel * std::sin(walker.heading);
    fits = std::abs(dx) <= hi_x - lo_x && std::abs(dy) <= hi_y - lo_y;
  }
  if (fits) {
    walker.x = rng.uniform(lo_x + std::max(0.0, -dx), hi_x - std::max(0.0, dx));
    walker.y = rng.uniform(lo_y + std::max(0.0, -dy), hi_y - std::max(0.0, dy));
  } else {
    walker.x = rng.uniform(lo_x, hi_x);
    walker.y = rng.uniform(lo_y, hi_y);
  }
  return walker;
}

struct Motion {
  double speed_factor = 1.0;
  double heading_offset = 0.0;
};

Motion anomaly_motion(const SceneSpec& spec, std::size_t pedestrian, std::int64_t frame) {
  Motion m;
  const AnomalyKinematics& k = spec.kinematics;
  for (const AnomalySpec& a : spec.anomalies) {
    if (a.pedestrian != pedestrian || frame < a.start || frame >= a.start + a.duration) continue;
    const std::int64_t into = frame - a.start;
    switch (a.type) {
      case AnomalyType::kSprint:
        m.speed_factor *= k.sprint_speed_factor;
        break;
      case AnomalyType::kReversal:
        m.heading_offset += std::numbers::pi;
        break;
      case AnomalyType::kZigzag: {
        const double sign = (into / k.zigzag_period) % 2 == 0 ? 1.0 : -1.0;
        m.heading_offset += sign * k.zigzag_degrees * std::numbers::pi / 180.0;
        break;
      }
      case AnomalyType::kFreezeDash:
        m.speed_factor *= into < a.duration / 2 ? 0.0 : k.dash_speed_factor;
        break;
    }
  }
  return m;
}

}  // namespace

Scene generate(const SceneSpec& spec) {
  validate(spec);
  PortableRng rng(spec.seed);
  std::vector<Walker> walkers;
  walkers.reserve(spec.pedestrians);
  for (std::size_t i = 0; i < spec.pedestrians; ++i) walkers.push_back(spawn(rng, spec));

  Scene scene;
  scene.tracks.video_id = spec.video_id;
  scene.labels.video_id = spec.video_id;
  scene.labels.labels.assign(spec.frame_count, 0);
  for (std::size_t i = 0; i < spec.pedestrians; ++i) {
    scene.tracks.tracks.push_back(Track{static_cast<std::int64_t>(i), {}});
    scene.tracks.tracks.back().entries.reserve(spec.frame_count);
  }
  for (const AnomalySpec& a : spec.anomalies) {
    for (std::int64_t t = a.start; t < a.start + a.duration; ++t) {
      scene.labels.labels[static_cast<std::size_t>(t)] = 1;
    }
  }

  const WalkerParams& p = spec.walker;
  for (std::size_t t = 0; t < spec.frame_count; ++t) {
    for (std::size_t i = 0; i < spec.pedestrians; ++i) {
      Walker& walker = walkers[i];
      const double lo_x = walker.w / 2.0;
      const double hi_x = spec.width - walker.w / 2.0;
      const double lo_y = walker.h / 2.0;
      const double hi_y = spec.height - walker.h / 2.0;
      // Draw order per pedestrian and frame is fixed: heading, center x, center
      // y, width, height.
      const double heading_noise = rng.normal() * p.heading_jitter;
      const double jitter_x = rng.normal() * p.center_jitter;
      const double jitter_y = rng.normal() * p.center_jitter;
      const double jitter_w = rng.normal() * p.size_jitter;
      const double jitter_h = rng.normal() * p.size_jitter;
      if (t > 0) {
        walker.heading += heading_noise;
        const Motion m = anomaly_motion(spec, i, static_cast<std::int64_t>(t));
        const double heading = walker.heading + m.heading_offset;
        const double step = walker.speed * m.speed_factor;
        walker.x += step * std::cos(heading);
        walker.y += step * std::sin(heading);
        if (reflect(walker.x, lo_x, hi_x)) walker.heading = std::numbers::pi - walker.heading;
        if (reflect(walker.y, lo_y, hi_y)) walker.heading = -walker.heading;
      }
      const double w = walker.w * std::max(0.5, 1.0 + jitter_w);
      const double h = walker.h * std::max(0.5, 1.0 + jitter_h);
      const BoundingBox box{std::clamp(walker.x + jitter_x, w / 2.0, spec.width - w / 2.0),
                            std::clamp(walker.y + jitter_y, h / 2.0, spec.height - h / 2.0), w, h};
      scene.tracks.tracks[i].entries.push_back({static_cast<std::int64_t>(t), box});
    }
  }
  return scene;
}

std::vector<Scene> generate_suite(const SuiteSpec& spec) {
  if (spec.videos == 0) throw ConfigError("suite needs at least one video");
  if (!spec.base.anomalies.empty()) {
    throw ConfigError("suite mode places anomalies itself; remove explicit anomaly entries");
  }
  if (spec.anomalies_per_video > 0 && spec.anomaly_types.empty()) {
    throw ConfigError("suite needs at least one anomaly type");
  }
  if (spec.duration_min < 1 || spec.duration_max < spec.duration_min || spec.lead_in < 0) {
    throw ConfigError("invalid anomaly duration range");
  }
  const auto n = static_cast<std::int64_t>(spec.base.frame_count);
  const auto per_video = static_cast<std::int64_t>(spec.anomalies_per_video);
  const std::int64_t slice = per_video > 0 ? (n - spec.lead_in) / per_video : 0;
  if (per_video > 0 && slice < spec.duration_max) {
    throw ConfigError("video too short for " + std::to_string(per_video) +
                      " anomalies of up to " + std::to_string(spec.duration_max) + " frames");
  }

  PortableRng rng(spec.base.seed);
  std::vector<Scene> scenes;
  std::size_t type_cursor = 0;
  for (std::size_t v = 0; v < spec.videos; ++v) {
    SceneSpec scene = spec.base;
    scene.seed = rng.next();
    std::ostringstream id;
    id << "video_" << std::string(v < 10 ? "00" : v < 100 ? "0" : "") << v;
    scene.video_id = id.str();
    for (std::int64_t k = 0; k < per_video; ++k) {
      AnomalySpec a;
      a.type = spec.anomaly_types[type_cursor++ % spec.anomaly_types.size()];
      a.pedestrian = static_cast<std::size_t>(rng.below(scene.pedestrians));
      a.duration = spec.duration_min + static_cast<std::int64_t>(rng.below(
                                           static_cast<std::uint64_t>(spec.duration_max -
                                                                      spec.duration_min + 1)));
      const std::int64_t slice_start = spec.lead_in + k * slice;
      const std::int64_t latest = slice_start + slice - a.duration;
      a.start = slice_start +
                static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(latest - slice_start + 1)));
      scene.anomalies.push_back(a);
    }
    scenes.push_back(generate(scene));
  }
  return scenes;
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  if constexpr (std::is_floating_point_v<T>) {
    const auto v = textio::parse_real(value);
    if (!v || !std::isfinite(*v)) throw ConfigError("'" + key + "' needs a real value");
    return static_cast<T>(*v);
  } else {
    const auto v = textio::parse_int(value);
    if (!v || (std::is_unsigned_v<T> && *v < 0)) {
      throw ConfigError("'" + key + "' needs an integer value");
    }
    return static_cast<T>(*v);
  }
}

}  // namespace

SynthConfig parse_synth_config(std::string_view text) {
  SynthConfig config;
  SceneSpec& scene = config.spec.base;
  std::size_t line_no = 0;
  for (std::string_view line : textio::split(text, '\n')) {
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = textio::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no);
    const std::string key(textio::trim(line.substr(0, eq)));
    const std::string value(textio::trim(line.substr(eq + 1)));
    try {
      if (key == "seed") {
        scene.seed = parse_number<std::uint64_t>(key, value);
      } else if (key == "video_id") {
        scene.video_id = value;
      } else if (key == "frames") {
        scene.frame_count = parse_number<std::size_t>(key, value);
      } else if (key == "pedestrians") {
        scene.pedestrians = parse_number<std::size_t>(key, value);
      } else if (key == "width") {
        scene.width = parse_number<double>(key, value);
      } else if (key == "height") {
        scene.height = parse_number<double>(key, value);
      } else if (key == "speed_min") {
        scene.walker.speed_min = parse_number<double>(key, value);
      } else if (key == "speed_max") {
        scene.walker.speed_max = parse_number<double>(key, value);
      } else if (key == "heading_jitter") {
        scene.walker.heading_jitter = parse_number<double>(key, value);
      } else if (key == "center_jitter") {
        scene.walker.center_jitter = parse_number<double>(key, value);
      } else if (key == "size_jitter") {
        scene.walker.size_jitter = parse_number<double>(key, value);
      } else if (key == "box_w_min") {
        scene.walker.box_w_min = parse_number<double>(key, value);
      } else if (key == "box_w_max") {
        scene.walker.box_w_max = parse_number<double>(key, value);
      } else if (key == "box_h_min") {
        scene.walker.box_h_min = parse_number<double>(key, value);
      } else if (key == "box_h_max") {
        scene.walker.box_h_max = parse_number<double>(key, value);
      } else if (key == "sprint_factor") {
        scene.kinematics.sprint_speed_factor = parse_number<double>(key, value);
      } else if (key == "zigzag_degrees") {
        scene.kinematics.zigzag_degrees = parse_number<double>(key, value);
      } else if (key == "zigzag_period") {
        scene.kinematics.zigzag_period = parse_number<std::int64_t>(key, value);
      } else if (key == "dash_factor") {
        scene.kinematics.dash_speed_factor = parse_number<double>(key, value);
      } else if (key == "anomaly") {
        const auto parts = textio::split(value, ',');
        if (parts.size() != 4) throw ConfigError("anomaly = type,pedestrian,start,duration");
        AnomalySpec a;
        a.type = parse_anomaly_type(textio::trim(parts[0]));
        a.pedestrian = parse_number<std::size_t>(key, std::string(parts[1]));
        a.start = parse_number<std::int64_t>(key, std::string(parts[2]));
        a.duration = parse_number<std::int64_t>(key, std::string(parts[3]));
        scene.anomalies.push_back(a);
      } else if (key == "videos") {
        config.suite = true;
        config.spec.videos = parse_number<std::size_t>(key, value);
      } else if (key == "anomaly_types") {
        config.spec.anomaly_types.clear();
        for (const std::string_view t : textio::split(value, ',')) {
          config.spec.anomaly_types.push_back(parse_anomaly_type(textio::trim(t)));
        }
      } else if (key == "anomalies_per_video") {
        config.spec.anomalies_per_video = parse_number<std::size_t>(key, value);
      } else if (key == "anomaly_duration_min") {
        config.spec.duration_min = parse_number<std::int64_t>(key, value);
      } else if (key == "anomaly_duration_max") {
        config.spec.duration_max = parse_number<std::int64_t>(key, value);
      } else if (key == "lead_in") {
        config.spec.lead_in = parse_number<std::int64_t>(key, value);
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return config;
}

std::string provenance_header(std::uint64_t seed) {
  return "rng=" + std::string(PortableRng::kName) + " seed=" + std::to_string(seed);
}

}  // namespace trajad
