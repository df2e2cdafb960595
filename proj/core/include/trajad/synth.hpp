#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "trajad/ingest.hpp"

namespace trajad {

/// Portable random source for scene generation: std::mt19937_64 (whose output
/// sequence the C++ standard fixes) with explicit transforms. uniform() is
/// (next >> 11) * 2^-53; normal() is one Box-Muller draw from two uniforms.
class PortableRng {
 public:
  static constexpr std::string_view kName = "mt19937_64";

  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n) by rejection; n > 0.
  std::uint64_t below(std::uint64_t n);
  double normal();

 private:
  std::mt19937_64 engine_;
};

enum class AnomalyType { kSprint, kReversal, kZigzag, kFreezeDash };

std::string_view to_string(AnomalyType type) noexcept;
AnomalyType parse_anomaly_type(std::string_view text);

struct AnomalySpec {
  AnomalyType type = AnomalyType::kSprint;
  std::size_t pedestrian = 0;
  std::int64_t start = 0;
  std::int64_t duration = 1;
};

struct WalkerParams {
  double speed_min = 0.8;  // px/frame
  double speed_max = 1.6;
  double heading_jitter = 0.02;  // rad/frame, random walk on heading
  double center_jitter = 0.3;    // px, on the reported box center
  double size_jitter = 0.0;      // relative, on the reported box size
  double box_w_min = 20.0;
  double box_w_max = 40.0;
  double box_h_min = 50.0;
  double box_h_max = 100.0;
};

struct AnomalyKinematics {
  double sprint_speed_factor = 4.0;
  double zigzag_degrees = 75.0;
  std::int64_t zigzag_period = 3;
  double dash_speed_factor = 5.0;
};

struct SceneSpec {
  std::uint64_t seed = 0;
  std::string video_id = "video_000";
  std::size_t frame_count = 300;
  std::size_t pedestrians = 6;
  double width = 640.0;
  double height = 360.0;
  WalkerParams walker;
  AnomalyKinematics kinematics;
  std::vector<AnomalySpec> anomalies;
};

/// Throws ConfigError for empty scenes, bad walker ranges, anomalies outside
/// [0, frame_count) or naming a pedestrian that does not exist.
void validate(const SceneSpec& spec);

struct Scene {
  VideoTracks tracks;
  LabelSeries labels;
};

/// Straight-line walkers with heading and center jitter, reflected at the
/// frame borders; anomalies alter one walker's speed or heading over their
/// interval and set the label of every frame they cover. Deterministic in
/// the spec.
Scene generate(const SceneSpec& spec);

/// Several scenes with seeded anomaly placement: each video gets
/// `anomalies_per_video` anomalies, one per equal slice of the timeline,
/// with type cycling through `anomaly_types`.
struct SuiteSpec {
  SceneSpec base;
  std::size_t videos = 20;
  std::vector<AnomalyType> anomaly_types{AnomalyType::kSprint, AnomalyType::kReversal,
                                         AnomalyType::kZigzag};
  std::size_t anomalies_per_video = 2;
  std::int64_t duration_min = 6;
  std::int64_t duration_max = 10;
  /// Anomalies start no earlier than this frame.
  std::int64_t lead_in = 20;
};

std::vector<Scene> generate_suite(const SuiteSpec& spec);

/// `key = value` synth config. A `videos` key selects suite mode; otherwise
/// `anomaly = type,pedestrian,start,duration` lines describe one scene.
struct SynthConfig {
  bool suite = false;
  SuiteSpec spec;
};

SynthConfig parse_synth_config(std::string_view text);

/// Header fields recording the generator, e.g. `rng=mt19937_64 seed=7`.
std::string provenance_header(std::uint64_t seed);

}  // namespace trajad
