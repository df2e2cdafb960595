#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trajad/ingest.hpp"
#include "trajad/predictor.hpp"
#include "trajad/trajgeom.hpp"

namespace trajad {

/// Per-step errors of one window: errors[k] belongs to frame first_frame + k.
struct WindowErrors {
  std::int64_t pedestrian_id = 0;
  std::size_t window_index = 0;
  std::int64_t first_frame = 0;
  std::vector<double> errors;
};

enum class Aggregation { kSummed, kFlattened };

std::string_view to_string(Aggregation kind) noexcept;
Aggregation parse_aggregation(std::string_view text);

/// Divisor for the flattened mean: windows predicting the frame, or all
/// windows of the pedestrian.
enum class FlattenDivisor { kCoveringWindows, kTotalWindows };

struct FrameScore {
  std::int64_t frame = 0;
  double score = 0.0;

  friend bool operator==(const FrameScore&, const FrameScore&) = default;
};

/// Sparse per-pedestrian scores, ascending frames, at most one entry per frame.
struct ScoreSeries {
  std::int64_t pedestrian_id = 0;
  Aggregation kind = Aggregation::kFlattened;
  Measure measure = Measure::kL2;
  std::vector<FrameScore> entries;
};

/// Dense frame-level scores of one video, frames 0..N-1.
struct FrameScores {
  std::string video_id;
  Aggregation kind = Aggregation::kFlattened;
  Measure measure = Measure::kL2;
  std::vector<double> scores;

  friend bool operator==(const FrameScores&, const FrameScores&) = default;
};

/// Applies `measure` step by step. Throws AlignmentError if the prediction
/// belongs to a different pedestrian, frame or horizon.
WindowErrors window_errors(const WindowPair& window, const Prediction& prediction,
                           Measure measure);

/// One entry per window at its first predicted frame: the sum of that
/// window's per-step errors.
ScoreSeries summed_series(std::span<const WindowErrors> errors, Measure measure);

/// Per predicted frame, the mean of every window's error at that frame.
ScoreSeries flattened_series(std::span<const WindowErrors> errors, Measure measure,
                             FlattenDivisor divisor = FlattenDivisor::kCoveringWindows);

ScoreSeries aggregate(std::span<const WindowErrors> errors, Aggregation kind, Measure measure,
                      FlattenDivisor divisor = FlattenDivisor::kCoveringWindows);

/// Frame-wise maximum over pedestrians; frames without any entry score 0.
FrameScores frame_pool(std::span<const ScoreSeries> series, std::size_t frame_count,
                       std::string video_id = {});

/// Min-max rescale to [0, 1]; a constant series becomes all zeros.
FrameScores normalize_per_video(FrameScores scores);

struct ScoreParams {
  std::size_t tau = 5;
  std::size_t delta = 5;
  std::size_t stride = 1;
  Measure measure = Measure::kL2;
  Aggregation kind = Aggregation::kFlattened;
  FlattenDivisor divisor = FlattenDivisor::kCoveringWindows;
  bool normalize = false;
  /// Worker threads for prediction; results do not depend on this.
  std::size_t threads = 1;
};

struct VideoScoreResult {
  FrameScores scores;
  std::size_t window_count = 0;
  std::size_t pedestrian_count = 0;
};

/// Windows -> predictions -> errors -> per-pedestrian series -> pooled scores.
VideoScoreResult score_video(const VideoTracks& video, std::size_t frame_count,
                             const Predictor& predictor, const ScoreParams& params);

/// `#scores v1 kind=... measure=...` then `video_id,frame,score` rows. Extra
/// `# ...` comment lines carry the effective run configuration.
std::string write_scores(std::span<const FrameScores> videos, Aggregation kind, Measure measure,
                         std::span<const std::string> comment_lines = {});

/// Reads a score file back, videos sorted by id; every video must list
/// frames 0..N-1.
std::vector<FrameScores> parse_scores(std::string_view text);

}  // namespace trajad
