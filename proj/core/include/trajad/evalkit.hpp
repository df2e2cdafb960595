#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trajad/ingest.hpp"
#include "trajad/scoring.hpp"

namespace trajad {

struct RocPoint {
  double false_positive_rate = 0.0;
  double true_positive_rate = 0.0;
  /// Frames scoring >= threshold are called anomalous; +inf for the origin.
  double threshold = 0.0;
};

/// Starts at (0,0), ends at (1,1), one point per distinct score.
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// Frame-level ROC with trapezoidal AUC. Tied scores enter the curve together,
/// which gives them half credit (the Mann-Whitney convention). Throws
/// UndefinedAucError when labels hold a single class and std::invalid_argument
/// on length mismatch.
RocCurve roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct DatasetArrays {
  std::vector<std::string> video_ids;
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
};

/// Concatenates per-video scores and labels in ascending video-id order. Every
/// scored video needs labels of the same length and vice versa.
DatasetArrays concat_videos(std::span<const FrameScores> scores,
                            std::span<const LabelSeries> labels);

struct EvaluationReport {
  RocCurve dataset;
  /// Per-video AUC; empty when the video's labels hold a single class.
  std::map<std::string, std::optional<double>> per_video;
  std::size_t frame_count = 0;
  std::size_t anomalous_frames = 0;
};

EvaluationReport evaluate(std::span<const FrameScores> scores,
                          std::span<const LabelSeries> labels);

/// Text report: `#eval v1` header, config comment lines, dataset/per-video
/// AUC rows, then `fpr,tpr,threshold` curve rows.
std::string write_report(const EvaluationReport& report,
                         std::span<const std::string> comment_lines = {});

/// Reads back the dataset AUC of a report written by write_report.
double parse_report_auc(std::string_view text);

}  // namespace trajad
