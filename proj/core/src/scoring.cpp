#include "trajad/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "trajad/errors.hpp"
#include "trajad/textio.hpp"

namespace trajad {

std::string_view to_string(Aggregation kind) noexcept {
  return kind == Aggregation::kSummed ? "summed" : "flattened";
}

Aggregation parse_aggregation(std::string_view text) {
  if (text == "summed") return Aggregation::kSummed;
  if (text == "flattened") return Aggregation::kFlattened;
  throw ConfigError("unknown aggregation '" + std::string(text) +
                    "' (expected summed or flattened)");
}

WindowErrors window_errors(const WindowPair& window, const Prediction& prediction,
                           Measure measure) {
  if (prediction.pedestrian_id != window.pedestrian_id) {
    throw AlignmentError("prediction for pedestrian " + std::to_string(prediction.pedestrian_id) +
                         " scored against window of pedestrian " +
                         std::to_string(window.pedestrian_id));
  }
  if (prediction.t_last_observed != window.t_last_observed) {
    throw AlignmentError("prediction anchored at frame " +
                         std::to_string(prediction.t_last_observed) + ", window at frame " +
                         std::to_string(window.t_last_observed));
  }
  if (prediction.boxes.size() != window.future_gt.size()) {
    throw AlignmentError("prediction has " + std::to_string(prediction.boxes.size()) +
                         " steps, window has " + std::to_string(window.future_gt.size()));
  }
  WindowErrors out{window.pedestrian_id, window.index, window.first_predicted_frame(), {}};
  out.errors.reserve(window.future_gt.size());
  for (std::size_t k = 0; k < window.future_gt.size(); ++k) {
    out.errors.push_back(prediction_error(measure, window.future_gt[k], prediction.boxes[k]));
  }
  return out;
}

namespace {

std::vector<const WindowErrors*> ordered_windows(std::span<const WindowErrors> errors) {
  std::vector<const WindowErrors*> ordered;
  ordered.reserve(errors.size());
  for (const WindowErrors& e : errors) {
    if (e.pedestrian_id != errors.front().pedestrian_id) {
      throw std::invalid_argument("aggregation requires windows of a single pedestrian");
    }
    ordered.push_back(&e);
  }
  std::stable_sort(ordered.begin(), ordered.end(), [](const WindowErrors* a, const WindowErrors* b) {
    return a->first_frame < b->first_frame;
  });
  return ordered;
}

}  // namespace

ScoreSeries summed_series(std::span<const WindowErrors> errors, Measure measure) {
  ScoreSeries series{errors.empty() ? 0 : errors.front().pedestrian_id, Aggregation::kSummed,
                     measure, {}};
  if (errors.empty()) return series;
  for (const WindowErrors* w : ordered_windows(errors)) {
    if (!series.entries.empty() && series.entries.back().frame == w->first_frame) {
      throw std::invalid_argument("two windows start predicting at frame " +
                                  std::to_string(w->first_frame));
    }
    double sum = 0.0;
    for (const double e : w->errors) sum += e;
    series.entries.push_back({w->first_frame, sum});
  }
  return series;
}

ScoreSeries flattened_series(std::span<const WindowErrors> errors, Measure measure,
                             FlattenDivisor divisor) {
  ScoreSeries series{errors.empty() ? 0 : errors.front().pedestrian_id, Aggregation::kFlattened,
                     measure, {}};
  if (errors.empty()) return series;
  struct Accumulator {
    double sum = 0.0;
    std::size_t count = 0;
  };
  std::map<std::int64_t, Accumulator> per_frame;
  for (const WindowErrors* w : ordered_windows(errors)) {
    for (std::size_t k = 0; k < w->errors.size(); ++k) {
      Accumulator& acc = per_frame[w->first_frame + static_cast<std::int64_t>(k)];
      acc.sum += w->errors[k];
      ++acc.count;
    }
  }
  series.entries.reserve(per_frame.size());
  for (const auto& [frame, acc] : per_frame) {
    const double n = divisor == FlattenDivisor::kCoveringWindows
                         ? static_cast<double>(acc.count)
                         : static_cast<double>(errors.size());
    series.entries.push_back({frame, acc.sum / n});
  }
  return series;
}

ScoreSeries aggregate(std::span<const WindowErrors> errors, Aggregation kind, Measure measure,
                      FlattenDivisor divisor) {
  return kind == Aggregation::kSummed ? summed_series(errors, measure)
                                      : flattened_series(errors, measure, divisor);
}

FrameScores frame_pool(std::span<const ScoreSeries> series, std::size_t frame_count,
                       std::string video_id) {
  FrameScores pooled{std::move(video_id), Aggregation::kFlattened, Measure::kL2,
                     std::vector<double>(frame_count, 0.0)};
  if (!series.empty()) {
    pooled.kind = series.front().kind;
    pooled.measure = series.front().measure;
  }
  std::vector<bool> covered(frame_count, false);
  for (const ScoreSeries& s : series) {
    if (s.kind != pooled.kind || s.measure != pooled.measure) {
      throw std::invalid_argument("frame pooling requires series of one kind and measure");
    }
    for (const FrameScore& entry : s.entries) {
      if (entry.frame < 0 || static_cast<std::size_t>(entry.frame) >= frame_count) {
        throw std::out_of_range("score at frame " + std::to_string(entry.frame) +
                                " outside video of " + std::to_string(frame_count) + " frames");
      }
      const auto t = static_cast<std::size_t>(entry.frame);
      if (!covered[t] || entry.score > pooled.scores[t]) pooled.scores[t] = entry.score;
      covered[t] = true;
    }
  }
  return pooled;
}

FrameScores normalize_per_video(FrameScores scores) {
  if (scores.scores.empty()) return scores;
  const auto [lo, hi] = std::minmax_element(scores.scores.begin(), scores.scores.end());
  const double min = *lo;
  const double range = *hi - *lo;
  for (double& s : scores.scores) s = range > 0.0 ? (s - min) / range : 0.0;
  return scores;
}

VideoScoreResult score_video(const VideoTracks& video, std::size_t frame_count,
                             const Predictor& predictor, const ScoreParams& params) {
  if (predictor.delta() != params.delta) {
    throw ConfigError("predictor horizon " + std::to_string(predictor.delta()) +
                      " differs from requested delta " + std::to_string(params.delta));
  }
  std::vector<std::vector<WindowPair>> windows_per_track;
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (const Track& track : video.tracks) {
    windows_per_track.push_back(build_windows(track, params.tau, params.delta, params.stride));
    for (std::size_t w = 0; w < windows_per_track.back().size(); ++w) {
      jobs.emplace_back(windows_per_track.size() - 1, w);
    }
  }

  // Each job writes only its own slot, so the result is independent of threading.
  std::vector<WindowErrors> errors(jobs.size());
  const auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const WindowPair& window = windows_per_track[jobs[j].first][jobs[j].second];
      errors[j] = window_errors(window, predictor.predict(window), params.measure);
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(params.threads, jobs.size()));
  if (threads <= 1) {
    run_range(0, jobs.size());
  } else {
    std::vector<std::exception_ptr> failures(threads);
    {
      std::vector<std::jthread> workers;
      const std::size_t chunk = (jobs.size() + threads - 1) / threads;
      for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t begin = std::min(jobs.size(), t * chunk);
        const std::size_t end = std::min(jobs.size(), begin + chunk);
        workers.emplace_back([&, t, begin, end] {
          try {
            run_range(begin, end);
          } catch (...) {
            failures[t] = std::current_exception();
          }
        });
      }
    }
    for (const auto& failure : failures) {
      if (failure) std::rethrow_exception(failure);
    }
  }

  std::vector<ScoreSeries> series;
  std::size_t cursor = 0;
  for (std::size_t t = 0; t < windows_per_track.size(); ++t) {
    const std::size_t n = windows_per_track[t].size();
    if (n > 0) {
      series.push_back(aggregate(std::span(errors).subspan(cursor, n), params.kind,
                                 params.measure, params.divisor));
    }
    cursor += n;
  }

  VideoScoreResult result;
  result.scores = frame_pool(series, frame_count, video.video_id);
  result.scores.kind = params.kind;
  result.scores.measure = params.measure;
  if (params.normalize) result.scores = normalize_per_video(std::move(result.scores));
  result.window_count = jobs.size();
  result.pedestrian_count = video.tracks.size();
  return result;
}

std::string write_scores(std::span<const FrameScores> videos, Aggregation kind, Measure measure,
                         std::span<const std::string> comment_lines) {
  std::ostringstream out;
  out << "#scores v1 kind=" << to_string(kind) << " measure=" << to_string(measure) << '\n';
  for (const std::string& line : comment_lines) out << "# " << line << '\n';
  for (const FrameScores& video : videos) {
    if (video.kind != kind || video.measure != measure) {
      throw std::invalid_argument("video " + video.video_id +
                                  " scored with a different kind or measure");
    }
    for (std::size_t t = 0; t < video.scores.size(); ++t) {
      out << video.video_id << ',' << t << ',' << textio::format_real(video.scores[t]) << '\n';
    }
  }
  return out.str();
}

std::vector<FrameScores> parse_scores(std::string_view text) {
  std::optional<Aggregation> kind;
  std::optional<Measure> measure;
  std::map<std::string, std::map<std::int64_t, double>> rows;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    const std::string_view line = textio::trim(raw);
    if (line.empty()) continue;
    if (!kind) {
      constexpr std::string_view kMagic = "#scores v1";
      if (line.substr(0, kMagic.size()) != kMagic) {
        throw ParseError("missing '#scores v1' header", line_no);
      }
      const auto fields = textio::parse_header_fields(line.substr(kMagic.size()), line_no);
      const auto k = fields.find("kind");
      const auto m = fields.find("measure");
      if (k == fields.end() || m == fields.end()) {
        throw ParseError("score header needs kind= and measure=", line_no);
      }
      try {
        kind = parse_aggregation(k->second);
        measure = parse_measure(m->second);
      } catch (const ConfigError& e) {
        throw ParseError(e.what(), line_no);
      }
      continue;
    }
    if (line.front() == '#') continue;
    const auto fields = textio::split(line, ',');
    if (fields.size() != 3) throw ParseError("expected video_id,frame,score", line_no);
    const auto frame = textio::parse_int(fields[1]);
    const auto score = textio::parse_real(fields[2]);
    if (!frame || *frame < 0) throw ParseError("invalid frame index", line_no);
    if (!score || std::isnan(*score)) throw ParseError("invalid score", line_no);
    if (!rows[std::string(textio::trim(fields[0]))].emplace(*frame, *score).second) {
      throw ParseError("duplicate score for frame " + std::to_string(*frame), line_no);
    }
  }
  if (!kind) throw ParseError("empty score file: missing '#scores v1' header");

  std::vector<FrameScores> videos;
  for (const auto& [video_id, frames] : rows) {
    FrameScores video{video_id, *kind, *measure, {}};
    std::int64_t expected = 0;
    for (const auto& [frame, score] : frames) {
      if (frame != expected) {
        throw ParseError("video " + video_id + " missing score for frame " +
                         std::to_string(expected));
      }
      video.scores.push_back(score);
      ++expected;
    }
    videos.push_back(std::move(video));
  }
  return videos;
}

}  // namespace trajad
