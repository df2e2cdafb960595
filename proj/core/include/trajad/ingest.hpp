#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "trajad/trajgeom.hpp"

namespace trajad {

struct TrackEntry {
  std::int64_t frame = 0;
  BoundingBox box;

  friend bool operator==(const TrackEntry&, const TrackEntry&) = default;
};

/// One pedestrian's boxes, frames strictly increasing (0-based).
struct Track {
  std::int64_t pedestrian_id = 0;
  std::vector<TrackEntry> entries;

  friend bool operator==(const Track&, const Track&) = default;
};

/// All tracks of one video, sorted by pedestrian id.
struct VideoTracks {
  std::string video_id;
  std::vector<Track> tracks;

  friend bool operator==(const VideoTracks&, const VideoTracks&) = default;
};

/// Observed boxes for frames t-tau+1..t and ground truth for t+1..t+delta.
struct WindowPair {
  std::int64_t pedestrian_id = 0;
  /// Position of this window within its track's window list.
  std::size_t index = 0;
  std::int64_t t_last_observed = 0;
  std::vector<BoundingBox> observed;
  std::vector<BoundingBox> future_gt;

  std::size_t tau() const noexcept { return observed.size(); }
  std::size_t delta() const noexcept { return future_gt.size(); }
  std::int64_t first_predicted_frame() const noexcept { return t_last_observed + 1; }
};

/// Per-frame 0/1 anomaly flags of one video, indexed from frame 0.
struct LabelSeries {
  std::string video_id;
  std::vector<std::uint8_t> labels;

  std::size_t frame_count() const noexcept { return labels.size(); }
};

enum class BoxOrder { kTopLeft, kCenter };

struct TrackFileFormat {
  int frame_base = 0;
  BoxOrder order = BoxOrder::kCenter;
};

/// Parses the `#traj v1` dialect. Videos come back sorted by id, tracks by
/// pedestrian id, entries by frame. Out-of-order rows are accepted; duplicate
/// (video, pedestrian, frame) rows and non-positive sizes are ParseErrors
/// naming the line.
std::vector<VideoTracks> parse_tracks(std::istream& in);
std::vector<VideoTracks> parse_tracks(std::string_view text);

/// Serialises with shortest round-trip reals. Extra `key=value` header fields
/// (e.g. generator provenance) may be appended.
std::string write_tracks(const std::vector<VideoTracks>& videos, TrackFileFormat format = {},
                         std::string_view extra_header = {});

/// Parses a `#labels v1` file: either one 0/1 per line or `frame,label` rows
/// covering every frame exactly once. The header line is optional and may carry
/// `base=1`.
LabelSeries parse_labels(std::istream& in, std::string video_id = {});
LabelSeries parse_labels(std::string_view text, std::string video_id = {});

std::string write_labels(const LabelSeries& labels);

/// Splits a track into maximal runs of consecutive frames.
std::vector<Track> split_gap_free(const Track& track);

/// Sliding windows over every gap-free run of `track`. Within a run of n
/// frames, observation starts at run offsets 0, stride, 2*stride, ... while
/// tau+delta frames remain. Short tracks give an empty list.
std::vector<WindowPair> build_windows(const Track& track, std::size_t tau, std::size_t delta,
                                      std::size_t stride = 1);

}  // namespace trajad
