#include "trajad/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <sstream>

#include "trajad/errors.hpp"
#include "trajad/textio.hpp"

namespace trajad {

namespace {

constexpr std::string_view kTrackMagic = "#traj";
constexpr std::string_view kLabelMagic = "#labels";

std::string slurp(std::istream& in) {
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Splits on '\n', keeping 1-based line numbers.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (end == text.size() && line.empty()) break;
    fn(line, line_no);
    start = end + 1;
  }
}

bool starts_with_magic(std::string_view line, std::string_view magic) {
  return line.substr(0, magic.size()) == magic &&
         (line.size() == magic.size() || line[magic.size()] == ' ');
}

void check_version(std::string_view rest, std::size_t line_no) {
  const auto tokens = textio::split(textio::trim(rest), ' ');
  if (tokens.empty() || tokens.front() != "v1") {
    throw ParseError("unsupported format version (expected v1)", line_no);
  }
}

std::string_view after_version(std::string_view rest) {
  rest = textio::trim(rest);
  const std::size_t space = rest.find(' ');
  return space == std::string_view::npos ? std::string_view{} : rest.substr(space + 1);
}

int parse_base(const std::map<std::string, std::string>& fields, std::size_t line_no) {
  const auto it = fields.find("base");
  if (it == fields.end()) return 0;
  if (it->second == "0") return 0;
  if (it->second == "1") return 1;
  throw ParseError("base must be 0 or 1", line_no);
}

struct PendingEntry {
  TrackEntry entry;
  std::size_t line = 0;
};

}  // namespace

std::vector<VideoTracks> parse_tracks(std::string_view text) {
  bool have_header = false;
  TrackFileFormat format;
  std::map<std::string, std::map<std::int64_t, std::vector<PendingEntry>>> grouped;

  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (textio::trim(line).empty()) return;
    if (!have_header) {
      if (!starts_with_magic(line, kTrackMagic)) {
        throw ParseError("missing '#traj v1' header", line_no);
      }
      const std::string_view rest = line.substr(kTrackMagic.size());
      check_version(rest, line_no);
      const auto fields = textio::parse_header_fields(after_version(rest), line_no);
      format.frame_base = parse_base(fields, line_no);
      if (const auto it = fields.find("order"); it != fields.end()) {
        if (it->second == "tlwh") {
          format.order = BoxOrder::kTopLeft;
        } else if (it->second == "cxcywh") {
          format.order = BoxOrder::kCenter;
        } else {
          throw ParseError("order must be tlwh or cxcywh", line_no);
        }
      }
      have_header = true;
      return;
    }
    if (line.front() == '#') return;

    const auto fields = textio::split(line, ',');
    if (fields.size() != 7) {
      throw ParseError("expected 7 fields video_id,frame,ped_id,a,b,w,h, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    const std::string_view video = textio::trim(fields[0]);
    if (video.empty()) throw ParseError("empty video_id", line_no);
    const auto frame = textio::parse_int(fields[1]);
    if (!frame || *frame < format.frame_base) throw ParseError("invalid frame index", line_no);
    const auto ped = textio::parse_int(fields[2]);
    if (!ped || *ped < 0) throw ParseError("invalid pedestrian id", line_no);
    double values[4];
    for (int k = 0; k < 4; ++k) {
      const auto v = textio::parse_real(fields[3 + k]);
      if (!v || !std::isfinite(*v)) throw ParseError("invalid box coordinate", line_no);
      values[k] = *v;
    }
    if (!(values[2] > 0.0) || !(values[3] > 0.0)) {
      throw ParseError("box width and height must be positive", line_no);
    }
    const BoundingBox box = format.order == BoxOrder::kTopLeft
                                ? from_top_left(values[0], values[1], values[2], values[3])
                                : BoundingBox{values[0], values[1], values[2], values[3]};
    grouped[std::string(video)][*ped].push_back({{*frame - format.frame_base, box}, line_no});
  });

  if (!have_header) throw ParseError("empty track file: missing '#traj v1' header");

  std::vector<VideoTracks> videos;
  for (auto& [video_id, by_ped] : grouped) {
    VideoTracks video{video_id, {}};
    for (auto& [ped, pending] : by_ped) {
      std::stable_sort(pending.begin(), pending.end(),
                       [](const PendingEntry& a, const PendingEntry& b) {
                         return a.entry.frame < b.entry.frame;
                       });
      Track track{ped, {}};
      track.entries.reserve(pending.size());
      for (std::size_t k = 0; k < pending.size(); ++k) {
        if (k > 0 && pending[k].entry.frame == pending[k - 1].entry.frame) {
          const std::size_t dup_line = std::max(pending[k].line, pending[k - 1].line);
          throw ParseError("duplicate row for video " + video_id + " pedestrian " +
                               std::to_string(ped) + " frame " +
                               std::to_string(pending[k].entry.frame + format.frame_base),
                           dup_line);
        }
        track.entries.push_back(pending[k].entry);
      }
      video.tracks.push_back(std::move(track));
    }
    videos.push_back(std::move(video));
  }
  return videos;
}

std::vector<VideoTracks> parse_tracks(std::istream& in) { return parse_tracks(slurp(in)); }

std::string write_tracks(const std::vector<VideoTracks>& videos, TrackFileFormat format,
                         std::string_view extra_header) {
  std::ostringstream out;
  out << "#traj v1 base=" << format.frame_base
      << " order=" << (format.order == BoxOrder::kTopLeft ? "tlwh" : "cxcywh");
  if (!extra_header.empty()) out << ' ' << extra_header;
  out << '\n';
  for (const VideoTracks& video : videos) {
    for (const Track& track : video.tracks) {
      for (const TrackEntry& e : track.entries) {
        const double a = format.order == BoxOrder::kTopLeft ? e.box.x - e.box.w / 2.0 : e.box.x;
        const double b = format.order == BoxOrder::kTopLeft ? e.box.y - e.box.h / 2.0 : e.box.y;
        out << video.video_id << ',' << (e.frame + format.frame_base) << ','
            << track.pedestrian_id << ',' << textio::format_real(a) << ','
            << textio::format_real(b) << ',' << textio::format_real(e.box.w) << ','
            << textio::format_real(e.box.h) << '\n';
      }
    }
  }
  return out.str();
}

LabelSeries parse_labels(std::string_view text, std::string video_id) {
  enum class Layout { kUnknown, kPlain, kFramed };
  Layout layout = Layout::kUnknown;
  int base = 0;
  bool seen_content = false;
  std::vector<std::uint8_t> plain;
  std::map<std::int64_t, std::uint8_t> framed;

  const auto parse_flag = [](std::string_view field, std::size_t line_no) -> std::uint8_t {
    const auto v = textio::parse_int(field);
    if (!v || (*v != 0 && *v != 1)) {
      throw ParseError("label must be 0 or 1, got '" + std::string(textio::trim(field)) + "'",
                       line_no);
    }
    return static_cast<std::uint8_t>(*v);
  };

  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (textio::trim(line).empty()) return;
    if (!seen_content && starts_with_magic(line, kLabelMagic)) {
      const std::string_view rest = line.substr(kLabelMagic.size());
      check_version(rest, line_no);
      base = parse_base(textio::parse_header_fields(after_version(rest), line_no), line_no);
      seen_content = true;
      return;
    }
    seen_content = true;
    if (line.front() == '#') return;
    const auto fields = textio::split(line, ',');
    const Layout row_layout = fields.size() == 1   ? Layout::kPlain
                              : fields.size() == 2 ? Layout::kFramed
                                                   : Layout::kUnknown;
    if (row_layout == Layout::kUnknown) throw ParseError("expected 'label' or 'frame,label'", line_no);
    if (layout != Layout::kUnknown && row_layout != layout) {
      throw ParseError("mixed plain and frame,label rows", line_no);
    }
    layout = row_layout;
    if (layout == Layout::kPlain) {
      plain.push_back(parse_flag(fields[0], line_no));
      return;
    }
    const auto frame = textio::parse_int(fields[0]);
    if (!frame || *frame < base) throw ParseError("invalid frame index", line_no);
    if (!framed.emplace(*frame - base, parse_flag(fields[1], line_no)).second) {
      throw ParseError("duplicate label for frame " + std::to_string(*frame), line_no);
    }
  });

  LabelSeries series{std::move(video_id), {}};
  if (layout == Layout::kFramed) {
    std::int64_t expected = 0;
    for (const auto& [frame, flag] : framed) {
      if (frame != expected) {
        throw ParseError("missing label for frame " + std::to_string(expected + base));
      }
      series.labels.push_back(flag);
      ++expected;
    }
  } else {
    series.labels = std::move(plain);
  }
  return series;
}

LabelSeries parse_labels(std::istream& in, std::string video_id) {
  return parse_labels(slurp(in), std::move(video_id));
}

std::string write_labels(const LabelSeries& labels) {
  std::string out = "#labels v1\n";
  out.reserve(out.size() + 2 * labels.labels.size());
  for (const std::uint8_t flag : labels.labels) {
    out += flag ? '1' : '0';
    out += '\n';
  }
  return out;
}

std::vector<Track> split_gap_free(const Track& track) {
  std::vector<Track> runs;
  for (const TrackEntry& e : track.entries) {
    if (runs.empty() || e.frame != runs.back().entries.back().frame + 1) {
      runs.push_back(Track{track.pedestrian_id, {}});
    }
    runs.back().entries.push_back(e);
  }
  return runs;
}

std::vector<WindowPair> build_windows(const Track& track, std::size_t tau, std::size_t delta,
                                      std::size_t stride) {
  if (tau == 0 || delta == 0) throw ConfigError("tau and delta must be at least 1");
  if (stride == 0) throw ConfigError("stride must be at least 1");
  std::vector<WindowPair> windows;
  const std::size_t span = tau + delta;
  for (const Track& run : split_gap_free(track)) {
    const auto& e = run.entries;
    for (std::size_t start = 0; start + span <= e.size(); start += stride) {
      WindowPair w;
      w.pedestrian_id = track.pedestrian_id;
      w.index = windows.size();
      w.t_last_observed = e[start + tau - 1].frame;
      w.observed.reserve(tau);
      w.future_gt.reserve(delta);
      for (std::size_t k = 0; k < tau; ++k) w.observed.push_back(e[start + k].box);
      for (std::size_t k = 0; k < delta; ++k) w.future_gt.push_back(e[start + tau + k].box);
      windows.push_back(std::move(w));
    }
  }
  return windows;
}

}  // namespace trajad
