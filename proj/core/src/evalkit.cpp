#include "trajad/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "trajad/errors.hpp"
#include "trajad/textio.hpp"

namespace trajad {

RocCurve roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("roc_auc: " + std::to_string(scores.size()) + " scores vs " +
                                std::to_string(labels.size()) + " labels");
  }
  std::uint64_t positives = 0;
  for (const std::uint8_t l : labels) {
    if (l > 1) throw std::invalid_argument("roc_auc: labels must be 0 or 1");
    positives += l;
  }
  const std::uint64_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw UndefinedAucError("AUC is undefined when labels contain a single class");
  }
  for (const double s : scores) {
    if (std::isnan(s)) throw std::invalid_argument("roc_auc: NaN score");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  // Twice the area in units of one (negative, positive) pair; stays integral.
  std::uint64_t doubled_area = 0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double threshold = scores[order[k]];
    const std::uint64_t tp_prev = tp;
    const std::uint64_t fp_prev = fp;
    while (k < order.size() && scores[order[k]] == threshold) {
      if (labels[order[k]]) {
        ++tp;
      } else {
        ++fp;
      }
      ++k;
    }
    doubled_area += (fp - fp_prev) * (tp + tp_prev);
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                            static_cast<double>(tp) / static_cast<double>(positives), threshold});
  }
  curve.auc = static_cast<double>(doubled_area) /
              (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
  return curve;
}

DatasetArrays concat_videos(std::span<const FrameScores> scores,
                            std::span<const LabelSeries> labels) {
  std::map<std::string, const FrameScores*> by_score;
  std::map<std::string, const LabelSeries*> by_label;
  for (const FrameScores& s : scores) {
    if (!by_score.emplace(s.video_id, &s).second) {
      throw std::invalid_argument("duplicate scores for video " + s.video_id);
    }
  }
  for (const LabelSeries& l : labels) {
    if (!by_label.emplace(l.video_id, &l).second) {
      throw std::invalid_argument("duplicate labels for video " + l.video_id);
    }
  }
  for (const auto& [id, unused] : by_label) {
    if (!by_score.count(id)) throw std::invalid_argument("video " + id + " has labels but no scores");
  }

  DatasetArrays out;
  for (const auto& [id, s] : by_score) {
    const auto it = by_label.find(id);
    if (it == by_label.end()) throw std::invalid_argument("video " + id + " has no labels");
    if (it->second->labels.size() != s->scores.size()) {
      throw std::invalid_argument("video " + id + ": " + std::to_string(s->scores.size()) +
                                  " scores vs " + std::to_string(it->second->labels.size()) +
                                  " labels");
    }
    out.video_ids.push_back(id);
    out.scores.insert(out.scores.end(), s->scores.begin(), s->scores.end());
    out.labels.insert(out.labels.end(), it->second->labels.begin(), it->second->labels.end());
  }
  return out;
}

EvaluationReport evaluate(std::span<const FrameScores> scores,
                          std::span<const LabelSeries> labels) {
  const DatasetArrays data = concat_videos(scores, labels);
  EvaluationReport report;
  report.dataset = roc_auc(data.scores, data.labels);
  report.frame_count = data.labels.size();
  report.anomalous_frames =
      static_cast<std::size_t>(std::count(data.labels.begin(), data.labels.end(), 1));
  for (const FrameScores& s : scores) {
    const auto it = std::find_if(labels.begin(), labels.end(),
                                 [&](const LabelSeries& l) { return l.video_id == s.video_id; });
    try {
      report.per_video[s.video_id] = roc_auc(s.scores, it->labels).auc;
    } catch (const UndefinedAucError&) {
      report.per_video[s.video_id] = std::nullopt;
    }
  }
  return report;
}

std::string write_report(const EvaluationReport& report,
                         std::span<const std::string> comment_lines) {
  std::ostringstream out;
  out << "#eval v1\n";
  for (const std::string& line : comment_lines) out << "# " << line << '\n';
  out << "dataset_auc," << textio::format_real(report.dataset.auc) << '\n';
  out << "frames," << report.frame_count << '\n';
  out << "anomalous_frames," << report.anomalous_frames << '\n';
  for (const auto& [id, auc] : report.per_video) {
    out << "video_auc," << id << ',' << (auc ? textio::format_real(*auc) : "undefined") << '\n';
  }
  out << "#curve\nfpr,tpr,threshold\n";
  for (const RocPoint& p : report.dataset.points) {
    out << textio::format_real(p.false_positive_rate) << ','
        << textio::format_real(p.true_positive_rate) << ','
        << (std::isinf(p.threshold) ? std::string("inf") : textio::format_real(p.threshold))
        << '\n';
  }
  return out.str();
}

double parse_report_auc(std::string_view text) {
  constexpr std::string_view kKey = "dataset_auc,";
  for (std::string_view line : textio::split(text, '\n')) {
    line = textio::trim(line);
    if (line.substr(0, kKey.size()) == kKey) {
      if (const auto auc = textio::parse_real(line.substr(kKey.size()))) return *auc;
      break;
    }
  }
  throw ParseError("report has no dataset_auc row");
}

}  // namespace trajad
