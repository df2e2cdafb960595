#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "trajad/errors.hpp"
#include "trajad/evalkit.hpp"
#include "trajad/ingest.hpp"
#include "trajad/synth.hpp"
#include "trajad/textio.hpp"
#include "trajad/weights.hpp"

namespace trajad::cli {

namespace fs = std::filesystem;

ScoreParams RunConfig::score_params() const {
  if (tau == 0 || delta == 0 || stride == 0) {
    throw ConfigError("tau, delta and stride must be positive");
  }
  ScoreParams p;
  p.tau = tau;
  p.delta = delta;
  p.stride = stride;
  p.measure = parse_measure(measure);
  p.kind = parse_aggregation(agg);
  if (flatten_divisor == "covering") {
    p.divisor = FlattenDivisor::kCoveringWindows;
  } else if (flatten_divisor == "total") {
    p.divisor = FlattenDivisor::kTotalWindows;
  } else {
    throw ConfigError("flatten-divisor must be covering or total");
  }
  p.normalize = normalize;
  p.threads = threads;
  return p;
}

std::string RunConfig::describe() const {
  std::ostringstream s;
  s << "tau=" << tau << " delta=" << delta << " stride=" << stride << " measure=" << measure
    << " agg=" << agg << " flatten_divisor=" << flatten_divisor << " predictor=" << predictor;
  if (!weights.empty()) s << " weights=" << weights;
  s << " normalize=" << (normalize ? "true" : "false") << " seed=" << seed;
  return s.str();
}

namespace {

bool parse_bool(const std::string& key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError("'" + key + "' needs true or false");
}

std::size_t parse_count(const std::string& key, std::string_view value) {
  const auto v = textio::parse_int(value);
  if (!v || *v < 0) throw ConfigError("'" + key + "' needs a non-negative integer");
  return static_cast<std::size_t>(*v);
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> items;
  for (const std::string_view part : textio::split(text, ',')) {
    const std::string_view item = textio::trim(part);
    if (!item.empty()) items.emplace_back(item);
  }
  return items;
}

}  // namespace

void apply_config_text(RunConfig& config, std::string_view text,
                       const std::vector<std::string>& explicit_keys) {
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
    std::string key(textio::trim(line.substr(0, eq)));
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string value(textio::trim(line.substr(eq + 1)));
    if (std::find(explicit_keys.begin(), explicit_keys.end(), key) != explicit_keys.end()) continue;
    try {
      if (key == "tau") {
        config.tau = parse_count(key, value);
      } else if (key == "delta") {
        config.delta = parse_count(key, value);
      } else if (key == "stride") {
        config.stride = parse_count(key, value);
      } else if (key == "measure") {
        config.measure = value;
      } else if (key == "agg") {
        config.agg = value;
      } else if (key == "flatten-divisor") {
        config.flatten_divisor = value;
      } else if (key == "predictor") {
        config.predictor = value;
      } else if (key == "weights") {
        config.weights = value;
      } else if (key == "normalize") {
        config.normalize = parse_bool(key, value);
      } else if (key == "seed") {
        config.seed = parse_count(key, value);
      } else if (key == "threads") {
        config.threads = parse_count(key, value);
      } else if (key == "tracks") {
        config.tracks = value;
      } else if (key == "labels") {
        config.labels = value;
      } else if (key == "scores") {
        config.scores = value;
      } else if (key == "spec") {
        config.spec = value;
      } else if (key == "out") {
        config.out = value;
      } else if (key == "timescales") {
        config.timescales = value;
      } else if (key == "measures") {
        config.measures = value;
      } else if (key == "aggs") {
        config.aggs = value;
      } else if (key == "ablation") {
        config.ablation = parse_bool(key, value);
      } else if (key == "cell-dir") {
        config.cell_dir = value;
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
}

std::unique_ptr<Predictor> make_predictor(const RunConfig& config) {
  if (config.predictor == "cv") return std::make_unique<ConstantVelocityPredictor>(config.delta);
  if (config.predictor == "bitrap") {
    if (config.weights.empty()) throw ConfigError("--predictor bitrap needs --weights");
    std::ifstream in(config.weights, std::ios::binary);
    if (!in) throw WeightError("cannot open weight file " + config.weights);
    auto weights = std::make_shared<const WeightContainer>(WeightContainer::load(in));
    if (weights->config().tau != config.tau || weights->config().delta != config.delta) {
      throw WeightError("weights in " + config.weights + " were built for tau=" +
                        std::to_string(weights->config().tau) + " delta=" +
                        std::to_string(weights->config().delta));
    }
    return std::make_unique<BitrapLitePredictor>(std::move(weights));
  }
  throw ConfigError("unknown predictor '" + config.predictor + "' (expected cv or bitrap)");
}

std::vector<LabelSeries> load_labels(const fs::path& path) {
  if (path.empty()) throw ConfigError("no label path given");
  if (!fs::exists(path)) throw std::runtime_error("label path " + path.string() + " does not exist");
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".labels") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  std::vector<LabelSeries> labels;
  for (const fs::path& file : files) {
    try {
      labels.push_back(parse_labels(textio::read_file(file), file.stem().string()));
    } catch (const ParseError& e) {
      throw ParseError(file.string() + ": " + e.what());
    }
  }
  return labels;
}

namespace {

struct Dataset {
  std::vector<VideoTracks> videos;
  /// Frame count per video id.
  std::map<std::string, std::size_t> frames;
  std::vector<LabelSeries> labels;
};

Dataset load_dataset(const RunConfig& config, bool require_labels) {
  if (config.tracks.empty()) throw ConfigError("--tracks is required");
  Dataset data;
  try {
    data.videos = parse_tracks(textio::read_file(config.tracks));
  } catch (const ParseError& e) {
    throw ParseError(config.tracks.string() + ": " + e.what());
  }
  if (!config.labels.empty() || require_labels) data.labels = load_labels(config.labels);

  for (const VideoTracks& v : data.videos) {
    std::int64_t last = -1;
    for (const Track& t : v.tracks) last = std::max(last, t.entries.back().frame);
    data.frames[v.video_id] = static_cast<std::size_t>(last + 1);
  }
  if (!data.labels.empty()) {
    std::map<std::string, std::size_t> from_labels;
    for (const LabelSeries& l : data.labels) from_labels[l.video_id] = l.frame_count();
    for (const auto& [id, n] : data.frames) {
      const auto it = from_labels.find(id);
      if (it == from_labels.end()) throw std::runtime_error("no labels for video " + id);
      if (n > it->second) {
        throw std::runtime_error("video " + id + " has tracks up to frame " +
                                 std::to_string(n - 1) + " but only " +
                                 std::to_string(it->second) + " labels");
      }
    }
    data.frames = std::move(from_labels);
  }
  return data;
}

struct ScoredDataset {
  std::vector<FrameScores> videos;
  std::size_t windows = 0;
  std::size_t pedestrians = 0;
  std::size_t frames = 0;
};

ScoredDataset score_dataset(const Dataset& data, const Predictor& predictor,
                            const ScoreParams& params) {
  ScoredDataset scored;
  std::map<std::string, const VideoTracks*> by_id;
  for (const VideoTracks& v : data.videos) by_id[v.video_id] = &v;
  for (const auto& [id, frame_count] : data.frames) {
    const auto it = by_id.find(id);
    const VideoTracks empty{id, {}};
    const VideoScoreResult r =
        score_video(it == by_id.end() ? empty : *it->second, frame_count, predictor, params);
    scored.videos.push_back(r.scores);
    scored.windows += r.window_count;
    scored.pedestrians += r.pedestrian_count;
    scored.frames += frame_count;
  }
  return scored;
}

std::vector<std::string> header_comments(const std::string& command, const RunConfig& config) {
  return {command + " " + config.describe()};
}

int cmd_synth(const RunConfig& config, bool seed_given, std::ostream& out) {
  if (config.spec.empty()) throw ConfigError("--spec is required");
  if (config.out.empty()) throw ConfigError("--out is required");
  SynthConfig synth = parse_synth_config(textio::read_file(config.spec));
  if (seed_given) synth.spec.base.seed = config.seed;

  std::vector<Scene> scenes;
  if (synth.suite) {
    scenes = generate_suite(synth.spec);
  } else {
    scenes.push_back(generate(synth.spec.base));
  }
  std::vector<VideoTracks> videos;
  for (const Scene& s : scenes) videos.push_back(s.tracks);
  std::sort(videos.begin(), videos.end(),
            [](const VideoTracks& a, const VideoTracks& b) { return a.video_id < b.video_id; });
  textio::write_file_atomic(config.out / "tracks.csv",
                            write_tracks(videos, {}, provenance_header(synth.spec.base.seed)));
  std::size_t anomalous = 0;
  for (const Scene& s : scenes) {
    textio::write_file_atomic(config.out / "labels" / (s.labels.video_id + ".labels"),
                              write_labels(s.labels));
    anomalous += static_cast<std::size_t>(
        std::count(s.labels.labels.begin(), s.labels.labels.end(), 1));
  }
  out << "synth: " << scenes.size() << " videos, " << anomalous << " anomalous frames -> "
      << config.out.string() << '\n';
  return 0;
}

int cmd_score(const RunConfig& config, std::ostream& out, std::ostream& err) {
  if (config.out.empty()) throw ConfigError("--out is required");
  const ScoreParams params = config.score_params();
  const auto predictor = make_predictor(config);
  const Dataset data = load_dataset(config, false);
  const ScoredDataset scored = score_dataset(data, *predictor, params);
  if (scored.windows == 0) {
    err << "warning: no track is long enough for tau+delta=" << params.tau + params.delta
        << " frames; every frame scores 0\n";
  }
  const auto comments = header_comments("score", config);
  textio::write_file_atomic(config.out,
                            write_scores(scored.videos, params.kind, params.measure, comments));
  out << "score: " << scored.videos.size() << " videos, " << scored.pedestrians
      << " pedestrians, " << scored.windows << " windows, " << scored.frames << " frames -> "
      << config.out.string() << '\n';
  return 0;
}

int cmd_eval(const RunConfig& config, std::ostream& out) {
  if (config.scores.empty()) throw ConfigError("--scores is required");
  if (config.out.empty()) throw ConfigError("--out is required");
  const std::string score_text = textio::read_file(config.scores);
  const std::vector<FrameScores> scores = parse_scores(score_text);
  const std::vector<LabelSeries> labels = load_labels(config.labels);
  const EvaluationReport report = evaluate(scores, labels);
  std::vector<std::string> comments{"eval scores=" + config.scores.string() +
                                    " labels=" + config.labels.string()};
  // Carry over how the scores were produced.
  for (const std::string_view line : textio::split(score_text, '\n')) {
    if (line.starts_with("# ")) comments.emplace_back(line.substr(2));
  }
  textio::write_file_atomic(config.out, write_report(report, comments));
  out << "eval: dataset AUC " << textio::format_real(report.dataset.auc) << " over "
      << report.frame_count << " frames (" << report.anomalous_frames << " anomalous) -> "
      << config.out.string() << '\n';
  return 0;
}

std::string expand_weights(const std::string& pattern, std::size_t timescale) {
  std::string path = pattern;
  const std::string token = "{tau}";
  for (std::size_t pos = path.find(token); pos != std::string::npos; pos = path.find(token)) {
    path.replace(pos, token.size(), std::to_string(timescale));
  }
  return path;
}

int cmd_sweep(const RunConfig& config, std::ostream& out) {
  if (config.out.empty()) throw ConfigError("--out is required");
  std::vector<std::size_t> timescales;
  for (const std::string& t : split_list(config.timescales)) {
    const std::size_t v = parse_count("timescales", t);
    if (v == 0) throw ConfigError("timescales must be positive");
    timescales.push_back(v);
  }
  std::vector<Aggregation> kinds;
  for (const std::string& a : split_list(config.aggs)) kinds.push_back(parse_aggregation(a));
  std::vector<Measure> measures;
  for (const std::string& m : split_list(config.measures)) measures.push_back(parse_measure(m));
  if (timescales.empty() || kinds.empty() || measures.empty()) {
    throw ConfigError("sweep needs at least one timescale, measure and aggregation");
  }

  const Dataset data = load_dataset(config, true);
  std::ostringstream csv;
  csv << "# sweep " << config.describe() << " timescales=" << config.timescales
      << " ablation=" << (config.ablation ? "true" : "false") << '\n';
  csv << "predictor,tau,delta,stride";
  for (const Aggregation kind : kinds) {
    for (const Measure m : measures) csv << ',' << to_string(kind) << '_' << to_string(m);
  }
  csv << '\n';

  std::vector<std::pair<std::size_t, std::size_t>> rows;  // (timescale, stride)
  for (const std::size_t t : timescales) rows.emplace_back(t, config.stride);
  if (config.ablation) {
    for (const std::size_t t : timescales) {
      if (t != config.stride) rows.emplace_back(t, t);
    }
  }

  std::size_t cells = 0;
  for (const auto& [timescale, stride] : rows) {
    RunConfig cell = config;
    cell.tau = timescale;
    cell.delta = timescale;
    cell.stride = stride;
    cell.weights = expand_weights(config.weights, timescale);
    const auto predictor = make_predictor(cell);
    csv << cell.predictor << ',' << timescale << ',' << timescale << ',' << stride;
    for (const Aggregation kind : kinds) {
      for (const Measure m : measures) {
        cell.agg = std::string(to_string(kind));
        cell.measure = std::string(to_string(m));
        const ScoredDataset scored = score_dataset(data, *predictor, cell.score_params());
        const EvaluationReport report = evaluate(scored.videos, data.labels);
        csv << ',' << textio::format_real(report.dataset.auc);
        ++cells;
        if (!config.cell_dir.empty()) {
          std::ostringstream name;
          name << "tau" << timescale << "_stride" << stride << '_' << to_string(kind) << '_'
               << to_string(m);
          const auto comments = header_comments("sweep-cell", cell);
          textio::write_file_atomic(config.cell_dir / (name.str() + ".scores"),
                                    write_scores(scored.videos, kind, m, comments));
          textio::write_file_atomic(config.cell_dir / (name.str() + ".report"),
                                    write_report(report, comments));
        }
      }
    }
    csv << '\n';
  }
  textio::write_file_atomic(config.out, csv.str());
  out << "sweep: " << rows.size() << " rows, " << cells << " cells -> " << config.out.string()
      << '\n';
  return 0;
}

// Long option names given on the command line, without leading dashes.
std::vector<std::string> explicit_keys(const CLI::App& sub) {
  std::vector<std::string> keys;
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->count() > 0 && !opt->get_lnames().empty()) keys.push_back(opt->get_lnames().front());
  }
  return keys;
}

void add_scoring_options(CLI::App& sub, RunConfig& c) {
  sub.add_option("--tau", c.tau, "Observed frames per window")->capture_default_str();
  sub.add_option("--delta", c.delta, "Predicted frames per window")->capture_default_str();
  sub.add_option("--stride", c.stride, "Sliding-window step")->capture_default_str();
  sub.add_option("--measure", c.measure, "m1 (1-IOU), m2 (1-GIOU) or m3 (L2)")
      ->capture_default_str();
  sub.add_option("--agg", c.agg, "summed or flattened")->capture_default_str();
  sub.add_option("--flatten-divisor", c.flatten_divisor,
                 "covering (windows predicting the frame) or total (all windows)")
      ->capture_default_str();
  sub.add_option("--predictor", c.predictor, "cv or bitrap")->capture_default_str();
  sub.add_option("--weights", c.weights, "BiTraP-lite weight file");
  sub.add_flag("--normalize", c.normalize, "Min-max normalise scores per video");
  sub.add_option("--threads", c.threads, "Prediction worker threads")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Trajectory-prediction anomaly scoring for tracked pedestrians", "trajad");
  app.require_subcommand(1);
  RunConfig config;
  std::string config_file;

  const auto common = [&](CLI::App& sub) {
    sub.add_option("--config", config_file, "key = value file; flags take precedence");
    sub.add_option("--seed", config.seed, "Seed for every random draw")->capture_default_str();
    sub.add_option("--out", config.out, "Output path");
  };

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic track + label dataset");
  common(*synth);
  synth->add_option("--spec", config.spec, "Scene or suite spec (key = value)");

  CLI::App* score = app.add_subcommand("score", "Predict, measure and pool frame scores");
  common(*score);
  add_scoring_options(*score, config);
  score->add_option("--tracks", config.tracks, "Track CSV");
  score->add_option("--labels", config.labels, "Label file or directory (sets frame counts)");

  CLI::App* eval = app.add_subcommand("eval", "Frame-level ROC/AUC of a score file");
  common(*eval);
  eval->add_option("--scores", config.scores, "Score file");
  eval->add_option("--labels", config.labels, "Label file or directory");

  CLI::App* sweep = app.add_subcommand("sweep", "AUC grid over timescales, measures, aggregations");
  common(*sweep);
  add_scoring_options(*sweep, config);
  sweep->add_option("--tracks", config.tracks, "Track CSV");
  sweep->add_option("--labels", config.labels, "Label file or directory");
  sweep->add_option("--timescales", config.timescales, "tau = delta values")->capture_default_str();
  sweep->add_option("--measures", config.measures, "Measures to sweep")->capture_default_str();
  sweep->add_option("--aggs", config.aggs, "Aggregations to sweep")->capture_default_str();
  sweep->add_flag("--ablation", config.ablation, "Also emit rows with stride = timescale");
  sweep->add_option("--cell-dir", config.cell_dir, "Write each cell's scores and report here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    const std::vector<std::string> given = explicit_keys(*active);
    if (!config_file.empty()) apply_config_text(config, textio::read_file(config_file), given);
    const bool seed_given = std::find(given.begin(), given.end(), "seed") != given.end();
    if (active == synth) return cmd_synth(config, seed_given, out);
    if (active == score) return cmd_score(config, out, err);
    if (active == eval) return cmd_eval(config, out);
    return cmd_sweep(config, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace trajad::cli
