#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "trajad/predictor.hpp"
#include "trajad/scoring.hpp"

namespace trajad::cli {

/// Timescales swept by default (tau = delta).
inline const std::vector<std::size_t> kDefaultTimescales{3, 5, 13, 25};

struct RunConfig {
  std::size_t tau = 5;
  std::size_t delta = 5;
  std::size_t stride = 1;
  std::string measure = "m3";
  std::string agg = "flattened";
  std::string flatten_divisor = "covering";
  std::string predictor = "cv";
  /// BiTraP-lite weight file; in sweeps `{tau}` is replaced by the timescale.
  std::string weights;
  bool normalize = false;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  std::filesystem::path tracks;
  std::filesystem::path labels;
  std::filesystem::path scores;
  std::filesystem::path spec;
  std::filesystem::path out;

  std::string timescales = "3,5,13,25";
  std::string measures = "m1,m2,m3";
  std::string aggs = "summed,flattened";
  bool ablation = false;
  std::filesystem::path cell_dir;

  ScoreParams score_params() const;
  /// One-line `key=value` rendering echoed into output headers.
  std::string describe() const;
};

/// Applies `key = value` lines from `text` to every field whose flag was not
/// given on the command line (`explicit_keys`).
void apply_config_text(RunConfig& config, std::string_view text,
                       const std::vector<std::string>& explicit_keys);

std::unique_ptr<Predictor> make_predictor(const RunConfig& config);

/// Reads one `.labels` file (video id = file stem) or every `*.labels` file of
/// a directory.
std::vector<LabelSeries> load_labels(const std::filesystem::path& path);

/// Entry point shared by the executable and the tests. Returns the process
/// exit code; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace trajad::cli
