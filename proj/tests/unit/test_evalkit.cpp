#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "trajad/errors.hpp"
#include "trajad/evalkit.hpp"

namespace trajad {
namespace {

struct Instance {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
};

// Coarse score grid so ties are common.
Instance random_instance(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> level(0, 20);
  Instance inst;
  for (std::size_t k = 0; k < n; ++k) {
    inst.labels.push_back(static_cast<std::uint8_t>(k % 2 == 0 ? 1 : rng() % 2));
    inst.labels[k] = k == 1 ? 0 : inst.labels[k];
    inst.scores.push_back(level(rng) / 4.0 + (inst.labels[k] ? 0.5 : 0.0));
  }
  return inst;
}

FrameScores video(std::string id, std::vector<double> s) {
  return {std::move(id), Aggregation::kFlattened, Measure::kL2, std::move(s)};
}

TEST(RocAuc, SmallExamples) {
  const std::vector<double> perfect{0.9, 0.1};
  const std::vector<std::uint8_t> labels{1, 0};
  EXPECT_EQ(roc_auc(perfect, labels).auc, 1.0);
  const std::vector<double> tie{0.5, 0.5};
  EXPECT_EQ(roc_auc(tie, labels).auc, 0.5);
  const std::vector<double> inverted{0.1, 0.9};
  EXPECT_EQ(roc_auc(inverted, labels).auc, 0.0);
}

TEST(RocAuc, CurveShape) {
  std::mt19937_64 rng(1);
  const Instance inst = random_instance(rng, 120);
  const RocCurve c = roc_auc(inst.scores, inst.labels);
  EXPECT_EQ(c.points.front().false_positive_rate, 0.0);
  EXPECT_EQ(c.points.front().true_positive_rate, 0.0);
  EXPECT_TRUE(std::isinf(c.points.front().threshold));
  EXPECT_EQ(c.points.back().false_positive_rate, 1.0);
  EXPECT_EQ(c.points.back().true_positive_rate, 1.0);
  for (std::size_t k = 1; k < c.points.size(); ++k) {
    EXPECT_GE(c.points[k].false_positive_rate, c.points[k - 1].false_positive_rate);
    EXPECT_GE(c.points[k].true_positive_rate, c.points[k - 1].true_positive_rate);
    EXPECT_LT(c.points[k].threshold, c.points[k - 1].threshold);
  }
}

TEST(RocAuc, MatchesMannWhitney) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> len(2, 500);
  for (int trial = 0; trial < 200; ++trial) {
    const Instance inst = random_instance(rng, len(rng));
    ASSERT_NEAR(roc_auc(inst.scores, inst.labels).auc,
                oracle::mann_whitney(inst.scores, inst.labels), 1e-12);
  }
}

TEST(RocAuc, InvariantUnderIncreasingTransforms) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Instance inst = random_instance(rng, 200);
    const double auc = roc_auc(inst.scores, inst.labels).auc;
    std::vector<double> affine, cube;
    for (const double s : inst.scores) {
      affine.push_back(2.0 * s + 1.0);
      cube.push_back(s * s * s);
    }
    EXPECT_EQ(roc_auc(affine, inst.labels).auc, auc);
    EXPECT_EQ(roc_auc(cube, inst.labels).auc, auc);
  }
}

TEST(RocAuc, NegationComplementsWithoutTies) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise;
  for (int trial = 0; trial < 100; ++trial) {
    Instance inst = random_instance(rng, 150);
    for (double& s : inst.scores) s += 1e-3 * noise(rng);
    std::vector<double> neg;
    for (const double s : inst.scores) neg.push_back(-s);
    EXPECT_NEAR(roc_auc(inst.scores, inst.labels).auc + roc_auc(neg, inst.labels).auc, 1.0, 1e-12);
  }
}

TEST(RocAuc, ShuffledLabelsNearChance) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise;
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  for (int k = 0; k < 600; ++k) {
    labels.push_back(k % 10 == 0 ? 1 : 0);
    scores.push_back(noise(rng) + labels.back());
  }
  std::shuffle(labels.begin(), labels.end(), rng);
  const double auc = roc_auc(scores, labels).auc;
  EXPECT_NEAR(auc, oracle::mann_whitney(scores, labels), 1e-12);
  EXPECT_NEAR(auc, 0.5, 0.08);
}

TEST(RocAuc, Errors) {
  const std::vector<double> s{0.1, 0.2};
  const std::vector<std::uint8_t> ones{1, 1};
  EXPECT_THROW(roc_auc(s, ones), UndefinedAucError);
  const std::vector<std::uint8_t> short_labels{1};
  EXPECT_THROW(roc_auc(s, short_labels), std::invalid_argument);
  const std::vector<double> nan{0.1, std::numeric_limits<double>::quiet_NaN()};
  const std::vector<std::uint8_t> mixed{1, 0};
  EXPECT_THROW(roc_auc(nan, mixed), std::invalid_argument);
}

TEST(ConcatVideos, CanonicalOrderAndErrors) {
  const std::vector<FrameScores> scores{video("b", {0.4, 0.5}), video("a", {0.1, 0.2, 0.3})};
  const std::vector<LabelSeries> labels{{"a", {0, 0, 1}}, {"b", {1, 0}}};
  const DatasetArrays d = concat_videos(scores, labels);
  EXPECT_EQ(d.video_ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(d.scores, (std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5}));
  EXPECT_EQ(d.labels, (std::vector<std::uint8_t>{0, 0, 1, 1, 0}));

  const std::vector<FrameScores> reversed{scores[1], scores[0]};
  EXPECT_EQ(evaluate(reversed, labels).dataset.auc, evaluate(scores, labels).dataset.auc);

  const std::vector<LabelSeries> missing{{"a", {0, 0, 1}}};
  EXPECT_THROW(concat_videos(scores, missing), std::invalid_argument);
  const std::vector<LabelSeries> wrong_length{{"a", {0, 0, 1}}, {"b", {1, 0, 0}}};
  EXPECT_THROW(concat_videos(scores, wrong_length), std::invalid_argument);
}

TEST(Evaluate, ReportRows) {
  const std::vector<FrameScores> scores{video("a", {0.9, 0.1, 0.2}), video("b", {0.3, 0.3})};
  const std::vector<LabelSeries> labels{{"a", {1, 0, 0}}, {"b", {0, 0}}};
  const EvaluationReport r = evaluate(scores, labels);
  EXPECT_EQ(r.frame_count, 5u);
  EXPECT_EQ(r.anomalous_frames, 1u);
  EXPECT_EQ(r.per_video.at("a"), 1.0);
  EXPECT_FALSE(r.per_video.at("b").has_value());
  const std::string text = write_report(r, std::vector<std::string>{"run"});
  EXPECT_EQ(text.substr(0, 12), "#eval v1\n# r");
  EXPECT_NE(text.find("video_auc,b,undefined\n"), std::string::npos);
  EXPECT_NE(text.find("\nfpr,tpr,threshold\n0,0,inf\n"), std::string::npos);
  EXPECT_EQ(parse_report_auc(text), r.dataset.auc);
  EXPECT_THROW(parse_report_auc("#eval v1\n"), ParseError);
}

}  // namespace
}  // namespace trajad
