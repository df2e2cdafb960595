#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "trajad/ingest.hpp"
#include "trajad/trajgeom.hpp"
#include "trajad/weights.hpp"

namespace trajad {

/// Lower bound applied to predicted widths and heights, in pixels.
inline constexpr double kMinBoxSize = 1e-3;

struct Prediction {
  std::int64_t pedestrian_id = 0;
  std::int64_t t_last_observed = 0;
  /// Boxes for frames t_last_observed+1 .. t_last_observed+delta.
  std::vector<BoundingBox> boxes;
};

/// Predicts delta future boxes from tau observed ones. Implementations are
/// stateless after construction, so predict() may be called concurrently.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual std::vector<BoundingBox> predict_boxes(std::span<const BoundingBox> observed) const = 0;
  virtual std::size_t delta() const noexcept = 0;

  Prediction predict(const WindowPair& window) const;
};

/// Least-squares line per coordinate over the observed frames, extrapolated
/// delta steps. Requires at least two observed boxes.
class ConstantVelocityPredictor final : public Predictor {
 public:
  explicit ConstantVelocityPredictor(std::size_t delta);

  std::vector<BoundingBox> predict_boxes(std::span<const BoundingBox> observed) const override;
  std::size_t delta() const noexcept override { return delta_; }

 private:
  std::size_t delta_;
};

std::vector<BoundingBox> predict_constant_velocity(std::span<const BoundingBox> observed,
                                                   std::size_t delta);

struct LatentParams {
  std::vector<double> mu;
  std::vector<double> log_sigma;

  std::vector<double> sigma() const;
};

/// Displacement-plus-size input rows fed to the encoder, one per observed box.
std::vector<std::array<double, kStepInputDim>> step_inputs(std::span<const BoundingBox> observed);

/// FC embedding + GRU over the observed steps; returns the final hidden state.
std::vector<double> encode_history(std::span<const BoundingBox> observed,
                                   const WeightContainer& weights);

/// Three-layer tanh MLP from the history encoding to (mu, log_sigma).
LatentParams latent_prior(std::span<const double> history, const WeightContainer& weights);

/// Raw per-step offsets from the last observed box (before clamping).
std::vector<std::array<double, kBoxDim>> decode_offsets(std::span<const double> history,
                                                        std::span<const double> latent,
                                                        const WeightContainer& weights,
                                                        std::size_t delta);

/// Goal MLP, forward and backward GRUs, and the per-step output head. Each
/// step's output is the offset of that box from `last_observed`; w and h are
/// clamped to kMinBoxSize.
std::vector<BoundingBox> decode_bidirectional(std::span<const double> history,
                                              std::span<const double> latent,
                                              const BoundingBox& last_observed,
                                              const WeightContainer& weights, std::size_t delta);

/// Deterministic (z = mu, K = 1) BiTraP-lite inference.
class BitrapLitePredictor final : public Predictor {
 public:
  explicit BitrapLitePredictor(std::shared_ptr<const WeightContainer> weights);

  std::vector<BoundingBox> predict_boxes(std::span<const BoundingBox> observed) const override;
  std::size_t delta() const noexcept override { return weights_->config().delta; }

  const WeightContainer& weights() const noexcept { return *weights_; }

 private:
  std::shared_ptr<const WeightContainer> weights_;
};

}  // namespace trajad
