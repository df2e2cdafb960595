#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trajad {

/// Dimensions of the BiTraP-lite network. K is fixed at 1 (deterministic
/// mean-latent inference).
struct PredictorConfig {
  std::size_t tau = 5;
  std::size_t delta = 5;
  std::size_t hidden_size = 256;
  std::size_t latent_dim = 32;
  std::size_t num_samples = 1;

  friend bool operator==(const PredictorConfig&, const PredictorConfig&) = default;
};

/// Throws ConfigError unless every field is positive and num_samples == 1.
void validate(const PredictorConfig& config);

/// Per-step network input: (dx, dy, dw, dh) from the previous box, then raw (w, h).
inline constexpr std::size_t kStepInputDim = 6;
/// Box offsets (x, y, w, h).
inline constexpr std::size_t kBoxDim = 4;

struct TensorSpec {
  std::string name;
  std::vector<std::size_t> shape;

  std::size_t element_count() const noexcept;
  friend bool operator==(const TensorSpec&, const TensorSpec&) = default;
};

/// The required tensors, in the order they must appear in a container.
std::vector<TensorSpec> bitrap_layout(const PredictorConfig& config);

/// Read-only view of one named tensor, row-major.
struct TensorView {
  std::string_view name;
  std::span<const std::size_t> shape;
  std::span<const float> values;

  std::size_t rows() const noexcept { return shape.empty() ? 0 : shape.front(); }
  std::size_t cols() const noexcept { return shape.size() < 2 ? 1 : shape[1]; }
};

/// Named float32 tensors of a BiTraP-lite network plus its config. Immutable
/// once built; safe to share across threads.
///
/// File layout: the bytes `BTLW`, a version byte (1), one JSON manifest line
/// terminated by '\n', then the little-endian float32 payload concatenated in
/// manifest order.
class WeightContainer {
 public:
  /// Takes tensors in layout order. Throws WeightError if names, order or
  /// shapes differ from bitrap_layout(config) or the payload size is wrong.
  WeightContainer(PredictorConfig config, std::vector<TensorSpec> manifest,
                  std::vector<float> payload);

  const PredictorConfig& config() const noexcept { return config_; }
  const std::vector<TensorSpec>& manifest() const noexcept { return manifest_; }
  std::span<const float> payload() const noexcept { return payload_; }

  /// Throws WeightError for unknown names.
  TensorView tensor(std::string_view name) const;

  void save(std::ostream& out) const;
  std::string save_to_string() const;

  static WeightContainer load(std::istream& in);
  static WeightContainer load(std::string_view bytes);

 private:
  PredictorConfig config_;
  std::vector<TensorSpec> manifest_;
  std::vector<std::size_t> offsets_;
  std::vector<float> payload_;
};

/// All-zero parameters with the required layout.
WeightContainer zero_weights(const PredictorConfig& config);

/// Parameters drawn uniformly from [-scale, scale] with a seeded mt19937_64.
WeightContainer random_weights(const PredictorConfig& config, std::uint64_t seed,
                               float scale = 0.3F);

/// Builds a container from name -> values, filling unspecified tensors with zeros.
WeightContainer make_weights(const PredictorConfig& config,
                             const std::vector<std::pair<std::string, std::vector<float>>>& values);

}  // namespace trajad
