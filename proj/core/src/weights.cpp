#include "trajad/weights.hpp"

#include <algorithm>
#include <bit>
#include <iterator>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "trajad/errors.hpp"

namespace trajad {

namespace {

constexpr std::string_view kMagic = "BTLW";
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kMaxManifestBytes = 1U << 20;

void add_linear(std::vector<TensorSpec>& layout, const std::string& prefix, std::size_t out,
                std::size_t in) {
  layout.push_back({prefix + ".weight", {out, in}});
  layout.push_back({prefix + ".bias", {out}});
}

void add_gru(std::vector<TensorSpec>& layout, const std::string& prefix, std::size_t input,
             std::size_t hidden) {
  layout.push_back({prefix + ".weight_ih", {3 * hidden, input}});
  layout.push_back({prefix + ".weight_hh", {3 * hidden, hidden}});
  layout.push_back({prefix + ".bias_ih", {3 * hidden}});
  layout.push_back({prefix + ".bias_hh", {3 * hidden}});
}

std::string describe_shape(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t k = 0; k < shape.size(); ++k) {
    if (k) s += ',';
    s += std::to_string(shape[k]);
  }
  return s + "]";
}

}  // namespace

void validate(const PredictorConfig& config) {
  if (config.tau == 0 || config.delta == 0 || config.hidden_size == 0 || config.latent_dim == 0) {
    throw ConfigError("predictor tau, delta, hidden_size and latent_dim must be positive");
  }
  if (config.num_samples != 1) {
    throw ConfigError("only deterministic single-sample inference (K=1) is supported");
  }
}

std::size_t TensorSpec::element_count() const noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::vector<TensorSpec> bitrap_layout(const PredictorConfig& config) {
  const std::size_t h = config.hidden_size;
  const std::size_t l = config.latent_dim;
  std::vector<TensorSpec> layout;
  add_linear(layout, "enc.embed", h, kStepInputDim);
  add_gru(layout, "enc.gru", h, h);
  add_linear(layout, "prior.fc1", h, h);
  add_linear(layout, "prior.fc2", h, h);
  add_linear(layout, "prior.head", 2 * l, h);
  add_linear(layout, "goal.fc1", h, h + l);
  add_linear(layout, "goal.fc2", h, h);
  add_linear(layout, "goal.head", kBoxDim, h);
  add_linear(layout, "dec.fwd_in", h, h);
  add_gru(layout, "dec.fwd_gru", h, h);
  add_linear(layout, "dec.bwd_init", h, h);
  add_linear(layout, "dec.bwd_in", h, kBoxDim);
  add_gru(layout, "dec.bwd_gru", h, h);
  add_linear(layout, "dec.out", kBoxDim, 2 * h);
  return layout;
}

WeightContainer::WeightContainer(PredictorConfig config, std::vector<TensorSpec> manifest,
                                 std::vector<float> payload)
    : config_(config), manifest_(std::move(manifest)), payload_(std::move(payload)) {
  try {
    validate(config_);
  } catch (const ConfigError& e) {
    throw WeightError(std::string("invalid weight config: ") + e.what());
  }
  const std::vector<TensorSpec> expected = bitrap_layout(config_);
  std::set<std::string> known;
  for (const TensorSpec& spec : expected) known.insert(spec.name);

  std::set<std::string> seen;
  for (const TensorSpec& spec : manifest_) {
    if (!known.count(spec.name)) throw WeightError("unknown tensor name '" + spec.name + "'");
    if (!seen.insert(spec.name).second) throw WeightError("duplicate tensor '" + spec.name + "'");
  }
  for (const TensorSpec& spec : expected) {
    if (!seen.count(spec.name)) throw WeightError("missing tensor '" + spec.name + "'");
  }
  for (std::size_t k = 0; k < expected.size(); ++k) {
    if (manifest_[k].name != expected[k].name) {
      throw WeightError("tensor '" + manifest_[k].name + "' out of order at position " +
                        std::to_string(k) + " (expected '" + expected[k].name + "')");
    }
    if (manifest_[k].shape != expected[k].shape) {
      throw WeightError("tensor '" + expected[k].name + "' has shape " +
                        describe_shape(manifest_[k].shape) + ", expected " +
                        describe_shape(expected[k].shape));
    }
  }

  std::size_t total = 0;
  offsets_.reserve(manifest_.size());
  for (const TensorSpec& spec : manifest_) {
    offsets_.push_back(total);
    total += spec.element_count();
  }
  if (payload_.size() != total) {
    throw WeightError("payload holds " + std::to_string(payload_.size()) +
                      " floats, manifest requires " + std::to_string(total));
  }
}

TensorView WeightContainer::tensor(std::string_view name) const {
  for (std::size_t k = 0; k < manifest_.size(); ++k) {
    if (manifest_[k].name == name) {
      const TensorSpec& spec = manifest_[k];
      return {spec.name, spec.shape,
              std::span<const float>(payload_).subspan(offsets_[k], spec.element_count())};
    }
  }
  throw WeightError("no tensor named '" + std::string(name) + "'");
}

void WeightContainer::save(std::ostream& out) const {
  nlohmann::json manifest;
  manifest["config"] = {{"tau", config_.tau},
                        {"delta", config_.delta},
                        {"hidden", config_.hidden_size},
                        {"latent", config_.latent_dim}};
  nlohmann::json tensors = nlohmann::json::array();
  for (const TensorSpec& spec : manifest_) {
    tensors.push_back({{"name", spec.name}, {"shape", spec.shape}});
  }
  manifest["tensors"] = std::move(tensors);

  out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
  out.put(static_cast<char>(kVersion));
  const std::string line = manifest.dump();
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.put('\n');

  std::string bytes;
  bytes.resize(payload_.size() * 4);
  for (std::size_t k = 0; k < payload_.size(); ++k) {
    const auto bits = std::bit_cast<std::uint32_t>(payload_[k]);
    for (int b = 0; b < 4; ++b) bytes[4 * k + b] = static_cast<char>((bits >> (8 * b)) & 0xFFU);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string WeightContainer::save_to_string() const {
  std::ostringstream out(std::ios::binary);
  save(out);
  return out.str();
}

WeightContainer WeightContainer::load(std::string_view bytes) {
  if (bytes.size() < kMagic.size() + 1 || bytes.substr(0, kMagic.size()) != kMagic) {
    throw WeightError("not a BTLW weight container (bad magic)");
  }
  const auto version = static_cast<std::uint8_t>(bytes[kMagic.size()]);
  if (version != kVersion) {
    throw WeightError("unsupported weight container version " + std::to_string(version));
  }
  const std::size_t manifest_start = kMagic.size() + 1;
  const std::size_t newline = bytes.find('\n', manifest_start);
  if (newline == std::string_view::npos || newline - manifest_start > kMaxManifestBytes) {
    throw WeightError("unterminated weight manifest");
  }

  PredictorConfig config;
  std::vector<TensorSpec> manifest;
  try {
    const auto json = nlohmann::json::parse(bytes.substr(manifest_start, newline - manifest_start));
    const auto& cfg = json.at("config");
    config.tau = cfg.at("tau").get<std::size_t>();
    config.delta = cfg.at("delta").get<std::size_t>();
    config.hidden_size = cfg.at("hidden").get<std::size_t>();
    config.latent_dim = cfg.at("latent").get<std::size_t>();
    for (const auto& entry : json.at("tensors")) {
      manifest.push_back(
          {entry.at("name").get<std::string>(), entry.at("shape").get<std::vector<std::size_t>>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw WeightError(std::string("malformed weight manifest: ") + e.what());
  }

  std::size_t expected_floats = 0;
  for (const TensorSpec& spec : manifest) expected_floats += spec.element_count();
  const std::string_view payload_bytes = bytes.substr(newline + 1);
  if (payload_bytes.size() < expected_floats * 4) {
    throw WeightError("truncated payload: " + std::to_string(payload_bytes.size()) +
                      " bytes, manifest requires " + std::to_string(expected_floats * 4));
  }
  if (payload_bytes.size() != expected_floats * 4) {
    throw WeightError("payload has " + std::to_string(payload_bytes.size() - expected_floats * 4) +
                      " trailing bytes");
  }
  std::vector<float> payload(expected_floats);
  for (std::size_t k = 0; k < expected_floats; ++k) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(payload_bytes[4 * k + b]))
              << (8 * b);
    }
    payload[k] = std::bit_cast<float>(bits);
  }
  return WeightContainer(config, std::move(manifest), std::move(payload));
}

WeightContainer WeightContainer::load(std::istream& in) {
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load(bytes);
}

WeightContainer zero_weights(const PredictorConfig& config) { return make_weights(config, {}); }

WeightContainer random_weights(const PredictorConfig& config, std::uint64_t seed, float scale) {
  validate(config);
  auto layout = bitrap_layout(config);
  std::size_t total = 0;
  for (const TensorSpec& spec : layout) total += spec.element_count();
  std::mt19937_64 rng(seed);
  std::vector<float> payload(total);
  for (float& v : payload) {
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v = static_cast<float>((2.0 * unit - 1.0) * scale);
  }
  return WeightContainer(config, std::move(layout), std::move(payload));
}

WeightContainer make_weights(
    const PredictorConfig& config,
    const std::vector<std::pair<std::string, std::vector<float>>>& values) {
  validate(config);
  auto layout = bitrap_layout(config);
  std::vector<float> payload;
  std::set<std::string> used;
  for (const TensorSpec& spec : layout) {
    const auto it = std::find_if(values.begin(), values.end(),
                                 [&](const auto& kv) { return kv.first == spec.name; });
    if (it == values.end()) {
      payload.insert(payload.end(), spec.element_count(), 0.0F);
      continue;
    }
    if (it->second.size() != spec.element_count()) {
      throw WeightError("tensor '" + spec.name + "' needs " + std::to_string(spec.element_count()) +
                        " values, got " + std::to_string(it->second.size()));
    }
    payload.insert(payload.end(), it->second.begin(), it->second.end());
    used.insert(spec.name);
  }
  for (const auto& [name, unused] : values) {
    if (!used.count(name)) throw WeightError("unknown tensor name '" + name + "'");
  }
  return WeightContainer(config, std::move(layout), std::move(payload));
}

}  // namespace trajad
