#include "trajad/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trajad/errors.hpp"

namespace trajad {

Prediction Predictor::predict(const WindowPair& window) const {
  return {window.pedestrian_id, window.t_last_observed, predict_boxes(window.observed)};
}

namespace {

BoundingBox clamp_size(BoundingBox box) {
  box.w = std::max(box.w, kMinBoxSize);
  box.h = std::max(box.h, kMinBoxSize);
  return box;
}

constexpr double BoundingBox::*kFields[kBoxDim] = {&BoundingBox::x, &BoundingBox::y,
                                                    &BoundingBox::w, &BoundingBox::h};

}  // namespace

ConstantVelocityPredictor::ConstantVelocityPredictor(std::size_t delta) : delta_(delta) {
  if (delta == 0) throw ConfigError("prediction horizon must be at least 1");
}

std::vector<BoundingBox> ConstantVelocityPredictor::predict_boxes(
    std::span<const BoundingBox> observed) const {
  return predict_constant_velocity(observed, delta_);
}

std::vector<BoundingBox> predict_constant_velocity(std::span<const BoundingBox> observed,
                                                   std::size_t delta) {
  if (observed.size() < 2) {
    throw ConfigError("constant-velocity prediction needs at least 2 observed boxes");
  }
  if (delta == 0) throw ConfigError("prediction horizon must be at least 1");
  const std::size_t n = observed.size();
  const double t_mean = static_cast<double>(n - 1) / 2.0;
  double t_var = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dt = static_cast<double>(k) - t_mean;
    t_var += dt * dt;
  }

  const BoundingBox& last = observed.back();
  std::vector<BoundingBox> out(delta, last);
  for (const auto field : kFields) {
    // Fit on values relative to the last box so a stationary coordinate stays exact.
    double mean = 0.0;
    for (const BoundingBox& b : observed) mean += b.*field - last.*field;
    mean /= static_cast<double>(n);
    double cov = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      cov += (static_cast<double>(k) - t_mean) * (observed[k].*field - last.*field - mean);
    }
    const double slope = cov / t_var;
    for (std::size_t step = 1; step <= delta; ++step) {
      const double t = static_cast<double>(n - 1 + step);
      out[step - 1].*field = last.*field + (mean + slope * (t - t_mean));
    }
  }
  for (BoundingBox& b : out) b = clamp_size(b);
  return out;
}

std::vector<double> LatentParams::sigma() const {
  std::vector<double> s(log_sigma.size());
  std::transform(log_sigma.begin(), log_sigma.end(), s.begin(),
                 [](double v) { return std::exp(v); });
  return s;
}

namespace {

using Vec = std::vector<double>;

// Row-vector product with eight interleaved partial sums, reduced in a fixed
// order so results do not depend on the caller.
double dot(const float* w, const double* x, std::size_t n) {
  double acc[8] = {};
  std::size_t c = 0;
  for (; c + 8 <= n; c += 8) {
    for (std::size_t l = 0; l < 8; ++l) acc[l] += static_cast<double>(w[c + l]) * x[c + l];
  }
  for (; c < n; ++c) acc[c % 8] += static_cast<double>(w[c]) * x[c];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

// y = W x + b with W row-major [out, in].
Vec linear(const WeightContainer& weights, const std::string& prefix, std::span<const double> x) {
  const TensorView w = weights.tensor(prefix + ".weight");
  const TensorView b = weights.tensor(prefix + ".bias");
  if (w.cols() != x.size()) {
    throw WeightError(prefix + " expects input of size " + std::to_string(w.cols()) + ", got " +
                      std::to_string(x.size()));
  }
  Vec y(w.rows());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    y[r] = b.values[r] + dot(w.values.data() + r * w.cols(), x.data(), x.size());
  }
  return y;
}

Vec tanh_of(Vec v) {
  for (double& e : v) e = std::tanh(e);
  return v;
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Gate order (reset, update, candidate) in both weight blocks.
Vec gru_step(const WeightContainer& weights, const std::string& prefix, std::span<const double> x,
             std::span<const double> h) {
  const TensorView w_ih = weights.tensor(prefix + ".weight_ih");
  const TensorView w_hh = weights.tensor(prefix + ".weight_hh");
  const TensorView b_ih = weights.tensor(prefix + ".bias_ih");
  const TensorView b_hh = weights.tensor(prefix + ".bias_hh");
  const std::size_t hidden = h.size();
  if (w_ih.rows() != 3 * hidden || w_ih.cols() != x.size() || w_hh.cols() != hidden) {
    throw WeightError(prefix + " shape does not match hidden size " + std::to_string(hidden));
  }
  const auto affine = [](const TensorView& w, const TensorView& b, std::span<const double> v,
                         std::size_t row) {
    return b.values[row] + dot(w.values.data() + row * w.cols(), v.data(), v.size());
  };
  Vec next(hidden);
  for (std::size_t j = 0; j < hidden; ++j) {
    const double reset = sigmoid(affine(w_ih, b_ih, x, j) + affine(w_hh, b_hh, h, j));
    const double update =
        sigmoid(affine(w_ih, b_ih, x, hidden + j) + affine(w_hh, b_hh, h, hidden + j));
    const double candidate = std::tanh(affine(w_ih, b_ih, x, 2 * hidden + j) +
                                       reset * affine(w_hh, b_hh, h, 2 * hidden + j));
    next[j] = (1.0 - update) * candidate + update * h[j];
  }
  return next;
}

void require_finite(std::span<const double> v, const std::string& where) {
  for (const double e : v) {
    if (!std::isfinite(e)) throw NumericError("non-finite activation in " + where);
  }
}

Vec concat(std::span<const double> a, std::span<const double> b) {
  Vec out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

void require_size(std::span<const double> v, std::size_t expected, const char* what) {
  if (v.size() != expected) {
    throw WeightError(std::string(what) + " has size " + std::to_string(v.size()) +
                      ", weights expect " + std::to_string(expected));
  }
}

}  // namespace

std::vector<std::array<double, kStepInputDim>> step_inputs(std::span<const BoundingBox> observed) {
  std::vector<std::array<double, kStepInputDim>> rows;
  rows.reserve(observed.size());
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const BoundingBox& cur = observed[k];
    const BoundingBox& prev = k == 0 ? cur : observed[k - 1];
    rows.push_back({cur.x - prev.x, cur.y - prev.y, cur.w - prev.w, cur.h - prev.h, cur.w, cur.h});
  }
  return rows;
}

std::vector<double> encode_history(std::span<const BoundingBox> observed,
                                   const WeightContainer& weights) {
  if (observed.empty()) throw ConfigError("encoder needs at least one observed box");
  Vec h(weights.config().hidden_size, 0.0);
  std::size_t step = 0;
  for (const auto& input : step_inputs(observed)) {
    const Vec embedded = tanh_of(linear(weights, "enc.embed", input));
    h = gru_step(weights, "enc.gru", embedded, h);
    require_finite(h, "encoder step " + std::to_string(step++));
  }
  return h;
}

LatentParams latent_prior(std::span<const double> history, const WeightContainer& weights) {
  const std::size_t latent = weights.config().latent_dim;
  require_size(history, weights.config().hidden_size, "history encoding");
  const Vec a1 = tanh_of(linear(weights, "prior.fc1", history));
  const Vec a2 = tanh_of(linear(weights, "prior.fc2", a1));
  const Vec out = linear(weights, "prior.head", a2);
  require_finite(out, "latent prior");
  return {Vec(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(latent)),
          Vec(out.begin() + static_cast<std::ptrdiff_t>(latent), out.end())};
}

std::vector<std::array<double, kBoxDim>> decode_offsets(std::span<const double> history,
                                                        std::span<const double> latent,
                                                        const WeightContainer& weights,
                                                        std::size_t delta) {
  if (delta == 0) throw ConfigError("prediction horizon must be at least 1");
  require_size(history, weights.config().hidden_size, "history encoding");
  require_size(latent, weights.config().latent_dim, "latent vector");

  const Vec g1 = tanh_of(linear(weights, "goal.fc1", concat(history, latent)));
  const Vec g2 = tanh_of(linear(weights, "goal.fc2", g1));
  const Vec goal = linear(weights, "goal.head", g2);
  require_finite(goal, "goal head");

  // Forward pass: current position towards the goal.
  std::vector<Vec> forward(delta);
  Vec f(history.begin(), history.end());
  for (std::size_t k = 0; k < delta; ++k) {
    const Vec input = tanh_of(linear(weights, "dec.fwd_in", f));
    f = gru_step(weights, "dec.fwd_gru", input, f);
    require_finite(f, "forward decoder step " + std::to_string(k + 1));
    forward[k] = f;
  }

  // Backward pass: from the goal back to the first predicted frame. The goal
  // is the first input; each later input is the offset emitted one step ahead.
  std::vector<std::array<double, kBoxDim>> offsets(delta);
  Vec b = tanh_of(linear(weights, "dec.bwd_init", history));
  Vec input = goal;
  for (std::size_t k = delta; k-- > 0;) {
    const Vec embedded = tanh_of(linear(weights, "dec.bwd_in", input));
    b = gru_step(weights, "dec.bwd_gru", embedded, b);
    const Vec out = linear(weights, "dec.out", concat(forward[k], b));
    require_finite(out, "backward decoder step " + std::to_string(k + 1));
    std::copy(out.begin(), out.end(), offsets[k].begin());
    input = out;
  }
  return offsets;
}

std::vector<BoundingBox> decode_bidirectional(std::span<const double> history,
                                              std::span<const double> latent,
                                              const BoundingBox& last_observed,
                                              const WeightContainer& weights, std::size_t delta) {
  const auto offsets = decode_offsets(history, latent, weights, delta);
  std::vector<BoundingBox> boxes;
  boxes.reserve(delta);
  for (const auto& o : offsets) {
    boxes.push_back(clamp_size({last_observed.x + o[0], last_observed.y + o[1],
                                last_observed.w + o[2], last_observed.h + o[3]}));
  }
  return boxes;
}

BitrapLitePredictor::BitrapLitePredictor(std::shared_ptr<const WeightContainer> weights)
    : weights_(std::move(weights)) {
  if (!weights_) throw ConfigError("BiTraP-lite predictor needs weights");
}

std::vector<BoundingBox> BitrapLitePredictor::predict_boxes(
    std::span<const BoundingBox> observed) const {
  const PredictorConfig& config = weights_->config();
  if (observed.size() != config.tau) {
    throw WeightError("weights were built for tau=" + std::to_string(config.tau) + ", window has " +
                      std::to_string(observed.size()) + " observed boxes");
  }
  const Vec history = encode_history(observed, *weights_);
  const LatentParams prior = latent_prior(history, *weights_);
  return decode_bidirectional(history, prior.mu, observed.back(), *weights_, config.delta);
}

}  // namespace trajad
