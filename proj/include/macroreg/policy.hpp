#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "macroreg/env.hpp"
#include "macroreg/nn.hpp"

namespace macroreg {

class Rng;

/// Network input for one decision. Planes are stored in single precision
/// so the rollout buffer stays small; the forward pass widens them.
struct PolicyInput {
  static constexpr int kPlanes = 4;  // canvas, position, wire_norm, regular_norm

  int n = 0;
  std::vector<float> planes;   // kPlanes x N x N
  std::vector<std::uint8_t> valid;  // position mask, N x N
  int macro_index = 0;
};

/// Invalid wire/regular cells are fed as 1, the worst normalized score.
PolicyInput make_input(const Observation& obs);

struct PolicyOutput {
  std::vector<double> logits;  // invalid cells are -inf
  double value = 0.0;
};

struct PolicyConfig {
  int n_grid = 32;
  /// Rows of the step-position embedding used by the value head; later
  /// steps share the last row.
  int max_macros = 64;
  std::uint64_t seed = 0;
};

/// Local path: 1x1 convolutions 4 -> 12 -> 12 -> 1 over the stacked masks.
/// Global path: three stride-2 3x3 convolutions over the canvas image, a
/// fully connected layer to the embedding, then stride-2 deconvolutions
/// back to N x N. A 1x1 convolution merges both maps into logits. The value
/// head reads the embedding plus a step-position embedding.
class Policy {
 public:
  static constexpr int kLocalWidth = 12;
  static constexpr int kValueWidth = 64;

  struct Cache;

  explicit Policy(PolicyConfig config);

  const PolicyConfig& config() const { return config_; }
  int n() const { return config_.n_grid; }
  int embedding_size() const { return embed_; }
  std::size_t num_params() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  PolicyOutput forward(const PolicyInput& input) const { return forward(input, params_, nullptr); }
  PolicyOutput forward(const PolicyInput& input, std::span<const double> params, Cache* cache) const;
  /// Accumulates into `grads` the gradient of a loss whose partials with
  /// respect to the logits and value are given.
  void backward(const Cache& cache, std::span<const double> dlogits, double dvalue, std::span<const double> params,
                std::span<double> grads) const;

 private:
  PolicyConfig config_;
  int embed_ = 0;
  int dec_side_ = 0;  // spatial side of the reshaped embedding
  nn::Conv2d local_[3];
  nn::Conv2d enc_[3];
  nn::Linear enc_fc_;
  std::vector<nn::ConvTranspose2d> dec_;
  nn::Conv2d merge_;
  std::size_t pos_embed_ = 0;
  nn::Linear value_[3];
  std::vector<double> params_;
};

struct Policy::Cache {
  nn::Tensor x;
  nn::Tensor local[3];
  nn::Tensor canvas;
  nn::Tensor enc[3];
  std::vector<double> embedding;
  std::vector<nn::Tensor> dec;  // dec[0] is the reshaped embedding
  nn::Tensor merged_in;
  int pos_row = 0;
  std::vector<double> value_in;
  std::vector<double> value_h[2];
};

/// Masked softmax; invalid cells get probability exactly 0.
std::vector<double> softmax(std::span<const double> logits);
double log_prob(std::span<const double> probs, int action);
double entropy(std::span<const double> probs);
int sample_action(std::span<const double> probs, Rng& rng);
/// First maximum over finite logits.
int argmax_action(std::span<const double> logits);

/// Text checkpoint: "macroreg-policy 1", then "n_grid max_macros count",
/// then one parameter per line.
void save_checkpoint(const Policy& policy, const std::filesystem::path& path);
Policy load_checkpoint(const std::filesystem::path& path);

}  // namespace macroreg
