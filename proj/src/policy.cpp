#include "macroreg/policy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "macroreg/error.hpp"
#include "macroreg/synthetic.hpp"

namespace macroreg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kEncoderWidths[3] = {4, 8, 8};
// Decoder output channels; the deepest stack uses all of them.
constexpr int kDecoderChannels[6] = {16, 8, 4, 2, 1, 1};

void put_plane(std::vector<float>& planes, int plane, const Mask& mask, double invalid_as) {
  const std::size_t cells = mask.values.size();
  for (std::size_t i = 0; i < cells; ++i) {
    const double v = mask.values[i];
    planes[plane * cells + i] = static_cast<float>(Mask::valid(v) ? v : invalid_as);
  }
}

}  // namespace

PolicyInput make_input(const Observation& obs) {
  const int n = obs.position.n;
  if (obs.canvas_image.n != n || obs.wire_norm.n != n || obs.regular_norm.n != n) {
    throw Error(ErrorKind::ShapeMismatch, "observation masks disagree on N");
  }
  PolicyInput in;
  in.n = n;
  in.planes.assign(static_cast<std::size_t>(PolicyInput::kPlanes) * n * n, 0.0f);
  put_plane(in.planes, 0, obs.canvas_image, 1.0);
  put_plane(in.planes, 1, obs.position, 0.0);
  put_plane(in.planes, 2, obs.wire_norm, 1.0);
  put_plane(in.planes, 3, obs.regular_norm, 1.0);
  in.valid.resize(obs.position.values.size());
  for (std::size_t i = 0; i < in.valid.size(); ++i) in.valid[i] = obs.position.values[i] != 0.0;
  in.macro_index = obs.macro_index;
  return in;
}

Policy::Policy(PolicyConfig config) : config_(config) {
  if (config_.n_grid < 1 || config_.max_macros < 1) throw Error(ErrorKind::InvalidConfig, "policy needs N >= 1");
  const int n = config_.n_grid;
  nn::ParamLayout layout;

  local_[0] = nn::Conv2d(layout, PolicyInput::kPlanes, kLocalWidth, 1, 1, 0);
  local_[1] = nn::Conv2d(layout, kLocalWidth, kLocalWidth, 1, 1, 0);
  local_[2] = nn::Conv2d(layout, kLocalWidth, 1, 1, 1, 0);

  int side = n;
  int ch = 1;
  for (int i = 0; i < 3; ++i) {
    enc_[i] = nn::Conv2d(layout, ch, kEncoderWidths[i], 3, 2, 1);
    side = enc_[i].out_size(side);
    ch = kEncoderWidths[i];
  }

  const int levels = std::min(5, std::countr_zero(static_cast<unsigned>(n)));
  dec_side_ = n >> levels;
  const int* chans = kDecoderChannels + (5 - levels);
  embed_ = chans[0] * dec_side_ * dec_side_;
  enc_fc_ = nn::Linear(layout, ch * side * side, embed_);
  for (int i = 0; i < levels; ++i) dec_.emplace_back(layout, chans[i], chans[i + 1]);

  merge_ = nn::Conv2d(layout, 2, 1, 1, 1, 0);
  pos_embed_ = layout.allocate(static_cast<std::size_t>(config_.max_macros) * kValueWidth);
  value_[0] = nn::Linear(layout, embed_ + kValueWidth, kValueWidth);
  value_[1] = nn::Linear(layout, kValueWidth, kValueWidth);
  value_[2] = nn::Linear(layout, kValueWidth, 1);

  params_.assign(layout.size(), 0.0);
  Rng rng(config_.seed);
  for (const auto& l : local_) l.init(params_, rng);
  for (const auto& l : enc_) l.init(params_, rng);
  enc_fc_.init(params_, rng);
  for (const auto& l : dec_) l.init(params_, rng);
  merge_.init(params_, rng);
  for (std::size_t i = 0; i < static_cast<std::size_t>(config_.max_macros) * kValueWidth; ++i) {
    params_[pos_embed_ + i] = rng.uniform(-0.1, 0.1);
  }
  for (const auto& l : value_) l.init(params_, rng);
}

PolicyOutput Policy::forward(const PolicyInput& input, std::span<const double> params, Cache* cache) const {
  const int n = config_.n_grid;
  if (input.n != n || input.planes.size() != static_cast<std::size_t>(PolicyInput::kPlanes) * n * n ||
      input.valid.size() != static_cast<std::size_t>(n) * n) {
    throw Error(ErrorKind::ShapeMismatch, fmt::format("policy expects N = {}, got {}", n, input.n));
  }
  if (params.size() != params_.size()) throw Error(ErrorKind::ShapeMismatch, "parameter count");
  Cache local_cache;
  Cache& c = cache ? *cache : local_cache;
  const std::size_t cells = static_cast<std::size_t>(n) * n;

  c.x = nn::Tensor(PolicyInput::kPlanes, n, n);
  std::copy(input.planes.begin(), input.planes.end(), c.x.data.begin());

  // Local fusion.
  const nn::Tensor* prev = &c.x;
  for (int i = 0; i < 3; ++i) {
    c.local[i] = local_[i].forward(*prev, params);
    if (i < 2) nn::relu_inplace(c.local[i].data);
    prev = &c.local[i];
  }

  // Global encoder on the canvas image.
  c.canvas = nn::Tensor(1, n, n);
  std::copy(c.x.data.begin(), c.x.data.begin() + cells, c.canvas.data.begin());
  prev = &c.canvas;
  for (int i = 0; i < 3; ++i) {
    c.enc[i] = enc_[i].forward(*prev, params);
    nn::relu_inplace(c.enc[i].data);
    prev = &c.enc[i];
  }
  c.embedding = enc_fc_.forward(c.enc[2].data, params);
  nn::relu_inplace(c.embedding);

  // Decoder back to N x N.
  c.dec.assign(dec_.size() + 1, nn::Tensor());
  c.dec[0] = nn::Tensor(embed_ / (dec_side_ * dec_side_), dec_side_, dec_side_);
  c.dec[0].data = c.embedding;
  for (std::size_t i = 0; i < dec_.size(); ++i) {
    c.dec[i + 1] = dec_[i].forward(c.dec[i], params);
    if (i + 1 < dec_.size()) nn::relu_inplace(c.dec[i + 1].data);
  }

  c.merged_in = nn::Tensor(2, n, n);
  std::copy(c.local[2].data.begin(), c.local[2].data.end(), c.merged_in.data.begin());
  std::copy(c.dec.back().data.begin(), c.dec.back().data.end(), c.merged_in.data.begin() + cells);
  const nn::Tensor merged = merge_.forward(c.merged_in, params);

  PolicyOutput out;
  out.logits = merged.data;
  for (std::size_t i = 0; i < cells; ++i) {
    if (!input.valid[i]) out.logits[i] = kNegInf;
  }

  // Value head.
  c.pos_row = std::clamp(input.macro_index, 0, config_.max_macros - 1);
  c.value_in = c.embedding;
  const double* row = &params[pos_embed_ + static_cast<std::size_t>(c.pos_row) * kValueWidth];
  c.value_in.insert(c.value_in.end(), row, row + kValueWidth);
  c.value_h[0] = value_[0].forward(c.value_in, params);
  nn::relu_inplace(c.value_h[0]);
  c.value_h[1] = value_[1].forward(c.value_h[0], params);
  nn::relu_inplace(c.value_h[1]);
  out.value = value_[2].forward(c.value_h[1], params)[0];
  return out;
}

void Policy::backward(const Cache& c, std::span<const double> dlogits, double dvalue, std::span<const double> params,
                      std::span<double> grads) const {
  const int n = config_.n_grid;
  const std::size_t cells = static_cast<std::size_t>(n) * n;

  nn::Tensor g_merged(1, n, n);
  for (std::size_t i = 0; i < cells; ++i) g_merged.data[i] = std::isfinite(dlogits[i]) ? dlogits[i] : 0.0;
  const nn::Tensor g_cat = merge_.backward(c.merged_in, g_merged, params, grads);

  // Local path.
  nn::Tensor g(1, n, n);
  std::copy(g_cat.data.begin(), g_cat.data.begin() + cells, g.data.begin());
  for (int i = 2; i >= 0; --i) {
    if (i < 2) nn::relu_backward(c.local[i].data, g.data);
    g = local_[i].backward(i == 0 ? c.x : c.local[i - 1], g, params, grads);
  }

  // Decoder.
  nn::Tensor gd(1, n, n);
  std::copy(g_cat.data.begin() + cells, g_cat.data.end(), gd.data.begin());
  for (int i = static_cast<int>(dec_.size()) - 1; i >= 0; --i) {
    if (i + 1 < static_cast<int>(dec_.size())) nn::relu_backward(c.dec[i + 1].data, gd.data);
    gd = dec_[i].backward(c.dec[i], gd, params, grads);
  }
  std::vector<double> g_emb = gd.data;

  // Value head.
  std::vector<double> gv{dvalue};
  gv = value_[2].backward(c.value_h[1], gv, params, grads);
  nn::relu_backward(c.value_h[1], gv);
  gv = value_[1].backward(c.value_h[0], gv, params, grads);
  nn::relu_backward(c.value_h[0], gv);
  gv = value_[0].backward(c.value_in, gv, params, grads);
  for (int i = 0; i < embed_; ++i) g_emb[i] += gv[i];
  double* row = &grads[pos_embed_ + static_cast<std::size_t>(c.pos_row) * kValueWidth];
  for (int i = 0; i < kValueWidth; ++i) row[i] += gv[embed_ + i];

  // Encoder.
  nn::relu_backward(c.embedding, g_emb);
  nn::Tensor ge(c.enc[2].c, c.enc[2].h, c.enc[2].w);
  ge.data = enc_fc_.backward(c.enc[2].data, g_emb, params, grads);
  for (int i = 2; i >= 0; --i) {
    nn::relu_backward(c.enc[i].data, ge.data);
    ge = enc_[i].backward(i == 0 ? c.canvas : c.enc[i - 1], ge, params, grads);
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  double top = kNegInf;
  for (double v : logits) top = std::max(top, v);
  if (!std::isfinite(top)) throw Error(ErrorKind::NoValidPosition, "every cell is masked");
  std::vector<double> p(logits.size(), 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (logits[i] == kNegInf) continue;
    p[i] = std::exp(logits[i] - top);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

double log_prob(std::span<const double> probs, int action) { return std::log(probs[action]); }

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

int sample_action(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  int last = -1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last = static_cast<int>(i);
    if (u < acc) return last;
  }
  if (last < 0) throw Error(ErrorKind::NoValidPosition, "empty distribution");
  return last;
}

int argmax_action(std::span<const double> logits) {
  int best = -1;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (logits[i] == kNegInf) continue;
    if (best < 0 || logits[i] > logits[best]) best = static_cast<int>(i);
  }
  if (best < 0) throw Error(ErrorKind::NoValidPosition, "every cell is masked");
  return best;
}

void save_checkpoint(const Policy& policy, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
  fmt::print(os, "macroreg-policy 1\n{} {} {}\n", policy.config().n_grid, policy.config().max_macros,
             policy.num_params());
  for (double v : policy.params()) fmt::print(os, "{}\n", v);
  if (!os) throw Error(ErrorKind::Io, "short write to " + path.string());
}

Policy load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::MissingFile, path.string());
  std::string magic;
  int version = 0;
  PolicyConfig cfg;
  std::size_t count = 0;
  if (!(is >> magic >> version >> cfg.n_grid >> cfg.max_macros >> count) || magic != "macroreg-policy" ||
      version != 1) {
    throw Error(ErrorKind::MalformedLine, path.string() + ": not a policy checkpoint");
  }
  Policy policy(cfg);
  if (count != policy.num_params()) {
    throw Error(ErrorKind::ShapeMismatch, fmt::format("{}: {} parameters, expected {}", path.string(), count,
                                                      policy.num_params()));
  }
  for (double& v : policy.params()) {
    if (!(is >> v)) throw Error(ErrorKind::MalformedLine, path.string() + ": truncated parameter list");
  }
  return policy;
}

}  // namespace macroreg
