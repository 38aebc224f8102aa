#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace macroreg {
class Rng;
}

namespace macroreg::nn {

/// Dense C x H x W activation.
struct Tensor {
  int c = 0;
  int h = 0;
  int w = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int channels, int height, int width)
      : c(channels), h(height), w(width), data(static_cast<std::size_t>(channels) * height * width, 0.0) {}

  std::size_t size() const { return data.size(); }
  double& at(int ch, int y, int x) { return data[(static_cast<std::size_t>(ch) * h + y) * w + x]; }
  double at(int ch, int y, int x) const { return data[(static_cast<std::size_t>(ch) * h + y) * w + x]; }
};

/// Layers own no storage: weights live at an offset inside one flat
/// parameter vector so optimizers, clipping and checkpoints see a single
/// array.
class ParamLayout {
 public:
  std::size_t allocate(std::size_t count) {
    const std::size_t offset = size_;
    size_ += count;
    return offset;
  }
  std::size_t size() const { return size_; }

 private:
  std::size_t size_ = 0;
};

struct Conv2d {
  int in = 0, out = 0, kernel = 1, stride = 1, pad = 0;
  std::size_t weight = 0, bias = 0;

  Conv2d() = default;
  Conv2d(ParamLayout& layout, int in_ch, int out_ch, int k, int s, int p);

  int out_size(int n) const { return (n + 2 * pad - kernel) / stride + 1; }
  std::size_t fan_in() const { return static_cast<std::size_t>(in) * kernel * kernel; }
  void init(std::span<double> params, Rng& rng) const;
  Tensor forward(const Tensor& x, std::span<const double> params) const;
  /// Accumulates parameter gradients; returns dL/dx.
  Tensor backward(const Tensor& x, const Tensor& grad_out, std::span<const double> params,
                  std::span<double> grads) const;
};

/// Transposed convolution; with kernel 3, stride 2, pad 1 and output padding
/// 1 it doubles the spatial size.
struct ConvTranspose2d {
  int in = 0, out = 0, kernel = 3, stride = 2, pad = 1, out_pad = 1;
  std::size_t weight = 0, bias = 0;

  ConvTranspose2d() = default;
  ConvTranspose2d(ParamLayout& layout, int in_ch, int out_ch);

  int out_size(int n) const { return (n - 1) * stride - 2 * pad + kernel + out_pad; }
  void init(std::span<double> params, Rng& rng) const;
  Tensor forward(const Tensor& x, std::span<const double> params) const;
  Tensor backward(const Tensor& x, const Tensor& grad_out, std::span<const double> params,
                  std::span<double> grads) const;
};

struct Linear {
  int in = 0, out = 0;
  std::size_t weight = 0, bias = 0;

  Linear() = default;
  Linear(ParamLayout& layout, int in_features, int out_features);

  void init(std::span<double> params, Rng& rng) const;
  std::vector<double> forward(std::span<const double> x, std::span<const double> params) const;
  std::vector<double> backward(std::span<const double> x, std::span<const double> grad_out,
                               std::span<const double> params, std::span<double> grads) const;
};

void relu_inplace(std::span<double> x);
/// Zeroes grad where the forward output was not positive.
void relu_backward(std::span<const double> activated, std::span<double> grad);

/// Adam with bias correction.
class Adam {
 public:
  Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(std::span<double> params, std::span<const double> grads);
  double learning_rate() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace macroreg::nn
