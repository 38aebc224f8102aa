#include "macroreg/nn.hpp"

#include <algorithm>
#include <cmath>

#include "macroreg/error.hpp"
#include "macroreg/synthetic.hpp"

namespace macroreg::nn {

namespace {

void init_uniform(std::span<double> params, std::size_t offset, std::size_t count, double bound, Rng& rng) {
  for (std::size_t i = 0; i < count; ++i) params[offset + i] = rng.uniform(-bound, bound);
}

void check_channels(int got, int want) {
  if (got != want) throw Error(ErrorKind::ShapeMismatch, "channel count mismatch");
}

}  // namespace

Conv2d::Conv2d(ParamLayout& layout, int in_ch, int out_ch, int k, int s, int p)
    : in(in_ch), out(out_ch), kernel(k), stride(s), pad(p) {
  weight = layout.allocate(static_cast<std::size_t>(out) * in * k * k);
  bias = layout.allocate(out);
}

void Conv2d::init(std::span<double> params, Rng& rng) const {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in()));
  init_uniform(params, weight, static_cast<std::size_t>(out) * in * kernel * kernel, bound, rng);
  init_uniform(params, bias, out, bound, rng);
}

Tensor Conv2d::forward(const Tensor& x, std::span<const double> params) const {
  check_channels(x.c, in);
  Tensor y(out, out_size(x.h), out_size(x.w));
  for (int o = 0; o < out; ++o) {
    const double b = params[bias + o];
    double* yo = &y.data[static_cast<std::size_t>(o) * y.h * y.w];
    std::fill(yo, yo + static_cast<std::size_t>(y.h) * y.w, b);
    for (int i = 0; i < in; ++i) {
      for (int ky = 0; ky < kernel; ++ky) {
        for (int kx = 0; kx < kernel; ++kx) {
          const double wv = params[weight + ((static_cast<std::size_t>(o) * in + i) * kernel + ky) * kernel + kx];
          for (int oy = 0; oy < y.h; ++oy) {
            const int iy = oy * stride - pad + ky;
            if (iy < 0 || iy >= x.h) continue;
            const double* xrow = &x.data[(static_cast<std::size_t>(i) * x.h + iy) * x.w];
            double* yrow = yo + static_cast<std::size_t>(oy) * y.w;
            for (int ox = 0; ox < y.w; ++ox) {
              const int ix = ox * stride - pad + kx;
              if (ix < 0 || ix >= x.w) continue;
              yrow[ox] += wv * xrow[ix];
            }
          }
        }
      }
    }
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& x, const Tensor& grad_out, std::span<const double> params,
                        std::span<double> grads) const {
  Tensor gx(x.c, x.h, x.w);
  for (int o = 0; o < out; ++o) {
    const double* go = &grad_out.data[static_cast<std::size_t>(o) * grad_out.h * grad_out.w];
    double gb = 0.0;
    for (std::size_t j = 0; j < static_cast<std::size_t>(grad_out.h) * grad_out.w; ++j) gb += go[j];
    grads[bias + o] += gb;
    for (int i = 0; i < in; ++i) {
      for (int ky = 0; ky < kernel; ++ky) {
        for (int kx = 0; kx < kernel; ++kx) {
          const std::size_t widx = weight + ((static_cast<std::size_t>(o) * in + i) * kernel + ky) * kernel + kx;
          const double wv = params[widx];
          double gw = 0.0;
          for (int oy = 0; oy < grad_out.h; ++oy) {
            const int iy = oy * stride - pad + ky;
            if (iy < 0 || iy >= x.h) continue;
            const double* xrow = &x.data[(static_cast<std::size_t>(i) * x.h + iy) * x.w];
            double* gxrow = &gx.data[(static_cast<std::size_t>(i) * x.h + iy) * x.w];
            const double* grow = go + static_cast<std::size_t>(oy) * grad_out.w;
            for (int ox = 0; ox < grad_out.w; ++ox) {
              const int ix = ox * stride - pad + kx;
              if (ix < 0 || ix >= x.w) continue;
              gw += grow[ox] * xrow[ix];
              gxrow[ix] += wv * grow[ox];
            }
          }
          grads[widx] += gw;
        }
      }
    }
  }
  return gx;
}

ConvTranspose2d::ConvTranspose2d(ParamLayout& layout, int in_ch, int out_ch) : in(in_ch), out(out_ch) {
  weight = layout.allocate(static_cast<std::size_t>(in) * out * kernel * kernel);
  bias = layout.allocate(out);
}

void ConvTranspose2d::init(std::span<double> params, Rng& rng) const {
  const double bound = 1.0 / std::sqrt(static_cast<double>(out * kernel * kernel));
  init_uniform(params, weight, static_cast<std::size_t>(in) * out * kernel * kernel, bound, rng);
  init_uniform(params, bias, out, bound, rng);
}

Tensor ConvTranspose2d::forward(const Tensor& x, std::span<const double> params) const {
  check_channels(x.c, in);
  Tensor y(out, out_size(x.h), out_size(x.w));
  for (int o = 0; o < out; ++o) {
    double* yo = &y.data[static_cast<std::size_t>(o) * y.h * y.w];
    std::fill(yo, yo + static_cast<std::size_t>(y.h) * y.w, params[bias + o]);
  }
  for (int i = 0; i < in; ++i) {
    for (int o = 0; o < out; ++o) {
      for (int ky = 0; ky < kernel; ++ky) {
        for (int kx = 0; kx < kernel; ++kx) {
          const double wv = params[weight + ((static_cast<std::size_t>(i) * out + o) * kernel + ky) * kernel + kx];
          for (int iy = 0; iy < x.h; ++iy) {
            const int oy = iy * stride - pad + ky;
            if (oy < 0 || oy >= y.h) continue;
            for (int ix = 0; ix < x.w; ++ix) {
              const int ox = ix * stride - pad + kx;
              if (ox < 0 || ox >= y.w) continue;
              y.at(o, oy, ox) += wv * x.at(i, iy, ix);
            }
          }
        }
      }
    }
  }
  return y;
}

Tensor ConvTranspose2d::backward(const Tensor& x, const Tensor& grad_out, std::span<const double> params,
                                 std::span<double> grads) const {
  Tensor gx(x.c, x.h, x.w);
  for (int o = 0; o < out; ++o) {
    double gb = 0.0;
    for (int j = 0; j < grad_out.h * grad_out.w; ++j) gb += grad_out.data[static_cast<std::size_t>(o) * grad_out.h * grad_out.w + j];
    grads[bias + o] += gb;
  }
  for (int i = 0; i < in; ++i) {
    for (int o = 0; o < out; ++o) {
      for (int ky = 0; ky < kernel; ++ky) {
        for (int kx = 0; kx < kernel; ++kx) {
          const std::size_t widx = weight + ((static_cast<std::size_t>(i) * out + o) * kernel + ky) * kernel + kx;
          const double wv = params[widx];
          double gw = 0.0;
          for (int iy = 0; iy < x.h; ++iy) {
            const int oy = iy * stride - pad + ky;
            if (oy < 0 || oy >= grad_out.h) continue;
            for (int ix = 0; ix < x.w; ++ix) {
              const int ox = ix * stride - pad + kx;
              if (ox < 0 || ox >= grad_out.w) continue;
              const double g = grad_out.at(o, oy, ox);
              gw += g * x.at(i, iy, ix);
              gx.at(i, iy, ix) += wv * g;
            }
          }
          grads[widx] += gw;
        }
      }
    }
  }
  return gx;
}

Linear::Linear(ParamLayout& layout, int in_features, int out_features) : in(in_features), out(out_features) {
  weight = layout.allocate(static_cast<std::size_t>(in) * out);
  bias = layout.allocate(out);
}

void Linear::init(std::span<double> params, Rng& rng) const {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  init_uniform(params, weight, static_cast<std::size_t>(in) * out, bound, rng);
  init_uniform(params, bias, out, bound, rng);
}

std::vector<double> Linear::forward(std::span<const double> x, std::span<const double> params) const {
  if (static_cast<int>(x.size()) != in) throw Error(ErrorKind::ShapeMismatch, "linear input size");
  std::vector<double> y(out);
  for (int o = 0; o < out; ++o) {
    const double* w = &params[weight + static_cast<std::size_t>(o) * in];
    double acc = params[bias + o];
    for (int i = 0; i < in; ++i) acc += w[i] * x[i];
    y[o] = acc;
  }
  return y;
}

std::vector<double> Linear::backward(std::span<const double> x, std::span<const double> grad_out,
                                     std::span<const double> params, std::span<double> grads) const {
  std::vector<double> gx(in, 0.0);
  for (int o = 0; o < out; ++o) {
    const double g = grad_out[o];
    if (g == 0.0) continue;
    const double* w = &params[weight + static_cast<std::size_t>(o) * in];
    double* gw = &grads[weight + static_cast<std::size_t>(o) * in];
    for (int i = 0; i < in; ++i) {
      gw[i] += g * x[i];
      gx[i] += g * w[i];
    }
    grads[bias + o] += g;
  }
  return gx;
}

void relu_inplace(std::span<double> x) {
  for (double& v : x) v = v > 0.0 ? v : 0.0;
}

void relu_backward(std::span<const double> activated, std::span<double> grad) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(activated[i] > 0.0)) grad[i] = 0.0;
  }
}

Adam::Adam(std::size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

}  // namespace macroreg::nn
