#include <doctest.h>

#include <cmath>

#include "macroreg/nn.hpp"
#include "macroreg/synthetic.hpp"

using namespace macroreg;

namespace {

// Scalar test loss: sum of out * w with fixed pseudo-random weights.
double probe(const nn::Tensor& t) {
  double s = 0.0;
  for (std::size_t i = 0; i < t.data.size(); ++i) s += t.data[i] * std::sin(0.7 * static_cast<double>(i) + 0.3);
  return s;
}

nn::Tensor probe_grad(int c, int h, int w) {
  nn::Tensor g(c, h, w);
  for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] = std::sin(0.7 * static_cast<double>(i) + 0.3);
  return g;
}

template <class Layer>
void check_layer(const Layer& layer, std::vector<double>& params, const nn::Tensor& x) {
  const nn::Tensor y = layer.forward(x, params);
  std::vector<double> grads(params.size(), 0.0);
  const nn::Tensor gx = layer.backward(x, probe_grad(y.c, y.h, y.w), params, grads);
  const double h = 1e-6;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    const double up = probe(layer.forward(x, params));
    params[i] = keep - h;
    const double down = probe(layer.forward(x, params));
    params[i] = keep;
    CHECK(grads[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-6));
  }
  nn::Tensor xx = x;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    xx.data[i] = x.data[i] + h;
    const double up = probe(layer.forward(xx, params));
    xx.data[i] = x.data[i] - h;
    const double down = probe(layer.forward(xx, params));
    xx.data[i] = x.data[i];
    CHECK(gx.data[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-6));
  }
}

nn::Tensor random_tensor(int c, int h, int w, Rng& rng) {
  nn::Tensor t(c, h, w);
  for (double& v : t.data) v = rng.uniform(-1, 1);
  return t;
}

}  // namespace

TEST_CASE("conv2d shapes and gradients") {
  Rng rng(1);
  nn::ParamLayout layout;
  const nn::Conv2d conv(layout, 2, 3, 3, 2, 1);
  std::vector<double> params(layout.size());
  conv.init(params, rng);
  CHECK(conv.out_size(8) == 4);
  CHECK(conv.out_size(7) == 4);
  check_layer(conv, params, random_tensor(2, 7, 7, rng));
}

TEST_CASE("1x1 convolution is a per-cell linear map") {
  nn::ParamLayout layout;
  const nn::Conv2d conv(layout, 2, 1, 1, 1, 0);
  std::vector<double> params{2.0, -1.0, 0.5};  // w0, w1, bias
  nn::Tensor x(2, 1, 2);
  x.data = {1, 3, 4, 5};
  const nn::Tensor y = conv.forward(x, params);
  CHECK(y.data == std::vector<double>{2 * 1 - 4 + 0.5, 2 * 3 - 5 + 0.5});
}

TEST_CASE("transposed convolution doubles the side; gradients match") {
  Rng rng(2);
  nn::ParamLayout layout;
  const nn::ConvTranspose2d up(layout, 3, 2);
  std::vector<double> params(layout.size());
  up.init(params, rng);
  CHECK(up.out_size(7) == 14);
  CHECK(up.out_size(1) == 2);
  check_layer(up, params, random_tensor(3, 3, 3, rng));
}

TEST_CASE("linear forward and backward") {
  Rng rng(3);
  nn::ParamLayout layout;
  const nn::Linear fc(layout, 5, 3);
  std::vector<double> params(layout.size());
  fc.init(params, rng);
  std::vector<double> x{0.1, -0.4, 0.9, 0.3, -1.0};
  const std::vector<double> go{0.5, -1.5, 2.0};
  std::vector<double> grads(params.size(), 0.0);
  const auto gx = fc.backward(x, go, params, grads);
  const auto loss = [&](const std::vector<double>& p, const std::vector<double>& in) {
    const auto y = fc.forward(in, p);
    return go[0] * y[0] + go[1] * y[1] + go[2] * y[2];
  };
  const double h = 1e-6;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params;
    p[i] += h;
    const double up = loss(p, x);
    p[i] -= 2 * h;
    CHECK(grads[i] == doctest::Approx((up - loss(p, x)) / (2 * h)).epsilon(1e-6));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto in = x;
    in[i] += h;
    const double up = loss(params, in);
    in[i] -= 2 * h;
    CHECK(gx[i] == doctest::Approx((up - loss(params, in)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("relu and its gradient mask") {
  std::vector<double> v{-1.0, 0.0, 2.0};
  nn::relu_inplace(v);
  CHECK(v == std::vector<double>{0.0, 0.0, 2.0});
  std::vector<double> g{5.0, 5.0, 5.0};
  nn::relu_backward(v, g);
  CHECK(g == std::vector<double>{0.0, 0.0, 5.0});
}

TEST_CASE("adam first step moves each parameter by lr against the gradient sign") {
  nn::Adam adam(2, 0.1);
  std::vector<double> p{1.0, 1.0};
  const std::vector<double> g{3.0, -0.5};
  adam.step(p, g);
  CHECK(p[0] == doctest::Approx(0.9));
  CHECK(p[1] == doctest::Approx(1.1));
}
