#include "doctest.h"

#include "hullsight/nn.hpp"
#include "support/gradient_suite.hpp"
#include "support/oracles.hpp"
#include "support/random.hpp"

using namespace hullsight;
using testing::conv_spec;
using testing::random_tensor;

namespace {

double max_abs_diff(const TensorD& a, const TensorD& b) {
  REQUIRE(a.shape() == b.shape());
  return (a.array() - b.array()).abs().maxCoeff();
}

}  // namespace

TEST_CASE("conv2d agrees with the direct six-loop oracle") {
  struct Case {
    Index in, out, k, stride, pad, h, w;
  };
  for (const Case c : {Case{3, 4, 3, 1, 1, 7, 6}, Case{2, 5, 3, 2, 0, 9, 8}, Case{4, 2, 1, 1, 0, 5, 5},
                       Case{1, 3, 5, 2, 2, 11, 7}, Case{2, 2, 3, 3, 1, 10, 10}}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto spec = conv_spec(c.in, c.out, c.k, c.stride, c.pad);
      const TensorD x = random_tensor({2, c.in, c.h, c.w}, seed);
      const TensorD w = random_tensor(nn::weight_shape(spec), seed + 100);
      const TensorD b = random_tensor(nn::bias_shape(c.out), seed + 200);
      CHECK(max_abs_diff(nn::conv2d(x, w, &b, spec), oracle::conv2d(x, w, &b, c.stride, c.pad)) < 1e-12);
      CHECK(max_abs_diff(nn::conv2d<double>(x, w, nullptr, spec), oracle::conv2d(x, w, nullptr, c.stride, c.pad)) <
            1e-12);
    }
  }
}

TEST_CASE("conv2d defaults to same padding for odd kernels") {
  const auto spec = conv_spec(1, 1, 3);
  CHECK(nn::conv2d<double>(TensorD({1, 1, 5, 4}), TensorD(nn::weight_shape(spec)), nullptr, spec).shape() ==
        Shape{1, 1, 5, 4});
}

TEST_CASE("conv2d rejects mismatched shapes") {
  const auto spec = conv_spec(3, 2, 3);
  const TensorD w(nn::weight_shape(spec));
  CHECK_THROWS_AS(nn::conv2d<double>(TensorD({1, 2, 5, 5}), w, nullptr, spec), ShapeError);
  CHECK_THROWS_AS(nn::conv2d<double>(TensorD({1, 3, 5, 5}), TensorD({2, 3, 1, 1}), nullptr, spec), ShapeError);
  const TensorD bad_bias({1, 3, 1, 1});
  CHECK_THROWS_AS(nn::conv2d<double>(TensorD({1, 3, 5, 5}), w, &bad_bias, spec), ShapeError);
  const auto valid = conv_spec(1, 1, 5, 1, 0);
  CHECK_THROWS_AS(nn::conv2d<double>(TensorD({1, 1, 3, 3}), TensorD(nn::weight_shape(valid)), nullptr, valid),
                  ShapeError);
}

TEST_CASE("depthwise conv agrees with the per-channel oracle") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const Index stride = seed % 2 ? 1 : 2;
    const auto spec = conv_spec(3, 3, 3, stride, 1);
    const TensorD x = random_tensor({2, 3, 8, 7}, seed);
    const TensorD w = random_tensor(nn::depthwise_weight_shape(spec), seed + 50);
    const TensorD b = random_tensor(nn::bias_shape(3), seed + 60);
    CHECK(max_abs_diff(nn::depthwise_conv2d(x, w, &b, spec), oracle::depthwise_conv2d(x, w, &b, stride, 1)) < 1e-12);
  }
  CHECK_THROWS_AS(nn::depthwise_conv2d<double>(TensorD({1, 2, 5, 5}), TensorD({3, 1, 3, 3}), nullptr,
                                               conv_spec(2, 3, 3)),
                  ValueError);
}

TEST_CASE("deformable conv agrees with the bilinear oracle") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto spec = conv_spec(2, 3, 3, seed % 3 == 0 ? 2 : 1, 1);
    const Shape xs{2, 2, 7, 6};
    const TensorD x = random_tensor(xs, seed);
    const TensorD w = random_tensor(nn::weight_shape(spec), seed + 10);
    const TensorD b = random_tensor(nn::bias_shape(3), seed + 20);
    const TensorD off = random_tensor(nn::deform_offset_shape(xs, spec), seed + 30, -3, 3);
    CHECK(max_abs_diff(nn::deform_conv2d(x, w, off, &b, spec),
                       oracle::deform_conv2d(x, w, off, &b, spec.stride, 1)) < 1e-12);
  }
}

TEST_CASE("deformable conv with zero offsets is a plain conv") {
  const auto spec = conv_spec(3, 4, 3);
  const Shape xs{1, 3, 6, 6};
  const TensorD x = random_tensor(xs, 3);
  const TensorD w = random_tensor(nn::weight_shape(spec), 4);
  const TensorD zero(nn::deform_offset_shape(xs, spec));
  CHECK(max_abs_diff(nn::deform_conv2d<double>(x, w, zero, nullptr, spec), nn::conv2d<double>(x, w, nullptr, spec)) <
        1e-12);
}

TEST_CASE("deformable conv reads zero far outside the image and integer shifts move samples") {
  const auto spec = conv_spec(1, 1, 1, 1, 0);
  const Shape xs{1, 1, 4, 4};
  TensorD x = random_tensor(xs, 9);
  TensorD w = TensorD::constant(nn::weight_shape(spec), 1.0);
  TensorD off(nn::deform_offset_shape(xs, spec));
  off.array() = 10.0;
  CHECK(nn::deform_conv2d<double>(x, w, off, nullptr, spec).array().abs().maxCoeff() == 0.0);
  off.array() = 0.0;
  for (Index i = 0; i < 16; ++i) off[16 + i] = 1.0;  // dx = +1
  const TensorD y = nn::deform_conv2d<double>(x, w, off, nullptr, spec);
  for (Index r = 0; r < 4; ++r) {
    for (Index c = 0; c < 3; ++c) CHECK(y(0, 0, r, c) == x(0, 0, r, c + 1));
    CHECK(y(0, 0, r, 3) == 0.0);
  }
}

TEST_CASE("deformable conv rejects wrongly shaped offsets") {
  const auto spec = conv_spec(1, 1, 3);
  CHECK_THROWS_AS(nn::deform_conv2d<double>(TensorD({1, 1, 5, 5}), TensorD(nn::weight_shape(spec)),
                                            TensorD({1, 9, 5, 5}), nullptr, spec),
                  ShapeError);
}

TEST_CASE("pixel shuffle follows the index law and unshuffle inverts it") {
  const TensorD x = random_tensor({2, 8, 3, 5}, 5);
  const TensorD y = nn::pixel_shuffle(x, 2);
  REQUIRE(y.shape() == Shape{2, 2, 6, 10});
  for (Index n = 0; n < 2; ++n)
    for (Index c = 0; c < 2; ++c)
      for (Index h = 0; h < 3; ++h)
        for (Index w = 0; w < 5; ++w)
          for (Index dy = 0; dy < 2; ++dy)
            for (Index dx = 0; dx < 2; ++dx) CHECK(y(n, c, h * 2 + dy, w * 2 + dx) == x(n, c * 4 + dy * 2 + dx, h, w));
  CHECK(nn::pixel_unshuffle(y, 2) == x);
  const TensorD z = random_tensor({1, 1, 6, 9}, 6);
  CHECK(nn::pixel_shuffle(nn::pixel_unshuffle(z, 3), 3) == z);
}

TEST_CASE("pixel shuffle rejects incompatible shapes") {
  CHECK_THROWS_AS(nn::pixel_shuffle(TensorD({1, 6, 2, 2}), 2), ShapeError);
  CHECK_THROWS_AS(nn::pixel_unshuffle(TensorD({1, 1, 5, 4}), 2), ShapeError);
  CHECK_THROWS_AS(nn::pixel_shuffle(TensorD({1, 4, 2, 2}), 0), ValueError);
}

TEST_CASE("concat stacks channels and its backward splits them") {
  const TensorD a = random_tensor({2, 1, 3, 3}, 1), b = random_tensor({2, 2, 3, 3}, 2);
  const TensorD y = nn::concat<double>({&a, &b});
  REQUIRE(y.shape() == Shape{2, 3, 3, 3});
  CHECK(y(1, 0, 2, 1) == a(1, 0, 2, 1));
  CHECK(y(1, 2, 0, 1) == b(1, 1, 0, 1));
  const auto parts = nn::concat_backward<double>({a.shape(), b.shape()}, y);
  CHECK(parts[0] == a);
  CHECK(parts[1] == b);
  const TensorD tall({2, 1, 4, 3});
  CHECK_THROWS_AS(nn::concat<double>({&a, &tall}), ShapeError);
}

TEST_CASE("relu and its gradient mask") {
  const TensorD x({1, 1, 1, 4}, {-1.0, 0.0, 0.5, 2.0});
  CHECK(nn::relu(x) == TensorD({1, 1, 1, 4}, {0.0, 0.0, 0.5, 2.0}));
  CHECK(nn::relu_backward(x, TensorD::constant(x.shape(), 3.0)) == TensorD({1, 1, 1, 4}, {0.0, 0.0, 3.0, 3.0}));
}

TEST_CASE("float and double conv agree to single precision") {
  const auto spec = conv_spec(3, 2, 3);
  const TensorD x = random_tensor({1, 3, 6, 6}, 11), w = random_tensor(nn::weight_shape(spec), 12);
  const TensorF yf = nn::conv2d<float>(x.cast<float>(), w.cast<float>(), nullptr, spec);
  CHECK(max_abs_diff(yf.cast<double>(), nn::conv2d<double>(x, w, nullptr, spec)) < 1e-5);
}
