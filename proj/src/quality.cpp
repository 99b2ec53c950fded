#include "hullsight/quality.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hullsight {

namespace {

void check_pair(const Image& a, const Image& b) {
  validate(a);
  validate(b);
  const Shape sa{1, a.channels, a.height, a.width}, sb{1, b.channels, b.height, b.width};
  if (sa != sb) throw ShapeError({}, sa, sb, "image metrics need identical extents");
  if (a.pixels.empty()) throw ValueError("image metrics need non-empty images");
}

}  // namespace

void LossWeights::validate() const {
  if (!(lambda >= 0 && lambda <= 1) || !(beta >= 0 && beta <= 1)) {
    throw ValueError("loss weights must lie in [0, 1]");
  }
}

double psnr(const Image& ref, const Image& test) {
  check_pair(ref, test);
  double sq = 0;
  for (std::size_t i = 0; i < ref.pixels.size(); ++i) {
    const double d = (double(ref.pixels[i]) - double(test.pixels[i])) / 255.0;
    sq += d * d;
  }
  return similarity::psnr_from_mse(sq / double(ref.pixels.size()));
}

double ssim(const Image& ref, const Image& test) {
  check_pair(ref, test);
  return similarity::ssim(to_tensor<double>(ref), to_tensor<double>(test));
}

double mean_abs_error(const Image& ref, const Image& test) {
  check_pair(ref, test);
  double sum = 0;
  for (std::size_t i = 0; i < ref.pixels.size(); ++i) sum += std::abs(double(ref.pixels[i]) - double(test.pixels[i]));
  return sum / 255.0 / double(ref.pixels.size());
}

MetricReport compare(const Image& ref, const Image& test) { return {psnr(ref, test), ssim(ref, test)}; }

double distance_d(const Image& ref, const Image& out) {
  return mean_abs_error(ref, out) + 10.0 * (1.0 - ssim(ref, out)) + 100.0 / std::max(psnr(ref, out), kPsnrFloorDb);
}

double joint_loss(double d_denoise, double d_sr, const LossWeights& w) {
  w.validate();
  return w.lambda * d_denoise + w.beta * d_sr;
}

LossWeights schedule_weights(int epoch) {
  if (epoch < 1) throw ValueError("epochs are numbered from 1, got " + std::to_string(epoch));
  const int tenths = std::max(5, 10 - epoch / 10);
  const double lambda = tenths / 10.0;
  return {lambda, 1.0 - lambda};
}

}  // namespace hullsight
