#pragma once

#include <string>

#include "hullsight/image.hpp"
#include "hullsight/ops.hpp"
#include "hullsight/similarity.hpp"

namespace hullsight {

// Lower clamp on PSNR inside the 100/PSNR term of the composite distance.
inline constexpr double kPsnrFloorDb = 0.1;

struct LossWeights {
  double lambda = 1.0;
  double beta = 0.0;

  void validate() const;
};

struct MetricReport {
  double psnr_db = 0;
  double ssim = 0;
};

// All image metrics normalize 8-bit values to [0, 1] first.
double psnr(const Image& ref, const Image& test);
double ssim(const Image& ref, const Image& test);
double mean_abs_error(const Image& ref, const Image& test);
MetricReport compare(const Image& ref, const Image& test);

// D = MAE + 10 (1 - SSIM) + 100 / max(PSNR, 0.1).
double distance_d(const Image& ref, const Image& out);

template <typename S>
S distance_d(const Tensor<S>& ref, const Tensor<S>& out) {
  const S db = similarity::psnr_from_mse(similarity::mean_squared_error(ref, out));
  return similarity::mean_abs_error(ref, out) + S(10) * (S(1) - similarity::ssim(ref, out)) +
         S(100) / std::max(db, S(kPsnrFloorDb));
}

// Same distance as a differentiable subgraph; node names get `prefix`.
template <typename S>
NodeRef distance_d(Graph<S>& g, const std::string& prefix, NodeRef ref, NodeRef out) {
  const NodeRef l1 = ops::mean_abs_error(g, prefix + ".l1", out, ref);
  const NodeRef structure = ops::affine(g, prefix + ".ssim_term", ops::ssim(g, prefix + ".ssim", out, ref), S(-10), S(10));
  const NodeRef fidelity =
      ops::floored_inverse(g, prefix + ".psnr_term", ops::psnr(g, prefix + ".psnr", out, ref), S(100), S(kPsnrFloorDb));
  return ops::add(g, prefix, ops::add(g, prefix + ".l1_ssim", l1, structure), fidelity);
}

double joint_loss(double d_denoise, double d_sr, const LossWeights& w);

// lambda = max(0.5, 1 - 0.1 * floor(epoch / 10)), beta = 1 - lambda.
LossWeights schedule_weights(int epoch);

}  // namespace hullsight
