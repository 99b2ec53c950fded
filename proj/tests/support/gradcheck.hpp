#pragma once

// Central finite-difference gradient checks for graphs in double precision.
//
// The checked scalar is sum(R * f(...)) with a fixed random R, so every
// output element carries a distinct weight.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "hullsight/graph.hpp"
#include "hullsight/ops.hpp"
#include "random.hpp"

namespace testing {

using hullsight::Graph;
using hullsight::NodeRef;
using hullsight::TensorD;

inline constexpr double kFiniteDifferenceStep = 1e-6;
inline constexpr double kPrimitiveTolerance = 1e-4;
inline constexpr double kEndToEndTolerance = 1e-3;

struct GradCheck {
  double max_rel_error = 0;
  std::string worst;  // parameter with the largest error
};

// ||a - b|| / max(||a||, ||b||); 0 when both gradients vanish.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale < 1e-12 ? 0.0 : std::sqrt(diff) / scale;
}

// `build` registers parameters, adds nodes and returns the node to check;
// every parameter is differentiated. Graph inputs (if any) come from `feeds`.
// When `max_coords` is positive, at most that many random coordinates per
// parameter are probed.
using Builder = std::function<NodeRef(Graph<double>&)>;

inline GradCheck check_gradients(const Builder& build, std::uint64_t seed,
                                 const hullsight::TensorMap<double>& feeds = {}, int max_coords = 0) {
  Graph<double> g;
  const NodeRef out = build(g);
  const hullsight::ParameterList<double> params = g.parameters();
  // The output shape is only known after a forward pass.
  g.mark_output("probe", out);
  const hullsight::Shape out_shape = g.forward(feeds).at("probe").shape();
  const NodeRef weights = g.constant("gradcheck.weights", random_tensor(out_shape, seed ^ 0x9e3779b97f4a7c15ULL));
  const NodeRef loss = hullsight::ops::sum(g, "gradcheck.loss", hullsight::ops::mul(g, "gradcheck.weighted", out, weights));
  g.mark_output("loss", loss);

  g.forward(feeds);
  const auto analytic = g.backward("loss", TensorD::scalar(1.0));

  std::mt19937_64 rng(seed);
  GradCheck result;
  for (const auto& [name, value] : params) {
    std::vector<hullsight::Index> coords(static_cast<std::size_t>(value.size()));
    std::iota(coords.begin(), coords.end(), hullsight::Index{0});
    if (max_coords > 0 && coords.size() > static_cast<std::size_t>(max_coords)) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(static_cast<std::size_t>(max_coords));
    }
    std::vector<double> a, numeric;
    TensorD probe = value;
    for (hullsight::Index i : coords) {
      const double x0 = probe[i];
      probe[i] = x0 + kFiniteDifferenceStep;
      g.set_parameter(name, probe);
      const double up = g.forward(feeds).at("loss").item();
      probe[i] = x0 - kFiniteDifferenceStep;
      g.set_parameter(name, probe);
      const double down = g.forward(feeds).at("loss").item();
      probe[i] = x0;
      numeric.push_back((up - down) / (2 * kFiniteDifferenceStep));
      a.push_back(analytic.at(name)[i]);
    }
    g.set_parameter(name, value);
    const double err = relative_error(a, numeric);
    if (err >= result.max_rel_error) {
      result.max_rel_error = err;
      result.worst = name;
    }
  }
  return result;
}

}  // namespace testing
