#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>

#include "hullsight/box_analytics.hpp"
#include "support/oracles.hpp"

using namespace hullsight;

TEST_CASE("diagonal lengths") {
  CHECK(diagonal({0, 0, 3, 4}) == 5.0);
  CHECK(diagonal({7, 7, 7, 7}) == 0.0);
  CHECK(diagonal({10, 10, 70, 10}) == 60.0);
  CHECK_THROWS_AS(diagonal({5, 0, 1, 1}), ValueError);
}

TEST_CASE("diagonal is translation invariant and scales linearly") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 100);
  for (int i = 0; i < 100; ++i) {
    const double x = u(rng), y = u(rng), w = u(rng), h = u(rng), dx = u(rng), dy = u(rng), s = 0.1 + u(rng) / 10;
    const BBox b{x, y, x + w, y + h};
    CHECK(diagonal({x + dx, y + dy, x + w + dx, y + h + dy}) == doctest::Approx(diagonal(b)));
    CHECK(diagonal({x * s, y * s, (x + w) * s, (y + h) * s}) == doctest::Approx(s * diagonal(b)));
  }
}

TEST_CASE("millimeter conversion") {
  CHECK(to_millimeters(5, {0.5}) == 2.5);
  CHECK(to_millimeters(0, {0.5}) == 0.0);
  CHECK(to_millimeters(120, {0.5}) == 60.0);
  CHECK_THROWS_AS(to_millimeters(1, {0.0}), ValueError);
  CHECK_THROWS_AS(to_millimeters(1, {-2.0}), ValueError);
}

TEST_CASE("quartiles by linear interpolation") {
  const std::vector<double> five{1, 2, 3, 4, 5};
  CHECK(quartiles(five).q1 == 2.0);
  CHECK(quartiles(five).q3 == 4.0);
  const std::vector<double> constant(6, 3.5);
  CHECK(quartiles(constant).q1 == 3.5);
  CHECK(quartiles(constant).q3 == 3.5);
  const std::vector<double> fixture{10, 11, 11, 12, 12, 12, 13, 300};
  CHECK(quartiles(fixture).q1 == 11.0);
  CHECK(quartiles(fixture).q3 == 12.25);
  CHECK_THROWS_AS(quartiles(std::vector<double>{1, 2, 3}), DataError);
  CHECK_THROWS_AS(quartiles(std::vector<double>{1, 2, 3, std::nan("")}), ValueError);
}

TEST_CASE("quantiles agree with the reference on random lists") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v(4 + rng() % 40);
    for (double& x : v) x = u(rng);
    for (double p : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) CHECK(quantile(v, p) == oracle::quantile(v, p));
  }
}

TEST_CASE("anomaly fixture flags only the long hull") {
  const std::vector<double> fixture{10, 11, 11, 12, 12, 12, 13, 300};
  const AnomalyResult r = flag_anomalies(fixture);
  CHECK(r.iqr == 1.25);
  CHECK(r.upper_bound == 14.125);
  CHECK(r.flagged == std::vector<std::size_t>{7});
}

TEST_CASE("constant diagonals flag nothing and small outliers are ignored") {
  CHECK(flag_anomalies(std::vector<double>(10, 5.0)).flagged.empty());
  std::vector<double> v(9, 1.0);
  v.push_back(0.01);
  CHECK(flag_anomalies(v).flagged.empty());
}

TEST_CASE("flagging is invariant to order and to uniform rescaling") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> n(60, 2);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> v(12);
    for (double& x : v) x = n(rng);
    v[rng() % v.size()] *= 1.5;
    const auto base = flag_anomalies(v).flagged;
    for (double s : {0.01, 0.5, 3.0, 1000.0}) {
      std::vector<double> scaled = v;
      for (double& x : scaled) x *= s;
      CHECK(flag_anomalies(scaled).flagged == base);
    }
    std::vector<std::size_t> perm(v.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> shuffled;
    for (std::size_t i : perm) shuffled.push_back(v[i]);
    std::vector<std::size_t> mapped;
    for (std::size_t i : flag_anomalies(shuffled).flagged) mapped.push_back(perm[i]);
    std::sort(mapped.begin(), mapped.end());
    CHECK(mapped == base);
  }
}

TEST_CASE("iqr factor is configurable") {
  const std::vector<double> v{10, 11, 11, 12, 12, 12, 13, 14};
  CHECK(flag_anomalies(v, 0.0).flagged == std::vector<std::size_t>{6, 7});
  CHECK(flag_anomalies(v, 1.5).flagged.empty());
  CHECK_THROWS_AS(flag_anomalies(v, -1.0), ValueError);
}
