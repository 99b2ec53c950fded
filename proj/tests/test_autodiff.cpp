#include "doctest.h"

#include "hullsight/graph.hpp"
#include "hullsight/ops.hpp"
#include "hullsight/sgd.hpp"
#include "support/random.hpp"

using namespace hullsight;

TEST_CASE("tensor layout is NCHW row-major") {
  TensorD t({2, 3, 4, 5});
  CHECK(t.size() == 120);
  CHECK(t.offset(1, 2, 3, 4) == 119);
  CHECK(t.offset(0, 1, 0, 0) == 20);
  t(1, 0, 2, 1) = 7;
  CHECK(t[60 + 10 + 1] == 7);
  CHECK(t.plane(1, 0)[11] == 7);
}

TEST_CASE("tensor construction validates sizes") {
  CHECK_THROWS_AS(TensorD({1, 1, 2, 2}, {1.0, 2.0, 3.0}), ValueError);
  CHECK_THROWS(TensorD({1, -1, 2, 2}));
  CHECK(TensorD::scalar(2.5).item() == 2.5);
  CHECK_THROWS_AS(TensorD({1, 1, 1, 2}).item(), ShapeError);
}

TEST_CASE("shape errors name the node and both shapes") {
  Graph<double> g;
  const NodeRef a = g.input("a", {1, 1, 2, 2});
  const NodeRef b = g.input("b", {1, 1, 2, 3});
  g.mark_output("y", ops::add(g, "sum_ab", a, b));
  try {
    g.forward({{"a", TensorD({1, 1, 2, 2})}, {"b", TensorD({1, 1, 2, 3})}});
    FAIL("expected a shape error");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(e.node() == "sum_ab");
    CHECK(msg.find("sum_ab") != std::string::npos);
    CHECK(msg.find("(1,1,2,2)") != std::string::npos);
    CHECK(msg.find("(1,1,2,3)") != std::string::npos);
  }
}

TEST_CASE("graph inputs are checked against their declared shapes") {
  Graph<double> g;
  g.mark_output("x", g.input("x", {1, 1, 2, 2}));
  CHECK_THROWS_AS(g.forward({{"x", TensorD({1, 1, 3, 2})}}), ShapeError);
  CHECK_THROWS_AS(g.forward({}), ValueError);
}

TEST_CASE("graph node names are unique and non-empty") {
  Graph<double> g;
  g.input("x", {1, 1, 1, 1});
  CHECK_THROWS_AS(g.input("x", {1, 1, 1, 1}), ValueError);
  CHECK_THROWS_AS(g.parameter("", TensorD::scalar(0)), ValueError);
}

TEST_CASE("backward before forward is a state error") {
  Graph<double> g;
  const NodeRef p = g.parameter("p", TensorD::scalar(2));
  g.mark_output("y", ops::square(g, "y", p));
  CHECK_THROWS_AS(g.backward("y", TensorD::scalar(1)), StateError);
  g.forward({});
  CHECK_THROWS_AS(g.backward("nope", TensorD::scalar(1)), ValueError);
  CHECK_THROWS_AS(g.backward("y", TensorD({1, 1, 1, 2})), ShapeError);
}

TEST_CASE("reverse mode accumulates over shared subexpressions") {
  // y = (a + b) * a  =>  dy/da = 2a + b, dy/db = a
  Graph<double> g;
  const NodeRef a = g.parameter("a", TensorD::scalar(3));
  const NodeRef b = g.parameter("b", TensorD::scalar(5));
  const NodeRef unused = g.parameter("c", TensorD::scalar(1));
  (void)unused;
  g.mark_output("y", ops::mul(g, "y", ops::add(g, "s", a, b), a));
  CHECK(g.forward({}).at("y").item() == 24);
  const auto grads = g.backward("y", TensorD::scalar(1));
  CHECK(grads.at("a").item() == 11);
  CHECK(grads.at("b").item() == 3);
  CHECK(grads.at("c").item() == 0);
}

TEST_CASE("parameters can be replaced only with the same shape") {
  Graph<double> g;
  g.parameter("w", TensorD({1, 1, 2, 2}));
  CHECK_THROWS_AS(g.set_parameter("w", TensorD({1, 1, 2, 3})), ShapeError);
  CHECK_THROWS_AS(g.set_parameter("v", TensorD({1, 1, 2, 2})), ValueError);
  g.set_parameter("w", TensorD::constant({1, 1, 2, 2}, 4));
  CHECK(g.parameter("w")[3] == 4);
}

TEST_CASE("sgd with momentum and weight decay follows its update rule") {
  ParameterList<double> params{{"w", TensorD({1, 1, 1, 2}, {1.0, -2.0})}};
  SgdState<double> state;
  const SgdOptions opt{0.1, 0.9, 0.01};
  const TensorMap<double> grads{{"w", TensorD({1, 1, 1, 2}, {0.5, 0.25})}};
  // Hand recurrence for the first element.
  double theta = 1.0, v = 0;
  for (int step = 0; step < 3; ++step) {
    sgd_step(params, grads, state, opt);
    v = 0.9 * v + (0.5 + 0.01 * theta);
    theta -= 0.1 * v;
    CHECK(params[0].second[0] == doctest::Approx(theta).epsilon(1e-15));
  }
}

TEST_CASE("sgd rejects non-finite gradients before touching any parameter") {
  ParameterList<double> params{{"a", TensorD::scalar(1)}, {"b", TensorD::scalar(2)}};
  SgdState<double> state;
  const TensorMap<double> grads{{"a", TensorD::scalar(1)}, {"b", TensorD::scalar(std::nan(""))}};
  CHECK_THROWS_AS(sgd_step(params, grads, state, SgdOptions{}), DataError);
  CHECK(params[0].second.item() == 1);
  CHECK(params[1].second.item() == 2);
  CHECK_THROWS_AS(sgd_step(params, {{"a", TensorD::scalar(1)}}, state, SgdOptions{}), ValueError);
  CHECK_THROWS_AS(SgdOptions({-1, 0.9, 0}).validate(), ValueError);
  CHECK_THROWS_AS(SgdOptions({0.1, 1.0, 0}).validate(), ValueError);
}
