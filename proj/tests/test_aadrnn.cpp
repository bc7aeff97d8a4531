#include "doctest.h"
#include "floodbed/aadrnn.hpp"
#include "floodbed/ids.hpp"
#include "oracles.hpp"

using namespace floodbed;

namespace {

Eigen::Matrix<double, Eigen::Dynamic, 3> benign_like(int n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::Matrix<double, Eigen::Dynamic, 3> s(n, 3);
  for (int i = 0; i < n; ++i) {
    s(i, 0) = 0.016;
    s(i, 1) = 0.5 + rng.uniform(-0.01, 0.01);
    s(i, 2) = 0.01 + (rng.bernoulli(0.2) ? 0.005 : 0.0);
  }
  return s;
}

}  // namespace

TEST_CASE("activation examples") {
  Eigen::Array3d v(0.0, 1.0, 3.0);
  Eigen::Array3d a = rnn_activation(v, 1.0, 0.0);
  CHECK(a(0) == 0.0);
  CHECK(a(1) == doctest::Approx(0.5));
  CHECK(a(2) == doctest::Approx(0.75));
  Eigen::Array3d b = rnn_activation(v, 1.0, 1.0);
  CHECK(b(1) == doctest::Approx(1.0 / 3));
}

TEST_CASE("score") {
  Eigen::Vector3d x(0.2, 0.5, 0.9), y(0.2, 0.2, 0.3);
  CHECK(score(x, x) == 0.0);
  CHECK(score(x, y) == doctest::Approx((0.3 + 0.6) / 3));
  CHECK(score(x, y) == score(y, x));
}

TEST_CASE("nnls agrees with exhaustive search") {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = 4 + static_cast<int>(rng.uniform() * 8), n = 1 + static_cast<int>(rng.uniform() * 5);
    Eigen::MatrixXd A(m, n);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
      b(i) = rng.uniform(-1, 1);
      for (int j = 0; j < n; ++j) A(i, j) = rng.uniform(-1, 1);
    }
    Eigen::VectorXd got = nnls<double>(A, b);
    Eigen::VectorXd want = oracle::nnls_bruteforce(A, b);
    CHECK((got.array() >= 0).all());
    CHECK((A * got - b).norm() == doctest::Approx((A * want - b).norm()).epsilon(1e-8));
  }
}

TEST_CASE("nnls recovers a nonnegative solution exactly") {
  Eigen::MatrixXd A(3, 2);
  A << 1, 0, 0, 1, 1, 1;
  Eigen::VectorXd x(2);
  x << 0.25, 2.0;
  Eigen::VectorXd got = nnls<double>(A, A * x);
  CHECK(got(0) == doctest::Approx(0.25));
  CHECK(got(1) == doctest::Approx(2.0));
  CHECK_THROWS_AS(nnls<double>(A, Eigen::VectorXd::Zero(2)), ContractViolation);
}

TEST_CASE("trained model: shapes, nonnegative weights, small benign residual") {
  TrainOptions opt;
  opt.seed = 5;
  auto model = train<double>(benign_like(500, 1), opt);
  CHECK(model.trained);
  CHECK(model.layer_dims == std::vector<int>{3, 12, 12, 3});
  REQUIRE(model.weights.size() == 3);
  CHECK(model.weights[0].rows() == 12);
  CHECK(model.weights[0].cols() == 3);
  CHECK(model.weights[2].rows() == 3);
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    CHECK(model.weights[l].minCoeff() >= 0.0);
    CHECK(model.biases[l].minCoeff() >= 0.0);
  }
  // x1 is constant in the training set.
  REQUIRE(model.warnings.size() == 1);
  CHECK(model.training_residual < 0.01);

  MetricVector benign(0.016, 0.5, 0.01), flood(0.688, 0.999, 1.0);
  CHECK(score(benign, forward(model, benign)) < 0.05);
  CHECK(score(flood, forward(model, flood)) > 0.3);
}

TEST_CASE("training is deterministic in the seed") {
  TrainOptions opt;
  opt.seed = 8;
  auto a = train<double>(benign_like(100, 2), opt);
  auto b = train<double>(benign_like(100, 2), opt);
  for (std::size_t l = 0; l < a.weights.size(); ++l) CHECK(a.weights[l] == b.weights[l]);
  opt.seed = 9;
  auto c = train<double>(benign_like(100, 2), opt);
  CHECK(a.weights[0] != c.weights[0]);
}

TEST_CASE("float instantiation") {
  TrainOptions opt;
  opt.hidden = {6};
  Eigen::Matrix<float, Eigen::Dynamic, 3> s = benign_like(60, 3).cast<float>();
  auto model = train<float>(s, opt);
  Metric<float> x(0.016f, 0.5f, 0.01f);
  Metric<float> y = forward(model, x);
  CHECK(score(x, y) < 0.05f);
}

TEST_CASE("contract and config errors") {
  AadrnnModel untrained;
  CHECK_THROWS_AS(forward(untrained, MetricVector::Zero().eval()), ContractViolation);
  TrainOptions opt;
  opt.hidden = {};
  CHECK_THROWS_AS(train<double>(benign_like(10, 1), opt), ConfigError);
  opt.hidden = {0};
  CHECK_THROWS_AS(train<double>(benign_like(10, 1), opt), ConfigError);
  CHECK_THROWS_AS(train<double>(Eigen::Matrix<double, Eigen::Dynamic, 3>(0, 3), TrainOptions{}), ContractViolation);
}

TEST_CASE("model JSON round trip") {
  TrainOptions opt;
  opt.seed = 21;
  auto model = train<double>(benign_like(80, 4), opt);
  auto back = load_model(dump_model(model));
  REQUIRE(back.weights.size() == model.weights.size());
  MetricVector x(0.3, 0.7, 0.2);
  CHECK((forward(back, x) - forward(model, x)).norm() < 1e-12);
  CHECK(back.seed == 21);
  CHECK_THROWS(load_model("{\"format\":\"something-else\"}"));
}

TEST_CASE("steady telemetry is reconstructed almost exactly") {
  // Metric stream of two interleaved devices: one start-up row, then a
  // constant steady state. Checked for one and two hidden layers.
  MetricExtractor ex;
  Eigen::Matrix<double, Eigen::Dynamic, 3> s(200, 3);
  for (int i = 0; i < 200; ++i) s.row(i) = ex.push({24, SimTime{500ms} * i}).transpose();
  for (auto hidden : {std::vector<int>{12, 12}, std::vector<int>{8}}) {
    TrainOptions opt;
    opt.hidden = hidden;
    opt.seed = 5;
    auto model = train<double>(s, opt);
    MetricVector steady = s.row(199).transpose();
    CHECK(score(steady, forward(model, steady)) < 1e-3);
    // Dominated by the start-up row, which no nonnegative readout can fit.
    CHECK(model.training_residual < 0.02);
  }
}
