// Auto-associative random neural network detector core.
//
// Hidden layers are random-neural-network clusters: each neuron receives a
// nonnegative excitatory rate v = W a + b from the previous layer and fires
// with probability
//
//     zeta(v) = v / (r + v_inh + v)        in [0, 1)
//
// so with r = 1, v_inh = 0 the activation is v / (1 + v). Hidden weights are
// drawn once from a seeded uniform [0, 1/fan_in]; the readout is fitted by
// ridge-regularized nonnegative least squares so every weight in the model
// stays >= 0. Inputs are min/max normalized against the training set and
// clamped to [0, 1] before entering the network; reconstructions are mapped
// back through the same normalization.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "floodbed/common.hpp"
#include "floodbed/features.hpp"

namespace floodbed {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Elementwise cluster activation.
template <typename Derived>
auto rnn_activation(const Eigen::ArrayBase<Derived>& excitation, typename Derived::Scalar firing_rate,
                    typename Derived::Scalar inhibition) {
  return excitation / (excitation + (firing_rate + inhibition));
}

/// Mean absolute component difference. Symmetric, zero on the diagonal,
/// bounded by 1 for inputs in the unit cube.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar score(const Eigen::MatrixBase<DerivedA>& x, const Eigen::MatrixBase<DerivedB>& xhat) {
  return (x - xhat).cwiseAbs().mean();
}

// Lawson-Hanson active set method for min ||A x - b|| subject to x >= 0.
// An entering column whose passive-set solution is not positive is set
// aside until the next successful step; this keeps nearly collinear
// designs from cycling.
template <typename Scalar>
VectorX<Scalar> nnls(const MatrixX<Scalar>& A, const VectorX<Scalar>& b, int max_iterations = 0) {
  using Index = Eigen::Index;
  const Index n = A.cols();
  if (A.rows() != b.size()) throw ContractViolation("nnls: dimension mismatch");
  if (max_iterations <= 0) max_iterations = static_cast<int>(30 * n + 30);

  const Scalar tol = Scalar(10) * std::numeric_limits<Scalar>::epsilon() *
                     A.cwiseAbs().colwise().sum().maxCoeff() * static_cast<Scalar>(std::max(A.rows(), n));

  VectorX<Scalar> x = VectorX<Scalar>::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  std::vector<bool> set_aside(static_cast<std::size_t>(n), false);
  auto P = [&](Index i) { return passive[static_cast<std::size_t>(i)]; };

  auto solve_passive = [&]() {
    std::vector<Index> cols;
    for (Index i = 0; i < n; ++i) {
      if (P(i)) cols.push_back(i);
    }
    MatrixX<Scalar> Ap(A.rows(), static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) Ap.col(static_cast<Index>(c)) = A.col(cols[c]);
    VectorX<Scalar> sp = Ap.colPivHouseholderQr().solve(b);
    VectorX<Scalar> s = VectorX<Scalar>::Zero(n);
    for (std::size_t c = 0; c < cols.size(); ++c) s(cols[c]) = sp(static_cast<Index>(c));
    return s;
  };

  int iterations = 0;
  while (iterations < max_iterations) {
    const VectorX<Scalar> w = A.transpose() * (b - A * x);
    Index entering = -1;
    Scalar best = tol;
    for (Index i = 0; i < n; ++i) {
      if (!P(i) && !set_aside[static_cast<std::size_t>(i)] && w(i) > best) {
        best = w(i);
        entering = i;
      }
    }
    if (entering < 0) break;
    passive[static_cast<std::size_t>(entering)] = true;

    VectorX<Scalar> s = solve_passive();
    if (!(s(entering) > 0)) {
      passive[static_cast<std::size_t>(entering)] = false;
      set_aside[static_cast<std::size_t>(entering)] = true;
      ++iterations;
      continue;
    }

    while (iterations++ < max_iterations) {
      bool feasible = true;
      Scalar alpha = 1;
      for (Index i = 0; i < n; ++i) {
        if (P(i) && s(i) <= 0) {
          feasible = false;
          alpha = std::min(alpha, x(i) / (x(i) - s(i)));
        }
      }
      if (feasible) {
        x = s;
        break;
      }
      x += alpha * (s - x);
      for (Index i = 0; i < n; ++i) {
        if (P(i) && x(i) <= tol) {
          passive[static_cast<std::size_t>(i)] = false;
          x(i) = 0;
        }
      }
      s = solve_passive();
    }
    std::fill(set_aside.begin(), set_aside.end(), false);
  }
  return x.cwiseMax(Scalar(0));
}

struct TrainOptions {
  std::vector<int> hidden{12, 12};
  double ridge = 1e-3;
  std::uint64_t seed = 0;
  double firing_rate = 1.0;
  double inhibition = 0.0;
};

template <typename Scalar>
struct BasicAadrnnModel {
  std::vector<int> layer_dims{3, 12, 12, 3};
  std::vector<MatrixX<Scalar>> weights;  // weights[l] is dims[l+1] x dims[l]
  std::vector<VectorX<Scalar>> biases;   // external excitation, one per layer after the input
  Metric<Scalar> feature_min = Metric<Scalar>::Zero();
  Metric<Scalar> feature_span = Metric<Scalar>::Ones();
  Scalar firing_rate = 1;
  Scalar inhibition = 0;
  std::uint64_t seed = 0;
  bool trained = false;
  Scalar training_residual = 0;
  std::vector<std::string> warnings;
};

using AadrnnModel = BasicAadrnnModel<double>;

template <typename Scalar>
Metric<Scalar> normalize(const BasicAadrnnModel<Scalar>& model, const Metric<Scalar>& x) {
  return ((x - model.feature_min).array() / model.feature_span.array()).cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
}

// Activations of the last hidden layer for a normalized input.
template <typename Scalar>
VectorX<Scalar> hidden_state(const BasicAadrnnModel<Scalar>& model, const Metric<Scalar>& z) {
  VectorX<Scalar> a = z;
  const std::size_t hidden_layers = model.layer_dims.size() - 2;
  for (std::size_t l = 0; l < hidden_layers; ++l) {
    VectorX<Scalar> v = model.weights[l] * a + model.biases[l];
    a = rnn_activation(v.array(), model.firing_rate, model.inhibition).matrix();
  }
  return a;
}

/// Reconstruction x̂ of a metric vector. Throws ContractViolation on an
/// untrained model.
template <typename Scalar>
Metric<Scalar> forward(const BasicAadrnnModel<Scalar>& model, const Metric<Scalar>& x) {
  if (!model.trained) throw ContractViolation("forward on an untrained model");
  VectorX<Scalar> h = hidden_state(model, normalize(model, x));
  Metric<Scalar> zhat = (model.weights.back() * h + model.biases.back()).cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
  Metric<Scalar> xhat = model.feature_min + zhat.cwiseProduct(model.feature_span);
  return xhat.cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
}

/// Fit an auto-associative model to the rows of `samples` (N x 3).
template <typename Scalar>
BasicAadrnnModel<Scalar> train(const Eigen::Matrix<Scalar, Eigen::Dynamic, 3>& samples, const TrainOptions& options) {
  using Index = Eigen::Index;
  if (samples.rows() == 0) throw ContractViolation("train on an empty sample set");
  if (options.hidden.empty()) throw ConfigError("ids.hidden", "needs at least one hidden layer");
  for (int h : options.hidden) {
    if (h < 1) throw ConfigError("ids.hidden", "layer widths must be >= 1");
  }
  if (!(options.ridge >= 0)) throw ConfigError("ids.ridge", "must be >= 0");

  BasicAadrnnModel<Scalar> model;
  model.layer_dims.assign({3});
  model.layer_dims.insert(model.layer_dims.end(), options.hidden.begin(), options.hidden.end());
  model.layer_dims.push_back(3);
  model.firing_rate = static_cast<Scalar>(options.firing_rate);
  model.inhibition = static_cast<Scalar>(options.inhibition);
  model.seed = options.seed;

  // Frozen normalization.
  model.feature_min = samples.colwise().minCoeff().transpose();
  Metric<Scalar> span = samples.colwise().maxCoeff().transpose() - model.feature_min;
  for (int f = 0; f < 3; ++f) {
    if (!(span(f) > Scalar(1e-12))) {
      span(f) = 1;
      model.warnings.push_back("feature x" + std::to_string(f + 1) + " has zero variance; span set to 1");
    }
  }
  model.feature_span = span;

  Rng rng(options.seed);
  for (std::size_t l = 0; l + 2 < model.layer_dims.size(); ++l) {
    const int fan_in = model.layer_dims[l];
    const int fan_out = model.layer_dims[l + 1];
    const double bound = 1.0 / fan_in;
    MatrixX<Scalar> W(fan_out, fan_in);
    VectorX<Scalar> b(fan_out);
    for (Index r = 0; r < W.rows(); ++r) {
      for (Index c = 0; c < W.cols(); ++c) W(r, c) = static_cast<Scalar>(rng.uniform(0.0, bound));
    }
    for (Index r = 0; r < b.size(); ++r) b(r) = static_cast<Scalar>(rng.uniform(0.0, bound));
    model.weights.push_back(std::move(W));
    model.biases.push_back(std::move(b));
  }

  // Readout: [H 1] beta = Z with ridge rows appended, beta >= 0.
  const Index n = samples.rows();
  const Index width = model.layer_dims[model.layer_dims.size() - 2];
  MatrixX<Scalar> design(n + width + 1, width + 1);
  design.setZero();
  MatrixX<Scalar> targets(n, 3);
  for (Index i = 0; i < n; ++i) {
    Metric<Scalar> z = normalize(model, Metric<Scalar>(samples.row(i).transpose()));
    design.row(i).head(width) = hidden_state(model, z).transpose();
    design(i, width) = 1;
    targets.row(i) = z.transpose();
  }
  const Scalar ridge = std::sqrt(static_cast<Scalar>(options.ridge));
  for (Index k = 0; k <= width; ++k) design(n + k, k) = ridge;

  MatrixX<Scalar> W_out(3, width);
  VectorX<Scalar> b_out(3);
  for (int f = 0; f < 3; ++f) {
    VectorX<Scalar> rhs = VectorX<Scalar>::Zero(n + width + 1);
    rhs.head(n) = targets.col(f);
    VectorX<Scalar> beta = nnls<Scalar>(design, rhs);
    W_out.row(f) = beta.head(width).transpose();
    b_out(f) = beta(width);
  }
  model.weights.push_back(std::move(W_out));
  model.biases.push_back(std::move(b_out));
  model.trained = true;

  Scalar sq = 0;
  for (Index i = 0; i < n; ++i) {
    Metric<Scalar> x = samples.row(i).transpose();
    sq += (forward(model, x) - x).squaredNorm();
  }
  model.training_residual = std::sqrt(sq / static_cast<Scalar>(3 * n));
  return model;
}

}  // namespace floodbed
