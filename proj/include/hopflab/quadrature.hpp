#pragma once

// One-dimensional building blocks: Gauss-Legendre rules, barycentric
// polynomial differentiation and periodic Fourier differentiation.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace hopflab {

struct GaussRule {
  Eigen::VectorXd nodes;    // ascending, in (-1, 1)
  Eigen::VectorXd weights;  // positive, sum 2
};

/// Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
inline GaussRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  GaussRule rule{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.nodes(i) = -z;
    rule.nodes(n - 1 - i) = z;
    rule.weights(i) = w;
    rule.weights(n - 1 - i) = w;
  }
  if (n % 2 == 1) rule.nodes(n / 2) = 0.0;
  return rule;
}

inline Eigen::VectorXd barycentric_weights(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k != j) w(j) *= (x(j) - x(k));
    }
    w(j) = 1.0 / w(j);
  }
  // Rescale for range; the differentiation matrix only uses ratios.
  return w / w.cwiseAbs().maxCoeff();
}

/// Differentiation matrix of the interpolating polynomial through the nodes.
inline Eigen::MatrixXd polynomial_diff_matrix(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  const Eigen::VectorXd w = barycentric_weights(x);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double diag = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      D(i, j) = (w(j) / w(i)) / (x(i) - x(j));
      diag -= D(i, j);
    }
    D(i, i) = diag;  // negative-sum trick: exact on constants
  }
  return D;
}

/// Spectral derivative on n equispaced points of [0, 2pi) (n even). The
/// Nyquist mode is differentiated to zero.
inline Eigen::MatrixXd fourier_diff_matrix(int n) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("fourier_diff_matrix: n must be even and >= 2");
  const double h = 2.0 * std::numbers::pi / n;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (j == k) continue;
      const int m = j - k;
      const double sgn = (m % 2 == 0) ? 1.0 : -1.0;
      D(j, k) = 0.5 * sgn / std::tan(0.5 * m * h);
    }
  }
  return D;
}

}  // namespace hopflab
