#pragma once

// Shared, lazily built grids, collocation operators and spectral bases.

#include <map>
#include <memory>
#include <random>
#include <utility>

#include "hopflab/hopflab.hpp"

namespace hopflab::testing {

struct Setup {
  GridSpec g;
  Collocation D;
  explicit Setup(int n) : g(build_grid(n, n)), D(g) {}
};

inline const Setup& setup(int n) {
  static std::map<int, std::unique_ptr<Setup>> cache;
  auto& p = cache[n];
  if (!p) p = std::make_unique<Setup>(n);
  return *p;
}

inline const SpectralBases& bases(int n, int K) {
  static std::map<std::pair<int, int>, std::unique_ptr<SpectralBases>> cache;
  auto& p = cache[{n, K}];
  if (!p) p = std::make_unique<SpectralBases>(setup(n).g, K);
  return *p;
}

/// Max nodal |a - b| over the three coefficients.
template <int R>
double max_diff(const FormField<R>& a, const FormField<R>& b) {
  return pointwise_norm(a - b).maxCoeff();
}

inline HopfPoint random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ut(0.01, kPi / 2 - 0.01), ua(0.0, 2 * kPi);
  return {ut(rng), ua(rng), ua(rng)};
}

}  // namespace hopflab::testing

namespace hopflab::testing {

/// Orthonormal frame rebuilt from coordinate tangents by central differences
/// (independent of frame_at): tau1 = d1 + d2, tau2 = dt, tau3 = cot d1 - tan d2.
inline std::array<Vec4, 3> oracle_frame(const HopfPoint& p, double h = 1e-5) {
  auto at = [&](int i, double s) {
    HopfPoint q = p;
    (i == 0 ? q.t : i == 1 ? q.phi1 : q.phi2) += s;
    return to_ambient(q);
  };
  std::array<Vec4, 3> d;
  for (int i = 0; i < 3; ++i) d[i] = (at(i, h) - at(i, -h)) / (2 * h);
  const double c = std::cos(p.t) / std::sin(p.t);
  return {d[1] + d[2], d[0], c * d[1] - d[2] / c};
}

/// Frame coefficients (b1, b2, b3) = (A(tau2, tau3), A(tau3, tau1), A(tau1, tau2)).
inline Eigen::Vector3d frame_eval(const Eigen::Matrix4d& A, const std::array<Vec4, 3>& f) {
  return {f[1].dot(A * f[2]), f[2].dot(A * f[0]), f[0].dot(A * f[1])};
}

/// Restriction of the polynomial 1-form sum_m c_m(x) dx^m given by a callable.
template <class F>
OneFormField ambient_one_form(const GridSpec& g, F&& f) {
  return restrict_one_form(g, std::forward<F>(f));
}

}  // namespace hopflab::testing
