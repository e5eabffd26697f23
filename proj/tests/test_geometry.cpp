#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace hopflab;
using namespace hopflab::testing;

namespace {

// Coordinate tangent vectors of (t, phi1, phi2) -> R^4 by central differences.
std::array<Vec4, 3> coordinate_tangents(const HopfPoint& p, double h = 1e-5) {
  auto shifted = [&](int i, double s) {
    HopfPoint q = p;
    (i == 0 ? q.t : i == 1 ? q.phi1 : q.phi2) += s;
    return to_ambient(q);
  };
  std::array<Vec4, 3> out;
  for (int i = 0; i < 3; ++i) out[i] = (shifted(i, h) - shifted(i, -h)) / (2 * h);
  return out;
}

}  // namespace

TEST(Geometry, ToAmbientExamples) {
  const double r = std::sqrt(2.0) / 2;
  EXPECT_LT((to_ambient({kPi / 4, 0, 0}) - Vec4(r, 0, r, 0)).norm(), 1e-15);
  EXPECT_LT((to_ambient({kPi / 3, kPi / 2, 0}) - Vec4(0, std::sqrt(3.0) / 2, 0.5, 0)).norm(), 1e-15);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_NEAR(to_ambient(random_point(rng)).norm(), 1.0, 1e-15);
}

TEST(Geometry, HopfPointRejectsBoundary) {
  EXPECT_THROW((HopfPoint{0.0, 0, 0}.validate()), std::domain_error);
  EXPECT_THROW((HopfPoint{kPi / 2, 0, 0}.validate()), std::domain_error);
  EXPECT_NO_THROW((HopfPoint{0.3, 1, 2}.validate()));
}

TEST(Geometry, FrameMatchesMetricOracle) {
  // Oracle: the frame expressed through coordinate vectors, which carry the
  // metric dt^2 + sin^2 t dphi1^2 + cos^2 t dphi2^2.
  std::mt19937_64 rng(2);
  for (int n = 0; n < 100; ++n) {
    const HopfPoint p = random_point(rng);
    const auto [dt, d1, d2] = coordinate_tangents(p);
    const double st = std::sin(p.t), ct = std::cos(p.t);
    EXPECT_NEAR(d1.squaredNorm(), st * st, 1e-9);
    EXPECT_NEAR(d2.squaredNorm(), ct * ct, 1e-9);
    EXPECT_NEAR(dt.dot(d1), 0.0, 1e-9);
    const Frame f = frame_at(p);
    EXPECT_LT((f.tau1 - (d1 + d2)).norm(), 1e-9);
    EXPECT_LT((f.tau2 - dt).norm(), 1e-9);
    EXPECT_LT((f.tau3 - (ct / st * d1 - st / ct * d2)).norm(), 1e-9);
    Eigen::Matrix<double, 4, 4> M;
    for (int i = 0; i < 3; ++i) M.col(i) = f[i];
    M.col(3) = to_ambient(p);
    EXPECT_LT((M.transpose() * M - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Geometry, FrameOrientation) {
  // e^1 ^ e^2 ^ e^3 = +vol: det[x, tau1, tau2, tau3] has a fixed sign, and the
  // orientation convention is the one for which theta ^ d theta = +2 vol.
  std::mt19937_64 rng(3);
  const HopfPoint p0 = random_point(rng);
  Eigen::Matrix4d M0;
  const Frame f0 = frame_at(p0);
  M0 << to_ambient(p0), f0.tau1, f0.tau2, f0.tau3;
  const double s = M0.determinant();
  EXPECT_NEAR(std::abs(s), 1.0, 1e-12);
  for (int n = 0; n < 50; ++n) {
    const HopfPoint p = random_point(rng);
    const Frame f = frame_at(p);
    Eigen::Matrix4d M;
    M << to_ambient(p), f.tau1, f.tau2, f.tau3;
    EXPECT_NEAR(M.determinant(), s, 1e-12);
  }
}

TEST(Geometry, Tau3AtQuarterPi) {
  const HopfPoint p{kPi / 4, 0.7, -1.3};
  const auto [dt, d1, d2] = coordinate_tangents(p);
  EXPECT_LT((frame_at(p).tau3 - (d1 - d2)).norm(), 1e-9);
}

TEST(Geometry, BuildGridPreconditions) {
  EXPECT_THROW(build_grid(1, 4), std::invalid_argument);
  EXPECT_THROW(build_grid(4, 2), std::invalid_argument);
  EXPECT_NO_THROW(build_grid(2, 4));
}

TEST(Geometry, GridNodesAndWeights) {
  const GridSpec& g = setup(16).g;
  ASSERT_EQ(g.size(), 16u * 16u * 16u);
  EXPECT_GT(g.weights().minCoeff(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const HopfPoint& p = g.nodes()[k];
    ASSERT_GT(p.t, 0.0);
    ASSERT_LT(p.t, kPi / 2);
    ASSERT_NEAR(g.points()[k].norm(), 1.0, 1e-12);
    const Frame& f = g.frames()[k];
    for (int i = 0; i < 3; ++i) {
      ASSERT_NEAR(f[i].dot(g.points()[k]), 0.0, 1e-12);
      for (int j = 0; j < 3; ++j) ASSERT_NEAR(f[i].dot(f[j]), i == j ? 1.0 : 0.0, 1e-12);
    }
  }
}

TEST(Geometry, QuadratureConstants) {
  const GridSpec& g = setup(16).g;
  // oracle: vol = (2 pi)^2 * int_0^{pi/2} sin t cos t dt = 4 pi^2 / 2
  const double vol = 4 * kPi * kPi * 0.5;
  EXPECT_NEAR(integrate_scalar(ScalarField::Ones(static_cast<Eigen::Index>(g.size())), g), vol, 1e-12);
  EXPECT_EQ(integrate_scalar(ScalarField::Zero(static_cast<Eigen::Index>(g.size())), g), 0.0);
  for (int i = 0; i < 4; ++i) {
    ScalarField f(static_cast<Eigen::Index>(g.size()));
    for (std::size_t k = 0; k < g.size(); ++k) f(static_cast<Eigen::Index>(k)) = g.points()[k](i) * g.points()[k](i);
    EXPECT_NEAR(integrate_scalar(f, g), kVolS3 / 4, 1e-10);
  }
  EXPECT_THROW(integrate_scalar(ScalarField::Ones(3), g), std::invalid_argument);
}

TEST(Geometry, PolynomialMomentsExact) {
  // oracle: int_{S^3} x1^4 = 2 pi^2 * 3 / (4 * 6) = pi^2 / 4 and
  // int x1^2 x3^2 = 2 pi^2 / 24 (moments of the uniform measure on S^3).
  const GridSpec& g = setup(16).g;
  ScalarField a(static_cast<Eigen::Index>(g.size())), b(a.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec4& x = g.points()[k];
    a(static_cast<Eigen::Index>(k)) = std::pow(x(0), 4);
    b(static_cast<Eigen::Index>(k)) = x(0) * x(0) * x(2) * x(2);
  }
  EXPECT_NEAR(integrate_scalar(a, g), kPi * kPi / 4, 1e-12);
  EXPECT_NEAR(integrate_scalar(b, g), kVolS3 / 24, 1e-12);
}

TEST(Geometry, AngularTrigExactness) {
  // Trigonometric polynomials of degree < n_ang integrate exactly.
  const GridSpec& g = setup(16).g;
  for (int m = 1; m < 16; ++m) {
    ScalarField f(static_cast<Eigen::Index>(g.size()));
    for (std::size_t k = 0; k < g.size(); ++k) {
      const HopfPoint& p = g.nodes()[k];
      f(static_cast<Eigen::Index>(k)) = std::cos(m * p.phi1) + std::sin(m * p.phi2) + std::cos(m * (p.phi1 - p.phi2));
    }
    EXPECT_NEAR(integrate_scalar(f, g), 0.0, 1e-12) << "m = " << m;
  }
}

TEST(Geometry, DirichletOfHopfMap) {
  const auto& s = setup(16);
  const MapField h = sample_map(hopf_fn(), s.g);
  EXPECT_NEAR(integrate_scalar(dirichlet_density(h, s.D), s.g), 16 * kPi * kPi, 1e-10);
}

TEST(Geometry, GridCsvRoundTrip) {
  const GridSpec& g = setup(16).g;
  std::stringstream ss;
  write_grid_csv(g, ss);
  const GridSpec r = read_grid_csv(ss);
  ASSERT_EQ(r.size(), g.size());
  EXPECT_EQ(r.n_t(), g.n_t());
  EXPECT_EQ(r.n_ang(), g.n_ang());
  EXPECT_LT((r.weights() - g.weights()).cwiseAbs().maxCoeff(), 1e-15);
  for (std::size_t k = 0; k < g.size(); ++k) ASSERT_LT((r.points()[k] - g.points()[k]).norm(), 1e-15);
}

TEST(Geometry, GridCsvRejectsGarbage) {
  std::stringstream ss("not a grid\n1,2\n");
  EXPECT_ANY_THROW(read_grid_csv(ss));
}
