#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace hopflab;
using namespace hopflab::testing;

namespace {

Vec3 eval_sphere(const SphereFn& psi, const Vec3& p) {
  const auto y = psi({DualD(p(0)), DualD(p(1)), DualD(p(2))});
  return {y[0].v, y[1].v, y[2].v};
}

// Jacobian of psi: S^2 -> S^2 w.r.t. area at p, by central differences along
// an oriented tangent frame (e1, e2, p).
double area_jacobian_fd(const SphereFn& psi, const Vec3& p, double h = 1e-6) {
  const Vec3 e1 = p.unitOrthogonal();
  const Vec3 e2 = p.cross(e1);
  auto dir = [&](const Vec3& e) -> Vec3 {
    return (eval_sphere(psi, (p + h * e).normalized()) - eval_sphere(psi, (p - h * e).normalized())) / (2 * h);
  };
  return eval_sphere(psi, p).dot(dir(e1).cross(dir(e2)));
}

// |du ^ du|^2 with du ^ du (X, Y) = 2 du(X) x du(Y), summed over frame pairs.
ScalarField du_wedge_du_sq(const Jet<MapValues>& J) {
  ScalarField out(J.value.rows());
  for (Eigen::Index n = 0; n < out.size(); ++n) {
    double s = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        const Vec3 a = J.d[i].row(n).transpose(), b = J.d[j].row(n).transpose();
        s += (2.0 * a.cross(b)).squaredNorm();
      }
    out(n) = s;
  }
  return out;
}

struct Named {
  std::string name;
  S2Fn f;
};

std::vector<Named> test_maps() {
  std::mt19937_64 rng(21);
  const Eigen::Matrix4d R = random_rotation(rng);
  return {{"hopf", hopf_fn()},
          {"hopf_rot", compose(hopf_fn(), rotation_fn(R))},
          {"psi2_hopf", compose(sphere_power(2), hopf_fn())},
          {"conj_hopf", compose(sphere_conjugate(), hopf_fn())},
          {"mobius_hopf", compose(sphere_mobius({2, 0}, {0.5, 0.3}, {0, 0}, {1, 0}), hopf_fn())},
          {"stretch_hopf", compose(sphere_stretch(2.0), hopf_fn())},
          {"constant", constant_fn({0, 1, 1})}};
}

}  // namespace

TEST(Maps, Stereographic) {
  EXPECT_LT((stereographic(0.0) - Vec3(0, 0, -1)).norm(), 1e-15);
  EXPECT_LT((stereographic(1.0) - Vec3(1, 0, 0)).norm(), 1e-15);
  EXPECT_LT((stereographic_infinity() - Vec3(0, 0, 1)).norm(), 0.0 + 1e-300);
  EXPECT_LT((stereographic(1e9) - Vec3(0, 0, 1)).norm(), 1e-8);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  for (int i = 0; i < 20; ++i) EXPECT_NEAR(stereographic({n01(rng), n01(rng)}).norm(), 1.0, 1e-15);
}

TEST(Maps, HopfMapExamples) {
  const double r = 1 / std::sqrt(2.0);
  EXPECT_LT((hopf_map(Vec4(1, 0, 0, 0)) - Vec3(0, 0, 1)).norm(), 1e-15);
  EXPECT_LT((hopf_map(Vec4(0, 0, 1, 0)) - Vec3(0, 0, -1)).norm(), 1e-15);
  EXPECT_LT((hopf_map(Vec4(r, 0, r, 0)) - Vec3(1, 0, 0)).norm(), 1e-15);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    const Vec4 x = to_ambient(random_point(rng));
    EXPECT_NEAR(hopf_map(x).norm(), 1.0, 1e-14);
    // constant on the fibres of the S^1 action
    EXPECT_LT((hopf_map(circle_action(0.7) * x) - hopf_map(x)).norm(), 1e-14);
  }
}

TEST(Maps, SampledMapsAreUnit) {
  const GridSpec& g = setup(16).g;
  for (const auto& m : test_maps()) EXPECT_LE(sample_map(m.f, g).max_unit_defect(), 1e-12) << m.name;
}

TEST(Maps, PullbackOfHopf) {
  const auto& s = setup(16);
  const TwoFormField a = pullback_area(sample_map(hopf_fn(), s.g), s.D);
  EXPECT_LE(max_diff(a, 4.0 * restrict_constant_form(e0_matrix(1, 0), s.g)), 1e-8);
  // and h^* omega = 2 d theta
  EXPECT_LE(max_diff(a, 2.0 * exterior_derivative(theta_field(s.g), s.D)), 1e-8);
  const TwoFormField c = pullback_area(sample_map(constant_fn({1, 0, 0}), s.g), s.D);
  EXPECT_EQ(pointwise_norm(c).maxCoeff(), 0.0);
}

TEST(Maps, PullbackModulusIdentity) {
  const auto& s = setup(16);
  for (const auto& m : test_maps()) {
    const auto J = differential(sample_map(m.f, s.g), s.D);
    const ScalarField lhs = pointwise_dot(pullback_area(J), pullback_area(J));
    EXPECT_LE((lhs - 0.25 * du_wedge_du_sq(J)).cwiseAbs().maxCoeff(), 1e-10) << m.name;
    EXPECT_LE((lhs - skyrme_density(J)).cwiseAbs().maxCoeff(), 1e-10) << m.name;
  }
}

TEST(Maps, DirichletDensity) {
  const auto& s = setup(16);
  const ScalarField dh = dirichlet_density(sample_map(hopf_fn(), s.g), s.D);
  EXPECT_LE((dh.array() - 8.0).abs().maxCoeff(), 1e-12);
  EXPECT_EQ(dirichlet_density(sample_map(constant_fn({0, 0, 1}), s.g), s.D).maxCoeff(), 0.0);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 5; ++i) {
    const MapField u = sample_map(compose(hopf_fn(), rotation_fn(random_rotation(rng))), s.g);
    EXPECT_LE((dirichlet_density(u, s.D).array() - 8.0).abs().maxCoeff(), 1e-12);
  }
}

TEST(Maps, ConformalityDefect) {
  const auto& s = setup(16);
  EXPECT_LE(conformality_defect(sample_map(hopf_fn(), s.g), s.D).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_EQ(conformality_defect(sample_map(constant_fn({0, 0, 1}), s.g), s.D).cwiseAbs().maxCoeff(), 0.0);
  const ScalarField st = conformality_defect(sample_map(compose(sphere_stretch(2.0), hopf_fn()), s.g), s.D);
  // positive on a set of positive measure
  ScalarField ind = (st.array() > 1e-3).cast<double>().matrix();
  EXPECT_GT(integrate_scalar(ind, s.g), 0.1 * kVolS3);
  // |u^* omega| <= (1/2)|du|^2 everywhere, for every test map
  for (const auto& m : test_maps())
    EXPECT_GE(conformality_defect(sample_map(m.f, s.g), s.D).minCoeff(), -1e-10) << m.name;
}

TEST(Maps, AnalyticAndCollocationAgree) {
  const auto& s = setup(24);
  std::mt19937_64 rng(4);
  for (const S2Fn& f : {hopf_fn(), compose(hopf_fn(), rotation_fn(random_rotation(rng)))}) {
    const MapField u = sample_map(f, s.g);
    EXPECT_LE(max_diff(pullback_area(u, s.D), pullback_area(u, s.D, DiffMode::Collocation)), 1e-8);
    EXPECT_LE((dirichlet_density(u, s.D) - dirichlet_density(u, s.D, DiffMode::Collocation)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Maps, DegreeS2) {
  const S2Grid sg = build_s2_grid(48, 48);
  const DegreeResult id = degree_s2(sphere_identity(), sg);
  EXPECT_NEAR(id.raw, 1.0, 1e-8);
  EXPECT_EQ(id.rounded, 1);
  EXPECT_NEAR(degree_s2(sphere_conjugate(), sg).raw, -1.0, 1e-8);
  const DegreeResult sq = degree_s2(sphere_power(2), sg);
  EXPECT_NEAR(sq.raw, 2.0, 1e-6);
  EXPECT_LE(sq.gap, 1e-6);
  EXPECT_NEAR(degree_s2(sphere_power(3), sg).raw, 3.0, 1e-6);
  EXPECT_NEAR(degree_s2(sphere_mobius({2, 0}, {0.5, 0.3}, {0, 0}, {1, 0}), sg).raw, 1.0, 1e-6);
  EXPECT_NEAR(degree_s2(sphere_stretch(2.0), sg).raw, 1.0, 1e-6);
  EXPECT_THROW(build_s2_grid(1, 48), std::invalid_argument);
}

TEST(Maps, DegreeS3) {
  const auto& s = setup(32);
  std::mt19937_64 rng(5);
  EXPECT_NEAR(degree_s3(sample_s3_map(identity_s3_fn(), s.g), s.D).raw, 1.0, 1e-8);
  EXPECT_NEAR(degree_s3(sample_s3_map(rotation_fn(random_rotation(rng)), s.g), s.D).raw, 1.0, 1e-8);
  // analytic windings: (z, w) -> (z^2, w)/|.| has degree 2 (two preimages, both
  // orientation preserving); (z, w) -> (conj z, w) reverses orientation.
  const DegreeResult sq = degree_s3(sample_s3_map(square_z_fn(), s.g), s.D);
  EXPECT_NEAR(sq.raw, 2.0, 1e-6);
  EXPECT_EQ(sq.rounded, 2);
  EXPECT_NEAR(degree_s3(sample_s3_map(conj_z_fn(), s.g), s.D).raw, -1.0, 1e-8);
}

TEST(Maps, PullbackNaturality) {
  // (psi o h)^* omega = (psi^* omega / omega)(h) * h^* omega, the area Jacobian
  // of psi taken by finite differences on S^2.
  const auto& s = setup(16);
  const MapField h = sample_map(hopf_fn(), s.g);
  const TwoFormField hw = pullback_area(h, s.D);
  for (const SphereFn& psi : {sphere_power(2), sphere_mobius({2, 0}, {0.5, 0.3}, {0, 0}, {1, 0}), sphere_stretch(2.0)}) {
    const TwoFormField lhs = pullback_area(sample_map(compose(psi, hopf_fn()), s.g), s.D);
    TwoFormField rhs = hw;
    for (Eigen::Index k = 0; k < rhs.size(); ++k) {
      const double jac = area_jacobian_fd(psi, h.values.row(k).transpose());
      for (int i = 0; i < 3; ++i) rhs[i](k) *= jac;
    }
    EXPECT_LE(max_diff(lhs, rhs), 1e-6);
  }
}

TEST(Maps, LiftIdentity) {
  const auto& s = setup(16);
  const MapField h = sample_map(hopf_fn(), s.g);
  const OneFormField two_theta = 2.0 * theta_field(s.g);
  const LiftCheck id = lift_identity_check(sample_s3_map(identity_s3_fn(), s.g), two_theta, h, s.D);
  ASSERT_TRUE(id.consistent);
  EXPECT_LE(id.max_residual, 1e-10);
  const LiftCheck rot = lift_identity_check(sample_s3_map(rotation_fn(circle_action(1.1)), s.g), two_theta, h, s.D);
  ASSERT_TRUE(rot.consistent);
  EXPECT_LE(rot.max_residual, 1e-10);
  // |d id|^2 = 3 = (1/4) 4 + (1/4) 8 is what the residual measures
  const LiftCheck bad = lift_identity_check(sample_s3_map(identity_s3_fn(), s.g), theta_field(s.g), h, s.D);
  EXPECT_FALSE(bad.consistent);
  EXPECT_TRUE(std::isnan(bad.max_residual));
}

TEST(Maps, MapCsvRoundTrip) {
  const GridSpec& g = setup(16).g;
  const MapField u = sample_map(compose(sphere_power(2), hopf_fn()), g);
  std::stringstream ss;
  write_map_csv(MapField{1.01 * u.values, nullptr}, ss);
  const LoadedMap m = read_map_csv(ss, g.size());
  EXPECT_NEAR(m.max_correction, 0.01, 1e-12);
  EXPECT_LE((m.map.values - u.values).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE(m.map.max_unit_defect(), 1e-15);
  std::stringstream bad("node,u1,u2,u3\n0,1,0,0\n");
  EXPECT_THROW(read_map_csv(bad, g.size()), std::runtime_error);
}
