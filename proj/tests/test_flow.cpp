#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support.hpp"

using namespace hopflab;
using hopflab::testing::bases;
using hopflab::testing::setup;

namespace {

constexpr int kN = 16;

MapField hopf16() { return sample_map(hopf_fn(), setup(kN).g); }

MapField random_start(double amp, std::uint64_t seed) {
  const MapField h = hopf16();
  std::mt19937_64 rng(seed);
  return perturbed_start(h, random_tangent_field(h, setup(kN).g, rng), amp);
}

}  // namespace

double worst_fd_error(double amp, bool central) {
  const auto& s = setup(kN);
  const MapField u = random_start(amp, 7);
  const DiscreteFS F(s.D, 0.5);
  const MapValues G = project_tangent(u.values, F.gradient(u.values));
  std::mt19937_64 rng(11);
  double worst = 0;
  for (int i = 0; i < 50; ++i)
    worst = std::max(worst, gradient_fd_error(F, u.values, G, random_tangent_field(u, s.g, rng), 1e-6, central));
  return worst;
}

// One-sided differences at a generic map; their O(eps) error relative to |G|
// grows as 1/amplitude close to the critical point h, where central ones are used.
TEST(Flow, GradientMatchesForwardDifferences) { EXPECT_LE(worst_fd_error(0.2, false), 1e-5); }

TEST(Flow, GradientMatchesCentralDifferencesNearHopf) { EXPECT_LE(worst_fd_error(0.05, true), 1e-6); }

TEST(Flow, GradientTangentToSphere) {
  const auto& s = setup(kN);
  const MapField u = random_start(0.1, 3);
  const MapValues G = fs_gradient(u, 1.0, s.D);
  EXPECT_LE((G.array() * u.values.array()).rowwise().sum().abs().maxCoeff(), 1e-12 * std::max(1.0, G.norm()));
}

TEST(Flow, HopfIsCriticalForEveryRho) {
  const auto& s = setup(kN);
  const MapField h = hopf16();
  for (double rho : {0.25, 0.5, 1.0, 2.0, 3.0}) {
    const DiscreteFS F(s.D, rho);
    const MapValues G = project_tangent(h.values, F.gradient(h.values));
    EXPECT_LE(F.l2_grad_norm(G), 1e-6) << "rho = " << rho;
  }
}

TEST(Flow, ConstantMapHasZeroGradient) {
  const auto& s = setup(kN);
  const MapField c = sample_map(constant_fn(Vec3(0.3, -0.2, 0.9)), s.g);
  EXPECT_LE(fs_gradient(c, 0.7, s.D).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LE(discrete_fs(c, 0.7, s.D), 1e-24);
}

TEST(Flow, DiscreteEnergyOfHopfMatchesClosedForm) {
  const auto& s = setup(kN);
  const MapField h = hopf16();
  // |dh|^2 = 8 and |h^* omega|^2 = 16 pointwise, vol(S^3) = 2 pi^2
  for (double rho : {0.5, 2.0}) {
    const double exact = 2 * kPi * kPi * (8.0 + 16.0 / (rho * rho));
    EXPECT_NEAR(discrete_fs(h, rho, s.D), exact, 1e-8 * exact);
  }
}

TEST(Flow, StartAtHopfConvergesImmediately) {
  const auto& s = setup(kN);
  FlowConfig cfg;
  cfg.rho = 0.5;
  const FlowTrace tr = run_flow(hopf16(), cfg, s.D, bases(kN, 4));
  EXPECT_EQ(tr.status, FlowStatus::Converged);
  EXPECT_LE(tr.records.back().iteration, 1);
  EXPECT_NEAR(tr.records.back().energy, discrete_fs(hopf16(), 0.5, s.D), 1e-8);
}

TEST(Flow, PerturbedStartReturnsToHopfClass) {
  const auto& s = setup(kN);
  FlowConfig cfg;
  cfg.rho = 0.5;
  cfg.fd_check_every = 25;
  const FlowTrace tr = run_flow(random_start(0.05, 1), cfg, s.D, bases(kN, 4));
  const double fh = discrete_fs(hopf16(), 0.5, s.D);
  EXPECT_EQ(tr.status, FlowStatus::Converged);
  EXPECT_TRUE(tr.monotone());
  EXPECT_GE(tr.records.back().energy, fh - 1e-6 * fh);
  EXPECT_GE(tr.min_energy(), fh - 1e-6 * fh);
  EXPECT_LE(tr.max_unit_defect, 1e-14);
  EXPECT_NEAR(tr.last_q(), 1.0, 0.1);
  EXPECT_LE(tr.last_dist(), 0.05);
  ASSERT_FALSE(tr.fd_checks.empty());
  for (const auto& [it, err] : tr.fd_checks) EXPECT_LE(err, 1e-5) << "iteration " << it;
}

TEST(Flow, E1PlusStartDescendsAboveThreshold) {
  const auto& s = setup(kN);
  FlowConfig cfg;
  cfg.rho = 3.0;
  cfg.max_iter = 300;
  const MapField h = hopf16();
  const MapValues v = build_perturbation(h, {PerturbationSpec::Kind::E1Plus, 0.05, 1}, s.D, bases(kN, 4));
  const FlowTrace tr = run_flow(perturbed_start(h, v, 0.05), cfg, s.D, bases(kN, 4));
  const double fh = discrete_fs(h, 3.0, s.D);
  EXPECT_TRUE(tr.monotone());
  EXPECT_GE(tr.first_below(fh * (1 - 1e-9)), 0);
}

TEST(Flow, AlignedFieldIsTangentAndAligned) {
  const auto& s = setup(kN);
  const MapField h = hopf16();
  const Potential p = e1_plus_potential(bases(kN, 4));
  const AlignedField a = aligned_tangent_field(h, p.phi, p.dphi, s.D);
  EXPECT_LE((a.v.array() * h.values.array()).rowwise().sum().abs().maxCoeff(), 1e-12);
  EXPECT_NEAR(a.v.rowwise().norm().maxCoeff(), 1.0, 1e-12);
  EXPECT_GT(a.alignment, 0.5);
}

TEST(Flow, ConfigValidation) {
  FlowConfig ok;
  EXPECT_NO_THROW(ok.validate());
  auto bad = [](auto mutate) {
    FlowConfig c;
    mutate(c);
    return c;
  };
  EXPECT_THROW(bad([](FlowConfig& c) { c.step = 0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](FlowConfig& c) { c.grad_tol = -1; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](FlowConfig& c) { c.rho = 0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](FlowConfig& c) { c.q_lo = 1.05; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](FlowConfig& c) { c.q_hi = 1.0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](FlowConfig& c) { c.max_iter = -1; }).validate(), std::invalid_argument);
}

TEST(Flow, QEscapeIsReported) {
  const auto& s = setup(kN);
  FlowConfig cfg;
  cfg.q_lo = 0.999999;
  cfg.q_hi = 1.000001;
  // The truncated estimate of a strongly perturbed start lies outside a narrow band.
  const FlowTrace tr = run_flow(random_start(0.5, 2), cfg, s.D, bases(kN, 4));
  EXPECT_EQ(tr.status, FlowStatus::QEscaped);
  EXPECT_EQ(tr.records.size(), 1u);
}

TEST(Flow, EmptySweepIsEmpty) {
  const auto& s = setup(kN);
  const SweepReport r = stability_sweep({}, {}, FlowConfig{}, s.D, bases(kN, 4));
  EXPECT_TRUE(r.rows.empty());
  EXPECT_FALSE(r.stable_up_to);
  EXPECT_FALSE(r.unstable_from);
}

TEST(Flow, SweepRejectsRhoOutsideRange) {
  const auto& s = setup(kN);
  EXPECT_THROW(stability_sweep({0.5, 4.5}, {}, FlowConfig{}, s.D, bases(kN, 4)), std::invalid_argument);
  EXPECT_THROW(stability_sweep({0.0}, {}, FlowConfig{}, s.D, bases(kN, 4)), std::invalid_argument);
}

TEST(Flow, SweepSeparatesRegimes) {
  const auto& s = setup(kN);
  FlowConfig cfg;
  cfg.max_iter = 300;
  const SweepReport r = stability_sweep({0.5, 1.0, 3.0}, {PerturbationSpec::Kind::E1Plus, 0.05, 1}, cfg, s.D,
                                        bases(kN, 4));
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_FALSE(r.rows[0].descended);
  EXPECT_FALSE(r.rows[1].descended);
  EXPECT_TRUE(r.rows[2].descended);
  ASSERT_TRUE(r.stable_up_to && r.unstable_from);
  EXPECT_DOUBLE_EQ(*r.stable_up_to, 1.0);
  EXPECT_DOUBLE_EQ(*r.unstable_from, 3.0);
  std::ostringstream os;
  write_sweep_csv(r, os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')),
            "rho,fs_hopf,start_energy,min_energy,terminal_energy,descended,margin,first_below,iterations,status,"
            "terminal_q");
}

TEST(Flow, TraceCsvAndDeterminism) {
  const auto& s = setup(kN);
  FlowConfig cfg;
  cfg.max_iter = 15;
  const MapField u0 = random_start(0.05, 4);
  const FlowTrace a = run_flow(u0, cfg, s.D, bases(kN, 4));
  const FlowTrace b = run_flow(u0, cfg, s.D, bases(kN, 4));
  std::ostringstream oa, ob;
  write_trace_csv(a, oa);
  write_trace_csv(b, ob);
  EXPECT_EQ(oa.str(), ob.str());
  EXPECT_EQ(oa.str().substr(0, oa.str().find('\n')), "iteration,energy,grad_norm,q_estimate,dist_to_E01");
  EXPECT_EQ(a.terminal.values, b.terminal.values);
  EXPECT_EQ(a.status, FlowStatus::MaxIter);
  EXPECT_EQ(a.records.size(), 16u);
}
