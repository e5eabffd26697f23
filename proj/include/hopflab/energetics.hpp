#pragma once

// Scalar functionals: I_q, the Hopf invariant Q, the Faddeev-Skyrme energy
// FS_rho, the relaxed energy E_rho on closed 2-forms, and the inequality
// checks built on them (gap, quadratic form, expansion, coercivity).

#include "hopflab/collocation.hpp"
#include "hopflab/forms.hpp"
#include "hopflab/geometry.hpp"
#include "hopflab/maps.hpp"
#include "hopflab/spectral.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace hopflab {

inline constexpr double kAdmissibleQ = 1e-6;  // floor replacing Q > 0

/// int |alpha|^q, q in {1, 2}.
inline double i_q(const TwoFormField& alpha, int q, const GridSpec& g) {
  if (q == 1) return integrate_scalar(pointwise_norm(alpha), g);
  if (q == 2) return integrate_scalar(pointwise_dot(alpha, alpha), g);
  throw std::invalid_argument("i_q: q must be 1 or 2");
}

// -- Hopf invariant -------------------------------------------------------------

/// Q = (1/16 pi^2) sum_{k <= K, +-} +-(k+2)^{-1} ||P_k^+- alpha||^2.
inline double hopf_from_coeffs(const SpectralCoeffs& c) {
  double q = 0.0;
  for (const auto& [key, v] : c.coeffs) q += key.second * v.squaredNorm() / (key.first + 2.0);
  return q / (16.0 * kPi * kPi);
}

/// Q = (1/16 pi^2) int beta ^ d beta for an explicit potential.
inline double hopf_from_potential(const OneFormField& beta, const TwoFormField& dbeta, const GridSpec& g) {
  return integrate_scalar(wedge_12(beta, dbeta), g) / (16.0 * kPi * kPi);
}

struct HopfResult {
  double q = 0.0;
  int K = 0;
  double remainder = 0.0;      // L^2 norm of the part outside E_k^+-, k <= K
  double norm = 0.0;           // ||alpha||
  double closed_residual = 0.0;
  bool remainder_flag = false;  // remainder above 1e-3 ||alpha||
  bool zero_form = false;       // alpha vanishes: Q reported as 0
};

inline HopfResult hopf_invariant_form(const TwoFormField& alpha, int K, const SpectralBases& bases, const Collocation& D,
                                      double closed_tol = 1e-6) {
  const GridSpec& g = D.grid();
  HopfResult r;
  r.K = K;
  r.norm = l2_norm(alpha, g);
  r.closed_residual = std::sqrt(integrate_scalar(exterior_derivative(alpha, D).cwiseAbs2(), g));
  if (r.closed_residual > closed_tol * std::max(1.0, r.norm)) {
    throw std::invalid_argument("hopf_invariant_form: form is not closed (||d alpha|| = " + std::to_string(r.closed_residual) + ")");
  }
  if (r.norm < 1e-12) {
    r.zero_form = true;
    return r;
  }
  const SpectralCoeffs c = decompose(alpha, K, bases);
  r.q = hopf_from_coeffs(c);
  r.remainder = c.remainder;
  r.remainder_flag = c.remainder > 1e-3 * r.norm;
  return r;
}

inline HopfResult hopf_invariant_map(const MapField& u, int K, const SpectralBases& bases, const Collocation& D,
                                     DiffMode mode = DiffMode::Auto) {
  // Pullbacks of nodal maps are only closed up to discretization error.
  const double tol = (u.analytic && mode == DiffMode::Auto) ? 1e-6 : 1e-3;
  return hopf_invariant_form(pullback_area(u, D, mode), K, bases, D, tol);
}

// -- energies ---------------------------------------------------------------------

struct EnergyReport {
  double rho = 1.0;
  double dirichlet = 0.0;  // int |du|^2
  double skyrme = 0.0;     // int |u^* omega|^2
  double total = 0.0;      // dirichlet + rho^-2 skyrme
  double q_hopf = std::numeric_limits<double>::quiet_NaN();
  int K = -1;
  double remainder = std::numeric_limits<double>::quiet_NaN();
};

inline EnergyReport fs_energy(const Jet<MapValues>& J, double rho, const GridSpec& g) {
  if (!(rho > 0)) throw std::invalid_argument("fs_energy: rho must be positive");
  EnergyReport e;
  e.rho = rho;
  e.dirichlet = integrate_scalar(dirichlet_density(J), g);
  // |u^* omega|^2 = (1/4)|du ^ du|^2
  e.skyrme = integrate_scalar(skyrme_density(J), g);
  e.total = e.dirichlet + e.skyrme / (rho * rho);
  return e;
}

inline EnergyReport fs_energy(const MapField& u, double rho, const Collocation& D, DiffMode mode = DiffMode::Auto) {
  return fs_energy(differential(u, D, mode), rho, D.grid());
}

/// E_rho(alpha) = 2 Q^{-1/2} I_1 + rho^{-2} Q^{-1} I_2 for a given Q.
inline double relaxed_energy(const TwoFormField& alpha, double rho, double Q, const GridSpec& g) {
  if (!(rho > 0)) throw std::invalid_argument("relaxed_energy: rho must be positive");
  if (!(Q > kAdmissibleQ)) throw std::domain_error("relaxed_energy: Q(alpha) must be positive (inadmissible form)");
  return 2.0 / std::sqrt(Q) * i_q(alpha, 1, g) + i_q(alpha, 2, g) / (rho * rho * Q);
}

inline double relaxed_energy(const TwoFormField& alpha, double rho, int K, const SpectralBases& bases, const Collocation& D) {
  return relaxed_energy(alpha, rho, hopf_invariant_form(alpha, K, bases, D).q, D.grid());
}

struct FsVsRelaxed {
  double lhs = 0.0;    // FS_rho(u)
  double rhs = 0.0;    // E_rho(u^* omega)
  double slack = 0.0;  // lhs - rhs
  double q = 0.0;
};

inline FsVsRelaxed fs_vs_relaxed(const MapField& u, double rho, int K, const SpectralBases& bases, const Collocation& D) {
  const auto J = differential(u, D);
  FsVsRelaxed r;
  r.lhs = fs_energy(J, rho, D.grid()).total;
  const TwoFormField a = pullback_area(J);
  r.q = hopf_invariant_form(a, K, bases, D).q;
  r.rhs = relaxed_energy(a, rho, r.q, D.grid());
  r.slack = r.lhs - r.rhs;
  return r;
}

// -- the gap I_2 - 32 pi^2 Q ---------------------------------------------------------

struct GapResult {
  double gap = 0.0;              // I_2(alpha) - 32 pi^2 Q(alpha)
  double quarter_dist_sq = 0.0;  // (1/4) dist(alpha, E_0^+)^2
  double q = 0.0;
  double remainder = 0.0;
  bool holds(double tol = 1e-9) const { return gap >= quarter_dist_sq - tol * std::max(1.0, std::abs(gap)); }
};

inline GapResult faddeev_gap(const TwoFormField& alpha, int K, const SpectralBases& bases, const Collocation& D) {
  const GridSpec& g = D.grid();
  const HopfResult h = hopf_invariant_form(alpha, K, bases, D);
  GapResult r;
  r.q = h.q;
  r.remainder = h.remainder;
  r.gap = i_q(alpha, 2, g) - 32.0 * kPi * kPi * h.q;
  const double d = project_e0(alpha, g).distance_to_span;
  r.quarter_dist_sq = 0.25 * d * d;
  return r;
}

// -- second-order quantities -----------------------------------------------------------

/// rho^-2 (int |dpsi|^2 - 2 int psi ^ dpsi) - 1/2 int psi ^ dpsi for a
/// co-closed psi with known dpsi.
inline double quad_form(const OneFormField& psi, const TwoFormField& dpsi, double rho, const Collocation& D,
                        double coclosed_tol = 1e-7) {
  const GridSpec& g = D.grid();
  const double cod = std::sqrt(integrate_scalar(codifferential(psi, D).cwiseAbs2(), g));
  if (cod > coclosed_tol * std::max(1.0, l2_norm(psi, g))) throw std::invalid_argument("quad_form: psi is not co-closed");
  const double dd = i_q(dpsi, 2, g);
  const double pd = integrate_scalar(wedge_12(psi, dpsi), g);
  return (dd - 2.0 * pd) / (rho * rho) - 0.5 * pd;
}

/// The coefficient rho^-2 (1 - 2/lambda) - 1/(2 lambda) of the quadratic form on an eigenmode.
inline double quad_coefficient(double lambda, double rho) { return (1.0 - 2.0 / lambda) / (rho * rho) - 0.5 / lambda; }

/// G_1(alpha0, dphi) = int |alpha0 + dphi| - |alpha0| - <alpha0/|alpha0|, dphi>.
inline double g1(const TwoFormField& alpha0, const TwoFormField& dphi, const GridSpec& g) {
  const ScalarField n0 = pointwise_norm(alpha0);
  if (n0.minCoeff() <= 1e-12) throw std::domain_error("g1: alpha0 vanishes somewhere");
  const ScalarField n1 = pointwise_norm(alpha0 + dphi);
  const ScalarField lin = (pointwise_dot(alpha0, dphi).array() / n0.array()).matrix();
  return integrate_scalar(n1 - n0 - lin, g);
}

// -- expansion around E^+_{0,1} ----------------------------------------------------------

struct ExpansionResult {
  std::vector<double> scales;
  std::vector<double> residuals;  // |LHS - explicit RHS terms| per scale
  double slope = std::numeric_limits<double>::quiet_NaN();
  bool zero = false;  // every residual vanished (phi = 0)
};

/// alpha0 in E^+_{0,1} (so beta0 = (1/2)*alpha0 is a potential), phi co-closed
/// with dphi known. Compares E_rho(alpha0 + s dphi) - E_rho(alpha0) with the
/// explicit second-order expansion terms and fits the order of the remainder.
inline ExpansionResult expansion_residual(const TwoFormField& alpha0, const OneFormField& phi, const TwoFormField& dphi,
                                          double rho, const GridSpec& g,
                                          std::vector<double> scales = {1.0, 0.5, 0.25, 0.125}) {
  const OneFormField beta0 = 0.5 * hodge_star(alpha0);
  const double q0 = hopf_from_potential(beta0, alpha0, g);
  const double e0 = relaxed_energy(alpha0, rho, q0, g);
  ExpansionResult r;
  r.scales = scales;
  for (double s : scales) {
    const OneFormField ps = s * phi;
    const TwoFormField dps = s * dphi;
    const TwoFormField a = alpha0 + dps;
    const double q = hopf_from_potential(beta0 + ps, a, g);
    if (!(q > kAdmissibleQ)) throw std::domain_error("expansion_residual: inadmissible form in the sweep");
    const double lhs = relaxed_energy(a, rho, q, g) - e0;
    const double dd = i_q(dps, 2, g);
    const double pd = integrate_scalar(wedge_12(ps, dps), g);
    const double x = l2_inner(alpha0, dps, g);
    const double rhs = (dd - 2.0 * pd) / (rho * rho) - 0.5 * pd + x * x / (128.0 * kPi * kPi) +
                       (2.0 - x / (16.0 * kPi * kPi)) * g1(alpha0, dps, g);
    r.residuals.push_back(std::abs(lhs - rhs));
  }
  const bool all_zero = std::all_of(r.residuals.begin(), r.residuals.end(), [](double v) { return v == 0.0; });
  if (all_zero) {
    r.zero = true;
    return r;
  }
  // least-squares slope of log residual against log s
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(scales.size());
  for (std::size_t i = 0; i < scales.size(); ++i) {
    const double lx = std::log(scales[i]);
    const double ly = std::log(std::max(r.residuals[i], std::numeric_limits<double>::min()));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  r.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return r;
}

// -- random co-closed potentials -----------------------------------------------------------

/// A co-closed potential phi = sum_k lambda_k^{-1} * eta_k with dphi = sum_k eta_k.
struct Potential {
  OneFormField phi;
  TwoFormField dphi;
};

/// eta in E_k^sign given by coefficients over the basis members.
inline Potential potential_from_coeffs(const SpectralBases& bases, int k, int sign, const Eigen::VectorXd& c) {
  const EigenBasis& B = bases.basis(k, sign);
  if (c.size() != B.dim()) throw std::invalid_argument("potential_from_coeffs: coefficient count");
  Eigen::MatrixXd combo = Eigen::MatrixXd::Zero(MonomialBasis(k).size(), 6);
  for (int j = 0; j < B.dim(); ++j) combo += c(j) * to_coeff_matrix(B.members[static_cast<std::size_t>(j)]);
  Potential p;
  p.dphi = bases.restrictor(k).restrict(combo);
  p.phi = (1.0 / B.eigenvalue()) * hodge_star(p.dphi);
  return p;
}

/// Random potential with Gaussian coefficients on every mode k <= K (both
/// signs; E_0^+ included unless skip_e0_plus).
inline Potential random_potential(const SpectralBases& bases, int K, std::mt19937_64& rng, bool skip_e0_plus = false) {
  std::normal_distribution<double> n01;
  const GridSpec& g = bases.grid();
  Potential p{OneFormField::zeros(g), TwoFormField::zeros(g)};
  for (int k = 0; k <= K; ++k) {
    for (int sign : {1, -1}) {
      const EigenBasis& B = bases.basis(k, sign);
      Eigen::VectorXd c(B.dim());
      for (int j = 0; j < B.dim(); ++j) c(j) = n01(rng);
      if (k == 0 && sign == 1 && skip_e0_plus) continue;
      const Potential q = potential_from_coeffs(bases, k, sign, c);
      p.phi += q.phi;
      p.dphi += q.dphi;
    }
  }
  return p;
}

// -- local coercivity ------------------------------------------------------------------------

struct CoercivityReport {
  double rho = 0.0;
  double epsilon0 = 0.0;
  int samples = 0;
  double min_ratio = std::numeric_limits<double>::infinity();
  int violations = 0;
  std::vector<double> ratios;  // per sample
  std::vector<double> radii;   // ||dphi|| per sample

  bool pass() const { return violations == 0 && min_ratio > 0; }
};

/// (E_rho(alpha) - E_rho(nearest)) / ||alpha - nearest||^2 for alpha = alpha0 + dphi
/// rescaled to Q = 1, nearest in E^+_{0,1}.
inline double coercivity_ratio(const Potential& p, double rho, const GridSpec& g) {
  const TwoFormField alpha0 = 4.0 * restrict_constant_form(e0_matrix(1, 0), g);
  const OneFormField beta0 = 0.5 * hodge_star(alpha0);
  TwoFormField a = alpha0 + p.dphi;
  const double q = hopf_from_potential(beta0 + p.phi, a, g);
  if (!(q > kAdmissibleQ)) throw std::domain_error("coercivity_ratio: inadmissible sample");
  a *= 1.0 / std::sqrt(q);
  const E0Projection pr = project_e0(a, g);
  if (!pr.nearest_defined) throw std::domain_error("coercivity_ratio: nearest element undefined");
  const OneFormField bn = 0.5 * hodge_star(pr.nearest);
  const double qn = hopf_from_potential(bn, pr.nearest, g);
  const double dE = relaxed_energy(a, rho, 1.0, g) - relaxed_energy(pr.nearest, rho, qn, g);
  const double d2 = pr.distance * pr.distance;
  if (!(d2 > 0)) throw std::domain_error("coercivity_ratio: zero distance (0/0)");
  return dE / d2;
}

inline CoercivityReport coercivity_probe(double rho, double eps0, int n_samples, int K, const SpectralBases& bases,
                                         std::uint64_t seed) {
  if (!(rho > 0)) throw std::invalid_argument("coercivity_probe: rho must be positive");
  if (!(eps0 > 0)) throw std::invalid_argument("coercivity_probe: epsilon0 must be positive (ratios would be 0/0)");
  if (K > bases.K()) throw std::invalid_argument("coercivity_probe: truncation exceeds the built bases");
  const GridSpec& g = bases.grid();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  CoercivityReport rep;
  rep.rho = rho;
  rep.epsilon0 = eps0;
  rep.samples = n_samples;
  for (int s = 0; s < n_samples; ++s) {
    Potential p = random_potential(bases, K, rng);
    const double r = eps0 * unif(rng);
    const double scale = r / l2_norm(p.dphi, g);
    p.phi *= scale;
    p.dphi *= scale;
    const double ratio = coercivity_ratio(p, rho, g);
    rep.ratios.push_back(ratio);
    rep.radii.push_back(r);
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    if (!(ratio > 0)) ++rep.violations;
  }
  return rep;
}

/// Unit direction in E_k^sign whose restriction is, in L^2, most nearly parallel
/// to alpha^+_{0,1} = 4 omega^+_{0,1} pointwise (smallest share of the e^3^e^1,
/// e^1^e^2 components). Along it the G_1 term contributes least.
inline Eigen::VectorXd most_parallel_direction(const SpectralBases& bases, int k, int sign) {
  const GridSpec& g = bases.grid();
  const EigenBasis& B = bases.basis(k, sign);
  std::vector<TwoFormField> f;
  for (int j = 0; j < B.dim(); ++j) f.push_back(member_field(B, j, g));
  Eigen::MatrixXd P(B.dim(), B.dim());
  for (int i = 0; i < B.dim(); ++i)
    for (int j = 0; j <= i; ++j)
      P(i, j) = P(j, i) =
          integrate_scalar((f[i][1].array() * f[j][1].array() + f[i][2].array() * f[j][2].array()).matrix(), g);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
  return es.eigenvectors().col(0);
}

}  // namespace hopflab
