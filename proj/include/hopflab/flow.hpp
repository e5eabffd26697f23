#pragma once

// Projected gradient descent of the discrete FS_rho on nodal maps S^3 -> S^2,
// and the stability experiments around the Hopf map.
//
// Discrete energy: E(U) = sum_n w_n [ sum_i |J_i|^2 + rho^-2 sum_{i<j} |J_i x J_j|^2 ]
// with J_i = D_i U the collocation derivatives along tau_i. Its gradient is
// assembled exactly by the chain rule through the fixed sparse matrices D_i.

#include "hopflab/collocation.hpp"
#include "hopflab/energetics.hpp"
#include "hopflab/forms.hpp"
#include "hopflab/geometry.hpp"
#include "hopflab/maps.hpp"
#include "hopflab/spectral.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hopflab {

struct FlowConfig {
  double rho = 0.5;
  double step = 1.0;       // first trial step (H^1-preconditioned units)
  int max_iter = 2000;
  double grad_tol = 1e-3;  // on the L^2 norm of the band-limited tangent L^2 gradient
  double q_lo = 0.9, q_hi = 1.1;
  int q_every = 10;        // Q monitoring cadence (iterations)
  int monitor_K = 4;       // truncation for the Q estimate
  int fd_check_every = 0;  // finite-difference gradient check cadence, 0 = off
  int band = 0;            // polynomial degree of the descent space, 0 = n_ang / 4

  void validate() const {
    if (!(rho > 0)) throw std::invalid_argument("FlowConfig: rho must be positive");
    if (!(step > 0)) throw std::invalid_argument("FlowConfig: step must be positive");
    if (!(grad_tol > 0)) throw std::invalid_argument("FlowConfig: grad_tol must be positive");
    if (max_iter < 0) throw std::invalid_argument("FlowConfig: max_iter must be >= 0");
    if (!(q_lo < 1.0 && 1.0 < q_hi)) throw std::invalid_argument("FlowConfig: q_band must contain 1");
    if (q_every < 1) throw std::invalid_argument("FlowConfig: q_every must be >= 1");
    if (band < 0) throw std::invalid_argument("FlowConfig: band must be >= 0");
  }
};

enum class FlowStatus { Converged, MaxIter, QEscaped, Stalled };

inline const char* to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::Converged: return "converged";
    case FlowStatus::MaxIter: return "max_iter";
    case FlowStatus::QEscaped: return "Q_escaped";
    case FlowStatus::Stalled: return "stalled";
  }
  return "unknown";
}

struct FlowRecord {
  int iteration = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  double q_estimate = std::numeric_limits<double>::quiet_NaN();  // NaN between monitoring points
  double dist_to_E01 = std::numeric_limits<double>::quiet_NaN();
  double step = 0.0;  // accepted step (0 at iteration 0)
};

struct FlowTrace {
  std::vector<FlowRecord> records;
  MapField terminal;
  FlowStatus status = FlowStatus::MaxIter;
  std::vector<std::pair<int, double>> fd_checks;  // (iteration, relative error)
  double max_unit_defect = 0.0;                   // worst |u| - 1 after renormalization

  double min_energy() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : records) m = std::min(m, r.energy);
    return m;
  }
  bool monotone() const {
    for (std::size_t i = 1; i < records.size(); ++i)
      if (records[i].energy > records[i - 1].energy) return false;
    return true;
  }
  /// First iteration whose energy is below level, or -1.
  int first_below(double level) const {
    for (const auto& r : records)
      if (r.energy < level) return r.iteration;
    return -1;
  }
  /// Last monitored Q.
  double last_q() const {
    for (auto it = records.rbegin(); it != records.rend(); ++it)
      if (!std::isnan(it->q_estimate)) return it->q_estimate;
    return std::numeric_limits<double>::quiet_NaN();
  }
  double last_dist() const {
    for (auto it = records.rbegin(); it != records.rend(); ++it)
      if (!std::isnan(it->dist_to_E01)) return it->dist_to_E01;
    return std::numeric_limits<double>::quiet_NaN();
  }
};

/// The discrete energy and its nodal gradient on a fixed grid.
class DiscreteFS {
 public:
  DiscreteFS(const Collocation& D, double rho) : D_(D), rho_(rho) {
    if (!(rho > 0)) throw std::invalid_argument("DiscreteFS: rho must be positive");
    const auto& w = D.grid().weights();
    w_ = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  }

  double rho() const { return rho_; }
  const Eigen::VectorXd& weights() const { return w_; }

  double energy(const MapValues& U) const {
    std::array<MapValues, 3> J;
    for (int i = 0; i < 3; ++i) J[i] = D_.op(i, 0) * U;
    const double r2 = 1.0 / (rho_ * rho_);
    double e = 0.0;
    for (Eigen::Index n = 0; n < U.rows(); ++n) {
      const Vec3 a = J[0].row(n).transpose(), b = J[1].row(n).transpose(), c = J[2].row(n).transpose();
      const double dir = a.squaredNorm() + b.squaredNorm() + c.squaredNorm();
      const double sky = b.cross(c).squaredNorm() + c.cross(a).squaredNorm() + a.cross(b).squaredNorm();
      e += w_(n) * (dir + r2 * sky);
    }
    return e;
  }

  /// Euclidean gradient with respect to the nodal values (unprojected).
  MapValues gradient(const MapValues& U) const {
    std::array<MapValues, 3> J, H;
    for (int i = 0; i < 3; ++i) {
      J[i] = D_.op(i, 0) * U;
      H[i].resize(U.rows(), 3);
    }
    const double r2 = 1.0 / (rho_ * rho_);
    for (Eigen::Index n = 0; n < U.rows(); ++n) {
      const Vec3 a = J[0].row(n).transpose(), b = J[1].row(n).transpose(), c = J[2].row(n).transpose();
      // d|x cross y|^2 / dx = 2 y x (x cross y)
      const Vec3 ga = 2.0 * a + 2.0 * r2 * (b.cross(a.cross(b)) + c.cross(a.cross(c)));
      const Vec3 gb = 2.0 * b + 2.0 * r2 * (a.cross(b.cross(a)) + c.cross(b.cross(c)));
      const Vec3 gc = 2.0 * c + 2.0 * r2 * (a.cross(c.cross(a)) + b.cross(c.cross(b)));
      H[0].row(n) = w_(n) * ga.transpose();
      H[1].row(n) = w_(n) * gb.transpose();
      H[2].row(n) = w_(n) * gc.transpose();
    }
    MapValues G = D_.op(0, 0).transpose() * H[0];
    G += D_.op(1, 0).transpose() * H[1];
    G += D_.op(2, 0).transpose() * H[2];
    return G;
  }

  /// L^2 norm of the L^2 gradient G/w: sqrt(sum_n |G_n|^2 / w_n).
  double l2_grad_norm(const MapValues& G) const {
    return std::sqrt((G.rowwise().squaredNorm().array() / w_.array()).sum());
  }

 private:
  const Collocation& D_;
  double rho_;
  Eigen::VectorXd w_;
};

/// Remove the normal component at every node.
inline MapValues project_tangent(const MapValues& U, MapValues G) {
  for (Eigen::Index n = 0; n < U.rows(); ++n) G.row(n) -= G.row(n).dot(U.row(n)) * U.row(n);
  return G;
}

inline MapValues renormalize(MapValues U) {
  U.rowwise().normalize();
  return U;
}

/// Gradient of the discrete FS_rho with respect to nodal values, projected to
/// each tangent plane T_u S^2 (Euclidean pairing over nodes).
inline MapValues fs_gradient(const MapField& u, double rho, const Collocation& D) {
  return project_tangent(u.values, DiscreteFS(D, rho).gradient(u.values));
}

inline double discrete_fs(const MapField& u, double rho, const Collocation& D) {
  return DiscreteFS(D, rho).energy(u.values);
}

/// Relative error between <G, v> and the one-sided difference
/// (E(Pi(u + eps v)) - E(u)) / eps, Pi the nodal normalization; with central = true
/// the symmetric difference (E(Pi(u + eps v)) - E(Pi(u - eps v))) / (2 eps) is used,
/// which removes the O(eps) bias that dominates near critical points.
inline double gradient_fd_error(const DiscreteFS& F, const MapValues& U, const MapValues& G, const MapValues& v,
                                double eps = 1e-6, bool central = false) {
  const double e1 = F.energy(renormalize(U + eps * v));
  const double fd = central ? (e1 - F.energy(renormalize(U - eps * v))) / (2 * eps) : (e1 - F.energy(U)) / eps;
  const double an = (G.array() * v.array()).sum();
  // Cauchy-Schwarz scale: stays meaningful when <G, v> happens to be near zero
  return std::abs(fd - an) / std::max(G.norm() * v.norm(), 1e-300);
}

// -- monitoring ------------------------------------------------------------------

/// Q of a nodal map from the spectral coefficients of its collocation pullback
/// (closedness is not enforced here; the remainder is returned).
struct QEstimate {
  double q = 0.0;
  double remainder = 0.0;
  double dist_to_E01 = 0.0;
};

inline QEstimate q_estimate(const MapValues& U, int K, const SpectralBases& bases, const Collocation& D) {
  const TwoFormField a = pullback_area(MapField{U, nullptr}, D, DiffMode::Collocation);
  const SpectralCoeffs c = decompose(a, K, bases);
  QEstimate r;
  r.q = hopf_from_coeffs(c);
  r.remainder = c.remainder;
  r.dist_to_E01 = project_e0(a, D.grid()).distance;
  return r;
}

// -- band-limited Sobolev preconditioner ---------------------------------------------

/// L^2(w)-orthonormal basis of the restrictions of polynomials of degree <= p,
/// ordered by degree; each vector carries the degree k of the spherical
/// harmonic block it lies in. Descent directions are projected onto this space
/// and weighted by 1 / (1 + k(k+2)), an H^1 metric. Grid-scale modes, which the
/// collocation energy under-counts, are thereby never excited.
class SmoothSpace {
 public:
  SmoothSpace(const GridSpec& g, int p) : p_(p) {
    if (p < 1) throw std::invalid_argument("SmoothSpace: band must be >= 1");
    const auto N = static_cast<Eigen::Index>(g.size());
    sw_.resize(N);
    for (Eigen::Index n = 0; n < N; ++n) sw_(n) = std::sqrt(g.weights()[static_cast<std::size_t>(n)]);
    std::vector<Eigen::VectorXd> cols;
    for (int k = 0; k <= p; ++k) {
      const MonomialBasis B(k);
      for (int m = 0; m < B.size(); ++m) {
        Eigen::VectorXd v(N);
        for (Eigen::Index n = 0; n < N; ++n) {
          const Vec4& x = g.points()[static_cast<std::size_t>(n)];
          const Exponent& e = B[m];
          v(n) = sw_(n) * std::pow(x(0), e[0]) * std::pow(x(1), e[1]) * std::pow(x(2), e[2]) * std::pow(x(3), e[3]);
        }
        // two-pass Gram-Schmidt against the accepted columns
        const double n0 = v.norm();
        for (int pass = 0; pass < 2; ++pass)
          for (const auto& q : cols) v -= q.dot(v) * q;
        if (v.norm() > 1e-8 * n0) {
          cols.push_back(v / v.norm());
          degree_.push_back(k);
        }
      }
    }
    Q_.resize(N, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) Q_.col(static_cast<Eigen::Index>(j)) = cols[j];
    sigma_.resize(Q_.cols());
    for (Eigen::Index j = 0; j < Q_.cols(); ++j) {
      const double k = degree_[static_cast<std::size_t>(j)];
      sigma_(j) = 1.0 / (1.0 + k * (k + 2.0));
    }
  }

  int band() const { return p_; }
  Eigen::Index dim() const { return Q_.cols(); }
  const std::vector<int>& degrees() const { return degree_; }

  /// Coefficients <phi_j, f>_w of an L^2-gradient-type field f (per component).
  Eigen::MatrixXd coefficients(const MapValues& f) const { return Q_.transpose() * (f.array().colwise() * sw_.array()).matrix(); }
  /// Field sum_j phi_j c_j at the nodes.
  MapValues field(const Eigen::MatrixXd& c) const { return ((Q_ * c).array().colwise() / sw_.array()).matrix(); }
  const Eigen::VectorXd& sigma() const { return sigma_; }

 private:
  int p_;
  Eigen::VectorXd sw_, sigma_;
  Eigen::MatrixXd Q_;
  std::vector<int> degree_;
};

// -- the flow --------------------------------------------------------------------

/// Smooth random tangent field: a random ambient polynomial vector field of
/// degree <= degree projected to T_u S^2, scaled to max nodal norm 1.
inline MapValues random_tangent_field(const MapField& u, const GridSpec& g, std::mt19937_64& rng, int degree = 2) {
  std::normal_distribution<double> n01;
  MapValues V = MapValues::Zero(u.size(), 3);
  for (int d = 0; d <= degree; ++d) {
    const MonomialBasis B(d);
    Eigen::MatrixXd C(B.size(), 3);
    for (Eigen::Index k = 0; k < C.size(); ++k) C.data()[k] = n01(rng);
    for (std::size_t n = 0; n < g.size(); ++n)
      V.row(static_cast<Eigen::Index>(n)) += (B.evaluate(g.points()[n]).transpose() * C);
  }
  V = project_tangent(u.values, V);
  const double m = V.rowwise().norm().maxCoeff();
  if (!(m > 0)) throw std::runtime_error("random_tangent_field: degenerate draw");
  return V / m;
}

inline FlowTrace run_flow(const MapField& u0, const FlowConfig& cfg, const Collocation& D, const SpectralBases& bases,
                          std::uint64_t fd_seed = 1) {
  cfg.validate();
  const GridSpec& g = D.grid();
  if (u0.size() != static_cast<Eigen::Index>(g.size())) throw std::invalid_argument("run_flow: grid mismatch");
  if (cfg.monitor_K > bases.K()) throw std::invalid_argument("run_flow: monitor truncation exceeds the built bases");
  const DiscreteFS F(D, cfg.rho);
  const SmoothSpace S(g, cfg.band > 0 ? cfg.band : std::max(1, g.n_ang() / 4));
  const Eigen::VectorXd& w = F.weights();
  std::mt19937_64 rng(fd_seed);

  FlowTrace tr;
  MapValues U = renormalize(u0.values);
  double E = F.energy(U);
  if (!std::isfinite(E)) throw std::runtime_error("run_flow: non-finite initial energy");

  // Tangent L^2 gradient, its band-limited coefficients, and the direction.
  MapValues G, dir;
  Eigen::MatrixXd C;
  auto refresh = [&] {
    G = F.gradient(U);
    const MapValues gl2 = project_tangent(U, (G.array().colwise() / w.array()).matrix());
    C = S.coefficients(gl2);
    dir = project_tangent(U, -S.field(C.array().colwise() * S.sigma().array()));
  };
  refresh();
  double s = cfg.step;
  MapValues U_prev, G_prev;

  auto monitor = [&](FlowRecord& r) {
    const QEstimate q = q_estimate(U, cfg.monitor_K, bases, D);
    r.q_estimate = q.q;
    r.dist_to_E01 = q.dist_to_E01;
    return cfg.q_lo <= q.q && q.q <= cfg.q_hi;
  };

  for (int it = 0;; ++it) {
    FlowRecord rec;
    rec.iteration = it;
    rec.energy = E;
    rec.grad_norm = C.norm();  // L^2 norm of the band-limited tangent gradient
    rec.step = it == 0 ? 0.0 : s;
    const bool converged = rec.grad_norm <= cfg.grad_tol;
    const bool last = converged || it >= cfg.max_iter;
    bool in_band = true;
    if (it % cfg.q_every == 0 || last) in_band = monitor(rec);
    if (cfg.fd_check_every > 0 && it % cfg.fd_check_every == 0) {
      const MapValues v = random_tangent_field(MapField{U, nullptr}, g, rng);
      tr.fd_checks.emplace_back(it, gradient_fd_error(F, U, project_tangent(U, G), v, 1e-6, true));
    }
    tr.records.push_back(rec);
    if (!in_band) {
      tr.status = FlowStatus::QEscaped;
      break;
    }
    if (converged) {
      tr.status = FlowStatus::Converged;
      break;
    }
    if (it >= cfg.max_iter) {
      tr.status = FlowStatus::MaxIter;
      break;
    }

    const double slope = (G.array() * dir.array()).sum();  // = -sum sigma_j c_j^2 up to the tangent projection
    // Barzilai-Borwein first trial in the preconditioner metric.
    if (it > 0) {
      const MapValues dx = U - U_prev, dg = G - G_prev;
      const Eigen::MatrixXd cx = S.coefficients(dx);
      const double num = (cx.array().square().colwise() / S.sigma().array()).sum();
      const double den = (dx.array() * dg.array()).sum();
      if (den > 0 && std::isfinite(num / den)) s = std::clamp(num / den, 1e-6 * cfg.step, 1e3 * cfg.step);
    }
    bool accepted = false;
    for (int h = 0; h < 60 && slope < 0; ++h, s *= 0.5) {
      MapValues Un = renormalize(U + s * dir);
      const double En = F.energy(Un);
      if (!std::isfinite(En)) continue;
      if (En <= E + 1e-4 * s * slope && En < E) {
        U_prev = U;
        G_prev = G;
        U = std::move(Un);
        E = En;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No representable decrease along the direction: floating-point floor.
      tr.status = FlowStatus::Stalled;
      if (std::isnan(tr.records.back().q_estimate)) monitor(tr.records.back());
      break;
    }
    refresh();
    tr.max_unit_defect = std::max(tr.max_unit_defect, (U.rowwise().norm().array() - 1.0).abs().maxCoeff());
  }
  tr.terminal = MapField{U, nullptr};
  return tr;
}

inline void write_trace_csv(const FlowTrace& tr, std::ostream& os) {
  os << "iteration,energy,grad_norm,q_estimate,dist_to_E01\n" << std::setprecision(17);
  for (const auto& r : tr.records) {
    os << r.iteration << ',' << r.energy << ',' << r.grad_norm << ',';
    if (!std::isnan(r.q_estimate)) os << r.q_estimate;
    os << ',';
    if (!std::isnan(r.dist_to_E01)) os << r.dist_to_E01;
    os << '\n';
  }
}

// -- perturbations ------------------------------------------------------------------

/// Tangent field v at u whose linearized pullback perturbation d eta, with
/// eta = <u x v, du>, best matches d psi for a target potential psi: at each
/// node the 3x2 least-squares problem eta_i(v) = psi_i is solved for v in T_u S^2.
/// Scaled to max nodal norm 1.
struct AlignedField {
  MapValues v;
  double alignment = 0.0;  // <d eta, d psi> / (|d eta| |d psi|) in L^2
};

inline AlignedField aligned_tangent_field(const MapField& u, const OneFormField& psi, const TwoFormField& dpsi,
                                          const Collocation& D) {
  const GridSpec& g = D.grid();
  const auto J = differential(u, D);
  const Eigen::Index N = u.size();
  MapValues W(N, 3);
  OneFormField eta = OneFormField::zeros(g);
  for (Eigen::Index n = 0; n < N; ++n) {
    const Vec3 un = u.values.row(n).transpose();
    // orthonormal tangent frame (f, u x f)
    Vec3 f = J.d[1].row(n).transpose();
    if (f.norm() < 1e-12) f = un.unitOrthogonal();
    f = (f - f.dot(un) * un).normalized();
    const Vec3 f2 = un.cross(f);
    Eigen::Matrix<double, 3, 2> A;
    for (int i = 0; i < 3; ++i) {
      const Vec3 di = J.d[i].row(n).transpose();
      A(i, 0) = f.dot(di);
      A(i, 1) = f2.dot(di);
    }
    const Eigen::Vector3d rhs(psi[0](n), psi[1](n), psi[2](n));
    const Eigen::Vector2d x = A.colPivHouseholderQr().solve(rhs);
    const Vec3 w = x(0) * f + x(1) * f2;  // w = u x v
    W.row(n) = w.cross(un).transpose();   // v = w x u
    eta.set(n, A * x);
  }
  AlignedField out;
  const double m = W.rowwise().norm().maxCoeff();
  if (!(m > 0)) throw std::runtime_error("aligned_tangent_field: zero field");
  out.v = W / m;
  const TwoFormField de = exterior_derivative(eta, D);
  out.alignment = l2_inner(de, dpsi, g) / (l2_norm(de, g) * l2_norm(dpsi, g));
  return out;
}

/// E_1^+ eigen-potential along the direction of smallest G_1 contribution.
inline Potential e1_plus_potential(const SpectralBases& bases) {
  return potential_from_coeffs(bases, 1, 1, most_parallel_direction(bases, 1, 1));
}

/// Normalized start u = Pi(base + amplitude v).
inline MapField perturbed_start(const MapField& base, const MapValues& v, double amplitude) {
  return MapField{renormalize(base.values + amplitude * v), nullptr};
}

// -- stability sweep -------------------------------------------------------------------

struct PerturbationSpec {
  enum class Kind { Random, E1Plus } kind = Kind::E1Plus;
  double amplitude = 0.05;
  std::uint64_t seed = 1;
};

struct SweepRow {
  double rho = 0.0;
  double fs_hopf = 0.0;         // discrete FS_rho(h)
  double start_energy = 0.0;
  double min_energy = 0.0;
  double terminal_energy = 0.0;
  bool descended = false;       // min energy below fs_hopf - tol
  double margin = 0.0;          // fs_hopf - min_energy
  int first_below = -1;
  int iterations = 0;
  FlowStatus status = FlowStatus::MaxIter;
  double terminal_q = std::numeric_limits<double>::quiet_NaN();
};

struct SweepReport {
  std::vector<SweepRow> rows;
  // Largest rho without descent below every rho with descent, if ordered so.
  std::optional<double> stable_up_to, unstable_from;
};

inline MapValues build_perturbation(const MapField& h, const PerturbationSpec& spec, const Collocation& D,
                                    const SpectralBases& bases) {
  if (spec.kind == PerturbationSpec::Kind::Random) {
    std::mt19937_64 rng(spec.seed);
    return random_tangent_field(h, D.grid(), rng);
  }
  const Potential p = e1_plus_potential(bases);
  return aligned_tangent_field(h, p.phi, p.dphi, D).v;
}

inline SweepReport stability_sweep(const std::vector<double>& rhos, const PerturbationSpec& spec, FlowConfig cfg,
                                   const Collocation& D, const SpectralBases& bases, double tol_rel = 1e-9) {
  SweepReport rep;
  if (rhos.empty()) return rep;
  for (double r : rhos)
    if (!(r > 0 && r <= 4)) throw std::invalid_argument("stability_sweep: rho values must lie in (0, 4]");
  const MapField h = sample_map(hopf_fn(), D.grid());
  const MapValues v = build_perturbation(h, spec, D, bases);
  const MapField u0 = perturbed_start(h, v, spec.amplitude);
  for (double r : rhos) {
    cfg.rho = r;
    SweepRow row;
    row.rho = r;
    row.fs_hopf = discrete_fs(h, r, D);
    const FlowTrace tr = run_flow(u0, cfg, D, bases);
    row.start_energy = tr.records.front().energy;
    row.min_energy = tr.min_energy();
    row.terminal_energy = tr.records.back().energy;
    const double level = row.fs_hopf * (1.0 - tol_rel);
    row.first_below = tr.first_below(level);
    row.descended = row.first_below >= 0;
    row.margin = row.fs_hopf - row.min_energy;
    row.iterations = tr.records.back().iteration;
    row.status = tr.status;
    row.terminal_q = tr.last_q();
    rep.rows.push_back(row);
  }
  double max_stable = -1, min_unstable = std::numeric_limits<double>::infinity();
  for (const auto& row : rep.rows) {
    if (row.descended) min_unstable = std::min(min_unstable, row.rho);
    else max_stable = std::max(max_stable, row.rho);
  }
  if (max_stable > 0) rep.stable_up_to = max_stable;
  if (std::isfinite(min_unstable)) rep.unstable_from = min_unstable;
  return rep;
}

inline void write_sweep_csv(const SweepReport& rep, std::ostream& os) {
  os << "rho,fs_hopf,start_energy,min_energy,terminal_energy,descended,margin,first_below,iterations,status,terminal_q\n"
     << std::setprecision(17);
  for (const auto& r : rep.rows)
    os << r.rho << ',' << r.fs_hopf << ',' << r.start_energy << ',' << r.min_energy << ',' << r.terminal_energy << ','
       << (r.descended ? 1 : 0) << ',' << r.margin << ',' << r.first_below << ',' << r.iterations << ','
       << to_string(r.status) << ',' << r.terminal_q << '\n';
}

}  // namespace hopflab
