#pragma once

// Maps S^3 -> S^2 (and S^3 -> S^3, S^2 -> S^2) sampled on the grid.
//
// Analytic maps are stored as closures over dual numbers: evaluating at
// x + eps*tau gives the exact frame-direction derivative. The closures are
// evaluated on a neighbourhood of the sphere; only tangential derivatives are
// ever used, so any smooth extension is as good as another.

#include "hopflab/collocation.hpp"
#include "hopflab/dual.hpp"
#include "hopflab/forms.hpp"
#include "hopflab/geometry.hpp"

#include <complex>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace hopflab {

using DualD = Dual<double>;
using S2Fn = std::function<Vec3T<DualD>(const Vec4T<DualD>&)>;      // S^3 -> S^2
using S3Fn = std::function<Vec4T<DualD>(const Vec4T<DualD>&)>;      // S^3 -> S^3
using SphereFn = std::function<Vec3T<DualD>(const Vec3T<DualD>&)>;  // S^2 -> S^2

using MapValues = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using S3Values = Eigen::Matrix<double, Eigen::Dynamic, 4>;

struct MapField {
  MapValues values;                    // one unit vector per node (row)
  std::shared_ptr<const S2Fn> analytic;  // exact differential when present

  Eigen::Index size() const { return values.rows(); }
  double max_unit_defect() const { return (values.rowwise().norm().array() - 1.0).abs().maxCoeff(); }
};

struct S3MapField {
  S3Values values;
  std::shared_ptr<const S3Fn> analytic;

  Eigen::Index size() const { return values.rows(); }
};

/// Values and frame-direction derivatives d[i] = tau_i u, one row per node.
template <class M>
struct Jet {
  M value;
  std::array<M, 3> d;
};

enum class DiffMode { Auto, Collocation };

// -- elementary maps ---------------------------------------------------------

/// Inverse stereographic projection z -> (2z, |z|^2 - 1) / (|z|^2 + 1).
inline Vec3 stereographic(std::complex<double> z) {
  const double n = std::norm(z);
  return Vec3(2 * z.real(), 2 * z.imag(), n - 1) / (n + 1);
}
inline Vec3 stereographic_infinity() { return {0, 0, 1}; }

/// h(z, w) = (2 conj(z) w, |z|^2 - |w|^2); see the orientation note in the README.
template <class S>
Vec3T<S> hopf_map_t(const Vec4T<S>& x) {
  const Cplx<S> z{x[0], x[1]}, w{x[2], x[3]};
  const Cplx<S> zw = conj(z) * w;
  return {2.0 * zw.re, 2.0 * zw.im, norm2(z) - norm2(w)};
}

inline Vec3 hopf_map(const Vec4& x) {
  const auto r = hopf_map_t<double>({x(0), x(1), x(2), x(3)});
  return {r[0], r[1], r[2]};
}

namespace detail {

template <class S>
Vec3T<S> normalize3(const Vec3T<S>& p) {
  using std::sqrt;
  const S n = sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
  return {p[0] / n, p[1] / n, p[2] / n};
}

template <class S>
Vec4T<S> normalize4(const Vec4T<S>& p) {
  using std::sqrt;
  const S n = sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3]);
  return {p[0] / n, p[1] / n, p[2] / n, p[3] / n};
}

/// p in S^2 as a ratio P/Q of the stereographic coordinate. Two branches keep
/// both P and Q away from zero on their half.
template <class S>
std::pair<Cplx<S>, Cplx<S>> chart(const Vec3T<S>& p) {
  if (value_of(p[2]) < 0.0) return {Cplx<S>{p[0], p[1]}, Cplx<S>{1.0 - p[2], S(0.0)}};
  return {Cplx<S>{1.0 + p[2], S(0.0)}, Cplx<S>{p[0], -p[1]}};
}

/// Inverse stereographic image of A/B.
template <class S>
Vec3T<S> unchart(const Cplx<S>& A, const Cplx<S>& B) {
  const Cplx<S> ab = A * conj(B);
  const S a2 = norm2(A), b2 = norm2(B);
  const S den = a2 + b2;
  return {2.0 * ab.re / den, 2.0 * ab.im / den, (a2 - b2) / den};
}

inline Vec4T<DualD> seeded(const Vec4& x, const Vec4& dir) {
  return {DualD(x(0), dir(0)), DualD(x(1), dir(1)), DualD(x(2), dir(2)), DualD(x(3), dir(3))};
}

inline Vec4T<DualD> lift(const Vec4& x) { return seeded(x, Vec4::Zero()); }

}  // namespace detail

// -- S^2 -> S^2 catalogue (written in the stereographic chart) ----------------

inline SphereFn sphere_identity() {
  return [](const Vec3T<DualD>& p) { return p; };
}

/// z -> z^n.
inline SphereFn sphere_power(int n) {
  if (n < 1) throw std::invalid_argument("sphere_power: n must be >= 1");
  return [n](const Vec3T<DualD>& p) {
    const auto [P, Q] = detail::chart(p);
    return detail::unchart(cpow(P, n), cpow(Q, n));
  };
}

/// z -> conj(z): orientation reversing, degree -1.
inline SphereFn sphere_conjugate() {
  return [](const Vec3T<DualD>& p) {
    const auto [P, Q] = detail::chart(p);
    return detail::unchart(conj(P), conj(Q));
  };
}

/// z -> (a z + b) / (c z + d), ad - bc != 0.
inline SphereFn sphere_mobius(std::complex<double> a, std::complex<double> b, std::complex<double> c,
                              std::complex<double> d) {
  if (std::abs(a * d - b * c) < 1e-12) throw std::invalid_argument("sphere_mobius: degenerate coefficients");
  auto lift = [](std::complex<double> q) { return Cplx<DualD>{DualD(q.real()), DualD(q.imag())}; };
  return [A = lift(a), B = lift(b), C = lift(c), D = lift(d)](const Vec3T<DualD>& p) {
    const auto [P, Q] = detail::chart(p);
    return detail::unchart(A * P + B * Q, C * P + D * Q);
  };
}

/// p -> (p1, p2, kappa p3)/|.|: degree one, not conformal for kappa != 1.
inline SphereFn sphere_stretch(double kappa) {
  if (!(kappa > 0)) throw std::invalid_argument("sphere_stretch: kappa must be positive");
  return [kappa](const Vec3T<DualD>& p) { return detail::normalize3<DualD>({p[0], p[1], p[2] * kappa}); };
}

// -- S^3 -> S^2 and S^3 -> S^3 closures ------------------------------------

inline S2Fn hopf_fn() {
  return [](const Vec4T<DualD>& x) { return hopf_map_t<DualD>(x); };
}

inline S2Fn constant_fn(const Vec3& c) {
  const Vec3 n = c.normalized();
  return [n](const Vec4T<DualD>&) { return Vec3T<DualD>{DualD(n(0)), DualD(n(1)), DualD(n(2))}; };
}

inline S3Fn rotation_fn(const Eigen::Matrix4d& R) {
  return [R](const Vec4T<DualD>& x) {
    Vec4T<DualD> y{};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) y[i] += R(i, j) * x[j];
    return y;
  };
}

inline S3Fn identity_s3_fn() { return rotation_fn(Eigen::Matrix4d::Identity()); }

/// (z, w) -> (z^2, w)/|.|: degree 2.
inline S3Fn square_z_fn() {
  return [](const Vec4T<DualD>& x) {
    const Cplx<DualD> z2 = cpow(Cplx<DualD>{x[0], x[1]}, 2);
    return detail::normalize4<DualD>({z2.re, z2.im, x[2], x[3]});
  };
}

/// (z, w) -> (conj z, w): degree -1.
inline S3Fn conj_z_fn() {
  return [](const Vec4T<DualD>& x) { return Vec4T<DualD>{x[0], -x[1], x[2], x[3]}; };
}

inline S2Fn compose(SphereFn psi, S2Fn u) {
  return [psi = std::move(psi), u = std::move(u)](const Vec4T<DualD>& x) { return psi(u(x)); };
}

inline S2Fn compose(S2Fn u, S3Fn v) {
  return [u = std::move(u), v = std::move(v)](const Vec4T<DualD>& x) { return u(v(x)); };
}

/// Rotation e^{i gamma} acting diagonally on (z, w): the S^1 action whose
/// orbits are the Hopf fibres.
inline Eigen::Matrix4d circle_action(double gamma) {
  const double c = std::cos(gamma), s = std::sin(gamma);
  Eigen::Matrix4d R = Eigen::Matrix4d::Zero();
  R.block<2, 2>(0, 0) << c, -s, s, c;
  R.block<2, 2>(2, 2) << c, -s, s, c;
  return R;
}

/// Haar-random element of SO(4).
inline Eigen::Matrix4d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Eigen::Matrix4d G;
  for (int i = 0; i < 16; ++i) G(i / 4, i % 4) = n01(rng);
  Eigen::HouseholderQR<Eigen::Matrix4d> qr(G);
  Eigen::Matrix4d Q = qr.householderQ();
  const Eigen::Matrix4d Rr = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < 4; ++i)
    if (Rr(i, i) < 0) Q.col(i) *= -1.0;
  if (Q.determinant() < 0) Q.col(0) *= -1.0;
  return Q;
}

// -- sampling ----------------------------------------------------------------

inline MapField sample_map(const S2Fn& f, const GridSpec& g) {
  MapField u;
  u.values.resize(static_cast<Eigen::Index>(g.size()), 3);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto y = f(detail::lift(g.points()[k]));
    for (int c = 0; c < 3; ++c) u.values(static_cast<Eigen::Index>(k), c) = y[c].v;
  }
  u.analytic = std::make_shared<const S2Fn>(f);
  return u;
}

inline S3MapField sample_s3_map(const S3Fn& f, const GridSpec& g) {
  S3MapField v;
  v.values.resize(static_cast<Eigen::Index>(g.size()), 4);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto y = f(detail::lift(g.points()[k]));
    for (int c = 0; c < 4; ++c) v.values(static_cast<Eigen::Index>(k), c) = y[c].v;
  }
  v.analytic = std::make_shared<const S3Fn>(f);
  return v;
}

/// Nodal copy without the analytic evaluator (forces collocation derivatives).
inline MapField nodal_only(const MapField& u) { return MapField{u.values, nullptr}; }

// -- differentials -----------------------------------------------------------

namespace detail {

template <int M, class Fn>
Jet<Eigen::Matrix<double, Eigen::Dynamic, M>> analytic_jet(const Fn& f, const GridSpec& g) {
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, M>;
  const auto N = static_cast<Eigen::Index>(g.size());
  Jet<Mat> J;
  J.value.resize(N, M);
  for (auto& d : J.d) d.resize(N, M);
  for (Eigen::Index k = 0; k < N; ++k) {
    const Vec4& x = g.points()[static_cast<std::size_t>(k)];
    const Frame& fr = g.frames()[static_cast<std::size_t>(k)];
    for (int i = 0; i < 3; ++i) {
      const auto y = f(seeded(x, fr[i]));
      for (int c = 0; c < M; ++c) {
        J.d[i](k, c) = y[c].d;
        if (i == 0) J.value(k, c) = y[c].v;
      }
    }
  }
  return J;
}

template <class Mat>
Jet<Mat> collocation_jet(const Mat& values, const Collocation& D) {
  Jet<Mat> J;
  J.value = values;
  for (int i = 0; i < 3; ++i) J.d[i] = D.op(i, 0) * values;
  return J;
}

}  // namespace detail

inline Jet<MapValues> differential(const MapField& u, const Collocation& D, DiffMode mode = DiffMode::Auto) {
  if (u.size() != static_cast<Eigen::Index>(D.grid().size())) throw std::invalid_argument("differential: grid mismatch");
  if (u.analytic && mode == DiffMode::Auto) return detail::analytic_jet<3>(*u.analytic, D.grid());
  return detail::collocation_jet(u.values, D);
}

inline Jet<S3Values> differential(const S3MapField& v, const Collocation& D, DiffMode mode = DiffMode::Auto) {
  if (v.size() != static_cast<Eigen::Index>(D.grid().size())) throw std::invalid_argument("differential: grid mismatch");
  if (v.analytic && mode == DiffMode::Auto) return detail::analytic_jet<4>(*v.analytic, D.grid());
  return detail::collocation_jet(v.values, D);
}

// -- pullbacks and densities -------------------------------------------------

/// u^* omega_{S^2}: b_i = u . (tau_j u x tau_k u), (i, j, k) cyclic.
inline TwoFormField pullback_area(const Jet<MapValues>& J) {
  const Eigen::Index N = J.value.rows();
  TwoFormField b(N);
  for (Eigen::Index k = 0; k < N; ++k) {
    const Vec3 u = J.value.row(k).transpose();
    const Vec3 d1 = J.d[0].row(k).transpose(), d2 = J.d[1].row(k).transpose(), d3 = J.d[2].row(k).transpose();
    b[0](k) = u.dot(d2.cross(d3));
    b[1](k) = u.dot(d3.cross(d1));
    b[2](k) = u.dot(d1.cross(d2));
  }
  return b;
}

inline TwoFormField pullback_area(const MapField& u, const Collocation& D, DiffMode mode = DiffMode::Auto) {
  return pullback_area(differential(u, D, mode));
}

/// |du|^2 = sum_i |tau_i u|^2.
inline ScalarField dirichlet_density(const Jet<MapValues>& J) {
  return J.d[0].rowwise().squaredNorm() + J.d[1].rowwise().squaredNorm() + J.d[2].rowwise().squaredNorm();
}

inline ScalarField dirichlet_density(const MapField& u, const Collocation& D, DiffMode mode = DiffMode::Auto) {
  return dirichlet_density(differential(u, D, mode));
}

/// (1/4)|du ^ du|^2 with du ^ du the R^3-valued 2-form (du ^ du)(X,Y) = 2 du(X) x du(Y).
inline ScalarField skyrme_density(const Jet<MapValues>& J) {
  const Eigen::Index N = J.value.rows();
  ScalarField s(N);
  for (Eigen::Index k = 0; k < N; ++k) {
    const Vec3 d1 = J.d[0].row(k).transpose(), d2 = J.d[1].row(k).transpose(), d3 = J.d[2].row(k).transpose();
    s(k) = d2.cross(d3).squaredNorm() + d3.cross(d1).squaredNorm() + d1.cross(d2).squaredNorm();
  }
  return s;
}

/// 1/2 |du|^2 - |u^* omega|; nonnegative, zero exactly where u is
/// horizontally weakly conformal.
inline ScalarField conformality_defect(const Jet<MapValues>& J) {
  return 0.5 * dirichlet_density(J) - pointwise_norm(pullback_area(J));
}

inline ScalarField conformality_defect(const MapField& u, const Collocation& D, DiffMode mode = DiffMode::Auto) {
  return conformality_defect(differential(u, D, mode));
}

// -- degrees -----------------------------------------------------------------

struct DegreeResult {
  double raw = 0.0;
  long rounded = 0;
  double gap = 0.0;  // |raw - rounded|, the quality metric

  static DegreeResult from(double raw) {
    DegreeResult r;
    r.raw = raw;
    r.rounded = std::lround(raw);
    r.gap = std::abs(raw - static_cast<double>(r.rounded));
    return r;
  }
};

/// Product grid on S^2 in the coordinates (t, phi) -> (e^{i phi} sin 2t, -cos 2t),
/// Gauss-Legendre in y = -cos 2t, trapezoid in phi.
struct S2Grid {
  Eigen::VectorXd t;
  Eigen::VectorXd wy;  // Gauss weights in y
  int n_phi = 0;
};

inline S2Grid build_s2_grid(int n_t, int n_phi) {
  if (n_t < 2 || n_phi < 4) throw std::invalid_argument("build_s2_grid: resolution too small");
  const GaussRule r = gauss_legendre(n_t);
  S2Grid s;
  s.t = (-r.nodes).array().acos() * 0.5;
  s.wy = r.weights;
  s.n_phi = n_phi;
  return s;
}

/// deg psi = (1/4 pi) int psi^* omega. The chart (t, phi) is negatively
/// oriented, so the integrand is psi . (psi_phi x psi_t).
inline DegreeResult degree_s2(const SphereFn& psi, const S2Grid& s) {
  const double dphi = 2.0 * kPi / s.n_phi;
  double total = 0.0;
  for (Eigen::Index it = 0; it < s.t.size(); ++it) {
    const double t = s.t(it);
    const double s2t = std::sin(2 * t), c2t = std::cos(2 * t);
    for (int j = 0; j < s.n_phi; ++j) {
      const double ph = j * dphi;
      const double cp = std::cos(ph), sp = std::sin(ph);
      // d/dt and d/dphi of the parametrization
      const Vec3T<DualD> pt{DualD(s2t * cp, 2 * c2t * cp), DualD(s2t * sp, 2 * c2t * sp), DualD(-c2t, 2 * s2t)};
      const Vec3T<DualD> pp{DualD(s2t * cp, -s2t * sp), DualD(s2t * sp, s2t * cp), DualD(-c2t, 0.0)};
      const auto a = psi(pt), b = psi(pp);
      const Vec3 v(a[0].v, a[1].v, a[2].v), vt(a[0].d, a[1].d, a[2].d), vp(b[0].d, b[1].d, b[2].d);
      // dt = dy / (2 sin 2t)
      total += s.wy(it) * dphi * v.dot(vp.cross(vt)) / (2.0 * s2t);
    }
  }
  return DegreeResult::from(total / (4.0 * kPi));
}

/// deg v = (1/2 pi^2) int v^* omega_{S^3}, the integrand being det[v, tau_1 v, tau_2 v, tau_3 v].
inline DegreeResult degree_s3(const S3MapField& v, const Collocation& D, DiffMode mode = DiffMode::Auto) {
  const auto J = differential(v, D, mode);
  ScalarField jac(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    Eigen::Matrix4d M;
    M.col(0) = J.value.row(k).transpose();
    for (int i = 0; i < 3; ++i) M.col(i + 1) = J.d[i].row(k).transpose();
    jac(k) = M.determinant();
  }
  return DegreeResult::from(integrate_scalar(jac, D.grid()) / kVolS3);
}

// -- lift identity -----------------------------------------------------------

/// hat u^* theta: coefficients <J v, tau_i v> with J v = (-v2, v1, -v4, v3).
inline OneFormField pullback_theta(const Jet<S3Values>& J) {
  const Eigen::Index N = J.value.rows();
  OneFormField out(N);
  for (Eigen::Index k = 0; k < N; ++k) {
    const Vec4 v = J.value.row(k).transpose();
    const Vec4 Jv(-v(1), v(0), -v(3), v(2));
    for (int i = 0; i < 3; ++i) out[i](k) = Jv.dot(J.d[i].row(k).transpose());
  }
  return out;
}

struct LiftCheck {
  bool consistent = false;
  double consistency_error = 0.0;  // max of |h o hat u - u| and |beta - 2 hat u^* theta|
  double max_residual = std::numeric_limits<double>::quiet_NaN();
};

/// Nodewise |d hat u|^2 - 1/4 |beta|^2 - 1/4 |du|^2 for a caller-supplied
/// triple. The triple's consistency is checked first; the identity is only
/// evaluated when it holds.
inline LiftCheck lift_identity_check(const S3MapField& uhat, const OneFormField& beta, const MapField& u,
                                     const Collocation& D, double tol = 1e-8) {
  const auto Jv = differential(uhat, D);
  const auto Ju = differential(u, D);
  LiftCheck r;
  double err = 0.0;
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    const Vec4 x = Jv.value.row(k).transpose();
    err = std::max(err, (hopf_map(x) - Vec3(u.values.row(k).transpose())).norm());
  }
  const OneFormField two_theta = 2.0 * pullback_theta(Jv);
  err = std::max(err, pointwise_norm(beta - two_theta).maxCoeff());
  r.consistency_error = err;
  r.consistent = err <= tol;
  if (!r.consistent) return r;

  const ScalarField dv2 =
      Jv.d[0].rowwise().squaredNorm() + Jv.d[1].rowwise().squaredNorm() + Jv.d[2].rowwise().squaredNorm();
  const ScalarField b2 = pointwise_dot(beta, beta);
  const ScalarField res = dv2 - 0.25 * b2 - 0.25 * dirichlet_density(Ju);
  r.max_residual = res.cwiseAbs().maxCoeff();
  return r;
}

// -- CSV -----------------------------------------------------------------------

inline void write_map_csv(const MapField& u, std::ostream& os) {
  os << "node,u1,u2,u3\n" << std::setprecision(17);
  for (Eigen::Index k = 0; k < u.size(); ++k)
    os << k << ',' << u.values(k, 0) << ',' << u.values(k, 1) << ',' << u.values(k, 2) << '\n';
}

struct LoadedMap {
  MapField map;
  double max_correction = 0.0;  // largest | |u| - 1 | removed by renormalization
};

inline LoadedMap read_map_csv(std::istream& is, std::size_t expected_nodes) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("map file: empty");
  LoadedMap out;
  out.map.values = MapValues::Constant(static_cast<Eigen::Index>(expected_nodes), 3,
                                       std::numeric_limits<double>::quiet_NaN());
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream rs(line);
    long long idx = -1;
    Vec3 v;
    char s1 = 0, s2 = 0, s3 = 0;
    if (!(rs >> idx >> s1 >> v(0) >> s2 >> v(1) >> s3 >> v(2))) throw std::runtime_error("map file: malformed row");
    if (idx < 0 || static_cast<std::size_t>(idx) >= expected_nodes) throw std::runtime_error("map file: node out of range");
    const double n = v.norm();
    if (!(n > 0) || !std::isfinite(n)) throw std::runtime_error("map file: zero or non-finite value at node " + std::to_string(idx));
    out.max_correction = std::max(out.max_correction, std::abs(n - 1.0));
    out.map.values.row(idx) = (v / n).transpose();
    ++rows;
  }
  if (rows != expected_nodes) throw std::runtime_error("map file: row count does not match the grid");
  return out;
}

}  // namespace hopflab
