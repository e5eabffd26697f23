#pragma once

// Eigenspaces E_k^+- of the operator *d on closed 2-forms of S^3.
//
// E_k^+- consists of restrictions of closed (anti-)self-dual 2-forms on R^4
// whose coefficients are homogeneous polynomials of degree k; the eigenvalue
// is +-(k+2). Bases are found exactly on R^4 as the null space of a linear
// system over monomial coefficients and only then restricted to the grid, so
// the eigen-residual measures the calculus rather than an eigensolver.
//
// Projections never need the restricted members as grid fields: the L^2
// inner product of a field with restrict(P) is a contraction of P's
// coefficients with the field's polynomial moments (see Restrictor).

#include "hopflab/collocation.hpp"
#include "hopflab/forms.hpp"
#include "hopflab/geometry.hpp"
#include "hopflab/poly.hpp"

#include <Eigen/LU>

#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace hopflab {

// -- restriction in bulk ------------------------------------------------------

/// Restriction and moment operator for degree-k polynomial 2-forms on a grid.
/// Coefficients are stored as an n_mono x 6 matrix, one column per pair.
class Restrictor {
 public:
  Restrictor(const GridSpec& g, int degree) : basis_(degree), weights_(g.weights()) {
    const auto N = static_cast<Eigen::Index>(g.size());
    mono_.resize(N, basis_.size());
    for (Eigen::Index k = 0; k < N; ++k) mono_.row(k) = basis_.evaluate(g.points()[static_cast<std::size_t>(k)]).transpose();
    // F(k, 6*i + p) = tau_j^a tau_k^b - tau_j^b tau_k^a for component i with (i,j,k) cyclic, pair p = (a,b).
    pair_.resize(N, 18);
    for (Eigen::Index k = 0; k < N; ++k) {
      const Frame& f = g.frames()[static_cast<std::size_t>(k)];
      for (int i = 0; i < 3; ++i) {
        const Vec4& u = f[(i + 1) % 3];
        const Vec4& v = f[(i + 2) % 3];
        for (int p = 0; p < 6; ++p) {
          const auto [a, b] = kPairs[static_cast<std::size_t>(p)];
          pair_(k, 6 * i + p) = u(a) * v(b) - u(b) * v(a);
        }
      }
    }
  }

  int degree() const { return basis_.degree(); }
  const MonomialBasis& basis() const { return basis_; }

  TwoFormField restrict(const Eigen::MatrixXd& C) const {
    const Eigen::MatrixXd V = mono_ * C;  // N x 6
    TwoFormField out(V.rows());
    for (int i = 0; i < 3; ++i) out[i] = (pair_.middleCols(6 * i, 6).array() * V.array()).rowwise().sum().matrix();
    return out;
  }

  /// Restrictions of several coefficient matrices with one matrix product.
  std::vector<TwoFormField> restrict_many(const std::vector<Eigen::MatrixXd>& Cs) const {
    const auto m = static_cast<Eigen::Index>(Cs.size());
    Eigen::MatrixXd big(mono_.cols(), 6 * m);
    for (Eigen::Index j = 0; j < m; ++j) big.middleCols(6 * j, 6) = Cs[static_cast<std::size_t>(j)];
    const Eigen::MatrixXd V = mono_ * big;
    std::vector<TwoFormField> out;
    out.reserve(Cs.size());
    for (Eigen::Index j = 0; j < m; ++j) {
      TwoFormField f(V.rows());
      for (int i = 0; i < 3; ++i)
        f[i] = (pair_.middleCols(6 * i, 6).array() * V.middleCols(6 * j, 6).array()).rowwise().sum().matrix();
      out.push_back(std::move(f));
    }
    return out;
  }

  /// M such that <alpha, restrict(C)>_{L^2} = sum(M .* C).
  Eigen::MatrixXd moments(const TwoFormField& alpha) const {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(alpha.size(), 6);
    for (int i = 0; i < 3; ++i) {
      const Eigen::ArrayXd wa = weights_.array() * alpha[i].array();
      G.array() += pair_.middleCols(6 * i, 6).array().colwise() * wa;
    }
    return mono_.transpose() * G;
  }

 private:
  MonomialBasis basis_;
  ScalarField weights_;
  Eigen::MatrixXd mono_;
  Eigen::MatrixXd pair_;
};

inline Eigen::MatrixXd to_coeff_matrix(const AmbientPolyForm& P) {
  Eigen::MatrixXd C(P.coeff[0].size(), 6);
  for (int p = 0; p < 6; ++p) C.col(p) = P.coeff[static_cast<std::size_t>(p)];
  return C;
}

inline AmbientPolyForm from_coeff_matrix(int degree, const Eigen::MatrixXd& C) {
  AmbientPolyForm P;
  P.degree = degree;
  for (int p = 0; p < 6; ++p) P.coeff[static_cast<std::size_t>(p)] = C.col(p);
  return P;
}

// -- the linear system on R^4 -------------------------------------------------

/// Unknowns (f1, f2, f3), each a degree-k polynomial. With s = +-1:
/// A01 = f1, A23 = s f1; A02 = f2, A13 = -s f2; A03 = f3, A12 = s f3.
inline Eigen::MatrixXd self_dual_coefficients(int degree, int sign, const Eigen::VectorXd& f) {
  const int n = MonomialBasis(degree).size();
  if (f.size() != 3 * n) throw std::invalid_argument("self_dual_coefficients: wrong unknown count");
  const double s = sign >= 0 ? 1.0 : -1.0;
  Eigen::MatrixXd C(n, 6);
  C.col(0) = f.segment(0, n);
  C.col(1) = f.segment(n, n);
  C.col(2) = f.segment(2 * n, n);
  C.col(3) = s * f.segment(2 * n, n);
  C.col(4) = -s * f.segment(n, n);
  C.col(5) = s * f.segment(0, n);
  return C;
}

/// Rows imposing d A = 0 and d^* A = 0 on R^4 for a general coefficient
/// matrix (6n unknowns, pair-major).
inline Eigen::MatrixXd closed_coclosed_rows(int degree) {
  const MonomialBasis B(degree);
  const int n = B.size();
  if (degree == 0) return Eigen::MatrixXd::Zero(0, 6 * n);
  const MonomialBasis Bm(degree - 1);
  const int m = Bm.size();
  // Entry of A_ab as a signed pair reference.
  auto entry = [](int a, int b) -> std::pair<int, double> {
    return a < b ? std::pair<int, double>{pair_index(a, b), 1.0} : std::pair<int, double>{pair_index(b, a), -1.0};
  };
  // d/dx_a of column p contributes to row-block r.
  std::vector<std::vector<std::tuple<int, int, double>>> eqs;  // each: list of (var a, pair p, sign)
  static constexpr int triples[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  for (const auto& t : triples) {
    const int a = t[0], b = t[1], c = t[2];
    std::vector<std::tuple<int, int, double>> e;
    auto add = [&](int var, int i, int j, double sgn) {
      const auto [p, s] = entry(i, j);
      e.emplace_back(var, p, sgn * s);
    };
    add(a, b, c, 1.0);
    add(b, c, a, 1.0);
    add(c, a, b, 1.0);
    eqs.push_back(e);
  }
  for (int b = 0; b < 4; ++b) {
    std::vector<std::tuple<int, int, double>> e;
    for (int a = 0; a < 4; ++a) {
      if (a == b) continue;
      const auto [p, s] = entry(a, b);
      e.emplace_back(a, p, s);
    }
    eqs.push_back(e);
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(eqs.size()) * m, 6 * n);
  for (std::size_t q = 0; q < eqs.size(); ++q) {
    for (const auto& [var, p, sgn] : eqs[q]) {
      for (int j = 0; j < n; ++j) {
        Exponent e = B[j];
        if (e[var] == 0) continue;
        const double c = e[var];
        e[var] -= 1;
        const int row = static_cast<int>(q) * m + Bm.index_of(e);
        A(row, p * n + j) += sgn * c;
      }
    }
  }
  return A;
}

/// The system in the (f1, f2, f3) unknowns of the given duality.
inline Eigen::MatrixXd eigenspace_system(int degree, int sign) {
  const int n = MonomialBasis(degree).size();
  const Eigen::MatrixXd A = closed_coclosed_rows(degree);
  // Chain through the self-dual parametrization: columns of the map f -> C.
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(6 * n, 3 * n);
  for (int u = 0; u < 3 * n; ++u) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(3 * n);
    f(u) = 1.0;
    const Eigen::MatrixXd C = self_dual_coefficients(degree, sign, f);
    for (int p = 0; p < 6; ++p) P.block(p * n, u, n, 1) = C.col(p);
  }
  return A * P;
}

/// Residual of d A = 0, d^* A = 0 and (anti-)self-duality for an ambient form.
inline double ambient_residual(const AmbientPolyForm& P, int sign) {
  const int n = static_cast<int>(P.coeff[0].size());
  Eigen::VectorXd x(6 * n);
  for (int p = 0; p < 6; ++p) x.segment(p * n, n) = P.coeff[static_cast<std::size_t>(p)];
  double r = P.degree > 0 ? (closed_coclosed_rows(P.degree) * x).cwiseAbs().maxCoeff() : 0.0;
  const double s = sign >= 0 ? 1.0 : -1.0;
  r = std::max(r, (P.coeff[5] - s * P.coeff[0]).cwiseAbs().maxCoeff());
  r = std::max(r, (P.coeff[4] + s * P.coeff[1]).cwiseAbs().maxCoeff());
  r = std::max(r, (P.coeff[3] - s * P.coeff[2]).cwiseAbs().maxCoeff());
  return r;
}

// -- bases --------------------------------------------------------------------

struct EigenBasis {
  int k = 0;
  int sign = 1;
  std::vector<AmbientPolyForm> members;
  std::vector<TwoFormField> fields;  // restricted members; may be empty when not kept
  bool normalized = false;

  double eigenvalue() const { return sign * (k + 2.0); }
  int dim() const { return static_cast<int>(members.size()); }
};

namespace detail {

/// Orthonormalizes the columns of X (coefficient vectors) in the inner product
/// x^T G y; classical Gram-Schmidt with one re-orthogonalization pass. Returns T
/// with X T orthonormal.
inline Eigen::MatrixXd gram_schmidt(const Eigen::MatrixXd& G) {
  const Eigen::Index d = G.rows();
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < j; ++i) {
        const double c = T.col(i).dot(G * T.col(j));
        T.col(j) -= c * T.col(i);
      }
    }
    const double nrm2 = T.col(j).dot(G * T.col(j));
    if (!(nrm2 > 0)) throw std::runtime_error("eigenbasis: linearly dependent restrictions");
    T.col(j) /= std::sqrt(nrm2);
  }
  return T;
}

}  // namespace detail

/// Builds E_k^sign. The restricted members are kept as grid fields only when
/// keep_fields is set (they are not needed for projections).
inline EigenBasis build_eigenbasis(int k, int sign, const GridSpec& g, bool keep_fields = true,
                                   const Restrictor* restrictor = nullptr) {
  if (k < 0) throw std::invalid_argument("build_eigenbasis: k must be >= 0");
  if (sign != 1 && sign != -1) throw std::invalid_argument("build_eigenbasis: sign must be +1 or -1");
  const int n = MonomialBasis(k).size();

  Eigen::MatrixXd kernel;
  const Eigen::MatrixXd A = eigenspace_system(k, sign);
  if (A.rows() == 0) {
    kernel = Eigen::MatrixXd::Identity(3 * n, 3 * n);
  } else {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    lu.setThreshold(1e-10);
    kernel = lu.kernel();
    if (lu.dimensionOfKernel() == 0) kernel.resize(3 * n, 0);
  }
  if (kernel.cols() == 0) throw std::runtime_error("build_eigenbasis: empty null space for k = " + std::to_string(k));
  // Well-conditioned starting vectors before the L^2 pass.
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(kernel);
  kernel = qr.householderQ() * Eigen::MatrixXd::Identity(kernel.rows(), kernel.cols());

  std::optional<Restrictor> own;
  if (restrictor == nullptr) {
    own.emplace(g, k);
    restrictor = &*own;
  }
  const auto d = kernel.cols();
  std::vector<Eigen::MatrixXd> raw(static_cast<std::size_t>(d));
  Eigen::MatrixXd G(d, d);
  {
    // Stacked restrictions, sqrt-weighted so that G = F^T F.
    const auto N = static_cast<Eigen::Index>(g.size());
    const Eigen::ArrayXd sw = g.weights().array().sqrt();
    Eigen::MatrixXd F(3 * N, d);
    for (Eigen::Index j = 0; j < d; ++j) raw[static_cast<std::size_t>(j)] = self_dual_coefficients(k, sign, kernel.col(j));
    const std::vector<TwoFormField> rf = restrictor->restrict_many(raw);
    for (Eigen::Index j = 0; j < d; ++j)
      for (int i = 0; i < 3; ++i) F.col(j).segment(i * N, N) = (rf[static_cast<std::size_t>(j)][i].array() * sw).matrix();
    G.noalias() = F.transpose() * F;
  }
  const Eigen::MatrixXd T = detail::gram_schmidt(G);

  EigenBasis B;
  B.k = k;
  B.sign = sign;
  B.normalized = true;
  std::vector<Eigen::MatrixXd> Cs;
  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, 6);
    for (Eigen::Index i = 0; i <= j; ++i) C += T(i, j) * raw[static_cast<std::size_t>(i)];
    B.members.push_back(from_coeff_matrix(k, C));
    Cs.push_back(std::move(C));
  }
  if (keep_fields) B.fields = restrictor->restrict_many(Cs);
  return B;
}

/// E_0^sign from the three explicit constant forms, normalized in L^2.
inline EigenBasis basis_e0(int sign, const GridSpec& g) {
  EigenBasis B;
  B.k = 0;
  B.sign = sign >= 0 ? 1 : -1;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Matrix4d A = e0_matrix(B.sign, i);
    TwoFormField f = restrict_constant_form(A, g);
    const double nrm = l2_norm(f, g);
    B.members.push_back((1.0 / nrm) * AmbientPolyForm::constant(A));
    B.fields.push_back((1.0 / nrm) * f);
  }
  B.normalized = true;
  return B;
}

/// Restricted member j, computed on demand when the basis does not keep fields.
inline TwoFormField member_field(const EigenBasis& B, int j, const GridSpec& g) {
  if (j < 0 || j >= B.dim()) throw std::out_of_range("member_field: index");
  if (!B.fields.empty()) return B.fields[static_cast<std::size_t>(j)];
  return restrict_two_form(B.members[static_cast<std::size_t>(j)], g);
}

struct EigenCheck {
  double max_eigen_residual = 0.0;  // max_j || *d*alpha_j -+ (k+2) alpha_j ||_{L^2}
  double max_closed_residual = 0.0;  // max_j || d alpha_j ||_{L^2}
  bool degenerate = false;           // some member has (numerically) zero norm
};

/// Recomputes d and *d* of every member with the collocation operators,
/// independently of the construction on R^4.
inline EigenCheck verify_eigen(const EigenBasis& B, const Collocation& D) {
  const GridSpec& g = D.grid();
  EigenCheck r;
  for (int j = 0; j < B.dim(); ++j) {
    const TwoFormField a = member_field(B, j, g);
    if (l2_norm(a, g) < 1e-12) r.degenerate = true;
    const TwoFormField res = curl(a, D) - B.eigenvalue() * a;
    r.max_eigen_residual = std::max(r.max_eigen_residual, l2_norm(res, g));
    const ScalarField da = exterior_derivative(a, D);
    r.max_closed_residual = std::max(r.max_closed_residual, std::sqrt(integrate_scalar(da.cwiseAbs2(), g)));
  }
  return r;
}

/// All bases E_k^+- for k <= K on one grid.
class SpectralBases {
 public:
  SpectralBases(const GridSpec& g, int K, bool keep_fields = false) : K_(K), grid_(g) {
    if (K < 0) throw std::invalid_argument("SpectralBases: K must be >= 0");
    for (int k = 0; k <= K; ++k) {
      restrictors_.push_back(std::make_unique<Restrictor>(g, k));
      for (int sign : {1, -1}) bases_.push_back(build_eigenbasis(k, sign, g, keep_fields, restrictors_.back().get()));
    }
  }

  int K() const { return K_; }
  const GridSpec& grid() const { return grid_; }
  const EigenBasis& basis(int k, int sign) const { return bases_.at(static_cast<std::size_t>(2 * k + (sign > 0 ? 0 : 1))); }
  const std::vector<EigenBasis>& all() const { return bases_; }
  const Restrictor& restrictor(int k) const { return *restrictors_.at(static_cast<std::size_t>(k)); }

 private:
  int K_;
  GridSpec grid_;
  std::vector<std::unique_ptr<Restrictor>> restrictors_;
  std::vector<EigenBasis> bases_;
};

struct SpectralCoeffs {
  int K = 0;
  std::map<std::pair<int, int>, Eigen::VectorXd> coeffs;  // (k, sign) -> coefficients
  double norm = 0.0;       // ||alpha||
  double remainder = 0.0;  // ||alpha - sum of projections||

  const Eigen::VectorXd& at(int k, int sign) const { return coeffs.at({k, sign >= 0 ? 1 : -1}); }
  double captured_norm2() const {
    double s = 0.0;
    for (const auto& [key, c] : coeffs) s += c.squaredNorm();
    return s;
  }
};

/// L^2 coefficients over every basis up to K; the remainder is measured on the
/// grid against the reconstructed projection.
inline SpectralCoeffs decompose(const TwoFormField& alpha, int K, const SpectralBases& bases) {
  if (K > bases.K()) throw std::invalid_argument("decompose: truncation exceeds the built bases");
  const GridSpec& g = bases.grid();
  SpectralCoeffs out;
  out.K = K;
  out.norm = l2_norm(alpha, g);
  TwoFormField recon = TwoFormField::zeros(g);
  for (int k = 0; k <= K; ++k) {
    const Restrictor& R = bases.restrictor(k);
    const Eigen::MatrixXd M = R.moments(alpha);
    for (int sign : {1, -1}) {
      const EigenBasis& B = bases.basis(k, sign);
      Eigen::VectorXd c(B.dim());
      Eigen::MatrixXd combo = Eigen::MatrixXd::Zero(M.rows(), 6);
      for (int j = 0; j < B.dim(); ++j) {
        const Eigen::MatrixXd C = to_coeff_matrix(B.members[static_cast<std::size_t>(j)]);
        c(j) = (M.array() * C.array()).sum();
        combo += c(j) * C;
      }
      recon += R.restrict(combo);
      out.coeffs[{k, sign}] = c;
    }
  }
  out.remainder = l2_norm(alpha - recon, g);
  return out;
}

/// Sum of the projections onto E_k^+- for k <= K.
inline TwoFormField reconstruct(const SpectralCoeffs& c, const SpectralBases& bases) {
  TwoFormField out = TwoFormField::zeros(bases.grid());
  for (const auto& [key, v] : c.coeffs) {
    const EigenBasis& B = bases.basis(key.first, key.second);
    Eigen::MatrixXd combo = Eigen::MatrixXd::Zero(MonomialBasis(key.first).size(), 6);
    for (int j = 0; j < B.dim(); ++j) combo += v(j) * to_coeff_matrix(B.members[static_cast<std::size_t>(j)]);
    out += bases.restrictor(key.first).restrict(combo);
  }
  return out;
}

// -- eigen-potentials ---------------------------------------------------------

struct EigenPotential {
  OneFormField psi;    // lambda^{-1} * alpha
  TwoFormField dpsi;   // exact: equals alpha
  double lambda = 0.0;
  double d_residual = 0.0;      // || d psi - alpha || by collocation
  double codiff_residual = 0.0;  // || d^* psi || by collocation
};

/// psi = lambda^{-1} * alpha for an eigenfield *d alpha = lambda alpha. Rejects
/// inputs that are not eigenfields to relative tolerance tol.
inline EigenPotential eigen_potential(const TwoFormField& alpha, double lambda, const Collocation& D, double tol = 1e-7) {
  const GridSpec& g = D.grid();
  if (std::abs(lambda) < 2.0 - 1e-12) throw std::domain_error("eigen_potential: |lambda| >= 2 on closed 2-forms");
  const double an = l2_norm(alpha, g);
  const double eig = l2_norm(curl(alpha, D) - lambda * alpha, g);
  if (eig > tol * std::max(1.0, an)) throw std::invalid_argument("eigen_potential: input is not an eigenfield");
  EigenPotential r;
  r.lambda = lambda;
  r.psi = (1.0 / lambda) * hodge_star(alpha);
  r.dpsi = alpha;
  r.d_residual = l2_norm(exterior_derivative(r.psi, D) - alpha, g);
  r.codiff_residual = std::sqrt(integrate_scalar(codifferential(r.psi, D).cwiseAbs2(), g));
  return r;
}

// -- E_0^+ ------------------------------------------------------------------------

struct E0Projection {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();  // coefficients over the unnormalized forms omega^+_{0,i}
  TwoFormField projection;
  bool nearest_defined = false;
  TwoFormField nearest;   // element of E^+_{0,1} = { sum c_i omega_i : |c| = 4 } closest to alpha
  double distance = 0.0;  // || alpha - nearest ||, NaN when undefined
  double distance_to_span = 0.0;

  Eigen::Matrix4d nearest_matrix() const {
    Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
    const Eigen::Vector3d n = 4.0 * c.normalized();
    for (int i = 0; i < 3; ++i) A += n(i) * e0_matrix(1, i);
    return A;
  }
};

inline E0Projection project_e0(const TwoFormField& alpha, const GridSpec& g, double zero_tol = 1e-12) {
  E0Projection r;
  std::array<TwoFormField, 3> w;
  r.projection = TwoFormField::zeros(g);
  for (int i = 0; i < 3; ++i) {
    w[static_cast<std::size_t>(i)] = restrict_constant_form(e0_matrix(1, i), g);
    // The three restrictions are pointwise orthonormal, so ||omega_i||^2 = 2 pi^2.
    r.c(i) = l2_inner(alpha, w[static_cast<std::size_t>(i)], g) / kVolS3;
    r.projection += r.c(i) * w[static_cast<std::size_t>(i)];
  }
  r.distance_to_span = l2_norm(alpha - r.projection, g);
  const double cn = r.c.norm();
  if (cn <= zero_tol * std::max(1.0, l2_norm(alpha, g))) {
    r.nearest_defined = false;
    r.distance = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.nearest_defined = true;
  r.nearest = (4.0 / cn) * r.projection;
  r.distance = l2_norm(alpha - r.nearest, g);
  return r;
}

// -- SO(4) transport ---------------------------------------------------------------

/// +1 for self-dual, -1 for anti-self-dual, 0 for zero or mixed skew matrices.
inline int duality_sign(const Eigen::Matrix4d& A, double tol = 1e-10) {
  const Eigen::Vector3d sd(A(0, 1) + A(2, 3), A(0, 2) - A(1, 3), A(0, 3) + A(1, 2));
  const Eigen::Vector3d asd(A(0, 1) - A(2, 3), A(0, 2) + A(1, 3), A(0, 3) - A(1, 2));
  const double scale = std::max(1.0, A.norm());
  const bool has_sd = sd.norm() > tol * scale, has_asd = asd.norm() > tol * scale;
  if (has_sd && !has_asd) return 1;
  if (has_asd && !has_sd) return -1;
  return 0;
}

namespace detail {

/// Orthonormal Q with Q^T A Q = mu * e0_matrix(sign, 0), mu = |A|_F / 2.
inline Eigen::Matrix4d canonical_frame(const Eigen::Matrix4d& A, int sign) {
  const double mu = A.norm() / 2.0;
  Eigen::Matrix4d Q;
  const Vec4 e1 = Vec4::UnitX();
  const Vec4 e2 = -A * e1 / mu;
  Vec4 e3 = Vec4::Zero();
  double best = -1.0;
  for (int i = 1; i < 4; ++i) {
    Vec4 v = Vec4::Unit(i);
    v -= v.dot(e1) * e1 + v.dot(e2) * e2;
    if (v.norm() > best) {
      best = v.norm();
      e3 = v;
    }
  }
  e3.normalize();
  const Vec4 e4 = -static_cast<double>(sign) * A * e3 / mu;
  Q << e1, e2, e3, e4;
  return Q;
}

}  // namespace detail

/// R in SO(4) with R^* omega1 = omega2, i.e. R^T A1 R = A2 for the skew
/// coefficient matrices.
inline Eigen::Matrix4d so4_transport(const Eigen::Matrix4d& A1, const Eigen::Matrix4d& A2, double tol = 1e-10) {
  if ((A1 + A1.transpose()).norm() > tol || (A2 + A2.transpose()).norm() > tol) {
    throw std::invalid_argument("so4_transport: matrices must be skew-symmetric");
  }
  if (A1.norm() < tol || A2.norm() < tol) throw std::invalid_argument("so4_transport: zero form has no canonical form");
  if (std::abs(A1.norm() - A2.norm()) > tol * std::max(1.0, A1.norm())) {
    throw std::invalid_argument("so4_transport: forms have different norms");
  }
  const int s1 = duality_sign(A1), s2 = duality_sign(A2);
  if (s1 == 0 || s2 == 0) throw std::invalid_argument("so4_transport: forms must be purely self-dual or anti-self-dual");
  if (s1 != s2) throw std::invalid_argument("so4_transport: mixed duality signs");
  const Eigen::Matrix4d Q1 = detail::canonical_frame(A1, s1);
  const Eigen::Matrix4d Q2 = detail::canonical_frame(A2, s2);
  return Q1 * Q2.transpose();
}

/// Pullback of a constant form by a linear map: A -> R^T A R.
inline Eigen::Matrix4d pullback_constant(const Eigen::Matrix4d& R, const Eigen::Matrix4d& A) { return R.transpose() * A * R; }

// -- export -------------------------------------------------------------------------

/// One line per nonzero coefficient: k sign member e1 e2 e3 e4 i j value.
inline void write_eigenbasis(const EigenBasis& B, std::ostream& os) {
  os << "# k sign member e1 e2 e3 e4 i j value\n" << std::setprecision(17);
  const MonomialBasis mb(B.k);
  for (int m = 0; m < B.dim(); ++m) {
    const AmbientPolyForm& P = B.members[static_cast<std::size_t>(m)];
    for (int p = 0; p < 6; ++p) {
      for (int j = 0; j < mb.size(); ++j) {
        const double v = P.coeff[static_cast<std::size_t>(p)](j);
        if (v == 0.0) continue;
        const Exponent& e = mb[j];
        os << B.k << ' ' << (B.sign > 0 ? '+' : '-') << ' ' << m << ' ' << e[0] << ' ' << e[1] << ' ' << e[2] << ' '
           << e[3] << ' ' << kPairs[static_cast<std::size_t>(p)].first << ' ' << kPairs[static_cast<std::size_t>(p)].second
           << ' ' << v << '\n';
      }
    }
  }
}

}  // namespace hopflab
