#pragma once

// Differential forms on the grid, stored as coefficients in the orthonormal
// coframe (e^1, e^2, e^3) dual to (tau_1, tau_2, tau_3):
//   1-form  a = a1 e^1 + a2 e^2 + a3 e^3
//   2-form  b = b1 e^2^e^3 + b2 e^3^e^1 + b3 e^1^e^2
// With these bases the Hodge star is the identity on coefficient arrays and
// wedge products reduce to dot and cross products. Orientation: e^1^e^2^e^3 is
// the volume form of S^3, so theta ^ d theta = 2 vol.
//
// Frame structure used by d: [tau_1, tau_2] = [tau_1, tau_3] = 0 and
// [tau_2, tau_3] = -2 tau_1 + (tan t - cot t) tau_3.

#include "hopflab/collocation.hpp"
#include "hopflab/geometry.hpp"
#include "hopflab/poly.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

namespace hopflab {

template <int Rank>
struct FormField {
  static_assert(Rank == 1 || Rank == 2);
  static constexpr int rank = Rank;
  std::array<Eigen::VectorXd, 3> c;

  FormField() = default;
  explicit FormField(Eigen::Index n) {
    for (auto& x : c) x = Eigen::VectorXd::Zero(n);
  }
  FormField(Eigen::VectorXd c1, Eigen::VectorXd c2, Eigen::VectorXd c3) : c{std::move(c1), std::move(c2), std::move(c3)} {
    if (c[1].size() != c[0].size() || c[2].size() != c[0].size()) {
      throw std::invalid_argument("FormField: component lengths differ");
    }
  }

  static FormField zeros(const GridSpec& g) { return FormField(static_cast<Eigen::Index>(g.size())); }

  Eigen::Index size() const { return c[0].size(); }
  Eigen::VectorXd& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  const Eigen::VectorXd& operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

  Eigen::Vector3d at(Eigen::Index k) const { return {c[0](k), c[1](k), c[2](k)}; }
  void set(Eigen::Index k, const Eigen::Vector3d& v) {
    for (int i = 0; i < 3; ++i) c[static_cast<std::size_t>(i)](k) = v(i);
  }

  FormField& operator+=(const FormField& o) {
    check_same(o);
    for (int i = 0; i < 3; ++i) c[i] += o.c[i];
    return *this;
  }
  FormField& operator-=(const FormField& o) {
    check_same(o);
    for (int i = 0; i < 3; ++i) c[i] -= o.c[i];
    return *this;
  }
  FormField& operator*=(double s) {
    for (auto& x : c) x *= s;
    return *this;
  }

  bool all_finite() const { return c[0].allFinite() && c[1].allFinite() && c[2].allFinite(); }

  void check_same(const FormField& o) const {
    if (o.size() != size()) throw std::invalid_argument("FormField: grid mismatch");
  }
};

using OneFormField = FormField<1>;
using TwoFormField = FormField<2>;

template <int R> FormField<R> operator+(FormField<R> a, const FormField<R>& b) { return a += b; }
template <int R> FormField<R> operator-(FormField<R> a, const FormField<R>& b) { return a -= b; }
template <int R> FormField<R> operator*(double s, FormField<R> a) { return a *= s; }

/// Pointwise norm |A|.
template <int R>
ScalarField pointwise_norm(const FormField<R>& a) {
  return (a[0].array().square() + a[1].array().square() + a[2].array().square()).sqrt().matrix();
}

template <int R>
ScalarField pointwise_dot(const FormField<R>& a, const FormField<R>& b) {
  a.check_same(b);
  return (a[0].array() * b[0].array() + a[1].array() * b[1].array() + a[2].array() * b[2].array()).matrix();
}

template <int R>
double l2_inner(const FormField<R>& a, const FormField<R>& b, const GridSpec& g) {
  if (static_cast<std::size_t>(a.size()) != g.size()) throw std::invalid_argument("l2_inner: grid mismatch");
  return integrate_scalar(pointwise_dot(a, b), g);
}

template <int R>
double l2_norm(const FormField<R>& a, const GridSpec& g) {
  return std::sqrt(std::max(0.0, l2_inner(a, a, g)));
}

// -- algebra ----------------------------------------------------------------

inline TwoFormField wedge_11(const OneFormField& a, const OneFormField& b) {
  a.check_same(b);
  TwoFormField out;
  out[0] = (a[1].array() * b[2].array() - a[2].array() * b[1].array()).matrix();
  out[1] = (a[2].array() * b[0].array() - a[0].array() * b[2].array()).matrix();
  out[2] = (a[0].array() * b[1].array() - a[1].array() * b[0].array()).matrix();
  return out;
}

/// Coefficient of a ^ b against the volume form.
inline ScalarField wedge_12(const OneFormField& a, const TwoFormField& b) {
  if (a.size() != b.size()) throw std::invalid_argument("wedge_12: grid mismatch");
  return (a[0].array() * b[0].array() + a[1].array() * b[1].array() + a[2].array() * b[2].array()).matrix();
}

inline TwoFormField hodge_star(const OneFormField& a) { return TwoFormField(a[0], a[1], a[2]); }
inline OneFormField hodge_star(const TwoFormField& b) { return OneFormField(b[0], b[1], b[2]); }

// -- exterior derivative ----------------------------------------------------
// Spins: scalars and a1, b1 carry spin 0; a2, a3, b2, b3 carry spin 1.

inline OneFormField exterior_derivative(const ScalarField& f, const Collocation& D) {
  return OneFormField(D.tau(0, 0, f), D.tau(1, 0, f), D.tau(2, 0, f));
}

inline TwoFormField exterior_derivative(const OneFormField& a, const Collocation& D) {
  const Eigen::ArrayXd tan_minus_cot = (D.tan_t() - D.cot_t()).array();
  TwoFormField out;
  out[0] = D.tau(1, 1, a[2]) - D.tau(2, 1, a[1]) + 2.0 * a[0] - (tan_minus_cot * a[2].array()).matrix();
  out[1] = D.tau(2, 0, a[0]) - D.tau(0, 1, a[2]);
  out[2] = D.tau(0, 1, a[1]) - D.tau(1, 0, a[0]);
  return out;
}

/// Coefficient of d b against the volume form.
inline ScalarField exterior_derivative(const TwoFormField& b, const Collocation& D) {
  const Eigen::ArrayXd tan_minus_cot = (D.tan_t() - D.cot_t()).array();
  return D.tau(0, 0, b[0]) + D.tau(1, 1, b[1]) + D.tau(2, 1, b[2]) - (tan_minus_cot * b[1].array()).matrix();
}

/// d* on 1-forms (= *d*), a scalar field.
inline ScalarField codifferential(const OneFormField& a, const Collocation& D) {
  return exterior_derivative(hodge_star(a), D);
}

/// The curl-type operator d* on 2-forms: b -> d(*b).
inline TwoFormField curl(const TwoFormField& b, const Collocation& D) { return exterior_derivative(hodge_star(b), D); }

// -- explicit fields --------------------------------------------------------

/// theta = -x2 dx1 + x1 dx2 - x4 dx3 + x3 dx4 = <tau_1, .>, i.e. e^1.
inline OneFormField theta_field(const GridSpec& g) {
  OneFormField th = OneFormField::zeros(g);
  th[0].setOnes();
  return th;
}

/// Restriction of an ambient 2-form: b_i = P(tau_j, tau_k), (i,j,k) cyclic.
inline TwoFormField restrict_two_form(const AmbientPolyForm& P, const GridSpec& g) {
  const MonomialBasis basis(P.degree);
  TwoFormField out = TwoFormField::zeros(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Eigen::Matrix4d A = P.matrix(basis.evaluate(g.points()[k]));
    const Frame& f = g.frames()[k];
    const auto idx = static_cast<Eigen::Index>(k);
    out[0](idx) = f.tau2.dot(A * f.tau3);
    out[1](idx) = f.tau3.dot(A * f.tau1);
    out[2](idx) = f.tau1.dot(A * f.tau2);
  }
  return out;
}

/// Restriction of a constant 2-form given by its skew matrix.
inline TwoFormField restrict_constant_form(const Eigen::Matrix4d& A, const GridSpec& g) {
  return restrict_two_form(AmbientPolyForm::constant(A), g);
}

/// Restriction of an ambient 1-form sum_m A_m(x) dx^m given as a callable x -> R^4.
template <class F>
OneFormField restrict_one_form(const GridSpec& g, F&& covector) {
  OneFormField out = OneFormField::zeros(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec4 A = covector(g.points()[k]);
    const Frame& f = g.frames()[k];
    out.set(static_cast<Eigen::Index>(k), Eigen::Vector3d(A.dot(f.tau1), A.dot(f.tau2), A.dot(f.tau3)));
  }
  return out;
}

// -- CSV: one row per node "index,c1,c2,c3" --------------------------------

template <int R>
void write_form_csv(const FormField<R>& a, std::ostream& os) {
  os << "node,c1,c2,c3\n" << std::setprecision(17);
  for (Eigen::Index k = 0; k < a.size(); ++k) os << k << ',' << a[0](k) << ',' << a[1](k) << ',' << a[2](k) << '\n';
}

template <int R>
FormField<R> read_form_csv(std::istream& is, std::size_t expected_nodes) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("form file: empty");
  FormField<R> out(static_cast<Eigen::Index>(expected_nodes));
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream rs(line);
    long long idx = -1;
    double v[3];
    char s1 = 0, s2 = 0, s3 = 0;
    if (!(rs >> idx >> s1 >> v[0] >> s2 >> v[1] >> s3 >> v[2])) throw std::runtime_error("form file: malformed row");
    if (idx < 0 || static_cast<std::size_t>(idx) >= expected_nodes) throw std::runtime_error("form file: node index out of range");
    for (int i = 0; i < 3; ++i) out[i](idx) = v[i];
    ++rows;
  }
  if (rows != expected_nodes) throw std::runtime_error("form file: row count does not match the grid");
  return out;
}

}  // namespace hopflab
