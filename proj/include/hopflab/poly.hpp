#pragma once

// Homogeneous polynomials in four variables (x1..x4) and 2-forms on R^4 whose
// skew coefficient matrix has homogeneous polynomial entries.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hopflab {

using Exponent = std::array<int, 4>;

/// All exponent tuples of total degree k, in a fixed lexicographic order.
class MonomialBasis {
 public:
  explicit MonomialBasis(int degree) : degree_(degree) {
    if (degree < 0) throw std::invalid_argument("MonomialBasis: negative degree");
    for (int a = degree; a >= 0; --a)
      for (int b = degree - a; b >= 0; --b)
        for (int c = degree - a - b; c >= 0; --c) {
          const Exponent e{a, b, c, degree - a - b - c};
          index_.emplace(e, static_cast<int>(exps_.size()));
          exps_.push_back(e);
        }
  }

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(exps_.size()); }
  const Exponent& operator[](int i) const { return exps_[static_cast<std::size_t>(i)]; }
  const std::vector<Exponent>& exponents() const { return exps_; }

  int index_of(const Exponent& e) const {
    const auto it = index_.find(e);
    return it == index_.end() ? -1 : it->second;
  }

  /// Values of every monomial at x.
  Eigen::VectorXd evaluate(const Eigen::Vector4d& x) const {
    std::array<std::vector<double>, 4> pw;
    for (int v = 0; v < 4; ++v) {
      pw[v].resize(static_cast<std::size_t>(degree_) + 1);
      pw[v][0] = 1.0;
      for (int p = 1; p <= degree_; ++p) pw[v][p] = pw[v][p - 1] * x(v);
    }
    Eigen::VectorXd out(size());
    for (int i = 0; i < size(); ++i) {
      const Exponent& e = exps_[static_cast<std::size_t>(i)];
      out(i) = pw[0][e[0]] * pw[1][e[1]] * pw[2][e[2]] * pw[3][e[3]];
    }
    return out;
  }

 private:
  int degree_;
  std::vector<Exponent> exps_;
  std::map<Exponent, int> index_;
};

/// Index of the pair (i, j), i < j, among (01, 02, 03, 12, 13, 23).
inline int pair_index(int i, int j) {
  static constexpr int table[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
  return table[i][j];
}
inline constexpr std::array<std::pair<int, int>, 6> kPairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

/// A 2-form on R^4 with A_ij(x) homogeneous of degree k. Only the upper
/// triangle is stored, so skew symmetry holds by construction.
struct AmbientPolyForm {
  int degree = 0;
  std::array<Eigen::VectorXd, 6> coeff;  // per pair, coefficients over MonomialBasis(degree)

  static AmbientPolyForm zero(int k) {
    AmbientPolyForm f;
    f.degree = k;
    const int n = MonomialBasis(k).size();
    for (auto& c : f.coeff) c = Eigen::VectorXd::Zero(n);
    return f;
  }

  /// Constant-coefficient form from a skew 4x4 matrix.
  static AmbientPolyForm constant(const Eigen::Matrix4d& A) {
    AmbientPolyForm f = zero(0);
    for (int p = 0; p < 6; ++p) f.coeff[p](0) = A(kPairs[p].first, kPairs[p].second);
    return f;
  }

  /// A(x) given the monomial values at x.
  Eigen::Matrix4d matrix(const Eigen::VectorXd& monomials) const {
    Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
    for (int p = 0; p < 6; ++p) {
      const double v = coeff[p].dot(monomials);
      A(kPairs[p].first, kPairs[p].second) = v;
      A(kPairs[p].second, kPairs[p].first) = -v;
    }
    return A;
  }

  Eigen::Matrix4d matrix_at(const Eigen::Vector4d& x) const { return matrix(MonomialBasis(degree).evaluate(x)); }

  AmbientPolyForm& operator+=(const AmbientPolyForm& o) {
    if (o.degree != degree) throw std::invalid_argument("AmbientPolyForm: degree mismatch");
    for (int p = 0; p < 6; ++p) coeff[p] += o.coeff[p];
    return *this;
  }
  AmbientPolyForm& operator*=(double s) {
    for (auto& c : coeff) c *= s;
    return *this;
  }
};

inline AmbientPolyForm operator*(double s, AmbientPolyForm f) { return f *= s; }
inline AmbientPolyForm operator+(AmbientPolyForm a, const AmbientPolyForm& b) { return a += b; }

/// Standard basis of the constant self-dual (sign=+1) or anti-self-dual
/// (sign=-1) forms: dx1^dx2 +- dx3^dx4, dx1^dx3 -+ dx2^dx4, dx1^dx4 +- dx2^dx3.
inline Eigen::Matrix4d e0_matrix(int sign, int i) {
  Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
  const double s = sign >= 0 ? 1.0 : -1.0;
  switch (i) {
    case 0: A(0, 1) = 1; A(2, 3) = s; break;
    case 1: A(0, 2) = 1; A(1, 3) = -s; break;
    case 2: A(0, 3) = 1; A(1, 2) = s; break;
    default: throw std::out_of_range("e0_matrix: index must be 0..2");
  }
  return A - A.transpose();
}

}  // namespace hopflab
