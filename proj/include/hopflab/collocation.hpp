#pragma once

// Collocation derivatives along the frame directions tau_1, tau_2, tau_3.
//
// Angles: Fourier differentiation. The t direction is the delicate one: a
// frame coefficient of a smooth object, restricted to a Fourier parity class
// (m1 mod 2, m2 mod 2), has the form sin^{p1} t cos^{p2} t g(sin^2 t) with g
// smooth, where p_i = (m_i + spin) mod 2. "spin" counts the factors of tau_2,
// tau_3 in the coefficient (both flip sign under the coordinate reflections
// t -> -t and t -> pi - t). g is differentiated by barycentric interpolation
// on the Gauss nodes in s = sin^2 t.
//
// All operators are assembled once into sparse matrices so that their
// adjoints (needed by the energy gradient) come for free.

#include "hopflab/geometry.hpp"
#include "hopflab/quadrature.hpp"

#include <Eigen/Sparse>

#include <array>
#include <cmath>
#include <vector>

namespace hopflab {

using SparseOp = Eigen::SparseMatrix<double, Eigen::RowMajor>;

class Collocation {
 public:
  explicit Collocation(const GridSpec& grid) : grid_(grid) { assemble(); }

  const GridSpec& grid() const { return grid_; }

  /// Frame-direction derivative tau_dir f (dir in 0..2) of a coefficient array
  /// with the given spin (0 or 1).
  ScalarField tau(int dir, int spin, const ScalarField& f) const { return op(dir, spin) * f; }

  const SparseOp& op(int dir, int spin) const { return tau_[dir][spin]; }
  const SparseOp& d_phi1() const { return d_phi1_; }
  const SparseOp& d_phi2() const { return d_phi2_; }
  const SparseOp& d_t(int spin) const { return d_t_[spin]; }

  /// cot t and tan t at every node.
  const ScalarField& cot_t() const { return cot_; }
  const ScalarField& tan_t() const { return tan_; }

 private:
  void assemble() {
    const int nt = grid_.n_t();
    const int na = grid_.n_ang();
    const auto N = static_cast<Eigen::Index>(grid_.size());
    const Eigen::MatrixXd Dphi = fourier_diff_matrix(na);
    const Eigen::MatrixXd Ds = polynomial_diff_matrix(grid_.s_nodes());
    const Eigen::VectorXd& tn = grid_.t_nodes();

    cot_.resize(N);
    tan_.resize(N);
    for (Eigen::Index k = 0; k < N; ++k) {
      const double t = grid_.nodes()[static_cast<std::size_t>(k)].t;
      cot_(k) = 1.0 / std::tan(t);
      tan_(k) = std::tan(t);
    }

    std::vector<Eigen::Triplet<double>> trip1, trip2;
    trip1.reserve(static_cast<std::size_t>(N) * na);
    trip2.reserve(static_cast<std::size_t>(N) * na);
    for (int it = 0; it < nt; ++it) {
      for (int i1 = 0; i1 < na; ++i1) {
        for (int i2 = 0; i2 < na; ++i2) {
          const auto row = static_cast<Eigen::Index>(grid_.index(it, i1, i2));
          for (int j = 0; j < na; ++j) {
            if (j != i1) trip1.emplace_back(row, grid_.index(it, j, i2), Dphi(i1, j));
            if (j != i2) trip2.emplace_back(row, grid_.index(it, i1, j), Dphi(i2, j));
          }
        }
      }
    }
    d_phi1_.resize(N, N);
    d_phi2_.resize(N, N);
    d_phi1_.setFromTriplets(trip1.begin(), trip1.end());
    d_phi2_.setFromTriplets(trip2.begin(), trip2.end());

    const int half = na / 2;
    // S_p(t) = sin^p1 t cos^p2 t and its log-derivative, per parity (p1, p2).
    Eigen::MatrixXd S(nt, 4), dlogS(nt, 4);
    for (int it = 0; it < nt; ++it) {
      const double st = std::sin(tn(it)), ct = std::cos(tn(it));
      for (int p = 0; p < 4; ++p) {
        const int p1 = p / 2, p2 = p % 2;
        S(it, p) = (p1 ? st : 1.0) * (p2 ? ct : 1.0);
        dlogS(it, p) = p1 * ct / st - p2 * st / ct;
      }
    }
    for (int spin = 0; spin < 2; ++spin) {
      // Per Fourier shift (a, b) and node pair (it, jt): the t-derivative
      // coefficient, averaged over the four parity classes with the projector
      // signs (-1)^{a q1 + b q2}.
      std::vector<Eigen::MatrixXd> C(4, Eigen::MatrixXd::Zero(nt, nt));
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          Eigen::MatrixXd& M = C[static_cast<std::size_t>(2 * a + b)];
          for (int q1 = 0; q1 < 2; ++q1) {
            for (int q2 = 0; q2 < 2; ++q2) {
              const double proj = 0.25 * (((a * q1 + b * q2) % 2 == 0) ? 1.0 : -1.0);
              const int p = 2 * ((q1 + spin) % 2) + (q2 + spin) % 2;
              for (int it = 0; it < nt; ++it) {
                const double ds = 2.0 * std::sin(tn(it)) * std::cos(tn(it));  // ds/dt
                for (int jt = 0; jt < nt; ++jt) {
                  double c = S(it, p) * ds * Ds(it, jt) / S(jt, p);
                  if (jt == it) c += dlogS(it, p);
                  M(it, jt) += proj * c;
                }
              }
            }
          }
        }
      }
      std::vector<Eigen::Triplet<double>> trip;
      trip.reserve(static_cast<std::size_t>(N) * 4 * nt);
      for (int it = 0; it < nt; ++it) {
        for (int i1 = 0; i1 < na; ++i1) {
          for (int i2 = 0; i2 < na; ++i2) {
            const auto row = static_cast<Eigen::Index>(grid_.index(it, i1, i2));
            for (int a = 0; a < 2; ++a) {
              for (int b = 0; b < 2; ++b) {
                const int j1 = (i1 + a * half) % na;
                const int j2 = (i2 + b * half) % na;
                const Eigen::MatrixXd& M = C[static_cast<std::size_t>(2 * a + b)];
                for (int jt = 0; jt < nt; ++jt) {
                  if (M(it, jt) != 0.0) trip.emplace_back(row, grid_.index(jt, j1, j2), M(it, jt));
                }
              }
            }
          }
        }
      }
      d_t_[spin].resize(N, N);
      d_t_[spin].setFromTriplets(trip.begin(), trip.end());
    }

    const SparseOp cotD1 = cot_.asDiagonal() * d_phi1_;
    const SparseOp tanD2 = tan_.asDiagonal() * d_phi2_;
    for (int spin = 0; spin < 2; ++spin) {
      tau_[0][spin] = d_phi1_ + d_phi2_;
      tau_[1][spin] = d_t_[spin];
      tau_[2][spin] = cotD1 - tanD2;
    }
  }

  GridSpec grid_;
  SparseOp d_phi1_, d_phi2_;
  std::array<SparseOp, 2> d_t_;
  std::array<std::array<SparseOp, 2>, 3> tau_;
  ScalarField cot_, tan_;
};

}  // namespace hopflab
