#pragma once

// S^3 in Hopf coordinates (t, phi1, phi2) -> (e^{i phi1} sin t, e^{i phi2} cos t),
// the adapted orthonormal frame, and the product quadrature used for every
// integral over the sphere.
//
// Node layout: index = (it * n_ang + i1) * n_ang + i2.

#include "hopflab/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hopflab {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kVolS3 = 2.0 * kPi * kPi;

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using ScalarField = Eigen::VectorXd;

struct HopfPoint {
  double t = kPi / 4;
  double phi1 = 0.0;
  double phi2 = 0.0;

  void validate() const {
    if (!(t > 0.0 && t < kPi / 2)) throw std::domain_error("HopfPoint: t must lie in (0, pi/2)");
  }
};

struct Frame {
  Vec4 tau1;  // vertical: generator of the S^1 action
  Vec4 tau2;  // d/dt
  Vec4 tau3;  // cot t d/dphi1 - tan t d/dphi2

  const Vec4& operator[](int i) const { return i == 0 ? tau1 : (i == 1 ? tau2 : tau3); }
};

/// (z, w) = (e^{i phi1} sin t, e^{i phi2} cos t) as (Re z, Im z, Re w, Im w).
inline Vec4 to_ambient(const HopfPoint& p) {
  const double st = std::sin(p.t);
  const double ct = std::cos(p.t);
  return {st * std::cos(p.phi1), st * std::sin(p.phi1), ct * std::cos(p.phi2), ct * std::sin(p.phi2)};
}

inline Frame frame_at(const HopfPoint& p) {
  const double st = std::sin(p.t);
  const double ct = std::cos(p.t);
  const double c1 = std::cos(p.phi1), s1 = std::sin(p.phi1);
  const double c2 = std::cos(p.phi2), s2 = std::sin(p.phi2);
  Frame f;
  f.tau1 = {-st * s1, st * c1, -ct * s2, ct * c2};
  f.tau2 = {ct * c1, ct * s1, -st * c2, -st * s2};
  f.tau3 = {-ct * s1, ct * c1, st * s2, -st * c2};
  return f;
}

/// Tensor-product grid: Gauss-Legendre in s = sin^2 t (density sin t cos t
/// dt = ds/2), uniform trapezoid in both angles.
class GridSpec {
 public:
  GridSpec() = default;

  int n_t() const { return n_t_; }
  int n_ang() const { return n_ang_; }
  std::size_t size() const { return nodes_.size(); }

  const std::vector<HopfPoint>& nodes() const { return nodes_; }
  const ScalarField& weights() const { return weights_; }
  const std::vector<Vec4>& points() const { return points_; }
  const std::vector<Frame>& frames() const { return frames_; }

  /// Gauss nodes in s = sin^2 t, ascending.
  const Eigen::VectorXd& s_nodes() const { return s_nodes_; }
  const Eigen::VectorXd& t_nodes() const { return t_nodes_; }

  std::size_t index(int it, int i1, int i2) const {
    return (static_cast<std::size_t>(it) * n_ang_ + i1) * n_ang_ + i2;
  }

  friend GridSpec build_grid(int n_t, int n_ang);
  friend GridSpec grid_from_rows(int n_t, int n_ang, std::vector<HopfPoint> nodes, std::vector<double> weights);

 private:
  void finish() {
    points_.resize(nodes_.size());
    frames_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      points_[i] = to_ambient(nodes_[i]);
      frames_[i] = frame_at(nodes_[i]);
    }
  }

  int n_t_ = 0;
  int n_ang_ = 0;
  std::vector<HopfPoint> nodes_;
  ScalarField weights_;
  std::vector<Vec4> points_;
  std::vector<Frame> frames_;
  Eigen::VectorXd s_nodes_;
  Eigen::VectorXd t_nodes_;
};

inline GridSpec build_grid(int n_t, int n_ang) {
  if (n_t < 2) throw std::invalid_argument("build_grid: n_t must be >= 2");
  if (n_ang < 4) throw std::invalid_argument("build_grid: n_ang must be >= 4");
  if (n_ang % 2 != 0) throw std::invalid_argument("build_grid: n_ang must be even");

  const GaussRule rule = gauss_legendre(n_t);
  GridSpec g;
  g.n_t_ = n_t;
  g.n_ang_ = n_ang;
  g.s_nodes_ = (rule.nodes.array() + 1.0) * 0.5;
  g.t_nodes_ = g.s_nodes_.array().sqrt().asin();
  const double dphi = 2.0 * kPi / n_ang;

  g.nodes_.resize(static_cast<std::size_t>(n_t) * n_ang * n_ang);
  g.weights_.resize(static_cast<Eigen::Index>(g.nodes_.size()));
  for (int it = 0; it < n_t; ++it) {
    // int sin t cos t dt = (1/2) int ds, and ds-weights are half the [-1,1] weights.
    const double wt = 0.25 * rule.weights(it);
    for (int i1 = 0; i1 < n_ang; ++i1) {
      for (int i2 = 0; i2 < n_ang; ++i2) {
        const std::size_t k = g.index(it, i1, i2);
        g.nodes_[k] = {g.t_nodes_(it), i1 * dphi, i2 * dphi};
        g.weights_(static_cast<Eigen::Index>(k)) = wt * dphi * dphi;
      }
    }
  }
  g.finish();
  return g;
}

inline double integrate_scalar(const ScalarField& f, const GridSpec& g) {
  if (static_cast<std::size_t>(f.size()) != g.size()) {
    throw std::invalid_argument("integrate_scalar: field length does not match node count");
  }
  return f.dot(g.weights());
}

/// Samples f(x) at every node's ambient point.
template <class F>
ScalarField sample_scalar(const GridSpec& g, F&& f) {
  ScalarField out(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) out(static_cast<Eigen::Index>(i)) = f(g.points()[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Grid file: "# hopflab-grid v1", "n_t,n_ang", then one "t,phi1,phi2,weight"
// row per node in node order.

inline void write_grid_csv(const GridSpec& g, std::ostream& os) {
  os << "# hopflab-grid v1\n" << g.n_t() << ',' << g.n_ang() << '\n';
  os << std::setprecision(17);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const HopfPoint& p = g.nodes()[i];
    os << p.t << ',' << p.phi1 << ',' << p.phi2 << ',' << g.weights()(static_cast<Eigen::Index>(i)) << '\n';
  }
}

inline GridSpec grid_from_rows(int n_t, int n_ang, std::vector<HopfPoint> nodes, std::vector<double> weights) {
  // The differentiation machinery needs the exact tensor structure, so a
  // loaded grid is rebuilt and checked against the file contents.
  GridSpec g = build_grid(n_t, n_ang);
  if (nodes.size() != g.size() || weights.size() != g.size()) {
    throw std::runtime_error("grid file: row count does not match header");
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    const HopfPoint& a = nodes[i];
    const HopfPoint& b = g.nodes()[i];
    const double dw = std::abs(weights[i] - g.weights()(static_cast<Eigen::Index>(i)));
    if (std::abs(a.t - b.t) > 1e-12 || std::abs(a.phi1 - b.phi1) > 1e-12 || std::abs(a.phi2 - b.phi2) > 1e-12 ||
        dw > 1e-14) {
      throw std::runtime_error("grid file: row " + std::to_string(i) + " does not match the tensor grid");
    }
  }
  return g;
}

inline GridSpec read_grid_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# hopflab-grid v1", 0) != 0) {
    throw std::runtime_error("grid file: missing or unsupported version header");
  }
  if (!std::getline(is, line)) throw std::runtime_error("grid file: missing size line");
  int n_t = 0, n_ang = 0;
  char comma = 0;
  std::istringstream hs(line);
  if (!(hs >> n_t >> comma >> n_ang) || comma != ',') throw std::runtime_error("grid file: malformed size line");
  std::vector<HopfPoint> nodes;
  std::vector<double> weights;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream rs(line);
    HopfPoint p;
    double w = 0.0;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(rs >> p.t >> c1 >> p.phi1 >> c2 >> p.phi2 >> c3 >> w)) throw std::runtime_error("grid file: malformed row");
    nodes.push_back(p);
    weights.push_back(w);
  }
  return grid_from_rows(n_t, n_ang, std::move(nodes), std::move(weights));
}

inline void save_grid(const GridSpec& g, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_grid_csv(g, os);
}

inline GridSpec load_grid(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_grid_csv(is);
}

}  // namespace hopflab
