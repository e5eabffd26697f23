#pragma once

// Forward-mode dual numbers. Analytic maps are written once as templates over
// the scalar type and evaluated with Dual<double> to obtain exact directional
// derivatives (value + derivative along one seed direction).

#include <array>
#include <cmath>
#include <type_traits>

namespace hopflab {

template <class T>
struct Dual {
  T v{};
  T d{};

  constexpr Dual() = default;
  constexpr Dual(T value) : v(value) {}  // NOLINT: implicit lift of constants
  constexpr Dual(T value, T deriv) : v(value), d(deriv) {}

  constexpr Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  constexpr Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  constexpr Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
  constexpr Dual& operator/=(const Dual& o) {
    d = (d * o.v - v * o.d) / (o.v * o.v);
    v /= o.v;
    return *this;
  }
};

template <class T> constexpr Dual<T> operator-(Dual<T> a) { return {-a.v, -a.d}; }
template <class T> constexpr Dual<T> operator+(Dual<T> a, const Dual<T>& b) { return a += b; }
template <class T> constexpr Dual<T> operator-(Dual<T> a, const Dual<T>& b) { return a -= b; }
template <class T> constexpr Dual<T> operator*(Dual<T> a, const Dual<T>& b) { return a *= b; }
template <class T> constexpr Dual<T> operator/(Dual<T> a, const Dual<T>& b) { return a /= b; }
template <class T> constexpr Dual<T> operator+(Dual<T> a, T b) { a.v += b; return a; }
template <class T> constexpr Dual<T> operator+(T b, Dual<T> a) { a.v += b; return a; }
template <class T> constexpr Dual<T> operator-(Dual<T> a, T b) { a.v -= b; return a; }
template <class T> constexpr Dual<T> operator-(T b, const Dual<T>& a) { return {b - a.v, -a.d}; }
template <class T> constexpr Dual<T> operator*(Dual<T> a, T b) { return {a.v * b, a.d * b}; }
template <class T> constexpr Dual<T> operator*(T b, Dual<T> a) { return {a.v * b, a.d * b}; }
template <class T> constexpr Dual<T> operator/(Dual<T> a, T b) { return {a.v / b, a.d / b}; }
template <class T> constexpr Dual<T> operator/(T b, const Dual<T>& a) {
  return {b / a.v, -b * a.d / (a.v * a.v)};
}

template <class T> Dual<T> sqrt(const Dual<T>& a) {
  const T r = std::sqrt(a.v);
  return {r, a.d / (T(2) * r)};
}
template <class T> Dual<T> sin(const Dual<T>& a) { return {std::sin(a.v), a.d * std::cos(a.v)}; }
template <class T> Dual<T> cos(const Dual<T>& a) { return {std::cos(a.v), -a.d * std::sin(a.v)}; }

/// Plain value of a scalar that may or may not be dual.
inline double value_of(double x) { return x; }
template <class T> T value_of(const Dual<T>& x) { return x.v; }

/// Minimal complex arithmetic over an arbitrary real scalar type; std::complex
/// is only specified for the builtin floating types.
template <class T>
struct Cplx {
  T re{};
  T im{};
};

template <class T> Cplx<T> operator+(const Cplx<T>& a, const Cplx<T>& b) { return {a.re + b.re, a.im + b.im}; }
template <class T> Cplx<T> operator-(const Cplx<T>& a, const Cplx<T>& b) { return {a.re - b.re, a.im - b.im}; }
template <class T> Cplx<T> operator*(const Cplx<T>& a, const Cplx<T>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class T> Cplx<T> conj(const Cplx<T>& a) { return {a.re, -a.im}; }
template <class T> T norm2(const Cplx<T>& a) { return a.re * a.re + a.im * a.im; }
template <class T> Cplx<T> cpow(Cplx<T> a, int n) {
  Cplx<T> r{T(1.0), T(0.0)};
  for (int i = 0; i < n; ++i) r = r * a;
  return r;
}
template <class T> Cplx<T> cscale(const Cplx<T>& a, double s) { return {a.re * s, a.im * s}; }

template <class T> using Vec3T = std::array<T, 3>;
template <class T> using Vec4T = std::array<T, 4>;

}  // namespace hopflab
