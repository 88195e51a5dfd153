#pragma once
// Free-space kernel of the axisymmetric problem: the azimuthal Fourier mode of
// the 3D Laplace fundamental solution,
//
//   Phi(x; x0) = (1/2pi) sqrt(r0/r) Q(t),   t = 1 + |x - x0|^2 / (2 r r0),
//
// with Q the Legendre function of the second kind of degree 1/2. Two
// independent evaluation routes are provided: the closed form above (elliptic
// integrals for moderate t, a hypergeometric series for large t) and direct
// periodic-trapezoid quadrature of the underlying circle integral.

#include <cmath>
#include <stdexcept>
#include <string>

#include "eclsm/mesh.hpp"

namespace eclsm {

struct GreenEval {
  double value = 0.0;
  double grad_r = 0.0;  // derivative in the observer coordinates
  double grad_z = 0.0;
};

namespace detail {

struct EllipticKE {
  double k;  // complete integral of the first kind
  double e;  // second kind
};

// Arithmetic-geometric mean evaluation of K(m) and E(m). Takes the parameter
// m = modulus^2 and its complement m1 = 1 - m separately so callers can form
// m1 without cancellation when m is close to 1.
inline EllipticKE elliptic_ke(double m, double m1) {
  if (!(m >= 0.0) || !(m1 > 0.0))
    throw std::invalid_argument("elliptic_ke: need m >= 0 and m1 > 0");
  constexpr double pi = 3.14159265358979323846;
  double a = 1.0, b = std::sqrt(m1);
  double c2_sum = 0.5 * m;  // 2^(n-1) c_n^2 accumulated, n = 0 term is m/2
  double pow2 = 0.5;
  for (int it = 0; it < 64; ++it) {
    const double c = 0.5 * (a - b);
    if (std::abs(c) <= 1e-17 * a) break;
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
    pow2 *= 2.0;
    c2_sum += pow2 * c * c;
  }
  const double k = pi / (2.0 * a);
  return {k, k * (1.0 - c2_sum)};
}

// Gauss series of 2F1(a, b; c; x) and its derivative, for 0 <= x < 1 well away
// from the radius of convergence (callers have x <= 1/16).
inline void hyp2f1_with_derivative(double a, double b, double c, double x, double& f,
                                   double& fp) {
  double term = 1.0;
  f = 1.0;
  fp = 0.0;
  for (int n = 0; n < 64; ++n) {
    const double next = term * (a + n) * (b + n) / ((c + n) * (n + 1.0)) * x;
    fp += (n + 1.0) * next / std::max(x, 1e-300);
    f += next;
    if (std::abs(next) <= 1e-17 * std::abs(f)) return;
    term = next;
  }
  throw std::runtime_error("hyp2f1: series did not converge");
}

// Q_{1/2}(1 + tm1) through elliptic integrals. Stable for small tm1; loses
// about four digits per decade as t grows, hence the series switchover.
inline double q_half_elliptic(double tm1) {
  const double m = 2.0 / (2.0 + tm1);   // modulus^2
  const double m1 = tm1 / (2.0 + tm1);  // complement, formed without cancellation
  const EllipticKE ke = elliptic_ke(m, m1);
  return ((2.0 - m) * ke.k - 2.0 * ke.e) / std::sqrt(m);
}

inline double q_minus_half_elliptic(double tm1) {
  const double m = 2.0 / (2.0 + tm1);
  const double m1 = tm1 / (2.0 + tm1);
  return std::sqrt(m) * elliptic_ke(m, m1).k;
}

constexpr double kQSeriesScale = 0.55536036726979578085;  // pi / sqrt(32)

// Large-argument form Q_{1/2}(t) = (pi/sqrt(32)) t^(-3/2) 2F1(3/4,5/4;2;1/t^2).
// All series terms are positive, so there is no cancellation.
inline double q_half_series(double tm1) {
  const double t = 1.0 + tm1;
  const double x = 1.0 / (t * t);
  double f, fp;
  hyp2f1_with_derivative(0.75, 1.25, 2.0, x, f, fp);
  return kQSeriesScale * std::pow(t, -1.5) * f;
}

inline double q_minus_half_series(double tm1) {
  const double t = 1.0 + tm1;
  const double x = 1.0 / (t * t);
  double f, fp;
  hyp2f1_with_derivative(0.25, 0.75, 1.0, x, f, fp);
  constexpr double pi = 3.14159265358979323846;
  return pi / std::sqrt(2.0 * t) * f;
}

constexpr double kQRegimeSwitch = 3.0;  // in tm1 units, i.e. t = 4

inline double q_half(double tm1) {
  if (!(tm1 > 0.0)) throw std::invalid_argument("q_half: argument must exceed 1");
  return tm1 < kQRegimeSwitch ? q_half_elliptic(tm1) : q_half_series(tm1);
}

inline double q_minus_half(double tm1) {
  if (!(tm1 > 0.0)) throw std::invalid_argument("q_minus_half: argument must exceed 1");
  return tm1 < kQRegimeSwitch ? q_minus_half_elliptic(tm1) : q_minus_half_series(tm1);
}

// dQ_{1/2}/dt. Moderate t uses the recurrence through Q_{-1/2}; large t
// differentiates the series term by term.
inline double q_half_derivative(double tm1) {
  if (!(tm1 > 0.0)) throw std::invalid_argument("q_half_derivative: argument must exceed 1");
  if (tm1 < kQRegimeSwitch) {
    const double t = 1.0 + tm1;
    const double t2m1 = tm1 * (tm1 + 2.0);  // t^2 - 1 without cancellation
    return 0.5 * (t * q_half_elliptic(tm1) - q_minus_half_elliptic(tm1)) / t2m1;
  }
  const double t = 1.0 + tm1;
  const double x = 1.0 / (t * t);
  double f, fp;
  hyp2f1_with_derivative(0.75, 1.25, 2.0, x, f, fp);
  return -kQSeriesScale * std::pow(t, -2.5) * (1.5 * f + 2.0 * x * fp);
}

inline void check_green_args(Point2 x, Point2 x0) {
  if (!(x.r > 0.0) || !(x0.r > 0.0))
    throw std::invalid_argument("green kernel: both radii must be positive");
  const double d = distance(x, x0);
  if (d < 1e-6 * x0.r)
    throw std::invalid_argument("green kernel: observer within 1e-6*r0 of the source");
}

}  // namespace detail

// Closed-form kernel value.
inline double green_value(Point2 x, Point2 x0) {
  detail::check_green_args(x, x0);
  const double dr = x.r - x0.r, dz = x.z - x0.z;
  const double tm1 = (dr * dr + dz * dz) / (2.0 * x.r * x0.r);
  constexpr double pi = 3.14159265358979323846;
  return std::sqrt(x0.r / x.r) * detail::q_half(tm1) / (2.0 * pi);
}

// Value plus observer-coordinate gradient.
inline GreenEval green_gradient(Point2 x, Point2 x0) {
  detail::check_green_args(x, x0);
  const double dr = x.r - x0.r, dz = x.z - x0.z;
  const double rr0 = x.r * x0.r;
  const double tm1 = (dr * dr + dz * dz) / (2.0 * rr0);
  constexpr double pi = 3.14159265358979323846;
  const double pref = std::sqrt(x0.r / x.r) / (2.0 * pi);
  const double q = detail::q_half(tm1);
  const double qp = detail::q_half_derivative(tm1);
  const double dt_dr = dr / rr0 - tm1 / x.r;
  const double dt_dz = dz / rr0;
  GreenEval g;
  g.value = pref * q;
  g.grad_r = -0.5 * g.value / x.r + pref * qp * dt_dr;
  g.grad_z = pref * qp * dt_dz;
  return g;
}

// Independent route: trapezoid quadrature of the circle integral
//   Phi = (1/4pi) Int_0^{2pi} r0 sin(th) / |x - x0(th)| dth.
// The integrand is smooth and 2pi-periodic, so the trapezoid rule converges
// exponentially; the node count doubles until increments fall below 1e-13.
inline double green_quadrature(Point2 x, Point2 x0, int n_nodes = 64) {
  detail::check_green_args(x, x0);
  if (n_nodes < 16) throw std::invalid_argument("green_quadrature: need at least 16 nodes");
  constexpr double pi = 3.14159265358979323846;
  const double dz2 = (x.z - x0.z) * (x.z - x0.z);
  const double s2 = x.r * x.r + x0.r * x0.r + dz2;
  const double c = 2.0 * x.r * x0.r;
  auto f = [&](double th) {
    const double s = std::sin(th);
    return x0.r * s / std::sqrt(s2 - c * s);
  };
  int n = n_nodes;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) sum += f(2.0 * pi * k / n);
  double integral = 2.0 * pi * sum / n;
  constexpr int kMaxNodes = 1 << 22;
  while (n < kMaxNodes) {
    double odd = 0.0;
    for (int k = 0; k < n; ++k) odd += f(2.0 * pi * (2 * k + 1) / (2 * n));
    const double refined = 0.5 * integral + pi * odd / n;
    const double change = std::abs(refined - integral);
    integral = refined;
    n *= 2;
    if (change <= 1e-13 * std::max(1.0, std::abs(integral))) return integral / (4.0 * pi);
  }
  throw std::runtime_error("green_quadrature: no convergence below " +
                           std::to_string(kMaxNodes) + " nodes; points nearly coincide");
}

}  // namespace eclsm
