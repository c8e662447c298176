#pragma once

// Independent reference computations used only by tests. Nothing here calls
// into the library code paths being checked.

#include <array>
#include <cmath>
#include <vector>

namespace qlab::oracle {

/// Cart-pole equations of motion written out directly from the closed form,
/// state as a plain array (x, x_dot, theta, theta_dot).
inline std::array<double, 4> cartpole_step(const std::array<double, 4>& s, bool push_right) {
  const double g = 9.8, mc = 1.0, mp = 0.1, l = 0.5, f_mag = 10.0, dt = 0.02;
  const double F = push_right ? f_mag : -f_mag;
  const double th = s[2], thd = s[3];
  const double temp = (F + mp * l * thd * thd * std::sin(th)) / (mc + mp);
  const double th_acc = (g * std::sin(th) - std::cos(th) * temp) /
                        (l * (4.0 / 3.0 - mp * std::cos(th) * std::cos(th) / (mc + mp)));
  const double x_acc = temp - mp * l * th_acc * std::cos(th) / (mc + mp);
  return {s[0] + dt * s[1], s[1] + dt * x_acc, s[2] + dt * s[3], s[3] + dt * th_acc};
}

/// Two-layer formula with explicit loops over a flat parameter vector laid
/// out as w1 (64x5 row-major), b1, w2, b2.
inline double mlp_forward(const std::vector<double>& theta, const std::array<double, 5>& x) {
  constexpr int H = 64, I = 5;
  double y = theta[H * I + H + H];
  for (int h = 0; h < H; ++h) {
    double a = theta[H * I + h];
    for (int i = 0; i < I; ++i) a += theta[h * I + i] * x[i];
    y += theta[H * I + H + h] * (a > 0.0 ? a : 0.0);
  }
  return y;
}

inline double mse(const std::vector<double>& theta, const std::vector<std::array<double, 5>>& xs,
                   const std::vector<double>& ys) {
  double s = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double e = mlp_forward(theta, xs[k]) - ys[k];
    s += e * e;
  }
  return s / static_cast<double>(xs.size());
}

/// Central finite difference of the MSE along every parameter coordinate.
inline std::vector<double> mse_gradient_fd(std::vector<double> theta, const std::vector<std::array<double, 5>>& xs,
                                           const std::vector<double>& ys, double h = 1e-5) {
  std::vector<double> g(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double orig = theta[k];
    theta[k] = orig + h;
    const double up = mse(theta, xs, ys);
    theta[k] = orig - h;
    const double down = mse(theta, xs, ys);
    theta[k] = orig;
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Scalar Adam iterate under a constant gradient; returns the per-step
/// parameter changes.
inline std::vector<double> adam_scalar_steps(double grad, double lr, int steps) {
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double m = 0.0, v = 0.0, p = 0.0;
  std::vector<double> deltas;
  for (int t = 1; t <= steps; ++t) {
    m = b1 * m + (1 - b1) * grad;
    v = b2 * v + (1 - b2) * grad * grad;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    const double before = p;
    p -= lr * mh / (std::sqrt(vh) + eps);
    deltas.push_back(p - before);
  }
  return deltas;
}

/// sum_{k=0}^{K-1} gamma^k by explicit summation.
inline double geometric_sum(double gamma, int K) {
  double s = 0.0, d = 1.0;
  for (int k = 0; k < K; ++k) {
    s += d;
    d *= gamma;
  }
  return s;
}

}  // namespace qlab::oracle
