#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "nbqi/knots.hpp"

namespace testgen {

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double uniform(double a, double b) {
    return a + (b - a) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }
};

/// Strictly increasing knots with consecutive step ratios in [1/ratio, ratio].
inline std::vector<double> random_knots(Gen& g, int intervals, double ratio = 3.0) {
  std::vector<double> t{g.uniform(-5.0, 5.0)};
  double h = g.uniform(0.2, 2.0);
  for (int k = 0; k < intervals; ++k) {
    t.push_back(t.back() + h);
    h *= std::exp(g.uniform(-1.0, 1.0) * std::log(ratio));
  }
  return t;
}

inline nbqi::KnotWindow random_window(Gen& g, int m, int intervals,
                                      double ratio = 3.0) {
  return nbqi::KnotWindow(random_knots(g, intervals, ratio), m, g.integer(-6, 6));
}

inline nbqi::KnotWindow uniform_window(int m, int intervals, double h = 1.0,
                                       nbqi::Index offset = 0) {
  std::vector<double> t;
  for (int k = 0; k <= intervals; ++k) t.push_back(h * (k + offset));
  return nbqi::KnotWindow(t, m, offset);
}

/// 5-point Gauss-Legendre on [a, b]; exact for degree <= 9.
template <typename F>
double gauss5(F&& f, double a, double b) {
  static const double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                              0.5384693101056831, 0.9061798459386640};
  static const double w[5] = {0.2369268850561891, 0.4786286704993665,
                              0.5688888888888889, 0.4786286704993665,
                              0.2369268850561891};
  const double c = 0.5 * (a + b), r = 0.5 * (b - a);
  double s = 0.0;
  for (int k = 0; k < 5; ++k) s += w[k] * f(c + r * x[k]);
  return r * s;
}

/// Textbook recursive B-spline on knots[first..first+order], right-continuous.
inline double bspline_recursive(const std::vector<double>& k, std::size_t first,
                                int degree, double x) {
  if (degree == 0) return (k[first] <= x && x < k[first + 1]) ? 1.0 : 0.0;
  const double a = (x - k[first]) / (k[first + degree] - k[first]);
  const double b = (k[first + degree + 1] - x) / (k[first + degree + 1] - k[first + 1]);
  return a * bspline_recursive(k, first, degree - 1, x) +
         b * bspline_recursive(k, first + 1, degree - 1, x);
}

}  // namespace testgen
