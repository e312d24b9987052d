#include "ipdg/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace ipdg {

void gauss_points_1d(int n, std::vector<double> &nodes,
                     std::vector<double> &weights) {
  if (n < 1 || n > 20)
    throw InvalidParameter("gauss rule: 1D point count must be in [1,20], got " +
                           std::to_string(n));
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  // Newton iteration on P_n over [-1,1], then affine map to [-1/2,1/2].
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p0 = 0, p1 = 0;
    for (int it = 0; it < 100; ++it) {
      p0 = 1.0;
      p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      double dp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    p0 = 1.0;
    p1 = 0.0;
    for (int j = 0; j < n; ++j) {
      double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
    }
    double dp = n * (x * p0 - p1) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x / 2.0;
    nodes[n - 1 - i] = x / 2.0;
    weights[i] = w / 2.0;
    weights[n - 1 - i] = w / 2.0;
  }
  if (n % 2 == 1) // symmetric rule: center node is exactly 0
    nodes[n / 2] = 0.0;
}

namespace {

QuadRule make_rule(int n, int d) {
  if (d < 1 || d > 3)
    throw InvalidParameter("gauss rule: dimension must be 1, 2 or 3, got " +
                           std::to_string(d));
  std::vector<double> x, w;
  gauss_points_1d(n, x, w);
  QuadRule rule;
  rule.n = n;
  rule.dim = d;
  if (d == 1) {
    for (int i = 0; i < n; ++i) {
      rule.points.push_back({x[i], 0.0, 0.0});
      rule.weights.push_back(w[i]);
    }
  } else if (d == 2) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        rule.points.push_back({x[i], x[j], 0.0});
        rule.weights.push_back(w[i] * w[j]);
      }
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          rule.points.push_back({x[i], x[j], x[l]});
          rule.weights.push_back(w[i] * w[j] * w[l]);
        }
  }
  return rule;
}

} // namespace

const QuadRule &gauss_rule(int n, int d) {
  static std::map<std::pair<int, int>, QuadRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(n, d);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, make_rule(n, d)).first;
  return it->second;
}

int oscillatory_order(double k, double h) {
  if (k < 0 || h <= 0)
    throw InvalidParameter("oscillatory_order: need k >= 0 and h > 0");
  int n = static_cast<int>(std::ceil(k * h / 2.0)) + 2;
  n = std::max(3, n);
  return std::min(n, 20);
}

} // namespace ipdg
