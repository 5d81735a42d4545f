#include "varifold_lab/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace vl {

namespace {

GaussLegendre compute_gl(int n) {
  GaussLegendre g;
  g.x.resize(n);
  g.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      double dz = p1 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
    }
    double w = 2.0 / ((1.0 - z * z) * dp * dp);
    g.x[i] = -z;
    g.x[n - 1 - i] = z;
    g.w[i] = w;
    g.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) g.x[n / 2] = 0.0;
  return g;
}

}  // namespace

const GaussLegendre& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussLegendre>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussLegendre>(compute_gl(n));
  return *slot;
}

std::vector<QuadNode> composite_nodes(double a, double b, int pieces, int order, double grade) {
  std::vector<QuadNode> out;
  if (!(b > a) || pieces < 1) return out;
  std::vector<double> widths(pieces);
  double total = 0.0;
  for (int i = 0; i < pieces; ++i) {
    int d = std::min(i, pieces - 1 - i);
    widths[i] = std::pow(grade, d);
    total += widths[i];
  }
  const auto& gl = gauss_legendre(order);
  out.reserve(static_cast<std::size_t>(pieces) * order);
  double x0 = a;
  for (int i = 0; i < pieces; ++i) {
    double x1 = i == pieces - 1 ? b : x0 + (b - a) * widths[i] / total;
    double h = 0.5 * (x1 - x0), c = 0.5 * (x0 + x1);
    for (int k = 0; k < order; ++k) out.push_back({c + h * gl.x[k], h * gl.w[k]});
    x0 = x1;
  }
  return out;
}

}  // namespace vl
