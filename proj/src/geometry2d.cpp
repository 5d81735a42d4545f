#include "varifold_lab/geometry2d.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace vl {

namespace {
constexpr double kPiD = 3.14159265358979323846;
}

double lens_area(double r1, double r2, double d) {
  if (r1 <= 0 || r2 <= 0) return 0.0;
  d = std::fabs(d);
  if (d >= r1 + r2) return 0.0;
  double rs = std::min(r1, r2), rl = std::max(r1, r2);
  if (d <= rl - rs) return kPiD * rs * rs;
  double c1 = std::clamp((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1), -1.0, 1.0);
  double c2 = std::clamp((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2), -1.0, 1.0);
  double a1 = std::acos(c1), a2 = std::acos(c2);
  return r1 * r1 * (a1 - 0.5 * std::sin(2.0 * a1)) + r2 * r2 * (a2 - 0.5 * std::sin(2.0 * a2));
}

namespace {

// antiderivative of sqrt(r^2 - x^2)
double circ_prim(double x, double r) {
  x = std::clamp(x, -r, r);
  return 0.5 * (x * std::sqrt(std::max(0.0, r * r - x * x)) + r * r * std::asin(x / r));
}

// integral over x in [a,b] of the length of [-h(x), h(x)] intersected with [y0, y1], h = sqrt(r^2 - x^2)
double strip_area(double a, double b, double r, double y0, double y1) {
  a = std::max(a, -r);
  b = std::min(b, r);
  if (b <= a || y1 <= y0) return 0.0;
  // split where h(x) crosses |y0| or |y1|
  std::vector<double> cuts{a, b};
  for (double y : {y0, y1}) {
    if (std::fabs(y) < r) {
      double x = std::sqrt(r * r - y * y);
      for (double c : {-x, x})
        if (c > a && c < b) cuts.push_back(c);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double u = cuts[i], v = cuts[i + 1];
    if (v <= u) continue;
    double xm = 0.5 * (u + v), hm = std::sqrt(std::max(0.0, r * r - xm * xm));
    // on this subinterval the upper limit is either y1 or h, the lower either y0 or -h
    bool upper_h = hm < y1, lower_h = -hm > y0;
    if ((upper_h ? hm : y1) <= (lower_h ? -hm : y0)) continue;
    double hint = circ_prim(v, r) - circ_prim(u, r);
    double up = upper_h ? hint : y1 * (v - u);
    double lo = lower_h ? -hint : y0 * (v - u);
    total += up - lo;
  }
  return total;
}

}  // namespace

double disk_rect_area(double cx, double cy, double r, double x0, double x1, double y0, double y1) {
  if (r <= 0) return 0.0;
  return strip_area(x0 - cx, x1 - cx, r, y0 - cy, y1 - cy);
}

double arc_fraction_disk(double rho, double R, double d) {
  if (R <= 0) return 0.0;
  d = std::fabs(d);
  if (rho <= 0) return d <= R ? 1.0 : 0.0;
  if (rho + d <= R) return 1.0;
  if (rho >= d + R || d >= rho + R) return 0.0;
  double c = (rho * rho + d * d - R * R) / (2.0 * rho * d);
  return std::acos(std::clamp(c, -1.0, 1.0)) / kPiD;
}

double arc_fraction_rect(double rho, double cx, double cy, double x0, double x1, double y0, double y1) {
  if (rho <= 0) return (cx >= x0 && cx <= x1 && cy >= y0 && cy <= y1) ? 1.0 : 0.0;
  std::vector<double> ang{0.0, 2.0 * kPiD};
  auto add_x = [&](double x) {
    double c = (x - cx) / rho;
    if (std::fabs(c) < 1.0) {
      double a = std::acos(c);
      ang.push_back(a);
      ang.push_back(2.0 * kPiD - a);
    }
  };
  auto add_y = [&](double y) {
    double s = (y - cy) / rho;
    if (std::fabs(s) < 1.0) {
      double a = std::asin(s);
      ang.push_back(a < 0 ? a + 2.0 * kPiD : a);
      ang.push_back(kPiD - a);
    }
  };
  add_x(x0);
  add_x(x1);
  add_y(y0);
  add_y(y1);
  std::sort(ang.begin(), ang.end());
  double inside = 0.0;
  for (std::size_t i = 0; i + 1 < ang.size(); ++i) {
    double a = ang[i], b = ang[i + 1];
    if (b <= a) continue;
    double m = 0.5 * (a + b);
    double x = cx + rho * std::cos(m), y = cy + rho * std::sin(m);
    if (x >= x0 && x <= x1 && y >= y0 && y <= y1) inside += b - a;
  }
  return inside / (2.0 * kPiD);
}

}  // namespace vl
