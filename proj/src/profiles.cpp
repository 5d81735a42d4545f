#include "varifold_lab/profiles.hpp"

#include <cmath>
#include <stdexcept>

namespace vl {

double Cutoff::gamma(double t) {
  if (t <= 0.5) return 1.0;
  if (t >= 1.0) return 0.0;
  double u = 2.0 * t - 1.0;
  return 1.0 - u * u * (3.0 - 2.0 * u);
}

double Cutoff::d1(double t) {
  if (t <= 0.5 || t >= 1.0) return 0.0;
  double u = 2.0 * t - 1.0;
  return -12.0 * u * (1.0 - u);
}

double Cutoff::d2(double t) {
  if (t <= 0.5 || t >= 1.0) return 0.0;
  double u = 2.0 * t - 1.0;
  return -24.0 * (1.0 - 2.0 * u);
}

double neck_a(double s) { return ach(s) + s * std::sqrt(s * s - 1.0); }

namespace {

double safe_log(double x) { return x > 0 ? std::log(x) : kNegInf; }

void set_slope(RingPoint& p, double gp) {
  double q = 1.0 + gp * gp;
  p.cos_s = 1.0 / std::sqrt(q);
  p.sin_s = gp / std::sqrt(q);
  p.ln_op2 = gp == 0.0 ? kNegInf : 2.0 * std::log(std::fabs(gp)) - std::log(q);
}

}  // namespace

RadialProfile neck_profile_log(double s, double ln_r) {
  if (!(s >= 2.0)) throw std::invalid_argument("neck_profile: s >= 2 required");
  if (!(ln_r >= std::log(2.0 * s) - 1e-12)) throw std::invalid_argument("neck_profile: r >= 2s required");
  RadialProfile p;
  p.kind = ProfileKind::Neck;
  p.s = s;
  p.ln_R = ln_r;
  double w_half = ach_from_log(ln_r - kLn2);
  p.pieces.push_back({PieceKind::Cap, 0.0, s});
  if (w_half > ach(s)) p.pieces.push_back({PieceKind::CatenoidW, ach(s), w_half});
  p.pieces.push_back({PieceKind::Taper, 0.5, 1.0});
  return p;
}

RadialProfile neck_profile(double s, double r) {
  if (!(r > 0)) throw std::invalid_argument("neck_profile: r > 0");
  return neck_profile_log(s, std::log(r));
}

RadialProfile bent_profile_log(double ln_r) {
  if (!(ln_r >= std::log(4.0) - 1e-12)) throw std::invalid_argument("bent_profile: r >= 4 required");
  RadialProfile p;
  p.kind = ProfileKind::Bent;
  p.ln_R = ln_r;
  p.pieces.push_back({PieceKind::CatenoidW, 0.0, ach_from_log(ln_r - kLn2)});
  p.pieces.push_back({PieceKind::Taper, 0.5, 1.0});
  return p;
}

RadialProfile bent_profile(double r) {
  if (!(r >= 4.0)) throw std::invalid_argument("bent_profile: r >= 4 required");
  return bent_profile_log(std::log(r));
}

RadialProfile catenoid_profile(double r) {
  if (!(r >= 1.0)) throw std::invalid_argument("catenoid_profile: r >= 1");
  RadialProfile p;
  p.kind = ProfileKind::Catenoid;
  p.ln_R = std::log(r);
  p.pieces.push_back({PieceKind::CatenoidW, 0.0, ach(r)});
  return p;
}

RadialProfile cap_profile(double s) {
  if (!(s > 1.0)) throw std::invalid_argument("cap_profile: s > 1");
  RadialProfile p;
  p.kind = ProfileKind::Cap;
  p.s = s;
  p.pieces.push_back({PieceKind::Cap, 0.0, s});
  return p;
}

RadialProfile flat_profile(double a, double b) {
  if (!(b > a && a >= 0)) throw std::invalid_argument("flat_profile: 0 <= a < b");
  RadialProfile p;
  p.kind = ProfileKind::Flat;
  p.t0 = a;
  p.t1 = b;
  p.pieces.push_back({PieceKind::Flat, a, b});
  return p;
}

RadialProfile cone_profile(double a, double b) {
  if (!(b > a && a >= 0)) throw std::invalid_argument("cone_profile: 0 <= a < b");
  RadialProfile p;
  p.kind = ProfileKind::Cone;
  p.t0 = a;
  p.t1 = b;
  p.pieces.push_back({PieceKind::Cone, a, b});
  return p;
}

RadialProfile sphere_profile(double radius) {
  if (!(radius > 0)) throw std::invalid_argument("sphere_profile: radius > 0");
  RadialProfile p;
  p.kind = ProfileKind::Sphere;
  p.coef = radius;
  p.pieces.push_back({PieceKind::SphereAngle, 0.0, 0.5 * kPi});
  p.pieces.push_back({PieceKind::SphereAngle, 0.5 * kPi, kPi});
  return p;
}

RadialProfile paraboloid_profile(double a, double rho_max) {
  if (!(a > 0 && rho_max > 0)) throw std::invalid_argument("paraboloid_profile: positive parameters");
  RadialProfile p;
  p.kind = ProfileKind::Paraboloid;
  p.coef = a;
  p.t0 = 0.0;
  p.t1 = rho_max;
  p.pieces.push_back({PieceKind::ParaboloidRho, 0.0, rho_max});
  return p;
}

double RadialProfile::ln_footprint() const {
  if (kind == ProfileKind::Neck || kind == ProfileKind::Bent) return ln_R;
  return kNegInf;
}

std::vector<double> RadialProfile::breakpoints() const {
  switch (kind) {
    case ProfileKind::Neck: return {0.0, s, 0.5 * R(), R()};
    case ProfileKind::Bent: return {1.0, 0.5 * R(), R()};
    case ProfileKind::Catenoid: return {1.0, R()};
    case ProfileKind::Cap: return {0.0, s};
    case ProfileKind::Sphere: return {0.0, coef};
    default: return {t0, t1};
  }
}

namespace {

void check_interior(const RadialProfile& p, double t) {
  for (double b : p.breakpoints())
    if (std::fabs(t - b) <= 1e-14 * std::max(1.0, std::fabs(b))) throw std::domain_error("profile: t is a breakpoint");
}

}  // namespace

double RadialProfile::g(double t) const {
  double Rv = R();
  switch (kind) {
    case ProfileKind::Neck: {
      double A = ach_from_log(ln_R);
      if (t <= s) return neck_a(s) - std::sqrt(s * s * s * s - t * t) - A;
      if (t >= Rv) return 0.0;
      return (ach(t) - A) * Cutoff::gamma(t / Rv);
    }
    case ProfileKind::Bent:
      if (t < 1.0) throw std::domain_error("bent profile defined for t >= 1");
      if (t >= Rv) return 0.0;
      return ach(t) * Cutoff::gamma(t / Rv);
    case ProfileKind::Catenoid: return ach(t);
    case ProfileKind::Cap: return neck_a(s) - std::sqrt(s * s * s * s - t * t);
    case ProfileKind::Flat: return 0.0;
    case ProfileKind::Cone: return t;
    case ProfileKind::Sphere: return coef - std::sqrt(coef * coef - t * t);
    case ProfileKind::Paraboloid: return coef * t * t;
  }
  return 0.0;
}

double RadialProfile::d1(double t) const {
  double Rv = R();
  switch (kind) {
    case ProfileKind::Neck: {
      if (t <= s) return t / std::sqrt(s * s * s * s - t * t);
      if (t >= Rv) return 0.0;
      double A = ach_from_log(ln_R);
      return ach_d1(t) * Cutoff::gamma(t / Rv) + (ach(t) - A) * Cutoff::d1(t / Rv) / Rv;
    }
    case ProfileKind::Bent:
      if (t >= Rv) return 0.0;
      return ach_d1(t) * Cutoff::gamma(t / Rv) + ach(t) * Cutoff::d1(t / Rv) / Rv;
    case ProfileKind::Catenoid: return ach_d1(t);
    case ProfileKind::Cap: return t / std::sqrt(s * s * s * s - t * t);
    case ProfileKind::Flat: return 0.0;
    case ProfileKind::Cone: return 1.0;
    case ProfileKind::Sphere: return t / std::sqrt(coef * coef - t * t);
    case ProfileKind::Paraboloid: return 2.0 * coef * t;
  }
  return 0.0;
}

double RadialProfile::d2(double t) const {
  double Rv = R();
  switch (kind) {
    case ProfileKind::Neck: {
      if (t <= s) {
        double q = s * s * s * s - t * t;
        return s * s * s * s / (q * std::sqrt(q));
      }
      if (t >= Rv) return 0.0;
      double A = ach_from_log(ln_R), u = t / Rv;
      return ach_d2(t) * Cutoff::gamma(u) + 2.0 * ach_d1(t) * Cutoff::d1(u) / Rv + (ach(t) - A) * Cutoff::d2(u) / (Rv * Rv);
    }
    case ProfileKind::Bent: {
      if (t >= Rv) return 0.0;
      double u = t / Rv;
      return ach_d2(t) * Cutoff::gamma(u) + 2.0 * ach_d1(t) * Cutoff::d1(u) / Rv + ach(t) * Cutoff::d2(u) / (Rv * Rv);
    }
    case ProfileKind::Catenoid: return ach_d2(t);
    case ProfileKind::Cap: {
      double q = s * s * s * s - t * t;
      return s * s * s * s / (q * std::sqrt(q));
    }
    case ProfileKind::Flat: return 0.0;
    case ProfileKind::Cone: return 0.0;
    case ProfileKind::Sphere: {
      double q = coef * coef - t * t;
      return coef * coef / (q * std::sqrt(q));
    }
    case ProfileKind::Paraboloid: return 2.0 * coef;
  }
  return 0.0;
}

RingPoint RadialProfile::eval(std::size_t piece, double w) const {
  const ProfilePiece& pc = pieces.at(piece);
  RingPoint p;
  switch (pc.kind) {
    case PieceKind::Cap: {
      double s4 = s * s * s * s, q = s4 - w * w, sq = std::sqrt(q);
      double off = kind == ProfileKind::Neck ? ach_from_log(ln_R) : 0.0;
      p.ln_tau = safe_log(w);
      p.height = neck_a(s) - sq - off;
      p.ln_abs_height = safe_log(std::fabs(p.height));
      set_slope(p, w / sq);
      p.ln_area = safe_log(w) + 2.0 * std::log(s) - 0.5 * std::log(q);
      p.ln_h = std::log(2.0) - 2.0 * std::log(s);
      p.ln_b = -2.0 * std::log(s);
      break;
    }
    case PieceKind::CatenoidW: {
      double lc = log_cosh(w);
      double off = kind == ProfileKind::Neck ? ach_from_log(ln_R) : 0.0;
      p.ln_tau = lc;
      p.height = w - off;
      p.ln_abs_height = safe_log(std::fabs(p.height));
      double sech = std::exp(-lc);
      p.cos_s = std::tanh(w);
      p.sin_s = sech;
      p.ln_op2 = -2.0 * lc;
      p.ln_area = 2.0 * lc;
      p.ln_h = kNegInf;
      p.ln_b = -2.0 * lc;
      break;
    }
    case PieceKind::Taper: {
      double u = w;
      double iR2 = std::exp(-2.0 * ln_R);
      double root_u = std::sqrt(std::max(0.0, 1.0 - iR2 / (u * u)));
      double D;
      if (kind == ProfileKind::Neck) {
        double root_1 = std::sqrt(std::max(0.0, 1.0 - iR2));
        D = std::log(u) + std::log((1.0 + root_u) / (1.0 + root_1));
      } else {
        D = ln_R + std::log(u) + std::log1p(root_u);
      }
      double gam = Cutoff::gamma(u), gp = Cutoff::d1(u), gpp = Cutoff::d2(u);
      double a1 = 1.0 / std::sqrt(u * u - iR2);          // R ach'(Ru)
      double a2 = -u / std::pow(u * u - iR2, 1.5);       // R^2 ach''(Ru)
      double G1 = a1 * gam + D * gp;                      // R g'
      double G2 = a2 * gam + 2.0 * a1 * gp + D * gpp;     // R^2 g''
      p.ln_tau = ln_R + std::log(u);
      p.height = D * gam;
      p.ln_abs_height = safe_log(std::fabs(p.height));
      double lg1 = safe_log(std::fabs(G1));
      double e2 = std::exp(2.0 * (lg1 - ln_R));  // g'^2
      p.cos_s = 1.0 / std::sqrt(1.0 + e2);
      p.sin_s = (G1 >= 0 ? 1.0 : -1.0) * std::sqrt(e2 / (1.0 + e2));
      p.ln_op2 = 2.0 * (lg1 - ln_R) - std::log1p(e2);
      p.ln_area = 2.0 * ln_R + std::log(u) + 0.5 * std::log1p(e2);
      double hv = std::fabs(G1 / u + G2 / (1.0 + e2));
      p.ln_h = safe_log(hv) - 2.0 * ln_R - 0.5 * std::log1p(e2);
      double bv = std::max(std::fabs(G1) / u, std::fabs(G2) / (1.0 + e2));
      p.ln_b = safe_log(bv) - 2.0 * ln_R - 0.5 * std::log1p(e2);
      break;
    }
    case PieceKind::Flat: {
      p.ln_tau = safe_log(w);
      p.height = 0.0;
      p.ln_area = safe_log(w);
      break;
    }
    case PieceKind::Cone: {
      p.ln_tau = safe_log(w);
      p.height = w;
      p.ln_abs_height = safe_log(w);
      set_slope(p, 1.0);
      p.ln_area = safe_log(w) + 0.5 * std::log(2.0);
      p.ln_h = safe_log(1.0 / (std::sqrt(2.0) * w));
      p.ln_b = p.ln_h;
      break;
    }
    case PieceKind::SphereAngle: {
      double Rs = coef, sn = std::sin(w);
      p.ln_tau = std::log(Rs) + safe_log(sn);
      p.height = Rs * (1.0 - std::cos(w));
      p.ln_abs_height = std::log(2.0 * Rs) + 2.0 * safe_log(std::sin(0.5 * w));
      p.cos_s = std::cos(w);
      p.sin_s = sn;
      p.ln_op2 = 2.0 * safe_log(sn);
      p.ln_area = 2.0 * std::log(Rs) + safe_log(sn);
      p.ln_h = std::log(2.0 / Rs);
      p.ln_b = -std::log(Rs);
      break;
    }
    case PieceKind::ParaboloidRho: {
      double a = coef, lr = safe_log(w);
      double x2 = std::exp(std::log(4.0 * a * a) + 2.0 * lr);  // g'^2
      p.ln_tau = lr;
      p.height = a * w * w;
      p.ln_abs_height = std::log(a) + 2.0 * lr;
      p.cos_s = 1.0 / std::sqrt(1.0 + x2);
      p.sin_s = std::sqrt(x2 / (1.0 + x2));
      p.ln_op2 = std::log(4.0 * a * a) + 2.0 * lr - std::log1p(x2);
      p.ln_area = lr + 0.5 * std::log1p(x2);
      p.ln_h = std::log(2.0 * a + 2.0 * a / (1.0 + x2)) - 0.5 * std::log1p(x2);
      p.ln_b = std::log(2.0 * a) - 0.5 * std::log1p(x2);
      break;
    }
  }
  return p;
}

std::string RadialProfile::descriptor() const {
  switch (kind) {
    case ProfileKind::Neck: return "neck";
    case ProfileKind::Bent: return "bent";
    case ProfileKind::Catenoid: return "catenoid";
    case ProfileKind::Cap: return "cap";
    case ProfileKind::Flat: return "flat";
    case ProfileKind::Cone: return "cone";
    case ProfileKind::Sphere: return "sphere";
    case ProfileKind::Paraboloid: return "paraboloid";
  }
  return "custom";
}

nlohmann::json RadialProfile::to_json() const {
  nlohmann::json j;
  j["kind"] = descriptor();
  j["s"] = s;
  j["ln_r"] = ln_R;
  j["coef"] = coef;
  j["t0"] = t0;
  j["t1"] = t1;
  return j;
}

RadialProfile RadialProfile::from_json(const nlohmann::json& j) {
  std::string k = j.at("kind");
  double s = j.value("s", 0.0), lr = j.value("ln_r", 0.0), c = j.value("coef", 0.0);
  double a = j.value("t0", 0.0), b = j.value("t1", 0.0);
  if (k == "neck") return neck_profile_log(s, lr);
  if (k == "bent") return bent_profile_log(lr);
  if (k == "catenoid") return catenoid_profile(std::exp(lr));
  if (k == "cap") return cap_profile(s);
  if (k == "flat") return flat_profile(a, b);
  if (k == "cone") return cone_profile(a, b);
  if (k == "sphere") return sphere_profile(c);
  if (k == "paraboloid") return paraboloid_profile(c, b);
  throw std::invalid_argument("unknown profile kind " + k);
}

double radial_mean_curvature(int n, const RadialProfile& p, double t) {
  check_interior(p, t);
  double gp = p.d1(t), gpp = p.d2(t), q = 1.0 + gp * gp;
  return std::fabs((n - 2) * gp / t + gpp / q) / std::sqrt(q);
}

double radial_second_fund_norm(int n, const RadialProfile& p, double t) {
  (void)n;
  check_interior(p, t);
  double gp = p.d1(t), gpp = p.d2(t), q = 1.0 + gp * gp;
  return std::max(std::fabs(gp) / t, std::fabs(gpp) / q) / std::sqrt(q);
}

std::pair<double, double> catenoid_closed_forms(double r) {
  if (!(r >= 1.0)) throw std::invalid_argument("catenoid_closed_forms: r >= 1");
  double area = 2.0 * kPi * (ach(r) + r * std::sqrt(r * r - 1.0));
  double tilt = 8.0 * kPi * ach(r);
  return {area, tilt};
}

}  // namespace vl
