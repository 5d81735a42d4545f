#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "varifold_lab/core.hpp"

namespace vl {

struct Cutoff {
  static double gamma(double t);
  static double d1(double t);
  static double d2(double t);
};

enum class ProfileKind { Neck, Bent, Catenoid, Cap, Flat, Cone, Sphere, Paraboloid };
enum class PieceKind { Cap, CatenoidW, Taper, Flat, Cone, SphereAngle, ParaboloidRho };

// Everything a ring integrator needs at one parameter value, as logs where the
// magnitudes can leave double range. Unscaled (profile) units.
struct RingPoint {
  double ln_tau = kNegInf;     // radial coordinate
  double height = 0.0;         // g
  double ln_abs_height = kNegInf;
  double ln_area = kNegInf;    // d(area)/dw per unit angle
  double ln_op2 = kNegInf;     // g'^2 / (1 + g'^2)
  double cos_s = 1.0, sin_s = 0.0;  // unit profile tangent (radial, vertical)
  double ln_h = kNegInf;       // |mean curvature|, n = 3
  double ln_b = kNegInf;       // |second fundamental form|
};

struct ProfilePiece {
  PieceKind kind;
  double w0, w1;
};

class RadialProfile {
 public:
  ProfileKind kind = ProfileKind::Flat;
  double s = 0.0;      // neck / cap parameter
  double ln_R = 0.0;   // outer radius r (neck, bent, catenoid)
  double coef = 0.0;   // sphere radius, paraboloid coefficient
  double t0 = 0.0, t1 = 0.0;  // radial domain for flat / cone / paraboloid
  std::vector<ProfilePiece> pieces;

  std::vector<double> breakpoints() const;
  double R() const { return std::exp(ln_R); }
  // Graph values for moderate parameters. Sphere: lower hemisphere.
  double g(double t) const;
  double d1(double t) const;
  double d2(double t) const;
  RingPoint eval(std::size_t piece, double w) const;
  double tau_of(std::size_t piece, double w) const { return std::exp(eval(piece, w).ln_tau); }
  // ln of the outer radius of the modified region (neck, bent); -inf otherwise.
  double ln_footprint() const;
  // ln of the waist (hole) radius: 0 for bent, -inf otherwise.
  double ln_hole() const { return kind == ProfileKind::Bent ? 0.0 : kNegInf; }
  std::string descriptor() const;
  nlohmann::json to_json() const;
  static RadialProfile from_json(const nlohmann::json& j);
};

RadialProfile neck_profile(double s, double r);
RadialProfile neck_profile_log(double s, double ln_r);
RadialProfile bent_profile(double r);
RadialProfile bent_profile_log(double ln_r);
RadialProfile catenoid_profile(double r);
RadialProfile cap_profile(double s);
RadialProfile flat_profile(double a, double b);
RadialProfile cone_profile(double a, double b);
RadialProfile sphere_profile(double radius);
RadialProfile paraboloid_profile(double a, double rho_max);

// a(s) with f2(s) = f1(s)
double neck_a(double s);

double radial_mean_curvature(int n, const RadialProfile& p, double t);
double radial_second_fund_norm(int n, const RadialProfile& p, double t);
// Two-sheeted catenoid {|q| = ach |p|} over the disk of radius r.
std::pair<double, double> catenoid_closed_forms(double r);

}  // namespace vl
