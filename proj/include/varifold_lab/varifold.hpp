#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "varifold_lab/core.hpp"
#include "varifold_lab/profiles.hpp"

namespace vl {

constexpr int kMaxAmbient = 4;
constexpr int kMaxDim = 3;

struct VarifoldAtom {
  std::array<double, kMaxAmbient> point{};
  std::array<std::array<double, kMaxAmbient>, kMaxDim> frame{};
  double weight = 0.0;
  int density = 1;
  double mean_curv = 0.0;
  double sff = 0.0;
};

struct Disk {
  double cx = 0, cy = 0, r = 0;
};

// Horizontal plane {z = 0} in R^3 with multiplicity, minus excluded disks.
// For n = 4 the plane is lifted by the fourth axis over [lift_lo, lift_hi].
struct AnalyticBackground {
  int multiplicity = 1;
  std::vector<Disk> excluded;
  double lift_lo = 0.0, lift_hi = 0.0;
};

enum class RegionKind { Ball, Cylinder, Cube };

struct Region {
  RegionKind kind = RegionKind::Ball;
  std::vector<double> center;
  double r = 1.0;
  double h = 1.0;  // cylinder half-height
  std::optional<Plane> axis_plane;  // cylinder plane T; horizontal when absent

  static Region ball(std::vector<double> c, double r);
  // C(T, c, r, h); h may be +infinity.
  static Region cylinder(std::vector<double> c, double r, double h, std::optional<Plane> T = std::nullopt);
  static Region cube(std::vector<double> c, double half_side);
  bool contains(const double* z, int n) const;
  bool vertical_cylinder() const;
  std::string kind_name() const;
};

class DiscreteVarifold {
 public:
  int n = 3, m = 2;
  std::optional<AnalyticBackground> background;
  std::vector<VarifoldAtom> atoms;
  std::optional<std::vector<Disk>> holes;  // hole disks in T0 coordinates, when known
  nlohmann::json provenance;

  void append(const std::vector<VarifoldAtom>& more) { atoms.insert(atoms.end(), more.begin(), more.end()); }
};

struct Placement {
  std::array<double, 3> center{0, 0, 0};
  double scale = 1.0;
  double vscale = 1.0;  // must equal scale (homotheties only)
  bool reflect = false;
  int density = 1;
};

std::vector<VarifoldAtom> discretize_profile(const RadialProfile& p, const Placement& at, int n, int resolution);

double mass(const DiscreteVarifold& V, const Region& R);
double tilt_excess(const DiscreteVarifold& V, const Region& R, const Plane& T, double q,
                   TiltNorm norm = TiltNorm::Frobenius);
double height_excess(const DiscreteVarifold& V, const Region& R, const std::vector<double>& c, const Plane& T,
                     double q);
double height_sup(const DiscreteVarifold& V, const Region& R, const std::vector<double>& c, const Plane& T);
double height_orlicz(const DiscreteVarifold& V, const Region& R, const std::vector<double>& c, const Plane& T,
                     const OrliczFunction& phi);
double first_variation_mass(const DiscreteVarifold& V, const Region& R);

struct LevelSetPredicate {
  enum class Kind { TiltAtLeast, DensityEquals, DensityAtMost } kind = Kind::TiltAtLeast;
  double theta = 1.0 / 3.0;
  std::optional<Plane> T;  // horizontal when absent
  int d = 1;
};
double level_set_mass(const DiscreteVarifold& V, const Region& R, const LevelSetPredicate& pred);
double hole_measure(const DiscreteVarifold& V, const Plane& T, const std::vector<double>& c, double r);
double second_fund_integral(const DiscreteVarifold& V, const Region& R, double q);

struct CoerciveSides {
  double lhs = 0.0;
  std::array<double, 3> rhs{0, 0, 0};
  double delta_mass_K = 0.0;
  double orlicz = 0.0;
  double gamma_iso = 2.0;
  double rhs_sum() const { return rhs[0] + rhs[1] + rhs[2]; }
};
// C, K balls or cubes with C inside K.
CoerciveSides coercive_sides(const DiscreteVarifold& V, const Region& C, const Region& K, const std::vector<double>& c,
                             const Plane& T, double r, double gamma_iso = 2.0);
double coercive_rhs_scalar(int m, double r, double delta_mass_K, double orlicz, double height2);

enum class ProductQuantity { Mass, Tilt, LevelSetTilt };
struct ProductQuery {
  ProductQuantity kind = ProductQuantity::Mass;
  double q = 2.0;
  TiltNorm norm = TiltNorm::Frobenius;
  double theta = 1.0 / 3.0;
};
// Fubini value over an axis-aligned cube of R^{3+k}.
double product_cube_measurement(const DiscreteVarifold& V2, int k, const Region& cube, const ProductQuery& q);
// Direct evaluation on a lifted (n = 4) varifold, same cube and query.
double lifted_cube_measurement(const DiscreteVarifold& V4, const Region& cube, const ProductQuery& q);
// V2 x [lo, hi] with Gauss-Legendre nodes along the extra axis.
DiscreteVarifold lift_product(const DiscreteVarifold& V2, double lo, double hi, int nodes);

// Test varifolds: neck over the plane, bent catenoid pair over the doubled plane, full catenoid.
DiscreteVarifold make_neck_varifold(double s, double r, int resolution);
DiscreteVarifold make_bent_varifold(double r, int resolution);
DiscreteVarifold make_catenoid_varifold(double r, int resolution);

// Projection of the atom's tangent plane.
Eigen::MatrixXd atom_projection(const VarifoldAtom& a, int n, int m);
double atom_tilt(const VarifoldAtom& a, int n, int m, const Eigen::MatrixXd& PT, TiltNorm norm);

}  // namespace vl
