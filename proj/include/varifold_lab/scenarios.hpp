#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "varifold_lab/dyadic.hpp"
#include "varifold_lab/profiles.hpp"
#include "varifold_lab/rings.hpp"
#include "varifold_lab/varifold.hpp"

namespace vl {

enum class ScenarioKind { TheoremB, TheoremCDini, TheoremCSparse, Sphere, Graph };
std::string scenario_kind_name(ScenarioKind k);
ScenarioKind parse_scenario_kind(const std::string& s);

enum class QKind { Mass, Tilt, Height, Orlicz, DeltaMass, LevelTilt, DensityMass, Holes, BIntegral };

struct Quantity {
  QKind kind = QKind::Mass;
  double q = 2.0;
  TiltNorm norm = TiltNorm::Frobenius;
  double theta = 1.0 / 3.0;
  int density = 1;
  bool density_equals = false;
  double scale = 1.0;  // Orlicz measure scale, in units of r^-m

  std::string tag() const;
  static Quantity parse(const std::string& s);
  static Quantity mass() { return {}; }
  static Quantity tilt(double q = 2.0, TiltNorm n = TiltNorm::Frobenius) {
    Quantity x;
    x.kind = QKind::Tilt;
    x.q = q;
    x.norm = n;
    return x;
  }
  static Quantity simple(QKind k, double q = 2.0) {
    Quantity x;
    x.kind = k;
    x.q = q;
    return x;
  }
};

struct Measurement {
  XReal value;        // physical units
  XReal uncertainty;  // half-width of the bracket from unresolved cells
  bool valid = true;
  std::string note;
  XReal lower() const { return value - uncertainty; }
  XReal upper() const { return value + uncertainty; }
};

// Per-generation bridge model.
struct BridgeTemplate {
  bool present = false;
  RadialProfile profile;
  double ln_sigma = 0.0;      // physical placement scale
  double ln_half = 0.0;       // ln of the cube half-side
  double ln_footprint = 0.0;  // physical ln radius of the modified disk
  double ln_hole = kNegInf;   // physical ln radius of the hole disk
  double height_bound = 0.0;  // unscaled
  int sheets = 1;
};

struct Calibration {
  double Gamma = 0.0;
  nlohmann::json grid;
};
Calibration calibrate_neck();
Calibration calibrate_bent();

struct ScenarioParams {
  ScenarioKind kind = ScenarioKind::TheoremB;
  std::string omega = "loginv:1";
  double lambda = 0.5;
  double epsilon_lip = 1.0;
  int depth = 12;
  int m = 2;
  int resolution = 32;
  uint64_t seed = 0;
  int samples = 32;
  double control_param = 1.0;   // sphere radius or paraboloid coefficient
  double control_extent = 1.0;  // paraboloid cap radius
};

class Scenario {
 public:
  std::string id;
  ScenarioParams params;
  Modulus omega;
  Modulus family_omega;
  double Delta = 0.0;
  double lambda_scn = 0.0;
  double eta = 0.0;
  double ln_epsilon = 0.0;
  int background_multiplicity = 1;
  std::optional<CubeFamily> family;
  std::vector<BridgeTemplate> templates;  // by generation position
  std::vector<DyadicPoint> C;
  std::vector<double> ln_B;
  double sample_acceptance = 0.0;
  Calibration calibration;
  std::optional<RadialProfile> control;

  bool is_control() const { return params.kind == ScenarioKind::Sphere || params.kind == ScenarioKind::Graph; }
  bool has_holes() const {
    return params.kind == ScenarioKind::TheoremCDini || params.kind == ScenarioKind::TheoremCSparse;
  }

  // Query at c (a point of the base plane) with radius exp(ln_r).
  std::vector<Measurement> measure(const DyadicPoint& c, double ln_r, RegionKind region,
                                   const std::vector<Quantity>& qs) const;
  // Smooth controls: point on the rotation axis.
  std::vector<Measurement> measure_control(double ln_r, RegionKind region, const std::vector<Quantity>& qs) const;

  // Off-C points: near a corner of a generated cube, outside its bridge.
  std::vector<DyadicPoint> off_c_points(std::size_t count) const;

  // Atom model of the whole scenario for moderate depths (explicit enumeration).
  DiscreteVarifold atoms(int resolution, std::size_t cube_limit = 20000) const;

  XReal template_total(int gen_pos, const RingSpec& spec) const;
  const XWeightedSamples& template_samples(int gen_pos) const;

  nlohmann::json to_json() const;
  static Scenario from_json(const nlohmann::json& j);

 private:
  struct Cache {
    std::mutex mu;
    std::map<std::pair<int, RingSpec>, XReal> totals;
    std::map<int, XWeightedSamples> samples;
  };
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
  friend Scenario build_scenario(const ScenarioParams& p);
};

Scenario build_scenario(const ScenarioParams& p);
Scenario build_theorem_b(const std::string& omega, double epsilon_lip, int depth, int resolution, uint64_t seed,
                         int samples = 32);
Scenario build_theorem_c(FamilyVariant variant, const std::string& omega, int depth, int resolution, uint64_t seed,
                         int samples = 32);
Scenario build_smooth_control(ScenarioKind kind, double param, double extent, int resolution);
DiscreteVarifold smooth_control_atoms(const Scenario& s, int resolution);

// Coercive-estimate sides on a scenario with C = closed ball B(c, 2r) and K = B(c, 4r).
struct ScenarioCoercive {
  XReal lhs;
  std::array<XReal, 3> rhs{};
  XReal delta_mass_K, orlicz;
  bool valid = true;
  XReal rhs_sum() const { return rhs[0] + rhs[1] + rhs[2]; }
  double ratio() const;
};
XReal kappa_x(const XReal& t, int m);
ScenarioCoercive scenario_coercive(const Scenario& s, const DyadicPoint& c, double ln_r, double gamma_iso = 2.0);

}  // namespace vl
