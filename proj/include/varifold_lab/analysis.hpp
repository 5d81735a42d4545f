#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "varifold_lab/scenarios.hpp"

namespace vl {

struct ScanRow {
  std::string scenario_id;
  std::string point_id;
  std::string region_kind;
  double ln_r = 0.0;
  std::string quantity;
  double q = 2.0;
  std::string norm;
  XReal value;
  XReal uncertainty;
  bool valid = true;
  std::string note;
  int resolution = 0;
};

struct ScanTable {
  std::vector<ScanRow> rows;
  // by point, quantity, radius descending
  void sort();
  std::vector<const ScanRow*> group(const std::string& point_id, const std::string& quantity) const;
  std::vector<std::string> point_ids() const;
};

struct ScanPoint {
  std::string id;
  DyadicPoint x;  // unused for smooth controls
};

std::string region_name(RegionKind k);
RegionKind parse_region(const std::string& s);

// One row per (point, radius, quantity); radii outside [floor, epsilon] give invalid warning rows.
ScanTable radius_scan(const Scenario& s, const std::vector<ScanPoint>& points, const std::vector<double>& ln_radii,
                      const std::vector<Quantity>& qs, RegionKind region = RegionKind::Ball);

enum class Verdict { TendsToZero, BoundedBelow, Bounded, Inconclusive, Fails };
std::string verdict_name(Verdict v);

struct DecayVerdict {
  std::vector<double> ln_r;
  std::vector<double> stat;  // normalized statistic (or log margin, see `log_scale`)
  bool log_scale = false;
  int window = 5;
  Verdict verdict = Verdict::Inconclusive;
  double constant = 0.0;  // c of bounded_below or Gamma of bounded
  double slope = 0.0, residual = 0.0;
  std::string rule;
  bool pass() const { return verdict == Verdict::TendsToZero || verdict == Verdict::BoundedBelow || verdict == Verdict::Bounded; }
  nlohmann::json to_json() const;
};

struct Thresholds {
  double tends_ratio = 1e-3;      // final <= ratio * initial
  int tail_window = 5;
  int min_radii = 6;
  double b_lower = 0.1;           // Theorem B tail minimum
  double c_growth = 10.0;         // Theorem C item (iii)
};

// Verdict rules as pure functions of the samples.
DecayVerdict tends_to_zero_verdict(const std::vector<double>& ln_r, const std::vector<double>& stat,
                                   const Thresholds& th = {});
DecayVerdict bounded_below_verdict(const std::vector<double>& ln_r, const std::vector<double>& stat, double c_min,
                                   bool log_scale = false);

struct PointVerdict {
  std::string point_id;
  std::string item;  // Theorem C item label, empty otherwise
  DecayVerdict verdict;
};

struct TheoremReport {
  std::string theorem;
  std::string scenario;
  std::vector<PointVerdict> points;
  ScanTable table;
  nlohmann::json extra;
  bool pass() const;
  bool inconclusive() const;
  int exit_code() const { return inconclusive() ? 3 : (pass() ? 0 : 2); }
  nlohmann::json to_json(const Thresholds& th = {}) const;
};

// Theorem A statistic r^-4 (log 1/r)^-1 * quadratic Frobenius tilt.
double theorem_a_statistic(const XReal& tilt, double ln_r);
// Averaged Theorem B statistic r^-1 (log 1/r)^-1/2 omega(r)^-1 (tilt / mass)^1/2.
double theorem_b_statistic(const XReal& tilt, const XReal& mass, double ln_r, const Modulus& omega);

std::vector<double> control_radii(int count = 16, double L0 = 0.5, double L1 = 2000.0);

// Smooth control: the axis point; Theorem B scenario: off-C points.
TheoremReport verify_theorem_a(const Scenario& s, std::size_t points = 8, const Thresholds& th = {});
TheoremReport verify_theorem_b(const Scenario& s, std::size_t points = 16, const Thresholds& th = {});
// Items (i), (ii), (iv) on C points; item (iii) against a rebuild with depth + 2.
TheoremReport verify_theorem_c(const Scenario& s, std::size_t points = 8, std::size_t max_radii = 12,
                               const Thresholds& th = {});

// Growth of the b-integral (q = 2) inside B(c, r) from the scenario to its depth + extra rebuild.
struct GrowthResult {
  XReal before, after;
  double factor() const;
};
GrowthResult b_integral_growth(const Scenario& s, const DyadicPoint& c, double ln_r, int extra_depth = 2,
                               double q = 2.0);

// Samples of f and Df on a polar grid of the disk B(0, r), plus a mask.
struct DiskSamples {
  double r = 1.0;
  std::vector<double> f, grad;  // |Df|
  std::vector<double> weight;
  std::vector<char> mask;
};
DiskSamples sample_disk(double r, int n, const std::function<double(double, double)>& f,
                        const std::function<std::pair<double, double>(double, double)>& grad,
                        const std::function<bool(double, double)>& mask);

struct EmbeddingResult {
  double lhs = 0.0, rhs = 0.0, ratio = 0.0;
  double grad_term = 0.0, mask_term = 0.0;
  bool degenerate = false;  // 0 / 0
};
// Orlicz norm with measure scale r^-2 against ||Df||_2 + r^-1 ||f||_{2,A}; m = 2.
EmbeddingResult embedding_constant(const DiskSamples& d);

struct Normalization {
  double r_power = 0.0;
  double log_power = 0.0;
  double omega_power = 0.0;
  Modulus omega = Modulus::power(1.0);
};
struct FitResult {
  double slope = 0.0, intercept = 0.0, residual = 0.0;
  std::size_t used = 0, dropped = 0;
};
// Least squares of ln(value / normalization) against ln r.
FitResult decay_fit(const std::vector<double>& ln_r, const std::vector<XReal>& values, const Normalization& n = {});
FitResult decay_fit(const ScanTable& t, const std::string& point_id, const std::string& quantity,
                    const Normalization& n = {});

}  // namespace vl
