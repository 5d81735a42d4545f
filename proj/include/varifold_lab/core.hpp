#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "varifold_lab/xreal.hpp"

namespace vl {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLn2 = 0.69314718055994530942;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double ach(double t);
double ach_d1(double t);
double ach_d2(double t);
// ach(t) given ln t, valid for any t >= 1 including t beyond double range.
double ach_from_log(double ln_t);
double unit_ball_volume(int m);
// ln(cosh w) for w >= 0 without overflow.
double log_cosh(double w);

class Modulus {
 public:
  enum class Kind { Power, LogInverse, LogLogLog, Table, Psi };

  static Modulus power(double p);
  static Modulus log_inverse(double k);
  static Modulus log_loglog();
  static Modulus table(std::vector<std::pair<double, double>> samples, std::string source = "inline");
  // t -> max(8*Delta*omega(t)^expo, 4 t^2) for t <= eta, 1 beyond, clamped to [0, 1].
  static Modulus psi(const Modulus& base, double Delta, double eta, double expo);
  static Modulus parse(const std::string& spec);

  double operator()(double t) const;
  // ln omega(e^{-L}) for L >= 0; -inf when omega vanishes.
  double ln_at(double L) const;
  Kind kind() const { return kind_; }
  double parameter() const { return param_; }
  std::string descriptor() const;

 private:
  double raw_ln(double L) const;
  Kind kind_ = Kind::Power;
  double param_ = 1.0;
  std::vector<std::pair<double, double>> table_;
  std::string source_;
  std::shared_ptr<const Modulus> base_;
  double delta_ = 0.0, eta_ = 0.0, expo_ = 1.0;
};

struct DiniResult {
  double value = 0.0;
  bool divergent = false;
  std::vector<double> shells;
};
DiniResult dini_integral(const Modulus& omega, int quad_points = 32);

class Plane {
 public:
  Plane() = default;
  // Frame columns must be orthonormal to 1e-12.
  explicit Plane(Eigen::MatrixXd frame);
  static Plane from_span(const Eigen::MatrixXd& vectors);
  static Plane coordinate(int n, int m);
  static Plane graph_of(const Eigen::VectorXd& L);
  int ambient() const { return static_cast<int>(frame_.rows()); }
  int dim() const { return static_cast<int>(frame_.cols()); }
  const Eigen::MatrixXd& frame() const { return frame_; }
  Eigen::MatrixXd projection() const { return frame_ * frame_.transpose(); }

 private:
  Eigen::MatrixXd frame_;
};

enum class TiltNorm { Frobenius, Operator };
TiltNorm parse_norm(const std::string& s);
std::string norm_name(TiltNorm n);

bool is_projection(const Eigen::MatrixXd& P, double tol = 1e-10);
double matrix_tilt(const Eigen::MatrixXd& PS, const Eigen::MatrixXd& PT, TiltNorm norm);
double tilt_distance(const Plane& S, const Plane& T, TiltNorm norm);

struct OrliczFunction {
  int m = 2;
  double scale = 1.0;
  double phi(double t) const;
  double phi_inv(double t) const;
  double operator()(double t) const { return scale * phi(t); }
};

struct KappaFunction {
  int m = 2;
  double operator()(double t) const;
};

struct WeightedSamples {
  std::vector<double> values;
  std::vector<double> weights;
  void add(double v, double w) {
    values.push_back(v);
    weights.push_back(w);
  }
  double total_weight() const;
};

// Samples whose values and weights may lie outside double range.
struct XWeightedSamples {
  std::vector<XReal> values;
  std::vector<XReal> weights;
  void add(const XReal& v, const XReal& w) {
    values.push_back(v);
    weights.push_back(w);
  }
};

double luxemburg_norm(const WeightedSamples& samples, const OrliczFunction& phi);
XReal luxemburg_norm(const XWeightedSamples& samples, int m, const XReal& scale);
bool kappa_bound_check(double alpha, int m, const std::vector<double>& grid);

// Kahan-compensated accumulator.
struct KahanSum {
  double sum = 0.0, c = 0.0;
  void add(double x) {
    double y = x - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

}  // namespace vl
