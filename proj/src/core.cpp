#include "varifold_lab/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "varifold_lab/quadrature.hpp"

namespace vl {

std::string XReal::str() const {
  if (m_ == 0.0) return "0";
  double v = to_double();
  char buf[64];
  if (v != 0.0 && std::isfinite(v) && std::fabs(v) > 1e-300) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }
  double l10 = log2() * 0.30102999566398119521;
  double e10 = std::floor(l10);
  std::snprintf(buf, sizeof buf, "%s%.15ge%+.0f", m_ < 0 ? "-" : "", std::pow(10.0, l10 - e10), e10);
  return buf;
}

double ach(double t) {
  if (!(t >= 1.0)) throw std::domain_error("ach: argument below 1");
  if (t > 1e150) return std::log(t) + kLn2;
  return std::log(t + std::sqrt((t - 1.0) * (t + 1.0)));
}

double ach_d1(double t) {
  if (!(t > 1.0)) throw std::domain_error("ach_d1: argument must exceed 1");
  return 1.0 / std::sqrt((t - 1.0) * (t + 1.0));
}

double ach_d2(double t) {
  if (!(t > 1.0)) throw std::domain_error("ach_d2: argument must exceed 1");
  double q = (t - 1.0) * (t + 1.0);
  return -t / (q * std::sqrt(q));
}

double ach_from_log(double ln_t) {
  if (!(ln_t >= 0.0)) throw std::domain_error("ach_from_log: argument below 1");
  if (ln_t < 20.0) return ach(std::exp(ln_t));
  double inv2 = std::exp(-2.0 * ln_t);
  return ln_t + std::log1p(std::sqrt(1.0 - inv2));
}

double log_cosh(double w) {
  w = std::fabs(w);
  return w + std::log1p(std::exp(-2.0 * w)) - kLn2;
}

double unit_ball_volume(int m) {
  if (m < 0) throw std::invalid_argument("unit_ball_volume: negative dimension");
  return std::pow(kPi, 0.5 * m) / std::tgamma(0.5 * m + 1.0);
}

// ---- moduli ----

Modulus Modulus::power(double p) {
  if (!(p > 0)) throw std::invalid_argument("power modulus needs p > 0");
  Modulus w;
  w.kind_ = Kind::Power;
  w.param_ = p;
  return w;
}

Modulus Modulus::log_inverse(double k) {
  if (!(k > 0)) throw std::invalid_argument("loginv modulus needs k > 0");
  Modulus w;
  w.kind_ = Kind::LogInverse;
  w.param_ = k;
  return w;
}

Modulus Modulus::log_loglog() {
  Modulus w;
  w.kind_ = Kind::LogLogLog;
  return w;
}

Modulus Modulus::table(std::vector<std::pair<double, double>> samples, std::string source) {
  std::sort(samples.begin(), samples.end());
  std::vector<std::pair<double, double>> clean;
  double run = 0.0;
  for (auto [t, v] : samples) {
    if (!(t > 0.0) || t > 1.0) continue;
    run = std::max(run, std::clamp(v, 0.0, 1.0));
    if (!clean.empty() && clean.back().first == t)
      clean.back().second = run;
    else
      clean.emplace_back(t, run);
  }
  if (clean.empty() || clean.front().second <= 0.0)
    throw std::invalid_argument("table modulus needs positive samples in (0,1]");
  Modulus w;
  w.kind_ = Kind::Table;
  w.table_ = std::move(clean);
  w.source_ = std::move(source);
  return w;
}

Modulus Modulus::psi(const Modulus& base, double Delta, double eta, double expo) {
  Modulus w;
  w.kind_ = Kind::Psi;
  w.base_ = std::make_shared<Modulus>(base);
  w.delta_ = Delta;
  w.eta_ = eta;
  w.expo_ = expo;
  return w;
}

Modulus Modulus::parse(const std::string& spec) {
  auto colon = spec.find(':');
  std::string head = spec.substr(0, colon);
  std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "power") return power(std::stod(arg));
  if (head == "loginv") return log_inverse(std::stod(arg));
  if (head == "logloglog") return log_loglog();
  if (head == "table") {
    std::ifstream in(arg);
    if (!in) throw std::invalid_argument("cannot open modulus table " + arg);
    std::vector<std::pair<double, double>> s;
    double t, v;
    std::string line;
    while (std::getline(in, line)) {
      for (char& c : line)
        if (c == ',') c = ' ';
      std::istringstream ls(line);
      if (ls >> t >> v) s.emplace_back(t, v);
    }
    return table(std::move(s), arg);
  }
  throw std::invalid_argument("unknown modulus spec: " + spec);
}

std::string Modulus::descriptor() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::Power: os << "power:" << param_; break;
    case Kind::LogInverse: os << "loginv:" << param_; break;
    case Kind::LogLogLog: os << "logloglog"; break;
    case Kind::Table: os << "table:" << source_; break;
    case Kind::Psi:
      os << "psi(" << base_->descriptor() << ";Delta=" << delta_ << ";eta=" << eta_ << ";expo=" << expo_ << ")";
      break;
  }
  return os.str();
}

double Modulus::raw_ln(double L) const {
  switch (kind_) {
    case Kind::Power: return -param_ * L;
    case Kind::LogInverse: return L <= 1.0 ? 0.0 : -param_ * std::log(L);
    case Kind::LogLogLog: {
      if (L < std::exp(1.0)) return -1.0;
      double lL = std::log(L);
      return -lL - 2.0 * std::log(lL);
    }
    case Kind::Table: {
      double t = std::exp(-L);
      const auto& tb = table_;
      double v;
      if (t <= tb.front().first) {
        v = tb.front().second * t / tb.front().first;
      } else if (t >= tb.back().first) {
        v = tb.back().second;
      } else {
        auto it = std::upper_bound(tb.begin(), tb.end(), std::make_pair(t, 2.0));
        auto lo = *(it - 1), hi = *it;
        double f = (t - lo.first) / (hi.first - lo.first);
        v = lo.second + f * (hi.second - lo.second);
      }
      return v > 0 ? std::log(v) : kNegInf;
    }
    case Kind::Psi: {
      if (L < -std::log(eta_)) return 0.0;
      double a = std::log(8.0 * delta_) + expo_ * base_->ln_at(L);
      double b = std::log(4.0) - 2.0 * L;
      return std::max(a, b);
    }
  }
  return kNegInf;
}

double Modulus::ln_at(double L) const {
  if (L < 0) L = 0;
  return std::min(0.0, raw_ln(L));
}

double Modulus::operator()(double t) const {
  if (!(t > 0.0)) return 0.0;
  if (t > 1.0) t = 1.0;
  return std::exp(ln_at(-std::log(t)));
}

DiniResult dini_integral(const Modulus& omega, int quad_points) {
  if (quad_points < 16) throw std::invalid_argument("dini_integral: quad_points >= 16");
  const auto& gl = gauss_legendre(quad_points);
  auto panel = [&](double a, double b) {
    KahanSum s;
    double h = 0.5 * (b - a), c = 0.5 * (a + b);
    for (std::size_t i = 0; i < gl.x.size(); ++i) s.add(gl.w[i] * std::exp(omega.ln_at(c + h * gl.x[i])));
    return s.sum * h;
  };
  // adaptive bisection so kinks of clamped moduli are resolved
  std::function<double(double, double, double, double, int)> refine = [&](double a, double b, double whole, double tol,
                                                                          int depth) {
    double mid = 0.5 * (a + b), l = panel(a, mid), r = panel(mid, b);
    if (depth >= 30 || std::fabs(l + r - whole) <= tol) return l + r;
    return refine(a, mid, l, 0.5 * tol, depth + 1) + refine(mid, b, r, 0.5 * tol, depth + 1);
  };
  auto piece = [&](double a, double b) {
    double w = panel(a, b);
    return refine(a, b, w, 1e-12 * std::fabs(w) + 1e-300, 0);
  };
  DiniResult res;
  KahanSum total;
  double wmax = 0.0;
  for (int k = 0; k <= 64; ++k) {
    double c = piece(k * kLn2, (k + 1) * kLn2);
    res.shells.push_back(c);
    total.add(c);
    wmax = std::max(wmax, (k + 1) * c);
  }
  bool flat = true;
  for (int k = 57; k <= 64; ++k)
    if ((k + 1) * res.shells[k] < 0.5 * wmax) flat = false;
  res.divergent = flat && wmax > 0.0;
  if (res.divergent) {
    res.value = std::numeric_limits<double>::infinity();
    return res;
  }
  for (double L = 65 * kLn2; L < 1e300; L *= 2.0) {
    double c = piece(L, 2.0 * L);
    total.add(c);
    if (c <= 1e-17 * total.sum) break;
  }
  res.value = total.sum;
  return res;
}

// ---- planes ----

Plane::Plane(Eigen::MatrixXd frame) : frame_(std::move(frame)) {
  if (frame_.cols() == 0 || frame_.cols() > frame_.rows()) throw std::invalid_argument("Plane: bad frame shape");
  Eigen::MatrixXd G = frame_.transpose() * frame_;
  if ((G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("Plane: frame not orthonormal");
}

Plane Plane::from_span(const Eigen::MatrixXd& vectors) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(vectors);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(vectors.rows(), vectors.cols());
  return Plane(Q);
}

Plane Plane::coordinate(int n, int m) { return Plane(Eigen::MatrixXd::Identity(n, m)); }

Plane Plane::graph_of(const Eigen::VectorXd& L) {
  int n = static_cast<int>(L.size()) + 1;
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n, n - 1);
  for (int i = 0; i < n - 1; ++i) {
    V(i, i) = 1.0;
    V(n - 1, i) = L(i);
  }
  return from_span(V);
}

TiltNorm parse_norm(const std::string& s) {
  if (s == "frobenius" || s == "fro") return TiltNorm::Frobenius;
  if (s == "operator" || s == "op") return TiltNorm::Operator;
  throw std::invalid_argument("unknown norm: " + s);
}

std::string norm_name(TiltNorm n) { return n == TiltNorm::Frobenius ? "frobenius" : "operator"; }

bool is_projection(const Eigen::MatrixXd& P, double tol) {
  if (P.rows() != P.cols()) return false;
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > tol) return false;
  if ((P * P - P).cwiseAbs().maxCoeff() > tol) return false;
  double tr = P.trace();
  return std::fabs(tr - std::round(tr)) <= tol;
}

double matrix_tilt(const Eigen::MatrixXd& PS, const Eigen::MatrixXd& PT, TiltNorm norm) {
  if (PS.rows() != PT.rows() || PS.cols() != PT.cols()) throw std::invalid_argument("tilt: dimension mismatch");
  Eigen::MatrixXd D = PS - PT;
  if (norm == TiltNorm::Frobenius) return D.norm();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double tilt_distance(const Plane& S, const Plane& T, TiltNorm norm) {
  if (S.ambient() != T.ambient()) throw std::invalid_argument("tilt_distance: ambient dimension mismatch");
  return matrix_tilt(S.projection(), T.projection(), norm);
}

// ---- Orlicz machinery ----

double OrliczFunction::phi(double t) const {
  if (t <= 0) return 0.0;
  return std::expm1(std::pow(t, static_cast<double>(m) / (m - 1)));
}

double OrliczFunction::phi_inv(double t) const {
  if (t <= 0) return 0.0;
  return std::pow(std::log1p(t), 1.0 - 1.0 / m);
}

double KappaFunction::operator()(double t) const {
  if (t <= 0) return 0.0;
  return t * (1.0 + std::pow(std::log1p(1.0 / t), 1.0 - 1.0 / m));
}

double WeightedSamples::total_weight() const {
  KahanSum s;
  for (double w : weights) s.add(w);
  return s.sum;
}

double luxemburg_norm(const WeightedSamples& samples, const OrliczFunction& phi) {
  double W = 0.0, vmax = 0.0;
  for (std::size_t i = 0; i < samples.values.size(); ++i) {
    if (samples.weights[i] <= 0) continue;
    W += samples.weights[i];
    vmax = std::max(vmax, std::fabs(samples.values[i]));
  }
  if (W <= 0 || vmax <= 0) return 0.0;
  auto F = [&](double lam) {
    KahanSum s;
    for (std::size_t i = 0; i < samples.values.size(); ++i)
      if (samples.weights[i] > 0) s.add(samples.weights[i] * phi(std::fabs(samples.values[i]) / lam));
    return s.sum;
  };
  double lo = vmax * 1e-300;
  double hi = vmax * 4.0 / phi.phi_inv(1.0 / (phi.scale * W));
  while (F(hi) > 1.0) hi *= 2.0;
  while (hi - lo > 1e-12 * hi) {
    double mid = 0.5 * (lo + hi);
    if (F(mid) > 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

namespace {

// ln Phi(x) given ln x.
double ln_phi_of_log(double ln_x, int m) {
  double p = static_cast<double>(m) / (m - 1);
  double ln_y = p * ln_x;
  if (ln_y < -30.0) return ln_y;
  double y = std::exp(ln_y);
  if (y > 700.0) return y + std::log1p(-std::exp(-y));
  return std::log(std::expm1(y));
}

// ln Phi^{-1}(y) given ln y.
double ln_phi_inv_of_log(double ln_y, int m) {
  double e = 1.0 - 1.0 / m;
  double l1p;
  if (ln_y < -30.0)
    l1p = ln_y;
  else if (ln_y > 30.0)
    l1p = std::log(ln_y + std::log1p(std::exp(-ln_y)));
  else
    l1p = std::log(std::log1p(std::exp(ln_y)));
  return e * l1p;
}

}  // namespace

XReal luxemburg_norm(const XWeightedSamples& samples, int m, const XReal& scale) {
  XReal vmax, W;
  for (std::size_t i = 0; i < samples.values.size(); ++i) {
    if (samples.weights[i].sign() <= 0) continue;
    W += samples.weights[i];
    XReal v = samples.values[i].sign() < 0 ? -samples.values[i] : samples.values[i];
    if (v > vmax) vmax = v;
  }
  if (W.is_zero() || vmax.is_zero()) return XReal();
  double ln_vmax = vmax.log();
  double ln_scale = scale.log();
  std::vector<double> lu, lw;
  for (std::size_t i = 0; i < samples.values.size(); ++i) {
    if (samples.weights[i].sign() <= 0 || samples.values[i].is_zero()) continue;
    XReal v = samples.values[i].sign() < 0 ? -samples.values[i] : samples.values[i];
    lu.push_back(v.log() - ln_vmax);
    lw.push_back(samples.weights[i].log() + ln_scale);
  }
  // ln F(mu), F(mu) = sum scale*w*Phi(u/mu), lambda = vmax*mu
  std::vector<double> t(lu.size());
  auto lnF = [&](double ln_mu) {
    double mx = kNegInf;
    for (std::size_t i = 0; i < lu.size(); ++i) mx = std::max(mx, t[i] = lw[i] + ln_phi_of_log(lu[i] - ln_mu, m));
    if (!std::isfinite(mx)) return mx;
    KahanSum acc;
    for (double x : t) acc.add(std::exp(x - mx));
    return mx + std::log(acc.sum);
  };
  double ln_W = (W * scale).log();
  double hi = std::log(4.0) - ln_phi_inv_of_log(-ln_W, m);
  while (lnF(hi) > 0.0) hi += kLn2;
  double lo = hi - kLn2;
  for (double step = kLn2; lnF(lo) <= 0.0; step *= 2.0) lo -= step;
  while (hi - lo > 1e-12 * std::max(1.0, std::fabs(hi))) {
    double mid = 0.5 * (lo + hi);
    if (lnF(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return XReal::from_log(ln_vmax + hi);
}

bool kappa_bound_check(double alpha, int m, const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("kappa_bound_check: empty grid");
  OrliczFunction phi{m, 1.0};
  double best = std::numeric_limits<double>::infinity();
  for (double t : grid) {
    double f = phi.phi(t);
    double v = alpha * t + (f > 0 ? 1.0 / f : std::numeric_limits<double>::infinity());
    best = std::min(best, v);
  }
  return best <= KappaFunction{m}(alpha) + 1e-12;
}

}  // namespace vl
