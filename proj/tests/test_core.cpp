#include <doctest.h>

#include <cmath>
#include <random>

#include "varifold_lab/core.hpp"
#include "varifold_lab/kernels.hpp"
#include "varifold_lab/quadrature.hpp"
#include "varifold_lab/xreal.hpp"

using namespace vl;

namespace {

// Independent projection construction: P = I - n n^T for the unit normal n.
Eigen::Matrix3d hyperplane_projection(const Eigen::Vector3d& normal) {
  Eigen::Vector3d u = normal.normalized();
  return Eigen::Matrix3d::Identity() - u * u.transpose();
}

double spectral_norm(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// inf{lambda : sum w Phi(v / lambda) <= 1} by nested dense grids, no bisection.
double grid_luxemburg(const std::vector<double>& v, const std::vector<double>& w, int m) {
  auto F = [&](double lam) {
    double s = 0;
    for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * std::expm1(std::pow(v[i] / lam, double(m) / (m - 1)));
    return s;
  };
  double lo = 1e-6, hi = 1e6;
  for (int round = 0; round < 8; ++round) {
    const int N = 2000;
    double prev = lo;
    for (int k = 0; k <= N; ++k) {
      double lam = lo * std::pow(hi / lo, double(k) / N);
      if (F(lam) <= 1.0) {
        lo = prev;
        hi = lam;
        break;
      }
      prev = lam;
    }
  }
  return hi;
}

}  // namespace

TEST_CASE("xreal arithmetic far outside double range") {
  XReal a = XReal::pow2(-400000), b = XReal::pow2(-399999);
  CHECK((a + a).log2() == doctest::Approx(-399999.0));
  CHECK(compare(a + a, b) == 0);
  CHECK((b / a).to_double() == doctest::Approx(2.0));
  CHECK(XReal::from_log(-1e5).log() == doctest::Approx(-1e5).epsilon(1e-14));
  CHECK((XReal(3.0) - XReal(5.0)).sign() == -1);
  CHECK(XReal::pow2(-1000).sqrt().log2() == doctest::Approx(-500.0));
  CHECK(XReal(0.25).str() == "0.25");
}

TEST_CASE("tilt distance examples") {
  Plane T = Plane::coordinate(3, 2);
  CHECK(tilt_distance(T, T, TiltNorm::Operator) == doctest::Approx(0.0));
  Eigen::VectorXd L(2);
  L << 1.0, 0.0;
  Plane S = Plane::graph_of(L);
  CHECK(tilt_distance(S, T, TiltNorm::Operator) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(tilt_distance(S, T, TiltNorm::Frobenius) == doctest::Approx(1.0).epsilon(1e-12));
  // against an explicit normal-vector construction
  Eigen::Matrix3d PS = hyperplane_projection(Eigen::Vector3d(-1, 0, 1));
  Eigen::Matrix3d PT = hyperplane_projection(Eigen::Vector3d(0, 0, 1));
  CHECK(spectral_norm(PS - PT) == doctest::Approx(tilt_distance(S, T, TiltNorm::Operator)).epsilon(1e-12));
}

TEST_CASE("tilt distance rejects dimension mismatch") {
  CHECK_THROWS(tilt_distance(Plane::coordinate(3, 2), Plane::coordinate(4, 2), TiltNorm::Operator));
}

TEST_CASE("random hyperplane pairs: frobenius = sqrt2 * operator") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> N(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd A(3, 2), B(3, 2);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 2; ++j) {
        A(i, j) = N(rng);
        B(i, j) = N(rng);
      }
    Plane S = Plane::from_span(A), T = Plane::from_span(B);
    double f = tilt_distance(S, T, TiltNorm::Frobenius), o = tilt_distance(S, T, TiltNorm::Operator);
    CHECK(std::fabs(f - std::sqrt(2.0) * o) <= 1e-10);
    CHECK(tilt_distance(T, S, TiltNorm::Operator) == doctest::Approx(o).epsilon(1e-12));
    Eigen::MatrixXd P = S.projection();
    CHECK(is_projection(P));
    CHECK(P.trace() == doctest::Approx(2.0));
  }
}

TEST_CASE("graph planes: operator tilt formula") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N(0, 2);
  for (int n : {3, 4}) {
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd L(n - 1);
      for (int i = 0; i < n - 1; ++i) L(i) = N(rng);
      double nl = L.norm();
      double o = tilt_distance(Plane::graph_of(L), Plane::coordinate(n, n - 1), TiltNorm::Operator);
      CHECK(std::fabs(o - nl / std::sqrt(1.0 + nl * nl)) <= 1e-10);
    }
  }
}

TEST_CASE("arcosh") {
  CHECK(ach(1.0) == 0.0);
  CHECK(ach(2.0) == doctest::Approx(std::log(2.0 + std::sqrt(3.0))).epsilon(1e-15));
  CHECK(ach(2.0) == doctest::Approx(1.3169579).epsilon(1e-7));
  for (double t : {1.5, 2.0, 10.0, 100.0}) {
    CHECK(std::log(t) <= ach(t));
    CHECK(ach(t) <= 3.0 * std::log(t));
  }
  CHECK_THROWS(ach(0.5));
  for (double t : {1.5, 3.0, 50.0}) {
    double h = 1e-6 * t;
    CHECK(ach_d1(t) == doctest::Approx((ach(t + h) - ach(t - h)) / (2 * h)).epsilon(1e-6));
    CHECK(ach_from_log(std::log(t)) == doctest::Approx(ach(t)).epsilon(1e-12));
  }
  CHECK(ach_from_log(5000.0) == doctest::Approx(5000.0 + std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("arcosh increment bound") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0, 6);
  for (int i = 0; i < 500; ++i) {
    double s = std::exp(U(rng)), t = std::exp(U(rng));
    if (s > t) std::swap(s, t);
    CHECK(ach(t) - ach(s) >= std::log(t / s) - 1e-14);
  }
}

TEST_CASE("orlicz function") {
  OrliczFunction phi{2, 1.0};
  CHECK(phi.phi(0.0) == 0.0);
  for (double t : {0.01, 0.5, 1.0, 3.0}) CHECK(phi.phi(phi.phi_inv(t)) == doctest::Approx(t).epsilon(1e-10));
  for (double t = 0.1; t < 2.0; t += 0.1) {
    double h = 1e-3;
    CHECK(phi.phi(t + h) > phi.phi(t));
    CHECK(phi.phi(t + h) + phi.phi(t - h) - 2 * phi.phi(t) >= 0.0);
  }
}

TEST_CASE("kappa function and bound check") {
  KappaFunction k{2};
  CHECK(k(0.0) == 0.0);
  CHECK(k(1.0) == doctest::Approx(1.0 + std::sqrt(std::log(2.0))).epsilon(1e-14));
  std::vector<double> grid;
  for (int i = -300; i <= 300; ++i) grid.push_back(std::pow(10.0, i / 100.0));
  CHECK(kappa_bound_check(0.0, 2, grid));
  CHECK(kappa_bound_check(10.0, 2, grid));
  // t = Phi^-1(1) gives exactly kappa(1)
  CHECK(kappa_bound_check(1.0, 2, {std::sqrt(std::log(2.0))}));
  for (double t = 0.05; t < 5; t *= 1.3) {
    CHECK(k(t * 1.01) > k(t));
    CHECK(k(1.7 * t) <= 1.7 * k(t) + 1e-14);
    double h = 1e-3 * t;
    CHECK(k(t + h) + k(t - h) - 2 * k(t) <= 1e-12);
  }
}

TEST_CASE("luxemburg examples") {
  WeightedSamples z;
  z.add(0.0, 1.0);
  CHECK(luxemburg_norm(z, {2, 1.0}) == 0.0);
  CHECK(luxemburg_norm(WeightedSamples{}, {2, 1.0}) == 0.0);
  WeightedSamples one;
  one.add(1.0, 1.0);
  CHECK(std::fabs(luxemburg_norm(one, {2, 1.0}) - 1.0 / std::sqrt(std::log(2.0))) <= 1e-10);
  CHECK(luxemburg_norm(one, {2, 1.0}) == doctest::Approx(1.20112).epsilon(1e-5));
  WeightedSamples e;
  e.add(1.0, 1.0 / (std::exp(1.0) - 1.0));
  CHECK(luxemburg_norm(e, {2, 1.0}) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("luxemburg against a dense grid oracle") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    WeightedSamples s;
    for (int i = 0; i < 10; ++i) s.add(3.0 * U(rng), 0.2 * U(rng));
    for (int m : {2, 3}) {
      double a = luxemburg_norm(s, {m, 1.0}), b = grid_luxemburg(s.values, s.weights, m);
      CHECK(std::fabs(a - b) <= 1e-8 * std::max(1.0, b));
    }
  }
}

TEST_CASE("luxemburg properties") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0, 1);
  for (int trial = 0; trial < 30; ++trial) {
    WeightedSamples s;
    for (int i = 0; i < 8; ++i) s.add(2.0 * U(rng), U(rng));
    OrliczFunction phi{2, 1.0};
    double n0 = luxemburg_norm(s, phi);
    double c = 0.1 + 5 * U(rng);
    WeightedSamples sc = s, bigger = s, heavier = s;
    for (auto& v : sc.values) v *= c;
    for (auto& v : bigger.values) v += 0.1;
    for (auto& w : heavier.weights) w *= c;
    CHECK(luxemburg_norm(sc, phi) == doctest::Approx(c * n0).epsilon(1e-9));
    CHECK(luxemburg_norm(bigger, phi) >= n0);
    // scaled measure = scaled function
    CHECK(luxemburg_norm(heavier, phi) == doctest::Approx(luxemburg_norm(s, {2, c})).epsilon(1e-10));
    double eps = 0.05 + 0.95 * U(rng);
    CHECK(eps * n0 <= luxemburg_norm(s, {2, eps}) + 1e-12);
  }
}

TEST_CASE("luxemburg on extreme magnitudes matches the double version") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(0, 1);
  WeightedSamples s;
  XWeightedSamples x;
  for (int i = 0; i < 12; ++i) {
    double v = U(rng), w = U(rng);
    s.add(v, w);
    // values scaled by 2^-5000, weights by 2^+10000, scale by 2^-10000
    x.add(XReal(v) * XReal::pow2(-5000), XReal(w) * XReal::pow2(10000));
  }
  double ref = luxemburg_norm(s, {2, 1.0});
  XReal got = luxemburg_norm(x, 2, XReal::pow2(-10000));
  CHECK(got.log2() + 5000.0 == doctest::Approx(std::log2(ref)).epsilon(1e-9));
}

TEST_CASE("dini integral") {
  CHECK(dini_integral(Modulus::power(1.0)).value == doctest::Approx(1.0).epsilon(1e-6));
  auto two = dini_integral(Modulus::log_inverse(2.0));
  CHECK_FALSE(two.divergent);
  // clamped at 1 for t >= 1/e, then (log 1/t)^-2: 1 + int_1^inf L^-2 dL
  CHECK(two.value == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(dini_integral(Modulus::log_inverse(1.0)).divergent);
  CHECK(dini_integral(Modulus::log_loglog()).divergent == false);
}

TEST_CASE("modulus parsing") {
  CHECK(Modulus::parse("power:2")(0.5) == doctest::Approx(0.25));
  CHECK(Modulus::parse("loginv:1").ln_at(100.0) == doctest::Approx(-std::log(100.0)));
  CHECK_THROWS(Modulus::parse("bogus:1"));
}

TEST_CASE("unit ball volume") {
  CHECK(unit_ball_volume(2) == doctest::Approx(kPi));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * kPi / 3.0));
  double sup = 0;
  for (int m = 0; m <= 10; ++m) sup = std::max(sup, unit_ball_volume(m));
  CHECK(sup < 6.0);
}

TEST_CASE("gauss legendre integrates polynomials exactly") {
  const auto& g = gauss_legendre(8);
  double s = 0;
  for (std::size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * std::pow(g.x[i], 14);
  CHECK(s == doctest::Approx(2.0 / 15.0).epsilon(1e-14));
  double c = 0;
  for (auto q : composite_nodes(0.0, 3.0, 7, 6, 1.5)) c += q.w * q.x * q.x;
  CHECK(c == doctest::Approx(9.0).epsilon(1e-13));
}

TEST_CASE("deterministic reductions are policy independent") {
  auto term = [](std::size_t i) { return std::sin(0.37 * i) * std::pow(1.0001, double(i % 97)) / (1.0 + i); };
  const std::size_t n = 200000;
  double a = reduce_terms(n, term, ExecPolicy::Serial), b = reduce_terms(n, term, ExecPolicy::Parallel);
  CHECK(a == b);
  CHECK(reduce_max(n, term, ExecPolicy::Serial) == reduce_max(n, term, ExecPolicy::Parallel));
  CHECK(reduce_terms(0, term, ExecPolicy::Parallel) == 0.0);
}
