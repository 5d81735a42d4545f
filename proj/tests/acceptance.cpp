#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "varifold_lab/analysis.hpp"

using namespace vl;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int id, const char* title, const std::function<Outcome()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("criterion %2d %s  %s: %s (%.1fs)\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.c_str(), sec);
  std::fflush(stdout);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

const double kInfH = std::numeric_limits<double>::infinity();
Region vcyl(double r) { return Region::cylinder({0, 0, 0}, r, kInfH); }
Plane horizontal() { return Plane::coordinate(3, 2); }

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

bool covers(const CubeFamily& f, const DyadicPoint& a, double ln_r) {
  try {
    CoveringResult H = covering_cubes(f, a, ln_r);
    return H.card > 0 && H.inside_ball && H.ln_measure >= H.ln_bound - 1e-12;
  } catch (const std::exception&) {
    return false;
  }
}

const Scenario& theorem_b_scenario() {
  static const Scenario s = build_theorem_b("loginv:1", 1.0, 12, 32, 0, 16);
  return s;
}

Outcome catenoid_oracles() {
  double worst_m = 0, worst_t = 0;
  for (double r : {2.0, 4.0, 8.0}) {
    auto V = make_catenoid_varifold(r, 128);
    auto [area, tilt] = catenoid_closed_forms(r);
    worst_m = std::max(worst_m, std::fabs(mass(V, vcyl(r)) / area - 1));
    worst_t = std::max(worst_t, std::fabs(tilt_excess(V, vcyl(r), horizontal(), 2) / tilt - 1));
  }
  return {worst_m <= 1e-6 && worst_t <= 1e-6, "max rel err mass " + fmt(worst_m) + ", tilt " + fmt(worst_t)};
}

Outcome luxemburg_oracle() {
  WeightedSamples one;
  one.add(1.0, 1.0);
  double e1 = std::fabs(luxemburg_norm(one, {2, 1.0}) - 1.0 / std::sqrt(std::log(2.0)));
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0, 1);
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    WeightedSamples s;
    for (int i = 0; i < 10; ++i) s.add(4.0 * U(rng), 0.3 * U(rng));
    double a = luxemburg_norm(s, {2, 1.0}), b = grid_luxemburg(s.values, s.weights, 2);
    worst = std::max(worst, std::fabs(a - b) / std::max(1.0, b));
  }
  return {e1 <= 1e-10 && worst <= 1e-8, "unit measure err " + fmt(e1) + ", random 10-point max err " + fmt(worst)};
}

Outcome projection_identities() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> N(0, 1);
  double worst = 0, worst_g = 0;
  for (int i = 0; i < 100; ++i) {
    Eigen::Vector3d a(N(rng), N(rng), N(rng)), b(N(rng), N(rng), N(rng));
    auto span = [](const Eigen::Vector3d& n) {
      Eigen::MatrixXd P = Eigen::Matrix3d::Identity() - n.normalized() * n.normalized().transpose();
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(P, Eigen::ComputeFullU);
      return Plane::from_span(svd.matrixU().leftCols(2));
    };
    Plane S = span(a), T = span(b);
    double fro = tilt_distance(S, T, TiltNorm::Frobenius), op = tilt_distance(S, T, TiltNorm::Operator);
    worst = std::max(worst, std::fabs(fro - std::sqrt(2.0) * op));
    Eigen::VectorXd L(2);
    L << N(rng), N(rng);
    double formula = L.norm() / std::sqrt(1 + L.squaredNorm());
    worst_g = std::max(worst_g, std::fabs(tilt_distance(Plane::graph_of(L), horizontal(), TiltNorm::Operator) - formula));
  }
  return {worst <= 1e-10 && worst_g <= 1e-10, "Frobenius vs sqrt2 operator " + fmt(worst) + ", graph formula " + fmt(worst_g)};
}

Outcome neck_lower_bound() {
  double margin = kInfH;
  for (auto [s, r] : {std::pair{2.0, 8.0}, {2.0, 16.0}, {4.0, 16.0}}) {
    auto V = make_neck_varifold(s, r, 128);
    margin = std::min(margin, tilt_excess(V, vcyl(r), horizontal(), 2) - 1e-4 - std::log(r / (2 * s)));
  }
  return {margin >= 0, "min margin " + fmt(margin)};
}

Outcome bent_bounds() {
  double cmin = kInfH, cmax = 0, dmin = kInfH, lmin = kInfH;
  for (double r : {4.0, 8.0, 16.0, 32.0}) {
    auto V = make_bent_varifold(r, 128);
    double d = mass(V, vcyl(r)) - 2 * kPi * r * r;
    double c = d / (std::log(r) * std::log(r));
    dmin = std::min(dmin, d);
    cmin = std::min(cmin, c);
    cmax = std::max(cmax, c);
    lmin = std::min(lmin, level_set_mass(V, vcyl(r), LevelSetPredicate{}));
  }
  bool ok = dmin >= -1e-4 && cmax <= 2 * cmin && lmin >= 0.99;
  return {ok, "defect min " + fmt(dmin) + ", C in [" + fmt(cmin) + ", " + fmt(cmax) + "], level-set min " + fmt(lmin)};
}

Outcome cube_families() {
  std::ostringstream os;
  bool ok = true;
  // exact disjointness and budget
  CubeFamily small = build_dini_family(2, Modulus::power(2.0), 0.5, 7);
  auto cubes = enumerate_cubes(small, 2000000);
  std::size_t overlaps = 0;
  for (std::size_t i = 0; i < cubes.size(); ++i)
    for (std::size_t j = i + 1; j < cubes.size(); ++j) overlaps += cubes[i].second.intersects(cubes[j].second);
  bool budget = small.measure() <= mpq_class(1) - mpq_class(small.lambda) && small.budget_ok();
  ok = ok && overlaps == 0 && budget;
  os << cubes.size() << " cubes, " << overlaps << " overlaps, budget " << (budget ? "ok" : "violated");

  // covering on sampled pairs, with a depth + 2 rebuild for the misses
  CubeFamily f = build_dini_family(2, Modulus::power(2.0), 0.5, 12);
  CubeFamily g = build_dini_family(2, Modulus::power(2.0), 0.5, 14);
  auto pts = sample_residual_points(f, 40, 17);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> U(0, 1);
  int hit = 0, total = 0, rescued = 0;
  for (const auto& a : pts)
    for (int k = 0; k < 5; ++k) {
      double lr = f.ln_floor() + U(rng) * (f.ln_epsilon - f.ln_floor());
      ++total;
      if (covers(f, a, lr))
        ++hit;
      else if (covers(g, a, lr))
        ++rescued;
    }
  ok = ok && total == 200 && hit >= 190 && hit + rescued == total;
  os << "; covering " << hit << "/" << total << ", after rebuild " << hit + rescued << "/" << total;

  // sparse: exactly one covering cube at every B radius
  CubeFamily sp = build_sparse_family(2, Modulus::log_inverse(1.0), 0.5, 6);
  int card_ok = 0, card_total = 0;
  for (const auto& a : sample_residual_points(sp, 20, 4))
    for (double lr : sp.ln_B) {
      ++card_total;
      CoveringResult H = covering_cubes(sp, a, lr);
      card_ok += H.card == 1 && H.inside_ball && H.ln_measure >= H.ln_bound;
    }
  ok = ok && card_ok == card_total;
  os << "; sparse card H = 1 at " << card_ok << "/" << card_total;
  return {ok, os.str()};
}

Outcome theorem_b_dichotomy() {
  const Scenario& s = theorem_b_scenario();
  TheoremReport b = verify_theorem_b(s, 16);
  TheoremReport a = verify_theorem_a(s, 8);
  double bmin = kInfH, amax = 0;
  for (const auto& p : b.points) bmin = std::min(bmin, p.verdict.constant);
  for (const auto& p : a.points) amax = std::max(amax, p.verdict.constant);
  return {b.pass() && a.pass(), std::to_string(b.points.size()) + " C points tail-min >= " + fmt(bmin) + " (need 0.1); " +
                                    std::to_string(a.points.size()) + " off-C points final/initial <= " + fmt(amax) +
                                    " (need 1e-3)"};
}

Outcome theorem_a_controls() {
  Scenario sp = build_smooth_control(ScenarioKind::Sphere, 1.0, 1.0, 32);
  const double a = 1.0;
  Scenario pb = build_smooth_control(ScenarioKind::Graph, a, 1.0, 32);
  bool ok = verify_theorem_a(sp).pass() && verify_theorem_a(pb).pass();
  // the tilt excess is 4 pi a^2 r^4 at leading order; the remainder decays like r^6
  std::vector<double> lr;
  std::vector<XReal> rest;
  for (int k = 4; k <= 9; ++k) {
    double l = -k * kLn2, r = std::exp(l);
    double t = pb.measure_control(l, RegionKind::Ball, {Quantity::tilt()})[0].value.to_double();
    lr.push_back(l);
    rest.push_back(XReal(std::fabs(t - 4 * kPi * a * a * std::pow(r, 4))));
  }
  FitResult f = decay_fit(lr, rest);
  ok = ok && f.slope >= 5.9;
  return {ok, "sphere and paraboloid tend to zero; paraboloid tilt remainder slope " + fmt(f.slope)};
}

Outcome theorem_c_suite() {
  Scenario s = build_theorem_c(FamilyVariant::Sparse, "power:1", 6, 32, 0, 8);
  TheoremReport r = verify_theorem_c(s, 8);
  double worst = kInfH, growth = 0;
  for (const auto& p : r.points) {
    if (p.item == "iii")
      growth = p.verdict.constant;
    else
      worst = std::min(worst, p.verdict.constant);
  }
  return {r.pass(), std::to_string(r.points.size()) + " verdicts, min log margin (i,ii,iv) " + fmt(worst) +
                        ", item iii growth x" + fmt(growth)};
}

Outcome product_fubini() {
  auto V2 = make_bent_varifold(8, 16);
  double worst = 0, worst_lift = 0;
  for (double half : {0.5, 1.0, 1.5}) {
    Region cube = Region::cube({1.5, 0.5, 0.2, 0.0}, half);
    Region cross = Region::cube({1.5, 0.5, 0.2}, half);
    ProductQuery qm, ql;
    ql.kind = ProductQuantity::LevelSetTilt;
    double m2 = mass(V2, cross) * 2 * half, l2 = level_set_mass(V2, cross, LevelSetPredicate{}) * 2 * half;
    double pm = product_cube_measurement(V2, 1, cube, qm), pl = product_cube_measurement(V2, 1, cube, ql);
    worst = std::max({worst, std::fabs(pm / m2 - 1), l2 > 0 ? std::fabs(pl / l2 - 1) : pl});
    if (half == 1.0) {
      auto V4 = lift_product(V2, -half, half, 3);
      worst_lift = std::max({std::fabs(lifted_cube_measurement(V4, cube, qm) / pm - 1),
                             std::fabs(lifted_cube_measurement(V4, cube, ql) / pl - 1)});
    }
  }
  return {worst <= 1e-9 && worst_lift <= 1e-3, "Fubini rel err " + fmt(worst) + ", direct lift rel err " + fmt(worst_lift)};
}

Outcome coercive_stability() {
  const Scenario& s = theorem_b_scenario();
  const double top = std::floor(s.ln_epsilon / kLn2);
  double spread = 0, rmax = 0;
  bool finite = true;
  for (std::size_t i = 0; i < 4; ++i) {
    double lo = kInfH, hi = 0;
    for (int j = 0; j < 4; ++j) {
      ScenarioCoercive c = scenario_coercive(s, s.C[i], (top - j) * kLn2);
      double q = c.ratio();
      finite = finite && c.valid && std::isfinite(q);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    rmax = std::max(rmax, hi);
    spread = std::max(spread, hi / lo);
  }
  return {finite && spread <= 2.0, std::string("ratios ") + (finite ? "finite" : "not finite") + ", max " + fmt(rmax) +
                                       ", worst spread across 4 dyadic scales x" + fmt(spread) + " (need <= x2)"};
}

Outcome embedding_invariance() {
  using F = std::function<double(double, double)>;
  using G = std::function<std::pair<double, double>(double, double)>;
  using M = std::function<bool(double, double)>;
  struct Case {
    F f;
    G g;
    M mask;
  };
  auto all = [](double, double) { return true; };
  std::vector<Case> cases{
      {[](double x, double y) { return 2 * x - y + 0.5; }, [](double, double) { return std::make_pair(2.0, -1.0); }, all},
      {[](double x, double y) { return x * x + 3 * y * y; }, [](double x, double y) { return std::make_pair(2 * x, 6 * y); }, all},
      {[](double x, double y) { return std::exp(-20 * (x * x + y * y)); },
       [](double x, double y) {
         double e = std::exp(-20 * (x * x + y * y));
         return std::make_pair(-40 * x * e, -40 * y * e);
       },
       [](double x, double y) { return x * x + y * y >= 0.09; }},
      {[](double x, double y) { return std::sin(3 * x) * std::cos(2 * y); },
       [](double x, double y) { return std::make_pair(3 * std::cos(3 * x) * std::cos(2 * y), -2 * std::sin(3 * x) * std::sin(2 * y)); },
       [](double x, double) { return x > -0.2; }},
      {[](double x, double y) { return std::log(1.5 + x + 0.3 * y); },
       [](double x, double y) { return std::make_pair(1 / (1.5 + x + 0.3 * y), 0.3 / (1.5 + x + 0.3 * y)); }, all}};
  double worst = 0;
  for (const auto& c : cases) {
    // f_r(z) = f(z / r) on B(0, r), mask scaled along
    auto at = [&](double r, int n) {
      DiskSamples d = sample_disk(
          r, n, [&](double x, double y) { return c.f(x / r, y / r); },
          [&](double x, double y) {
            auto g = c.g(x / r, y / r);
            return std::make_pair(g.first / r, g.second / r);
          },
          [&](double x, double y) { return c.mask(x / r, y / r); });
      return embedding_constant(d).ratio;
    };
    // different grids at the two scales, so agreement is not an artifact of identical arithmetic
    double a = at(1.0, 48), b = at(0.5, 64);
    worst = std::max(worst, std::fabs(b / a - 1));
  }
  return {worst <= 0.02, "5 functions, worst relative change under r -> r/2: " + fmt(worst)};
}

}  // namespace

int main() {
  run(1, "catenoid oracles", catenoid_oracles);
  run(2, "Luxemburg oracle", luxemburg_oracle);
  run(3, "projection-norm identities", projection_identities);
  run(4, "neck tilt lower bound", neck_lower_bound);
  run(5, "bent catenoid bounds", bent_bounds);
  run(6, "cube families", cube_families);
  run(7, "theorem B dichotomy", theorem_b_dichotomy);
  run(8, "theorem A positive controls", theorem_a_controls);
  run(9, "theorem C suite", theorem_c_suite);
  run(10, "product Fubini", product_fubini);
  run(11, "coercive ratio stability", coercive_stability);
  run(12, "embedding scale invariance", embedding_invariance);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
