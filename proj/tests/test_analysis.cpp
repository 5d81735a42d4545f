#include <doctest.h>

#include <cmath>
#include <sstream>

#include "varifold_lab/analysis.hpp"
#include "varifold_lab/io.hpp"

using namespace vl;

namespace {

const Scenario& scn_b() {
  static const Scenario s = build_theorem_b("power:1", 1.0, 6, 16, 0, 8);
  return s;
}

const Scenario& sphere() {
  static const Scenario s = build_smooth_control(ScenarioKind::Sphere, 1.0, 1.0, 32);
  return s;
}

std::vector<double> dyadic(int from, int to) {
  std::vector<double> out;
  for (int k = from; k <= to; ++k) out.push_back(-k * std::log(2.0));
  return out;
}

}  // namespace

TEST_CASE("radius scan: shape of the table") {
  const Scenario& s = scn_b();
  CHECK(radius_scan(s, {{"C0", s.C[0]}}, {}, {Quantity::mass()}).rows.empty());

  ScanTable t = radius_scan(s, {{"C0", s.C[0]}, {"C1", s.C[1]}}, s.ln_B, {Quantity::mass(), Quantity::tilt()});
  CHECK(t.rows.size() == 2 * 2 * s.ln_B.size());
  for (const auto& id : t.point_ids())
    for (const char* q : {"mass", "tilt2"}) {
      auto g = t.group(id, q);
      REQUIRE(g.size() == s.ln_B.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(g[i]->valid);
        CHECK(g[i]->value.sign() >= 0);
        CHECK(g[i]->ln_r == s.ln_B[i]);
        if (i) CHECK(g[i]->ln_r < g[i - 1]->ln_r);
      }
    }

  ScanTable bad = radius_scan(s, {{"C0", s.C[0]}}, {s.ln_epsilon + 1.0}, {Quantity::mass()});
  REQUIRE(bad.rows.size() == 1);
  CHECK_FALSE(bad.rows[0].valid);
}

TEST_CASE("sphere control: small-ball mass is pi r^2") {
  ScanTable t = radius_scan(sphere(), {{"axis", {}}}, dyadic(4, 10), {Quantity::mass()});
  FitResult f = decay_fit(t, "axis", "mass");
  CHECK(f.slope == doctest::Approx(2.0).epsilon(0.01));
  CHECK(f.residual < 1e-8);
  CHECK(std::exp(f.intercept) == doctest::Approx(kPi).epsilon(1e-3));
  // a ball centred on the unit sphere cuts out a cap of area exactly pi r^2
  for (const auto& r : t.rows) CHECK(r.value.to_double() == doctest::Approx(kPi * std::exp(2 * r.ln_r)).epsilon(1e-10));
}

TEST_CASE("decay fit examples") {
  std::vector<double> lr;
  std::vector<XReal> v;
  for (int k = 1; k <= 8; ++k) {
    lr.push_back(-k * 0.7);
    v.push_back(XReal::from_log(3.25 * lr.back() + 0.5));
  }
  FitResult f = decay_fit(lr, v);
  CHECK(f.slope == doctest::Approx(3.25).epsilon(1e-12));
  CHECK(f.residual < 1e-12);
  Normalization n;
  n.r_power = 3.25;
  CHECK(std::fabs(decay_fit(lr, v, n).slope) < 1e-12);

  // catenoid tilt 8 pi acosh(r) divided by log r flattens out at large r
  std::vector<double> lr2;
  std::vector<XReal> v2;
  for (int k = 10; k <= 20; ++k) {
    double r = std::ldexp(1.0, k);
    lr2.push_back(std::log(r));
    v2.push_back(XReal(catenoid_closed_forms(r).second / std::log(r)));
  }
  CHECK(std::fabs(decay_fit(lr2, v2).slope) < 0.01);

  v[2] = XReal(0.0);
  CHECK(decay_fit(lr, v).dropped == 1);
  CHECK_THROWS(decay_fit({-1, -2, -3}, {XReal(1.0), XReal(2.0), XReal(3.0)}));
}

TEST_CASE("verdict rules") {
  auto lr = dyadic(1, 10);
  std::vector<double> zero(lr.size(), 0.0);
  CHECK(theorem_a_statistic(XReal(0.0), lr[3]) == 0.0);
  CHECK(tends_to_zero_verdict(lr, zero).verdict == Verdict::TendsToZero);

  std::vector<double> decay, flat(lr.size(), 0.5), bump;
  for (std::size_t i = 0; i < lr.size(); ++i) decay.push_back(std::pow(0.3, static_cast<double>(i)));
  CHECK(tends_to_zero_verdict(lr, decay).verdict == Verdict::TendsToZero);
  CHECK(tends_to_zero_verdict(lr, flat).verdict == Verdict::Fails);
  bump = decay;
  bump[8] = 10 * bump[7];
  CHECK(tends_to_zero_verdict(lr, bump).verdict == Verdict::Fails);

  std::vector<double> few(decay.begin(), decay.begin() + 4), few_r(lr.begin(), lr.begin() + 4);
  CHECK(tends_to_zero_verdict(few_r, few).verdict == Verdict::Inconclusive);

  CHECK(bounded_below_verdict(lr, flat, 0.1).verdict == Verdict::BoundedBelow);
  CHECK(bounded_below_verdict(lr, flat, 0.1).constant == 0.5);
  CHECK(bounded_below_verdict(lr, decay, 0.1).verdict == Verdict::Fails);
  CHECK(bounded_below_verdict({}, {}, 0.1).verdict == Verdict::Inconclusive);

  // pure functions: identical input gives identical serialized verdicts
  CHECK(tends_to_zero_verdict(lr, decay).to_json().dump() == tends_to_zero_verdict(lr, decay).to_json().dump());
}

TEST_CASE("theorem b and theorem a on the same scenario") {
  const Scenario& s = scn_b();
  TheoremReport b = verify_theorem_b(s, 8);
  TheoremReport a = verify_theorem_a(s, 4);
  CHECK(b.pass());
  CHECK(b.exit_code() == 0);
  CHECK(a.pass());
  for (const auto& p : b.points) {
    CHECK(p.verdict.verdict == Verdict::BoundedBelow);
    MESSAGE(p.point_id << " tail-min " << p.verdict.constant);
  }
  for (const auto& p : a.points) CHECK(p.verdict.verdict == Verdict::TendsToZero);

  // the verdict is recomputed from the saved table
  std::stringstream csv;
  write_csv(csv, b.table);
  ScanTable back = read_csv(csv);
  CHECK(back.rows.size() == b.table.rows.size());
  for (const auto& p : b.points) {
    auto tilt = back.group(p.point_id, "tilt2");
    auto mass = back.group(p.point_id, "mass");
    REQUIRE(tilt.size() == mass.size());
    std::vector<double> lr, st;
    for (std::size_t i = 0; i < tilt.size(); ++i) {
      lr.push_back(tilt[i]->ln_r);
      st.push_back(theorem_b_statistic(tilt[i]->value, mass[i]->value, tilt[i]->ln_r, s.omega));
    }
    DecayVerdict v = bounded_below_verdict(lr, st, Thresholds{}.b_lower);
    CHECK(v.verdict == p.verdict.verdict);
    CHECK(v.constant == doctest::Approx(p.verdict.constant).epsilon(1e-12));
  }

  Scenario empty = s;
  empty.ln_B.clear();
  TheoremReport e = verify_theorem_b(empty, 4);
  CHECK(e.inconclusive());
  CHECK(e.exit_code() == 3);
}

TEST_CASE("sphere and flat controls under theorem a") {
  TheoremReport sp = verify_theorem_a(sphere());
  CHECK(sp.pass());
  Scenario g = build_smooth_control(ScenarioKind::Graph, 1.0, 1.0, 32);
  CHECK(verify_theorem_a(g).pass());
  std::vector<double> st;
  for (double lr : control_radii()) st.push_back(theorem_a_statistic(XReal(0.0), lr));
  for (double x : st) CHECK(x == 0.0);
}

TEST_CASE("embedding constant") {
  auto all = [](double, double) { return true; };
  auto zero = [](double, double) { return 0.0; };
  auto zgrad = [](double, double) { return std::make_pair(0.0, 0.0); };
  EmbeddingResult z = embedding_constant(sample_disk(1.0, 16, zero, zgrad, all));
  CHECK(z.degenerate);
  CHECK(z.ratio == 0.0);

  for (double r : {1.0, 0.37}) {
    auto lin = [r](double x, double y) { return (2 * x - y) / r + 0.5; };
    auto lgrad = [r](double, double) { return std::make_pair(2.0 / r, -1.0 / r); };
    double a = embedding_constant(sample_disk(r, 48, lin, lgrad, all)).ratio;
    auto lin2 = [r](double x, double y) { return (2 * x - y) / (r / 2) + 0.5; };
    auto lgrad2 = [r](double, double) { return std::make_pair(4.0 / r, -2.0 / r); };
    double b = embedding_constant(sample_disk(r / 2, 48, lin2, lgrad2, all)).ratio;
    CHECK(std::isfinite(a));
    CHECK(a > 0);
    CHECK(b == doctest::Approx(a).epsilon(0.02));
  }

  // bump near the center, mask excluding it
  auto bump = [](double x, double y) { return std::exp(-20 * (x * x + y * y)); };
  auto bgrad = [&](double x, double y) { return std::make_pair(-40 * x * bump(x, y), -40 * y * bump(x, y)); };
  auto outer = [](double x, double y) { return x * x + y * y >= 0.3 * 0.3; };
  EmbeddingResult e = embedding_constant(sample_disk(1.0, 64, bump, bgrad, outer));
  CHECK(std::isfinite(e.ratio));
  CHECK(e.grad_term > e.mask_term);

  auto small = [](double x, double y) { return x * x + y * y <= 0.25; };
  CHECK_THROWS(embedding_constant(sample_disk(1.0, 16, bump, bgrad, small)));
}
