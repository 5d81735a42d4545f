#include "varifold_lab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "varifold_lab/kernels.hpp"
#include "varifold_lab/quadrature.hpp"

namespace vl {

void ScanTable::sort() {
  std::stable_sort(rows.begin(), rows.end(), [](const ScanRow& a, const ScanRow& b) {
    if (a.point_id != b.point_id) return a.point_id < b.point_id;
    if (a.quantity != b.quantity) return a.quantity < b.quantity;
    return a.ln_r > b.ln_r;
  });
}

std::vector<const ScanRow*> ScanTable::group(const std::string& point_id, const std::string& quantity) const {
  std::vector<const ScanRow*> out;
  for (const auto& r : rows)
    if (r.point_id == point_id && r.quantity == quantity) out.push_back(&r);
  std::stable_sort(out.begin(), out.end(), [](const ScanRow* a, const ScanRow* b) { return a->ln_r > b->ln_r; });
  return out;
}

std::vector<std::string> ScanTable::point_ids() const {
  std::vector<std::string> ids;
  for (const auto& r : rows)
    if (std::find(ids.begin(), ids.end(), r.point_id) == ids.end()) ids.push_back(r.point_id);
  return ids;
}

std::string region_name(RegionKind k) {
  switch (k) {
    case RegionKind::Ball: return "ball";
    case RegionKind::Cylinder: return "cylinder";
    case RegionKind::Cube: return "cube";
  }
  return "?";
}

RegionKind parse_region(const std::string& s) {
  if (s == "ball") return RegionKind::Ball;
  if (s == "cylinder") return RegionKind::Cylinder;
  if (s == "cube") return RegionKind::Cube;
  throw std::invalid_argument("unknown region kind " + s);
}

ScanTable radius_scan(const Scenario& s, const std::vector<ScanPoint>& points, const std::vector<double>& ln_radii,
                      const std::vector<Quantity>& qs, RegionKind region) {
  ScanTable t;
  const std::size_t R = ln_radii.size(), n = points.size() * R;
  std::vector<std::vector<Measurement>> res(n);
  std::vector<std::string> err(n);
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  if (!s.is_control()) {
    lo = s.family->ln_floor();
    hi = s.ln_epsilon;
  }
  for_each_index(n, [&](std::size_t i) {
    const ScanPoint& p = points[i / R];
    double lr = ln_radii[i % R];
    if (lr < lo - 1e-9 || lr > hi + 1e-9) {
      err[i] = "radius outside [truncation floor, epsilon]; skipped";
      return;
    }
    try {
      res[i] = s.is_control() ? s.measure_control(lr, region, qs) : s.measure(p.x, lr, region, qs);
    } catch (const std::exception& e) {
      err[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < qs.size(); ++k) {
      ScanRow row;
      row.scenario_id = s.id;
      row.point_id = points[i / R].id;
      row.region_kind = region_name(region);
      row.ln_r = ln_radii[i % R];
      row.quantity = qs[k].tag();
      row.q = qs[k].q;
      row.norm = norm_name(qs[k].norm);
      row.resolution = s.params.resolution;
      if (!err[i].empty()) {
        row.valid = false;
        row.note = err[i];
      } else {
        const Measurement& m = res[i][k];
        row.value = m.value;
        row.uncertainty = m.uncertainty;
        row.valid = m.valid;
        row.note = m.note;
      }
      t.rows.push_back(row);
    }
  }
  t.sort();
  return t;
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::TendsToZero: return "tends_to_zero";
    case Verdict::BoundedBelow: return "bounded_below";
    case Verdict::Bounded: return "bounded";
    case Verdict::Inconclusive: return "inconclusive";
    case Verdict::Fails: return "fails";
  }
  return "?";
}

nlohmann::json DecayVerdict::to_json() const {
  nlohmann::json j;
  j["verdict"] = verdict_name(verdict);
  j["constant"] = constant;
  j["slope"] = slope;
  j["residual"] = residual;
  j["rule"] = rule;
  j["log_scale"] = log_scale;
  nlohmann::json s = nlohmann::json::array();
  for (std::size_t i = 0; i < stat.size(); ++i)
    s.push_back({{"ln_r", ln_r[i]}, {"log2_r", ln_r[i] / kLn2}, {"value", stat[i]}});
  j["samples"] = s;
  return j;
}

namespace {

FitResult fit_xy(const std::vector<double>& x, const std::vector<double>& y) {
  FitResult f;
  f.used = x.size();
  if (x.size() < 2) return f;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= x.size();
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i)
    f.residual = std::max(f.residual, std::fabs(y[i] - f.intercept - f.slope * x[i]));
  return f;
}

}  // namespace

DecayVerdict tends_to_zero_verdict(const std::vector<double>& ln_r, const std::vector<double>& stat,
                                   const Thresholds& th) {
  DecayVerdict v;
  v.ln_r = ln_r;
  v.stat = stat;
  v.window = th.tail_window;
  v.rule = "last " + std::to_string(th.tail_window) + " values non-increasing and final <= " +
           std::to_string(th.tends_ratio) + " * initial";
  if (static_cast<int>(stat.size()) < th.min_radii) {
    v.verdict = Verdict::Inconclusive;
    v.rule += " (fewer than " + std::to_string(th.min_radii) + " radii)";
    return v;
  }
  std::vector<double> x, y;
  for (std::size_t i = 0; i < stat.size(); ++i)
    if (stat[i] > 0) {
      x.push_back(ln_r[i]);
      y.push_back(std::log(stat[i]));
    }
  if (x.size() >= 2) {
    FitResult f = fit_xy(x, y);
    v.slope = f.slope;
    v.residual = f.residual;
  }
  const std::size_t n = stat.size();
  bool mono = true;
  for (std::size_t i = n - th.tail_window; i + 1 < n; ++i)
    if (stat[i + 1] > stat[i] * (1.0 + 1e-9)) mono = false;
  bool small = stat.back() <= th.tends_ratio * stat.front();
  v.constant = stat.front() > 0 ? stat.back() / stat.front() : 0.0;
  v.verdict = mono && small ? Verdict::TendsToZero : Verdict::Fails;
  return v;
}

DecayVerdict bounded_below_verdict(const std::vector<double>& ln_r, const std::vector<double>& stat, double c_min,
                                   bool log_scale) {
  DecayVerdict v;
  v.ln_r = ln_r;
  v.stat = stat;
  v.log_scale = log_scale;
  v.rule = log_scale ? "min log margin >= 0" : "min over scanned radii >= " + std::to_string(c_min);
  if (stat.empty()) {
    v.verdict = Verdict::Inconclusive;
    v.rule += " (no valid radii)";
    return v;
  }
  v.constant = *std::min_element(stat.begin(), stat.end());
  v.verdict = v.constant >= c_min ? Verdict::BoundedBelow : Verdict::Fails;
  return v;
}

bool TheoremReport::pass() const {
  if (points.empty()) return false;
  for (const auto& p : points)
    if (!p.verdict.pass()) return false;
  return true;
}

bool TheoremReport::inconclusive() const {
  bool any_inc = points.empty();
  for (const auto& p : points) {
    if (p.verdict.verdict == Verdict::Fails) return false;
    if (p.verdict.verdict == Verdict::Inconclusive) any_inc = true;
  }
  return any_inc;
}

nlohmann::json TheoremReport::to_json(const Thresholds& th) const {
  nlohmann::json j;
  j["theorem"] = theorem;
  j["scenario"] = scenario;
  j["pass"] = pass();
  j["exit_code"] = exit_code();
  nlohmann::json thr = {{"tends_ratio", th.tends_ratio}, {"tail_window", th.tail_window}, {"min_radii", th.min_radii},
                        {"b_lower", th.b_lower}, {"c_growth", th.c_growth}};
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) {
    nlohmann::json q = p.verdict.to_json();
    q["thresholds"] = thr;
    q["id"] = p.point_id;
    if (!p.item.empty()) q["item"] = p.item;
    pts.push_back(q);
  }
  j["points"] = pts;
  if (!extra.is_null()) j["extra"] = extra;
  return j;
}

double theorem_a_statistic(const XReal& tilt, double ln_r) {
  if (tilt.is_zero()) return 0.0;
  return std::exp(tilt.log() - 4.0 * ln_r - std::log(-ln_r));
}

double theorem_b_statistic(const XReal& tilt, const XReal& mass, double ln_r, const Modulus& omega) {
  if (tilt.is_zero()) return 0.0;
  double L = -ln_r;
  return std::exp(-ln_r - 0.5 * std::log(L) - omega.ln_at(L) + 0.5 * (tilt.log() - mass.log()));
}

std::vector<double> control_radii(int count, double L0, double L1) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(-L0 * std::pow(L1 / L0, static_cast<double>(i) / (count - 1)));
  return out;
}

namespace {

void append(ScanTable& dst, const ScanTable& src) { dst.rows.insert(dst.rows.end(), src.rows.begin(), src.rows.end()); }

std::vector<ScanPoint> c_points(const Scenario& s, std::size_t n) {
  std::vector<ScanPoint> pts;
  for (std::size_t i = 0; i < std::min(n, s.C.size()); ++i) pts.push_back({"C" + std::to_string(i), s.C[i]});
  return pts;
}

}  // namespace

TheoremReport verify_theorem_a(const Scenario& s, std::size_t points, const Thresholds& th) {
  TheoremReport rep;
  rep.theorem = "a";
  rep.scenario = s.id;
  const Quantity tilt = Quantity::tilt(2.0, TiltNorm::Frobenius);
  std::vector<std::pair<ScanPoint, std::vector<double>>> plan;
  if (s.is_control()) {
    plan.push_back({{"axis", {}}, control_radii()});
  } else if (s.params.kind == ScenarioKind::TheoremB) {
    auto zs = s.off_c_points(points);
    for (std::size_t i = 0; i < zs.size(); ++i) {
      // the point sits at level (cube level + 5)
      double ln_side = -static_cast<double>(zs[i].level - 5) * kLn2;
      std::vector<double> radii;
      for (int k = 0; k <= 12; ++k) radii.push_back(std::log(0.5) + ln_side - k * kLn2);
      plan.push_back({{"Z" + std::to_string(i), zs[i]}, radii});
    }
  } else {
    throw std::invalid_argument("verify_theorem_a: needs a smooth control or a theorem-b scenario");
  }
  for (const auto& [pt, radii] : plan) {
    ScanTable t = radius_scan(s, {pt}, radii, {tilt});
    std::vector<double> lr, st;
    bool ok = true;
    for (const ScanRow* r : t.group(pt.id, tilt.tag())) {
      if (!r->valid) {
        ok = false;
        continue;
      }
      lr.push_back(r->ln_r);
      st.push_back(theorem_a_statistic(r->value, r->ln_r));
    }
    DecayVerdict v = tends_to_zero_verdict(lr, st, th);
    if (!ok && v.verdict == Verdict::Fails) v.verdict = Verdict::Inconclusive;
    rep.points.push_back({pt.id, "", v});
    append(rep.table, t);
  }
  return rep;
}

TheoremReport verify_theorem_b(const Scenario& s, std::size_t points, const Thresholds& th) {
  if (s.params.kind != ScenarioKind::TheoremB) throw std::invalid_argument("verify_theorem_b: needs a theorem-b scenario");
  TheoremReport rep;
  rep.theorem = "b";
  rep.scenario = s.id;
  const Quantity mass = Quantity::mass(), tilt = Quantity::tilt();
  auto pts = c_points(s, points);
  rep.table = radius_scan(s, pts, s.ln_B, {mass, tilt});
  for (const auto& p : pts) {
    auto gm = rep.table.group(p.id, mass.tag()), gt = rep.table.group(p.id, tilt.tag());
    std::vector<double> lr, st;
    for (std::size_t i = 0; i < gm.size(); ++i) {
      if (!gm[i]->valid || !gt[i]->valid) continue;
      lr.push_back(gm[i]->ln_r);
      st.push_back(theorem_b_statistic(gt[i]->value, gm[i]->value, gm[i]->ln_r, s.omega));
    }
    rep.points.push_back({p.id, "", bounded_below_verdict(lr, st, th.b_lower)});
  }
  rep.extra = {{"lambda_scn", s.lambda_scn},
               {"Delta", s.Delta},
               {"statistic", "averaged form, omega as given; the un-averaged form follows with omega^(1/2)"}};
  return rep;
}

GrowthResult b_integral_growth(const Scenario& s, const DyadicPoint& c, double ln_r, int extra_depth, double q) {
  ScenarioParams p = s.params;
  p.depth += extra_depth;
  Scenario t = build_scenario(p);
  Quantity b = Quantity::simple(QKind::BIntegral, q);
  RegionKind reg = s.params.m > 2 ? RegionKind::Cube : RegionKind::Ball;
  GrowthResult g;
  g.before = s.measure(c, ln_r, reg, {b})[0].value;
  g.after = t.measure(c, ln_r, reg, {b})[0].lower();
  return g;
}

double GrowthResult::factor() const {
  if (before.is_zero()) return after.is_zero() ? 1.0 : std::numeric_limits<double>::infinity();
  return std::exp(after.log() - before.log());
}

TheoremReport verify_theorem_c(const Scenario& s, std::size_t points, std::size_t max_radii, const Thresholds& th) {
  if (!s.has_holes()) throw std::invalid_argument("verify_theorem_c: needs a theorem-c scenario");
  TheoremReport rep;
  rep.theorem = "c";
  rep.scenario = s.id;
  const int m = s.params.m;
  const bool dini = s.params.kind == ScenarioKind::TheoremCDini;
  std::vector<double> radii(s.ln_B.begin(), s.ln_B.begin() + std::min(max_radii, s.ln_B.size()));
  Quantity lt;
  lt.kind = QKind::LevelTilt;
  lt.theta = 1.0 / 3.0;
  Quantity dm;
  dm.kind = QKind::DensityMass;
  dm.density = s.background_multiplicity - 1;
  const Quantity holes = Quantity::simple(QKind::Holes);
  auto pts = c_points(s, points);
  const RegionKind main = m > 2 ? RegionKind::Cube : RegionKind::Ball;
  ScanTable t1 = radius_scan(s, pts, radii, {lt, dm}, main);
  ScanTable t2;
  if (m == 2) t2 = radius_scan(s, pts, radii, {holes}, RegionKind::Cylinder);
  auto ln_bound = [&](double lr, bool four) {
    double L = -lr, w = s.omega.ln_at(L) * (dini ? 2.0 : 1.0);
    double b = four ? w + 4.0 * lr - 2.0 * std::log(L) : s.omega.ln_at(L) + 2.0 * lr;
    return b + (m - 2) * (kLn2 + lr);
  };
  auto margins = [&](const ScanTable& t, const std::string& id, const Quantity& q, bool four, DecayVerdict& out) {
    std::vector<double> lr, mg;
    for (const ScanRow* r : t.group(id, q.tag())) {
      if (!r->valid) continue;
      XReal lo = r->value - r->uncertainty;
      lr.push_back(r->ln_r);
      mg.push_back(lo.sign() > 0 ? lo.log() - ln_bound(r->ln_r, four) : -std::numeric_limits<double>::infinity());
    }
    out = bounded_below_verdict(lr, mg, 0.0, true);
  };
  for (const auto& p : pts) {
    DecayVerdict v;
    margins(t1, p.id, lt, true, v);
    rep.points.push_back({p.id, "i", v});
    if (m == 2) {
      margins(t2, p.id, holes, true, v);
      rep.points.push_back({p.id, "ii", v});
    }
    margins(t1, p.id, dm, false, v);
    rep.points.push_back({p.id, "iv", v});
  }
  append(rep.table, t1);
  append(rep.table, t2);
  if (!s.C.empty()) {
    GrowthResult g = b_integral_growth(s, s.C[0], s.ln_epsilon, 2, 2.0);
    DecayVerdict v;
    v.ln_r = {s.ln_epsilon};
    v.stat = {g.factor()};
    v.constant = g.factor();
    v.rule = "b-integral (q = 2) growth from depth d to d + 2 >= " + std::to_string(th.c_growth);
    v.verdict = g.factor() >= th.c_growth ? Verdict::BoundedBelow : Verdict::Fails;
    rep.points.push_back({"C0", "iii", v});
    rep.extra = {{"b_integral_depth_d", g.before.str()}, {"b_integral_depth_d_plus_2", g.after.str()},
                 {"eta", s.eta}, {"Delta", s.Delta}};
  }
  return rep;
}

DiskSamples sample_disk(double r, int n, const std::function<double(double, double)>& f,
                        const std::function<std::pair<double, double>(double, double)>& grad,
                        const std::function<bool(double, double)>& mask) {
  DiskSamples d;
  d.r = r;
  const auto& gl = gauss_legendre(n);
  const int nt = 4 * n;
  const double dt = 2.0 * kPi / nt;
  for (int i = 0; i < n; ++i) {
    double rho = 0.5 * r * (gl.x[i] + 1.0), wr = 0.5 * r * gl.w[i];
    for (int k = 0; k < nt; ++k) {
      double th = (k + 0.5) * dt, x = rho * std::cos(th), y = rho * std::sin(th);
      auto [gx, gy] = grad(x, y);
      d.f.push_back(f(x, y));
      d.grad.push_back(std::hypot(gx, gy));
      d.weight.push_back(rho * wr * dt);
      d.mask.push_back(mask(x, y) ? 1 : 0);
    }
  }
  return d;
}

EmbeddingResult embedding_constant(const DiskSamples& d) {
  EmbeddingResult e;
  double area = 0.0, g2 = 0.0, f2 = 0.0;
  WeightedSamples ws;
  for (std::size_t i = 0; i < d.f.size(); ++i) {
    g2 += d.weight[i] * d.grad[i] * d.grad[i];
    if (d.mask[i]) {
      area += d.weight[i];
      f2 += d.weight[i] * d.f[i] * d.f[i];
    }
    ws.add(std::fabs(d.f[i]), d.weight[i]);
  }
  if (area < 0.5 * kPi * d.r * d.r * (1.0 - 1e-9))
    throw std::invalid_argument("embedding_constant: the mask covers less than half of the disk");
  e.lhs = luxemburg_norm(ws, OrliczFunction{2, 1.0 / (d.r * d.r)});
  e.grad_term = std::sqrt(g2);
  e.mask_term = std::sqrt(f2) / d.r;
  e.rhs = e.grad_term + e.mask_term;
  if (e.rhs == 0.0) {
    e.degenerate = e.lhs == 0.0;
    e.ratio = e.lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    e.ratio = e.lhs / e.rhs;
  }
  return e;
}

FitResult decay_fit(const std::vector<double>& ln_r, const std::vector<XReal>& values, const Normalization& n) {
  std::vector<double> x, y;
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].sign() <= 0) {
      ++dropped;
      continue;
    }
    double L = -ln_r[i];
    double norm = n.r_power * ln_r[i];
    if (n.log_power != 0.0) norm += n.log_power * std::log(L);
    if (n.omega_power != 0.0) norm += n.omega_power * n.omega.ln_at(L);
    x.push_back(ln_r[i]);
    y.push_back(values[i].log() - norm);
  }
  if (x.size() < 4) throw std::invalid_argument("decay_fit: fewer than 4 usable rows");
  FitResult f = fit_xy(x, y);
  f.dropped = dropped;
  return f;
}

FitResult decay_fit(const ScanTable& t, const std::string& point_id, const std::string& quantity,
                    const Normalization& n) {
  std::vector<double> lr;
  std::vector<XReal> v;
  for (const ScanRow* r : t.group(point_id, quantity)) {
    if (!r->valid) continue;
    lr.push_back(r->ln_r);
    v.push_back(r->value);
  }
  return decay_fit(lr, v, n);
}

}  // namespace vl
