#include "varifold_lab/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "varifold_lab/geometry2d.hpp"

namespace vl {

std::string scenario_kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::TheoremB: return "theorem-b";
    case ScenarioKind::TheoremCDini: return "theorem-c-dini";
    case ScenarioKind::TheoremCSparse: return "theorem-c-sparse";
    case ScenarioKind::Sphere: return "sphere";
    case ScenarioKind::Graph: return "graph";
  }
  return "?";
}

ScenarioKind parse_scenario_kind(const std::string& s) {
  for (auto k : {ScenarioKind::TheoremB, ScenarioKind::TheoremCDini, ScenarioKind::TheoremCSparse, ScenarioKind::Sphere,
                 ScenarioKind::Graph})
    if (scenario_kind_name(k) == s) return k;
  throw std::invalid_argument("unknown scenario kind " + s);
}

namespace {

std::string fmt(double v) {
  std::ostringstream o;
  o << v;
  return o.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string Quantity::tag() const {
  switch (kind) {
    case QKind::Mass: return "mass";
    case QKind::Tilt: {
      std::string t = q == 2.0 ? "tilt2" : "tiltq:" + fmt(q);
      return norm == TiltNorm::Operator ? t + ":op" : t;
    }
    case QKind::Height: return q == 2.0 ? "height2" : "heightq:" + fmt(q);
    case QKind::Orlicz: return "orlicz";
    case QKind::DeltaMass: return "delta-mass";
    case QKind::LevelTilt: return "levelset:tilt:" + fmt(theta);
    case QKind::DensityMass:
      return std::string("levelset:density-") + (density_equals ? "eq:" : "le:") + std::to_string(density);
    case QKind::Holes: return "holes";
    case QKind::BIntegral: return "b-integral:" + fmt(q);
  }
  return "?";
}

Quantity Quantity::parse(const std::string& s) {
  auto parts = split(s, ':');
  const std::string& h = parts[0];
  Quantity x;
  auto num = [&](std::size_t i) {
    if (i >= parts.size()) throw std::invalid_argument("quantity " + s + ": missing number");
    return std::stod(parts[i]);
  };
  if (h == "mass") return x;
  if (h == "tilt2" || h == "tiltq") {
    x.kind = QKind::Tilt;
    std::size_t next = 1;
    if (h == "tiltq") x.q = num(next++);
    if (parts.size() > next) x.norm = parse_norm(parts[next]);
    return x;
  }
  if (h == "height2" || h == "heightq") {
    x.kind = QKind::Height;
    if (h == "heightq") x.q = num(1);
    return x;
  }
  if (h == "orlicz") {
    x.kind = QKind::Orlicz;
    return x;
  }
  if (h == "delta-mass") {
    x.kind = QKind::DeltaMass;
    return x;
  }
  if (h == "holes") {
    x.kind = QKind::Holes;
    return x;
  }
  if (h == "b-integral") {
    x.kind = QKind::BIntegral;
    x.q = parts.size() > 1 ? num(1) : 2.0;
    return x;
  }
  if (h == "levelset" && parts.size() >= 3) {
    if (parts[1] == "tilt") {
      x.kind = QKind::LevelTilt;
      x.theta = num(2);
      return x;
    }
    if (parts[1] == "density-le" || parts[1] == "density-eq") {
      x.kind = QKind::DensityMass;
      x.density_equals = parts[1] == "density-eq";
      x.density = static_cast<int>(num(2));
      return x;
    }
  }
  throw std::invalid_argument("unknown quantity " + s);
}

// ---------------------------------------------------------------------------
// calibration

Calibration calibrate_neck() {
  Calibration c;
  c.grid = nlohmann::json::array();
  for (double s : {2.0, 3.0, 4.0}) {
    for (double r : {8.0, 16.0, 32.0, 64.0}) {
      if (r < 2 * s) continue;
      RadialProfile p = neck_profile(s, r);
      double lip = 0.0, hmin = 0.0;
      const int N = 4000;
      for (int i = 1; i < N; ++i) {
        double t = r * i / N;
        lip = std::max(lip, std::fabs(p.d1(t)));
        hmin = std::min(hmin, p.g(t));
      }
      double M = patch_total(p, 1, 1, {RingQuantity::Mass}).to_double();
      double dv = patch_total(p, 1, 1, {RingQuantity::FirstVariation}).to_double();
      double lr = std::log(r);
      double mass_term = (M / (kPi * r * r) - 1.0) * r * r / lr;
      double height_term = -hmin / lr;
      double G = std::max({s * lip, mass_term, dv, height_term});
      c.grid.push_back({{"s", s}, {"r", r}, {"lip_times_s", s * lip}, {"mass_term", mass_term},
                        {"delta_mass", dv}, {"height_term", height_term}});
      c.Gamma = std::max(c.Gamma, G);
    }
  }
  return c;
}

Calibration calibrate_bent() {
  Calibration c;
  c.grid = nlohmann::json::array();
  for (double r : {4.0, 8.0, 16.0, 32.0, 64.0}) {
    RadialProfile p = bent_profile(r);
    double lr = std::log(r);
    double M = patch_total(p, 2, 1, {RingQuantity::Mass}).to_double();
    double defect = (M - 2 * kPi * r * r) / (lr * lr);
    double hsup = 0.0;
    for (std::size_t k = 0; k < p.pieces.size(); ++k) {
      const auto& pc = p.pieces[k];
      for (int i = 1; i < 400; ++i) {
        RingPoint rp = p.eval(k, pc.w0 + (pc.w1 - pc.w0) * i / 400.0);
        if (rp.ln_h == kNegInf) continue;
        hsup = std::max(hsup, std::exp(rp.ln_h + 2.0 * std::log(r)) / lr);
      }
    }
    RingSpec b1{RingQuantity::SecondFund};
    b1.q = 1.0;
    double bint = patch_total(p, 2, 1, b1).to_double() / lr;
    double G = std::max({defect, hsup, bint});
    c.grid.push_back({{"r", r}, {"mass_defect_term", defect}, {"h_term", hsup}, {"b_term", bint}});
    c.Gamma = std::max(c.Gamma, G);
  }
  return c;
}

// ---------------------------------------------------------------------------
// templates and caches

XReal Scenario::template_total(int gen_pos, const RingSpec& spec) const {
  std::lock_guard<std::mutex> lk(cache_->mu);
  auto key = std::make_pair(gen_pos, spec);
  auto it = cache_->totals.find(key);
  if (it != cache_->totals.end()) return it->second;
  const BridgeTemplate& T = templates.at(gen_pos);
  XReal v = T.present ? patch_total(T.profile, T.sheets, 1, spec) : XReal();
  cache_->totals.emplace(key, v);
  return v;
}

const XWeightedSamples& Scenario::template_samples(int gen_pos) const {
  std::lock_guard<std::mutex> lk(cache_->mu);
  auto it = cache_->samples.find(gen_pos);
  if (it != cache_->samples.end()) return it->second;
  XWeightedSamples s;
  const BridgeTemplate& T = templates.at(gen_pos);
  if (T.present) patch_total(T.profile, T.sheets, 1, {RingQuantity::Mass}, {}, &s);
  return cache_->samples.emplace(gen_pos, std::move(s)).first->second;
}

// ---------------------------------------------------------------------------
// measurement engine

namespace {

constexpr int kExplicitSources = 3;  // source levels up to ell + 3 are enumerated
constexpr int kRefine = 8;           // extra levels for aggregated cells
constexpr int kCoarseSpan = 12;      // coarse cubes up to 2^12 frame cells are placed explicitly

RingSpec ring_spec(const Quantity& q) {
  RingSpec s;
  s.q = q.q;
  s.norm = q.norm;
  s.theta = q.theta;
  switch (q.kind) {
    case QKind::Mass:
    case QKind::DensityMass:
    case QKind::Orlicz:
    case QKind::Holes: s.kind = RingQuantity::Mass; break;
    case QKind::Tilt: s.kind = RingQuantity::Tilt; break;
    case QKind::Height: s.kind = RingQuantity::Height; break;
    case QKind::DeltaMass: s.kind = RingQuantity::FirstVariation; break;
    case QKind::LevelTilt: s.kind = RingQuantity::LevelTilt; s.norm = TiltNorm::Operator; break;
    case QKind::BIntegral: s.kind = RingQuantity::SecondFund; break;
  }
  return s;
}

double physical_power(const Quantity& q) {
  switch (q.kind) {
    case QKind::Orlicz: return 1.0;
    case QKind::Holes: return 2.0;
    default: return scale_power(ring_spec(q));
  }
}

bool density_pred(const Quantity& q, int theta) { return q.density_equals ? theta == q.density : theta <= q.density; }

double region_plane_area(const LocalRegion& R) {
  return R.kind == RegionKind::Cube ? 4.0 * R.r * R.r : kPi * R.r * R.r;
}

double disk_in_region(const LocalRegion& R, double px, double py, double rho) {
  if (R.kind == RegionKind::Cube)
    return disk_rect_area(px, py, rho, R.cx - R.r, R.cx + R.r, R.cy - R.r, R.cy + R.r);
  return lens_area(R.r, rho, std::hypot(px - R.cx, py - R.cy));
}

struct Explicit {
  int pos;
  double px, py;
  PatchRelation rel;
};

struct Medium {
  int pos;
  double x, y, side;
  int64_t beta;
};

struct Frame {
  int64_t ell = 0;
  double ln_u = 0;  // ln of the frame unit 2^-ell
  double r = 1;
  double cx = 0, cy = 0;
  std::array<mpz_class, 2> O;
  double lo[2], hi[2];
  int K = 3;
};

// counts formula on a frame cell (local index i, j at level L)
void cell_counts(const CubeFamily& f, const std::vector<int>& fine, const Frame& F, int64_t L, double x0, double y0,
                 double h, const std::vector<const Medium*>& med, std::vector<XReal>& cnt) {
  cnt.assign(fine.size(), XReal());
  for (std::size_t a = 0; a < fine.size(); ++a) {
    const auto& gj = f.gens[fine[a]];
    XReal P;
    if (gj.beta < L) {
      P = XReal();
    } else if (gj.source_level >= L) {
      P = XReal::pow2(2 * (gj.source_level - L));
    } else {
      double step = std::ldexp(1.0, static_cast<int>(F.ell - gj.source_level));
      bool aligned = std::fmod(x0, step) == 0.0 && std::fmod(y0, step) == 0.0;
      P = aligned ? XReal(1.0) : XReal();
    }
    if (P.is_zero()) continue;
    for (const Medium* R : med) {
      if (R->side >= h) continue;
      if (!(R->x >= x0 && R->x < x0 + h && R->y >= y0 && R->y < y0 + h)) continue;
      P -= R->beta <= gj.source_level ? XReal::pow2(2 * (gj.source_level - R->beta)) : XReal(1.0);
    }
    for (std::size_t b = 0; b < a; ++b) {
      if (cnt[b].is_zero()) continue;
      const auto& gi = f.gens[fine[b]];
      P -= gi.beta <= gj.source_level ? cnt[b] * XReal::pow2(2 * (gj.source_level - gi.beta)) : cnt[b];
    }
    if (P.sign() < 0) P = XReal();
    cnt[a] = P;
  }
}

}  // namespace

std::vector<Measurement> Scenario::measure(const DyadicPoint& c, double ln_r, RegionKind region,
                                           const std::vector<Quantity>& qs) const {
  if (is_control()) throw std::invalid_argument("measure: use measure_control for smooth controls");
  if (params.m > 2 && region != RegionKind::Cube)
    throw std::invalid_argument("unsupported: ball and cylinder regions for m > 2 (cube regions only)");
  const CubeFamily& f = *family;
  std::vector<Measurement> out(qs.size());

  Frame F;
  F.ell = std::max<int64_t>(0, static_cast<int64_t>(std::floor(-ln_r / kLn2)));
  F.ln_u = -static_cast<double>(F.ell) * kLn2;
  F.r = std::exp(ln_r - F.ln_u);
  F.K = static_cast<int>(std::ceil(F.r)) + 1;
  DyadicPoint cc = c.level >= F.ell ? c : c.at_level(F.ell);
  for (int j = 0; j < 2; ++j) {
    F.O[j] = cc.cell_index(j, F.ell);
    mpz_class base = F.O[j];
    mpz_mul_2exp(base.get_mpz_t(), base.get_mpz_t(), static_cast<mp_bitcnt_t>(cc.level - F.ell));
    double v = to_xreal(cc.num[j] - base, cc.level - F.ell).to_double();
    (j == 0 ? F.cx : F.cy) = v;
    double o = F.O[j].get_d();
    F.lo[j] = -o;
    F.hi[j] = F.ell < 1000 ? std::ldexp(1.0, static_cast<int>(F.ell)) - o : std::numeric_limits<double>::infinity();
    if (!std::isfinite(o)) F.lo[j] = -std::numeric_limits<double>::infinity();
  }
  LocalRegion LR{region, F.cx, F.cy, F.r};
  const int K = F.K, W = 2 * K + 1;
  mpz_class top;
  mpz_ui_pow_ui(top.get_mpz_t(), 2, static_cast<unsigned long>(F.ell));

  bool valid = true;
  std::string note;
  std::vector<Explicit> expl;
  auto add_explicit = [&](int pos, double px, double py) {
    const BridgeTemplate& T = templates[pos];
    if (!T.present) return;
    for (const auto& e : expl)
      if (e.pos == pos && e.px == px && e.py == py) return;
    double rho = std::exp(T.ln_footprint - F.ln_u);
    double zmax = std::exp(T.ln_sigma - F.ln_u) * T.height_bound;
    PatchRelation rel = classify_disk(px, py, rho, zmax, LR);
    if (rel != PatchRelation::Outside) expl.push_back({pos, px, py, rel});
  };

  // coverage map of frame cells
  std::vector<int> cover(W * W, -2);
  auto cov = [&](int dx, int dy) -> int& { return cover[(dx + K) * W + (dy + K)]; };
  for (int dx = -K; dx <= K; ++dx) {
    for (int dy = -K; dy <= K; ++dy) {
      DyadicCube cell;
      cell.level = F.ell;
      cell.corner = {F.O[0] + dx, F.O[1] + dy};
      if (cell.corner[0] < 0 || cell.corner[1] < 0 || cell.corner[0] >= top || cell.corner[1] >= top) continue;
      int p = f.covering_generation(cell);
      cov(dx, dy) = p;
      if (p < 0) continue;
      const auto& g = f.gens[p];
      const BridgeTemplate& T = templates[p];
      if (!T.present) continue;
      int64_t span = F.ell - g.beta;
      if (span <= kCoarseSpan) {
        unsigned long m = 1ul << span;
        double x = dx - static_cast<double>(mpz_fdiv_ui(cell.corner[0].get_mpz_t(), m));
        double y = dy - static_cast<double>(mpz_fdiv_ui(cell.corner[1].get_mpz_t(), m));
        add_explicit(p, x + 0.5 * m, y + 0.5 * m);
      } else {
        // cube center relative to the frame origin, in frame cells
        XReal d2;
        for (int j = 0; j < 2; ++j) {
          mpz_class q = cell.corner[j];
          mpz_fdiv_q_2exp(q.get_mpz_t(), q.get_mpz_t(), static_cast<mp_bitcnt_t>(span));
          mpz_mul_2exp(q.get_mpz_t(), q.get_mpz_t(), static_cast<mp_bitcnt_t>(span));
          mpz_class half;
          mpz_ui_pow_ui(half.get_mpz_t(), 2, static_cast<unsigned long>(span - 1));
          q += half;
          q -= F.O[j];
          XReal dd = to_xreal(q, 0) - XReal(j == 0 ? F.cx : F.cy);
          d2 += dd * dd;
        }
        XReal reach = XReal::from_log(T.ln_footprint - F.ln_u) + XReal(F.r);
        if (d2 < reach * reach * XReal(1.0 + 1e-9)) {
          valid = false;
          note = "coarse bridge overlaps the query region";
        }
      }
    }
  }

  // medium generations
  std::vector<Medium> med;
  std::vector<int> fine;
  for (std::size_t p = 0; p < f.gens.size(); ++p) {
    const auto& g = f.gens[p];
    if (g.beta <= F.ell) continue;
    if (g.source_level > F.ell + kExplicitSources) {
      fine.push_back(static_cast<int>(p));
      continue;
    }
    double side = std::ldexp(1.0, static_cast<int>(std::max<int64_t>(F.ell - g.beta, -1070)));
    std::vector<std::pair<double, double>> cand;
    if (g.source_level <= F.ell) {
      mp_bitcnt_t need = static_cast<mp_bitcnt_t>(F.ell - g.source_level);
      for (int dx = -K; dx <= K; ++dx)
        for (int dy = -K; dy <= K; ++dy) {
          if (cov(dx, dy) == -2) continue;
          if (mpz_scan1(mpz_class(F.O[0] + dx).get_mpz_t(), 0) < need) continue;
          if (mpz_scan1(mpz_class(F.O[1] + dy).get_mpz_t(), 0) < need) continue;
          cand.emplace_back(dx, dy);
        }
    } else {
      double step = std::ldexp(1.0, static_cast<int>(F.ell - g.source_level));
      int64_t i0 = static_cast<int64_t>(std::floor((F.cx - F.r) / step)) - 1;
      int64_t i1 = static_cast<int64_t>(std::floor((F.cx + F.r) / step)) + 1;
      int64_t j0 = static_cast<int64_t>(std::floor((F.cy - F.r) / step)) - 1;
      int64_t j1 = static_cast<int64_t>(std::floor((F.cy + F.r) / step)) + 1;
      for (int64_t i = i0; i <= i1; ++i)
        for (int64_t j = j0; j <= j1; ++j) {
          double x = i * step, y = j * step;
          if (x < F.lo[0] || x >= F.hi[0] || y < F.lo[1] || y >= F.hi[1]) continue;
          cand.emplace_back(x, y);
        }
    }
    for (auto [x, y] : cand) {
      if (x + side <= F.cx - F.r || x >= F.cx + F.r || y + side <= F.cy - F.r || y >= F.cy + F.r) continue;
      int dx = static_cast<int>(std::floor(x)), dy = static_cast<int>(std::floor(y));
      if (dx < -K || dx > K || dy < -K || dy > K || cov(dx, dy) != -1) continue;
      bool dead = false;
      for (const Medium& R : med)
        if (x - R.x >= 0 && x - R.x < R.side && y - R.y >= 0 && y - R.y < R.side) {
          dead = true;
          break;
        }
      if (dead) continue;
      med.push_back({static_cast<int>(p), x, y, side, g.beta});
      add_explicit(static_cast<int>(p), x + 0.5 * side, y + 0.5 * side);
    }
  }

  // aggregated generations
  std::vector<XReal> inside(fine.size()), straddle(fine.size());
  if (!fine.empty()) {
    double zmax = 0.0;
    for (int p : fine) {
      const BridgeTemplate& T = templates[p];
      if (T.present) zmax = std::max(zmax, std::exp(T.ln_sigma - F.ln_u) * T.height_bound);
    }
    std::vector<XReal> cnt;
    std::function<void(double, double, double, int64_t, int, const std::vector<const Medium*>&)> visit =
        [&](double x0, double y0, double h, int64_t L, int depth, const std::vector<const Medium*>& near) {
          if (x0 < F.lo[0] || x0 + h > F.hi[0] || y0 < F.lo[1] || y0 + h > F.hi[1]) return;
          PatchRelation rel = classify_square(x0, x0 + h, y0, y0 + h, zmax, LR);
          if (rel == PatchRelation::Outside) return;
          int dx = static_cast<int>(std::floor(x0)), dy = static_cast<int>(std::floor(y0));
          if (cov(dx, dy) != -1) return;
          std::vector<const Medium*> mine;
          for (const Medium* R : near) {
            if (R->x <= x0 && x0 + h <= R->x + R->side && R->y <= y0 && y0 + h <= R->y + R->side) return;
            if (R->x < x0 + h && R->x + R->side > x0 && R->y < y0 + h && R->y + R->side > y0) mine.push_back(R);
          }
          cell_counts(f, fine, F, L, x0, y0, h, mine, cnt);
          for (std::size_t a = 0; a < fine.size(); ++a) {
            if (f.gens[fine[a]].beta == L && compare(cnt[a], XReal(0.5)) > 0) {
              add_explicit(fine[a], x0 + 0.5 * h, y0 + 0.5 * h);
              return;
            }
          }
          if (rel == PatchRelation::Inside) {
            for (std::size_t a = 0; a < fine.size(); ++a) inside[a] += cnt[a];
            return;
          }
          if (depth == kRefine) {
            for (std::size_t a = 0; a < fine.size(); ++a) straddle[a] += cnt[a];
            return;
          }
          double hh = 0.5 * h;
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) visit(x0 + a * hh, y0 + b * hh, hh, L + 1, depth + 1, mine);
        };
    std::vector<const Medium*> all;
    for (const Medium& R : med) all.push_back(&R);
    double h0 = std::ldexp(1.0, -kExplicitSources);
    int64_t i0 = static_cast<int64_t>(std::floor((F.cx - F.r) / h0));
    int64_t i1 = static_cast<int64_t>(std::floor((F.cx + F.r) / h0));
    int64_t j0 = static_cast<int64_t>(std::floor((F.cy - F.r) / h0));
    int64_t j1 = static_cast<int64_t>(std::floor((F.cy + F.r) / h0));
    for (int64_t i = i0; i <= i1; ++i)
      for (int64_t j = j0; j <= j1; ++j) visit(i * h0, j * h0, h0, F.ell + kExplicitSources, 0, all);
  }

  // evaluate the quantities
  const XReal u = XReal::from_log(F.ln_u);
  for (std::size_t k = 0; k < qs.size(); ++k) {
    const Quantity& q = qs[k];
    Measurement& M = out[k];
    M.valid = valid;
    M.note = note;
    RingSpec spec = ring_spec(q);
    const double pw = scale_power(spec);
    XReal val, unc;

    if (q.kind == QKind::Holes) {
      if (!has_holes()) {
        M.valid = false;
        M.note = "unsupported: scenario carries no hole metadata";
        continue;
      }
      for (const auto& e : expl) {
        const BridgeTemplate& T = templates[e.pos];
        double rh = std::exp(T.ln_hole - F.ln_u);
        val += XReal(disk_in_region(LR, e.px, e.py, rh));
      }
      for (std::size_t a = 0; a < fine.size(); ++a) {
        const BridgeTemplate& T = templates[fine[a]];
        if (!T.present) continue;
        XReal disk = XReal::from_log(std::log(kPi) + 2.0 * (T.ln_hole - F.ln_u));
        val += (inside[a] + straddle[a] * XReal(0.5)) * disk;
        unc += straddle[a] * XReal(0.5) * disk;
      }
    } else if (q.kind == QKind::Orlicz) {
      XWeightedSamples S;
      for (const auto& e : expl) {
        const BridgeTemplate& T = templates[e.pos];
        double lsl = T.ln_sigma - F.ln_u;
        if (e.rel == PatchRelation::Inside) {
          const auto& ts = template_samples(e.pos);
          XReal sv = XReal::from_log(lsl), sw = XReal::from_log(2 * lsl);
          for (std::size_t i = 0; i < ts.values.size(); ++i) S.add(ts.values[i] * sv, ts.weights[i] * sw);
        } else {
          integrate_patch(T.profile, {e.px, e.py, lsl, T.sheets, 1}, LR, {RingQuantity::Mass}, {}, &S);
        }
      }
      for (std::size_t a = 0; a < fine.size(); ++a) {
        const BridgeTemplate& T = templates[fine[a]];
        XReal n = inside[a] + straddle[a] * XReal(0.5);
        if (!T.present || n.is_zero()) continue;
        double lsl = T.ln_sigma - F.ln_u;
        const auto& ts = template_samples(fine[a]);
        XReal sv = XReal::from_log(lsl), sw = XReal::from_log(2 * lsl) * n;
        for (std::size_t i = 0; i < ts.values.size(); ++i) S.add(ts.values[i] * sv, ts.weights[i] * sw);
      }
      val = luxemburg_norm(S, 2, XReal(q.scale / (F.r * F.r)));
    } else {
      const bool bridges = q.kind != QKind::DensityMass || density_pred(q, 1);
      const bool plane = (q.kind == QKind::Mass) || (q.kind == QKind::DensityMass && density_pred(q, background_multiplicity));
      if (q.kind == QKind::BIntegral && !(q.q > 0)) throw std::invalid_argument("b-integral: q > 0");
      double plane_area = plane ? region_plane_area(LR) : 0.0;
      XReal holes_out;
      for (const auto& e : expl) {
        const BridgeTemplate& T = templates[e.pos];
        double lsl = T.ln_sigma - F.ln_u;
        if (bridges) {
          if (e.rel == PatchRelation::Inside)
            val += template_total(e.pos, spec) * XReal::from_log(pw * lsl);
          else
            val += integrate_patch(T.profile, {e.px, e.py, lsl, T.sheets, 1}, LR, spec);
        }
        if (plane) {
          double rho = std::exp(T.ln_footprint - F.ln_u);
          holes_out += XReal(e.rel == PatchRelation::Inside ? kPi * rho * rho : disk_in_region(LR, e.px, e.py, rho));
        }
      }
      for (std::size_t a = 0; a < fine.size(); ++a) {
        const BridgeTemplate& T = templates[fine[a]];
        if (!T.present) continue;
        XReal half = straddle[a] * XReal(0.5);
        double lsl = T.ln_sigma - F.ln_u;
        if (bridges) {
          XReal per = template_total(fine[a], spec) * XReal::from_log(pw * lsl);
          val += (inside[a] + half) * per;
          unc += half * per;
        }
        if (plane) {
          XReal disk = XReal::from_log(std::log(kPi) + 2.0 * (T.ln_footprint - F.ln_u));
          holes_out += (inside[a] + half) * disk;
          unc += half * disk * XReal(background_multiplicity);
        }
      }
      if (plane) {
        XReal bg = (XReal(plane_area) - holes_out) * XReal(background_multiplicity);
        if (bg.sign() < 0) bg = XReal();
        val += bg;
      }
    }
    XReal scale = u.pow(physical_power(q));
    M.value = val * scale;
    M.uncertainty = unc * scale;
    if (params.m > 2) {
      XReal ext = XReal::from_log((params.m - 2) * (std::log(2.0) + ln_r));
      M.value *= ext;
      M.uncertainty *= ext;
    }
  }
  return out;
}

std::vector<Measurement> Scenario::measure_control(double ln_r, RegionKind region,
                                                   const std::vector<Quantity>& qs) const {
  if (!is_control()) throw std::invalid_argument("measure_control: not a smooth control");
  const RadialProfile& P = *control;
  LocalRegion LR{region, 0, 0, 1.0};
  RingOptions opt;
  opt.rel_tol = 1e-13;
  std::vector<Measurement> out(qs.size());
  const XReal r = XReal::from_log(ln_r);
  for (std::size_t k = 0; k < qs.size(); ++k) {
    const Quantity& q = qs[k];
    Measurement& M = out[k];
    XReal val;
    if (q.kind == QKind::Holes) {
      val = XReal();
    } else if (q.kind == QKind::Orlicz) {
      XWeightedSamples S;
      integrate_patch(P, {0, 0, -ln_r, 1, 1}, LR, {RingQuantity::Mass}, opt, &S);
      val = luxemburg_norm(S, 2, XReal(q.scale));
    } else if (q.kind == QKind::DensityMass && !density_pred(q, 1)) {
      val = XReal();
    } else {
      val = integrate_patch(P, {0, 0, -ln_r, 1, 1}, LR, ring_spec(q), opt);
    }
    M.value = val * r.pow(physical_power(q));
  }
  return out;
}

// ---------------------------------------------------------------------------
// builders

namespace {

void finish_points(Scenario& s, const ScenarioParams& p) {
  const CubeFamily& f = *s.family;
  s.C = sample_residual_points(f, static_cast<std::size_t>(p.samples), p.seed, &s.sample_acceptance);
  double floor = f.ln_floor();
  if (f.variant == FamilyVariant::Sparse) {
    for (double b : f.ln_B)
      if (b <= s.ln_epsilon + 1e-12 && b >= floor - 1e-12) s.ln_B.push_back(b);
  } else {
    int k0 = static_cast<int>(std::ceil(-s.ln_epsilon / kLn2 - 1e-9));
    for (int k = std::max(k0, 1); -k * kLn2 >= floor - 1e-12; ++k) s.ln_B.push_back(-k * kLn2);
  }
}

std::string make_id(const ScenarioParams& p) {
  std::ostringstream o;
  o << scenario_kind_name(p.kind);
  if (p.kind == ScenarioKind::Sphere || p.kind == ScenarioKind::Graph)
    o << "-" << p.control_param;
  else
    o << "-" << p.omega << "-d" << p.depth << "-s" << p.seed;
  if (p.m != 2) o << "-m" << p.m;
  return o.str();
}

}  // namespace

Scenario build_scenario(const ScenarioParams& p) {
  Scenario s;
  s.params = p;
  s.id = make_id(p);
  if (p.kind == ScenarioKind::Sphere || p.kind == ScenarioKind::Graph) {
    if (!(p.control_param > 0)) throw std::invalid_argument("control parameter must be positive");
    s.control = p.kind == ScenarioKind::Sphere ? sphere_profile(p.control_param)
                                              : paraboloid_profile(p.control_param, p.control_extent);
    s.ln_epsilon = std::log(p.kind == ScenarioKind::Sphere ? p.control_param : p.control_extent);
    return s;
  }
  if (p.m < 2) throw std::invalid_argument("scenario dimension m >= 2");
  if (p.kind == ScenarioKind::TheoremB && p.m != 2) throw std::invalid_argument("theorem-b scenarios have m = 2");
  s.omega = Modulus::parse(p.omega);

  if (p.kind == ScenarioKind::TheoremB) {
    if (!(p.epsilon_lip > 0 && p.epsilon_lip <= 1)) throw std::invalid_argument("epsilon_lip in (0, 1]");
    s.calibration = calibrate_neck();
    s.Delta = s.calibration.Gamma;
    s.lambda_scn = std::min(0.25, p.epsilon_lip / (2 * s.Delta));
    s.family_omega = s.omega;
    s.family = build_sparse_family(2, s.omega, p.lambda, p.depth);
    s.ln_epsilon = s.family->ln_epsilon;
    s.background_multiplicity = 1;
    const double ln_lam = std::log(s.lambda_scn);
    const double sn = 1.0 / (2 * s.lambda_scn);
    bool any = false;
    for (const auto& g : s.family->gens) {
      BridgeTemplate T;
      T.ln_half = -static_cast<double>(g.beta + 1) * kLn2;
      if (T.ln_half <= ln_lam + 1e-12) {
        T.present = true;
        T.profile = neck_profile_log(sn, -T.ln_half);
        T.ln_sigma = 2 * T.ln_half;
        T.ln_footprint = T.ln_half;
        T.height_bound = profile_height_bound(T.profile);
        T.sheets = 1;
        any = true;
      }
      s.templates.push_back(T);
    }
    if (!any) throw std::invalid_argument("theorem-b: depth too small to produce any bridge");
  } else {
    s.calibration = calibrate_bent();
    s.Delta = 3.0 * std::max(s.calibration.Gamma, 3.0);
    const double target = -6 * kLn2 - 2 * std::log(s.Delta);
    // largest eta with omega(eta) <= 2^-6 Delta^-2
    double Llo = 0.0, Lhi = 1.0;
    if (s.omega.ln_at(Llo) <= target) {
      Lhi = 0.0;
    } else {
      while (s.omega.ln_at(Lhi) > target) {
        Llo = Lhi;
        Lhi *= 2;
        if (Lhi > 1e300) throw std::invalid_argument("theorem-c: omega never drops below the eta threshold");
      }
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (Llo + Lhi);
        if (s.omega.ln_at(mid) <= target)
          Lhi = mid;
        else
          Llo = mid;
      }
    }
    if (Lhi > 700) throw std::invalid_argument("theorem-c: eta below double range for this omega");
    s.eta = std::exp(-Lhi);
    const bool dini = p.kind == ScenarioKind::TheoremCDini;
    s.family_omega = Modulus::psi(s.omega, s.Delta, s.eta, dini ? 1.0 : 0.5);
    s.family = dini ? build_dini_family(2, s.family_omega, p.lambda, p.depth)
                    : build_sparse_family(2, s.family_omega, p.lambda, p.depth);
    s.ln_epsilon = std::min({s.family->ln_epsilon, -std::log(s.Delta), std::log(s.eta)});
    s.background_multiplicity = 2;
    const double lnD = std::log(s.Delta);
    bool any = false;
    for (const auto& g : s.family->gens) {
      BridgeTemplate T;
      T.ln_half = -static_cast<double>(g.beta + 1) * kLn2;
      if (T.ln_half <= -lnD + 1e-12) {
        double L = std::log(-T.ln_half);  // ln log(1/s)
        T.present = true;
        T.profile = bent_profile_log(lnD - T.ln_half + L);
        T.ln_sigma = -lnD + 2 * T.ln_half - L;
        T.ln_footprint = T.ln_sigma + T.profile.ln_R;
        T.ln_hole = T.ln_sigma;
        T.height_bound = profile_height_bound(T.profile);
        T.sheets = 2;
        any = true;
      }
      s.templates.push_back(T);
    }
    if (!any) throw std::invalid_argument("theorem-c: no cube below 1/Delta at this depth");
  }
  finish_points(s, p);
  return s;
}

Scenario build_theorem_b(const std::string& omega, double epsilon_lip, int depth, int resolution, uint64_t seed,
                         int samples) {
  ScenarioParams p;
  p.kind = ScenarioKind::TheoremB;
  p.omega = omega;
  p.epsilon_lip = epsilon_lip;
  p.depth = depth;
  p.resolution = resolution;
  p.seed = seed;
  p.samples = samples;
  return build_scenario(p);
}

Scenario build_theorem_c(FamilyVariant variant, const std::string& omega, int depth, int resolution, uint64_t seed,
                         int samples) {
  ScenarioParams p;
  p.kind = variant == FamilyVariant::Dini ? ScenarioKind::TheoremCDini : ScenarioKind::TheoremCSparse;
  p.omega = omega;
  p.depth = depth;
  p.resolution = resolution;
  p.seed = seed;
  p.samples = samples;
  return build_scenario(p);
}

Scenario build_smooth_control(ScenarioKind kind, double param, double extent, int resolution) {
  ScenarioParams p;
  p.kind = kind;
  p.control_param = param;
  p.control_extent = extent;
  p.resolution = resolution;
  return build_scenario(p);
}

DiscreteVarifold smooth_control_atoms(const Scenario& s, int resolution) {
  if (!s.is_control()) throw std::invalid_argument("smooth_control_atoms: not a control");
  DiscreteVarifold V;
  V.atoms = discretize_profile(*s.control, Placement{}, 3, resolution);
  V.provenance = {{"scenario", s.id}};
  return V;
}

// ---------------------------------------------------------------------------
// points, atoms, serialization

std::vector<DyadicPoint> Scenario::off_c_points(std::size_t count) const {
  std::vector<DyadicPoint> out;
  if (is_control() || C.empty() || ln_B.empty()) return out;
  const CubeFamily& f = *family;
  for (std::size_t i = 0; out.size() < count && i < 64 * count; ++i) {
    const DyadicPoint& a = C[i % C.size()];
    double lr = ln_B[(i / C.size()) % ln_B.size()];
    CoveringResult H;
    try {
      H = covering_cubes(f, a, lr);
    } catch (const std::exception&) {
      continue;
    }
    if (H.cubes.empty()) continue;
    const DyadicCube& Q = H.cubes.front().second;
    DyadicPoint z;
    z.level = Q.level + 5;
    for (const auto& c : Q.corner) {
      mpz_class v = c;
      mpz_mul_2exp(v.get_mpz_t(), v.get_mpz_t(), 5);
      z.num.push_back(v + 29);
    }
    out.push_back(std::move(z));
  }
  return out;
}

DiscreteVarifold Scenario::atoms(int resolution, std::size_t cube_limit) const {
  if (is_control()) return smooth_control_atoms(*this, resolution);
  const CubeFamily& f = *family;
  DiscreteVarifold V;
  V.provenance = {{"scenario", id}};
  AnalyticBackground bg;
  bg.multiplicity = background_multiplicity;
  std::vector<Disk> holes;
  for (const auto& [gi, Q] : enumerate_cubes(f, cube_limit)) {
    int pos = 0;
    while (f.gens[pos].index != gi) ++pos;
    const BridgeTemplate& T = templates[pos];
    if (!T.present) continue;
    double side = std::ldexp(1.0, -static_cast<int>(Q.level));
    double cx = Q.corner[0].get_d() * side + 0.5 * side, cy = Q.corner[1].get_d() * side + 0.5 * side;
    Placement at;
    at.center = {cx, cy, 0.0};
    at.scale = at.vscale = std::exp(T.ln_sigma);
    at.reflect = T.sheets == 2;
    V.append(discretize_profile(T.profile, at, 3, resolution));
    bg.excluded.push_back({cx, cy, std::exp(T.ln_footprint)});
    if (T.ln_hole > kNegInf) holes.push_back({cx, cy, std::exp(T.ln_hole)});
  }
  V.background = bg;
  if (has_holes())
    V.holes = holes;
  return V;
}

nlohmann::json Scenario::to_json() const {
  nlohmann::json j;
  j["id"] = id;
  j["kind"] = scenario_kind_name(params.kind);
  j["params"] = {{"omega", params.omega},          {"lambda", params.lambda},
                 {"epsilon_lip", params.epsilon_lip}, {"depth", params.depth},
                 {"m", params.m},                   {"resolution", params.resolution},
                 {"seed", params.seed},             {"samples", params.samples},
                 {"control_param", params.control_param}, {"control_extent", params.control_extent}};
  if (is_control()) {
    j["profile"] = control->to_json();
    return j;
  }
  j["omega"] = params.omega;
  j["lambda"] = params.lambda;
  j["depth"] = params.depth;
  j["Delta_measured"] = Delta;
  j["calibration"] = calibration.grid;
  if (params.kind == ScenarioKind::TheoremB)
    j["lambda_scn"] = lambda_scn;
  else
    j["eta"] = eta;
  j["ln_epsilon"] = ln_epsilon;
  j["epsilon"] = std::exp(ln_epsilon);
  j["background_multiplicity"] = background_multiplicity;
  j["family"] = family->to_json();
  nlohmann::json br = nlohmann::json::array();
  nlohmann::json holes = nlohmann::json::array();
  for (std::size_t p = 0; p < templates.size(); ++p) {
    const auto& g = family->gens[p];
    const auto& T = templates[p];
    nlohmann::json b = {{"generation", g.index}, {"beta", g.beta}, {"source_level", g.source_level},
                        {"count", g.count.get_str()}, {"present", T.present}};
    if (T.present) {
      b["profile"] = T.profile.to_json();
      b["ln_scale"] = T.ln_sigma;
      b["ln_half_side"] = T.ln_half;
      b["ln_footprint"] = T.ln_footprint;
      b["placement"] = "cube center, homothety by exp(ln_scale)";
      if (T.ln_hole > kNegInf) holes.push_back({{"generation", g.index}, {"center", "cube center"}, {"ln_radius", T.ln_hole}});
    }
    br.push_back(b);
  }
  j["bridges"] = br;
  j["holes"] = holes;
  nlohmann::json C_ = nlohmann::json::array();
  for (std::size_t i = 0; i < C.size(); ++i) {
    nlohmann::json pt = {{"id", i}, {"level", C[i].level}};
    nlohmann::json approx = nlohmann::json::array();
    for (int k = 0; k < C[i].dim(); ++k) approx.push_back(C[i].coord(k));
    pt["approx"] = approx;
    C_.push_back(pt);
  }
  j["C"] = C_;
  nlohmann::json B = nlohmann::json::array();
  for (double b : ln_B) B.push_back({{"ln_r", b}, {"log2_r", b / kLn2}});
  j["B"] = B;
  j["sample_acceptance"] = sample_acceptance;
  return j;
}

Scenario Scenario::from_json(const nlohmann::json& j) {
  ScenarioParams p;
  p.kind = parse_scenario_kind(j.at("kind").get<std::string>());
  const auto& q = j.at("params");
  p.omega = q.at("omega").get<std::string>();
  p.lambda = q.at("lambda").get<double>();
  p.epsilon_lip = q.at("epsilon_lip").get<double>();
  p.depth = q.at("depth").get<int>();
  p.m = q.at("m").get<int>();
  p.resolution = q.at("resolution").get<int>();
  p.seed = q.at("seed").get<uint64_t>();
  p.samples = q.at("samples").get<int>();
  p.control_param = q.at("control_param").get<double>();
  p.control_extent = q.at("control_extent").get<double>();
  Scenario s = build_scenario(p);
  if (j.contains("Delta_measured") && std::fabs(j["Delta_measured"].get<double>() - s.Delta) > 1e-9 * s.Delta)
    throw std::runtime_error("scenario JSON: calibration mismatch on rebuild");
  return s;
}

// ---------------------------------------------------------------------------
// coercive estimate

XReal kappa_x(const XReal& t, int m) {
  if (t.sign() <= 0) return XReal();
  double lt = t.log();
  double L = lt < -30 ? -lt + std::log1p(std::exp(lt)) : std::log1p(1.0 / t.to_double());
  return t * XReal(1.0 + std::pow(L, 1.0 - 1.0 / m));
}

double ScenarioCoercive::ratio() const {
  XReal s = rhs_sum();
  if (s.is_zero()) return lhs.is_zero() ? 0.0 : std::numeric_limits<double>::infinity();
  return (lhs / s).to_double();
}

ScenarioCoercive scenario_coercive(const Scenario& s, const DyadicPoint& c, double ln_r, double gamma_iso) {
  (void)gamma_iso;  // every point of these graph scenarios meets the H threshold (mass >= pi s^2 / 2)
  ScenarioCoercive out;
  const double ln2 = std::log(2.0);
  Quantity tilt_op = Quantity::tilt(2.0, TiltNorm::Operator);
  auto inner = s.measure(c, ln_r, RegionKind::Ball, {tilt_op});
  Quantity orl = Quantity::simple(QKind::Orlicz);
  orl.scale = 4.0;  // measure scale r^-2 on the ball of radius 2r
  auto onC = s.measure(c, ln_r + ln2, RegionKind::Ball, {orl, Quantity::simple(QKind::Height, 2.0)});
  auto onK = s.measure(c, ln_r + 2 * ln2, RegionKind::Ball, {Quantity::simple(QKind::DeltaMass)});
  out.valid = inner[0].valid && onC[0].valid && onK[0].valid;
  XReal r = XReal::from_log(ln_r), r2 = r * r;
  out.delta_mass_K = onK[0].value;
  out.orlicz = onC[0].value;
  out.lhs = inner[0].value / r2;
  out.rhs[0] = out.delta_mass_K * out.delta_mass_K / r2;
  out.rhs[1] = kappa_x(out.delta_mass_K * out.orlicz / r2, 2);
  out.rhs[2] = onC[1].value / (r2 * r2);
  return out;
}

}  // namespace vl
