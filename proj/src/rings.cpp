#include "varifold_lab/rings.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "varifold_lab/geometry2d.hpp"
#include "varifold_lab/quadrature.hpp"

namespace vl {

bool RingSpec::operator<(const RingSpec& o) const {
  return std::tie(kind, q, norm, theta) < std::tie(o.kind, o.q, o.norm, o.theta);
}

double scale_power(const RingSpec& s) {
  switch (s.kind) {
    case RingQuantity::Mass:
    case RingQuantity::Tilt:
    case RingQuantity::LevelTilt: return 2.0;
    case RingQuantity::Height: return 2.0 + s.q;
    case RingQuantity::FirstVariation: return 1.0;
    case RingQuantity::SecondFund: return 2.0 - s.q;
  }
  return 2.0;
}

double profile_height_bound(const RadialProfile& p) {
  switch (p.kind) {
    case ProfileKind::Neck: return ach_from_log(p.ln_R) + neck_a(p.s);
    case ProfileKind::Bent: return p.ln_R + 1.0;
    case ProfileKind::Catenoid: return ach_from_log(p.ln_R);
    case ProfileKind::Cap: return neck_a(p.s);
    case ProfileKind::Sphere: return 2.0 * p.coef;
    case ProfileKind::Flat: return 0.0;
    case ProfileKind::Cone: return p.t1;
    case ProfileKind::Paraboloid: return p.coef * p.t1 * p.t1;
  }
  return 0.0;
}

PatchRelation classify_disk(double px, double py, double rho, double zmax, const LocalRegion& R) {
  double dx = px - R.cx, dy = py - R.cy;
  switch (R.kind) {
    case RegionKind::Ball: {
      double d = std::hypot(dx, dy);
      if (d - rho >= R.r) return PatchRelation::Outside;
      double far = d + rho;
      if (far * far + zmax * zmax <= R.r * R.r) return PatchRelation::Inside;
      return PatchRelation::Straddle;
    }
    case RegionKind::Cylinder: {
      double d = std::hypot(dx, dy);
      if (d - rho >= R.r) return PatchRelation::Outside;
      if (d + rho <= R.r && zmax <= R.h) return PatchRelation::Inside;
      return PatchRelation::Straddle;
    }
    case RegionKind::Cube: {
      double a = R.r;
      double ex = std::max(0.0, std::fabs(dx) - a), ey = std::max(0.0, std::fabs(dy) - a);
      if (std::hypot(ex, ey) >= rho && (ex > 0 || ey > 0)) return PatchRelation::Outside;
      if (std::fabs(dx) + rho <= a && std::fabs(dy) + rho <= a && zmax <= a) return PatchRelation::Inside;
      return PatchRelation::Straddle;
    }
  }
  return PatchRelation::Straddle;
}

PatchRelation classify_square(double x0, double x1, double y0, double y1, double zmax, const LocalRegion& R) {
  switch (R.kind) {
    case RegionKind::Ball:
    case RegionKind::Cylinder: {
      double nx = std::max({x0 - R.cx, 0.0, R.cx - x1}), ny = std::max({y0 - R.cy, 0.0, R.cy - y1});
      if (std::hypot(nx, ny) >= R.r) return PatchRelation::Outside;
      double fx = std::max(std::fabs(x0 - R.cx), std::fabs(x1 - R.cx));
      double fy = std::max(std::fabs(y0 - R.cy), std::fabs(y1 - R.cy));
      double far2 = fx * fx + fy * fy;
      if (R.kind == RegionKind::Ball) {
        if (far2 + zmax * zmax <= R.r * R.r) return PatchRelation::Inside;
      } else if (far2 <= R.r * R.r && zmax <= R.h) {
        return PatchRelation::Inside;
      }
      return PatchRelation::Straddle;
    }
    case RegionKind::Cube: {
      double a = R.r;
      if (x1 <= R.cx - a || x0 >= R.cx + a || y1 <= R.cy - a || y0 >= R.cy + a) return PatchRelation::Outside;
      if (x0 >= R.cx - a && x1 <= R.cx + a && y0 >= R.cy - a && y1 <= R.cy + a && zmax <= a)
        return PatchRelation::Inside;
      return PatchRelation::Straddle;
    }
  }
  return PatchRelation::Straddle;
}

namespace {

struct Geo {
  double rho, z;
};

class PatchIntegrand {
 public:
  PatchIntegrand(const RadialProfile& p, const PatchPlacement& at, const LocalRegion* R, const RingSpec& spec)
      : p_(p), at_(at), R_(R), spec_(spec) {
    pw_ = scale_power(spec);
  }

  Geo geo(const RingPoint& rp) const {
    return {std::exp(at_.ln_sigma + rp.ln_tau), std::exp(at_.ln_sigma + rp.ln_abs_height)};
  }

  double fraction(const RingPoint& rp) const {
    if (spec_.kind == RingQuantity::LevelTilt && !(rp.ln_op2 >= 2.0 * std::log(spec_.theta))) return 0.0;
    if (!R_) return 1.0;
    Geo g = geo(rp);
    const LocalRegion& R = *R_;
    double d = std::hypot(at_.px - R.cx, at_.py - R.cy);
    switch (R.kind) {
      case RegionKind::Ball: {
        if (g.z > R.r) return 0.0;
        return arc_fraction_disk(g.rho, std::sqrt(R.r * R.r - g.z * g.z), d);
      }
      case RegionKind::Cylinder:
        if (g.z > R.h) return 0.0;
        return arc_fraction_disk(g.rho, R.r, d);
      case RegionKind::Cube:
        if (g.z > R.r) return 0.0;
        return arc_fraction_rect(g.rho, at_.px, at_.py, R.cx - R.r, R.cx + R.r, R.cy - R.r, R.cy + R.r);
    }
    return 0.0;
  }

  // Signed functions whose zeros are the kinks of the clipped integrand.
  void transitions(const RingPoint& rp, std::vector<double>& out) const {
    out.clear();
    if (spec_.kind == RingQuantity::LevelTilt) out.push_back(rp.ln_op2 - 2.0 * std::log(spec_.theta));
    if (!R_) return;
    Geo g = geo(rp);
    const LocalRegion& R = *R_;
    double dx = R.cx - at_.px, dy = R.cy - at_.py, d = std::hypot(dx, dy);
    switch (R.kind) {
      case RegionKind::Ball: {
        out.push_back(g.z - R.r);
        double re = std::sqrt(std::max(0.0, R.r * R.r - g.z * g.z));
        out.push_back(g.rho - std::fabs(d - re));
        out.push_back(g.rho - (d + re));
        break;
      }
      case RegionKind::Cylinder:
        if (std::isfinite(R.h)) out.push_back(g.z - R.h);
        out.push_back(g.rho - std::fabs(d - R.r));
        out.push_back(g.rho - (d + R.r));
        break;
      case RegionKind::Cube: {
        double a = R.r;
        out.push_back(g.z - a);
        for (double sx : {-1.0, 1.0}) {
          out.push_back(g.rho - std::fabs(dx + sx * a));
          out.push_back(g.rho - std::fabs(dy + sx * a));
          for (double sy : {-1.0, 1.0}) out.push_back(g.rho - std::hypot(dx + sx * a, dy + sy * a));
        }
        break;
      }
    }
  }

  // Integrand (per unit parameter) and the mass density used for samples.
  XReal value(const RingPoint& rp, double f, double* ln_mass_density = nullptr) const {
    if (!(f > 0)) {
      if (ln_mass_density) *ln_mass_density = kNegInf;
      return XReal();
    }
    double base = std::log(2.0 * kPi * f * at_.sheets * at_.density) + rp.ln_area;
    if (ln_mass_density) *ln_mass_density = base + 2.0 * at_.ln_sigma;
    double lv = base + pw_ * at_.ln_sigma;
    switch (spec_.kind) {
      case RingQuantity::Mass:
      case RingQuantity::LevelTilt: break;
      case RingQuantity::Tilt: {
        double l = 0.5 * rp.ln_op2 + (spec_.norm == TiltNorm::Frobenius ? 0.5 * kLn2 : 0.0);
        lv += spec_.q * l;
        break;
      }
      case RingQuantity::Height: lv += spec_.q * rp.ln_abs_height; break;
      case RingQuantity::FirstVariation: lv += rp.ln_h; break;
      case RingQuantity::SecondFund: lv += spec_.q * rp.ln_b; break;
    }
    if (std::isnan(lv) || lv == kNegInf) return XReal();
    return XReal::from_log(lv);
  }

  const RadialProfile& profile() const { return p_; }
  const PatchPlacement& placement() const { return at_; }

 private:
  const RadialProfile& p_;
  PatchPlacement at_;
  const LocalRegion* R_;
  RingSpec spec_;
  double pw_;
};

std::vector<double> piece_breaks(const PatchIntegrand& F, std::size_t piece, double a, double b, int probes) {
  std::vector<double> cuts{a, b};
  std::vector<double> t0, t1, tm;
  auto fun = [&](double w, std::vector<double>& out) { F.transitions(F.profile().eval(piece, w), out); };
  std::vector<double> grid(probes + 1);
  for (int i = 0; i <= probes; ++i) grid[i] = a + (b - a) * i / probes;
  grid[0] = a;
  grid[probes] = b;
  fun(grid[0], t0);
  if (t0.empty()) return cuts;
  for (int i = 1; i <= probes; ++i) {
    fun(grid[i], t1);
    for (std::size_t k = 0; k < t0.size() && k < t1.size(); ++k) {
      if ((t0[k] > 0) == (t1[k] > 0)) continue;
      double lo = grid[i - 1], hi = grid[i];
      bool lo_pos = t0[k] > 0;
      for (int it = 0; it < 1100 && hi - lo > std::max(1e-15 * std::fabs(hi), 1e-300); ++it) {
        double mid = 0.5 * (lo + hi);
        fun(mid, tm);
        if ((tm[k] > 0) == lo_pos)
          lo = mid;
        else
          hi = mid;
      }
      cuts.push_back(0.5 * (lo + hi));
    }
    t0.swap(t1);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

// Geometric refinement toward both ends of every interval: integrands that grow
// exponentially in the parameter concentrate at an endpoint.
std::vector<double> graded(const std::vector<double>& cuts) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double a = cuts[i], b = cuts[i + 1], w = b - a;
    out.push_back(a);
    if (!(w > 0)) continue;
    std::vector<double> mid;
    for (double h = 0.25 * w; h >= std::min(0.5, w / 64); h *= 0.5) {
      mid.push_back(a + h);
      mid.push_back(b - h);
    }
    mid.push_back(a + 0.5 * w);
    std::sort(mid.begin(), mid.end());
    out.insert(out.end(), mid.begin(), mid.end());
  }
  out.push_back(cuts.back());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct Panel {
  std::size_t piece;
  double a, b;
  XReal val, err;
  int depth;
};

struct PanelOrder {
  bool operator()(const Panel& x, const Panel& y) const { return x.err < y.err; }
};

Panel eval_panel(const PatchIntegrand& F, std::size_t piece, double a, double b, int depth) {
  const auto& g16 = gauss_legendre(16);
  const auto& g8 = gauss_legendre(8);
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  XReal s16, s8;
  for (int k = 0; k < 16; ++k) {
    RingPoint rp = F.profile().eval(piece, c + h * g16.x[k]);
    s16 += F.value(rp, F.fraction(rp)) * XReal(h * g16.w[k]);
  }
  for (int k = 0; k < 8; ++k) {
    RingPoint rp = F.profile().eval(piece, c + h * g8.x[k]);
    s8 += F.value(rp, F.fraction(rp)) * XReal(h * g8.w[k]);
  }
  XReal e = s16 - s8;
  if (e.sign() < 0) e = -e;
  return {piece, a, b, s16, e, depth};
}

XReal integrate(const PatchIntegrand& F, const RingOptions& opt, XWeightedSamples* samples) {
  const RadialProfile& p = F.profile();
  std::priority_queue<Panel, std::vector<Panel>, PanelOrder> heap;
  std::vector<Panel> done;
  XReal total, err;
  for (std::size_t k = 0; k < p.pieces.size(); ++k) {
    auto cuts = graded(piece_breaks(F, k, p.pieces[k].w0, p.pieces[k].w1, opt.probe_points));
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      if (!(cuts[i + 1] > cuts[i])) continue;
      Panel pn = eval_panel(F, k, cuts[i], cuts[i + 1], 0);
      total += pn.val;
      err += pn.err;
      heap.push(pn);
    }
  }
  int guard = 0;
  while (!heap.empty() && guard < 20000) {
    XReal tol = total * XReal(opt.rel_tol);
    if (err <= tol) break;
    Panel pn = heap.top();
    heap.pop();
    double mid = 0.5 * (pn.a + pn.b);
    if (pn.depth >= opt.max_depth || !(mid > pn.a && mid < pn.b)) {
      done.push_back(pn);
      err -= pn.err;
      continue;
    }
    Panel l = eval_panel(F, pn.piece, pn.a, mid, pn.depth + 1);
    Panel r = eval_panel(F, pn.piece, mid, pn.b, pn.depth + 1);
    total = total - pn.val + l.val + r.val;
    err = err - pn.err + l.err + r.err;
    if (err.sign() < 0) err = XReal();
    heap.push(l);
    heap.push(r);
    ++guard;
  }
  while (!heap.empty()) {
    done.push_back(heap.top());
    heap.pop();
  }
  std::sort(done.begin(), done.end(), [](const Panel& x, const Panel& y) {
    return x.piece != y.piece ? x.piece < y.piece : x.a < y.a;
  });
  XReal sum;
  for (const Panel& pn : done) sum += pn.val;
  if (samples) {
    const auto& g16 = gauss_legendre(16);
    const PatchPlacement& at = F.placement();
    for (const Panel& pn : done) {
      double c = 0.5 * (pn.a + pn.b), h = 0.5 * (pn.b - pn.a);
      for (int k = 0; k < 16; ++k) {
        RingPoint rp = p.eval(pn.piece, c + h * g16.x[k]);
        double lm;
        F.value(rp, F.fraction(rp), &lm);
        if (lm == kNegInf || rp.ln_abs_height == kNegInf) continue;
        samples->add(XReal::from_log(at.ln_sigma + rp.ln_abs_height), XReal::from_log(lm) * XReal(h * g16.w[k]));
      }
    }
  }
  return sum;
}

}  // namespace

XReal integrate_patch(const RadialProfile& p, const PatchPlacement& at, const LocalRegion& R, const RingSpec& spec,
                      const RingOptions& opt, XWeightedSamples* samples) {
  PatchIntegrand F(p, at, &R, spec);
  return integrate(F, opt, samples);
}

XReal patch_total(const RadialProfile& p, int sheets, int density, const RingSpec& spec, const RingOptions& opt,
                  XWeightedSamples* samples) {
  PatchPlacement at;
  at.sheets = sheets;
  at.density = density;
  PatchIntegrand F(p, at, nullptr, spec);
  return integrate(F, opt, samples);
}

}  // namespace vl
