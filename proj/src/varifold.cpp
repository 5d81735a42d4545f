#include "varifold_lab/varifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "varifold_lab/geometry2d.hpp"
#include "varifold_lab/kernels.hpp"
#include "varifold_lab/quadrature.hpp"

namespace vl {

namespace {

using Mat4 = Eigen::Matrix4d;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Index of the vertical (normal) axis of the base plane.
constexpr int kVertical = 2;

Mat4 pad(const Eigen::MatrixXd& P) {
  Mat4 M = Mat4::Zero();
  M.topLeftCorner(P.rows(), P.cols()) = P;
  return M;
}

Plane base_plane(int n) {
  if (n == 3) return Plane::coordinate(3, 2);
  if (n == 4) {
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(4, 3);
    F(0, 0) = 1;
    F(1, 1) = 1;
    F(3, 2) = 1;
    return Plane(F);
  }
  throw std::invalid_argument("base plane defined for n = 3, 4");
}

Mat4 atom_proj4(const VarifoldAtom& a, int m) {
  Mat4 P = Mat4::Zero();
  for (int k = 0; k < m; ++k) {
    Eigen::Map<const Eigen::Vector4d> f(a.frame[k].data());
    P += f * f.transpose();
  }
  return P;
}

double tilt4(const Mat4& D, TiltNorm norm) {
  if (norm == TiltNorm::Frobenius) return D.norm();
  Eigen::SelfAdjointEigenSolver<Mat4> es(D, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double dist_to_plane(const double* z, const std::vector<double>& c, const Mat4& PT, int n) {
  Eigen::Vector4d v = Eigen::Vector4d::Zero();
  for (int i = 0; i < n; ++i) v[i] = z[i] - c[i];
  return (v - PT * v).norm();
}

void check_center(const std::vector<double>& c, int n, const char* what) {
  if (static_cast<int>(c.size()) != n) throw std::invalid_argument(std::string(what) + ": point dimension mismatch");
}

double horizontal_overlap_area(const AnalyticBackground& bg, double cx, double cy, double rad, bool square) {
  double area;
  if (square) {
    double x0 = cx - rad, x1 = cx + rad, y0 = cy - rad, y1 = cy + rad;
    area = (x1 - x0) * (y1 - y0);
    for (const Disk& d : bg.excluded) area -= disk_rect_area(d.cx, d.cy, d.r, x0, x1, y0, y1);
  } else {
    area = kPi * rad * rad;
    for (const Disk& d : bg.excluded) area -= lens_area(rad, d.r, std::hypot(d.cx - cx, d.cy - cy));
  }
  return std::max(0.0, area);
}

// Area of R intersected with the background plane, before multiplicity.
double background_area(const AnalyticBackground& bg, const Region& R, int n) {
  const auto& c = R.center;
  if (n == 3) {
    double cz = c[kVertical];
    switch (R.kind) {
      case RegionKind::Ball: {
        if (std::fabs(cz) > R.r) return 0.0;
        return horizontal_overlap_area(bg, c[0], c[1], std::sqrt(R.r * R.r - cz * cz), false);
      }
      case RegionKind::Cylinder: {
        if (!R.vertical_cylinder()) throw std::invalid_argument("background: tilted cylinder regions are unsupported");
        if (std::fabs(cz) > R.h) return 0.0;
        return horizontal_overlap_area(bg, c[0], c[1], R.r, false);
      }
      case RegionKind::Cube: {
        if (std::fabs(cz) > R.r) return 0.0;
        return horizontal_overlap_area(bg, c[0], c[1], R.r, true);
      }
    }
  }
  if (n == 4) {
    if (R.kind != RegionKind::Cube) throw std::invalid_argument("lifted background: only cube regions are supported");
    if (std::fabs(c[kVertical]) > R.r) return 0.0;
    double len = std::min(bg.lift_hi, c[3] + R.r) - std::max(bg.lift_lo, c[3] - R.r);
    if (len <= 0) return 0.0;
    return horizontal_overlap_area(bg, c[0], c[1], R.r, true) * len;
  }
  throw std::invalid_argument("background: unsupported ambient dimension");
}

double background_mass(const DiscreteVarifold& V, const Region& R) {
  if (!V.background) return 0.0;
  return V.background->multiplicity * background_area(*V.background, R, V.n);
}

// Background height relative to (c, T): constant only when T is the base plane.
double background_height(const DiscreteVarifold& V, const std::vector<double>& c, const Mat4& PT) {
  Mat4 P0 = pad(base_plane(V.n).projection());
  if ((P0 - PT).norm() > 1e-12) throw std::invalid_argument("background height: reference plane must be the base plane");
  return std::fabs(c[kVertical]);
}

template <class Pred>
double atom_reduce(const DiscreteVarifold& V, const Region& R, Pred term) {
  const auto& A = V.atoms;
  return reduce_terms(A.size(), [&](std::size_t i) {
    const VarifoldAtom& a = A[i];
    if (!R.contains(a.point.data(), V.n)) return 0.0;
    return term(a);
  });
}

}  // namespace

Region Region::ball(std::vector<double> c, double r) {
  if (!(r > 0)) throw std::invalid_argument("region: radius must be positive");
  Region R;
  R.kind = RegionKind::Ball;
  R.center = std::move(c);
  R.r = r;
  return R;
}

Region Region::cylinder(std::vector<double> c, double r, double h, std::optional<Plane> T) {
  if (!(r > 0) || !(h > 0)) throw std::invalid_argument("region: sizes must be positive");
  Region R;
  R.kind = RegionKind::Cylinder;
  R.center = std::move(c);
  R.r = r;
  R.h = h;
  R.axis_plane = std::move(T);
  return R;
}

Region Region::cube(std::vector<double> c, double half_side) {
  if (!(half_side > 0)) throw std::invalid_argument("region: half-side must be positive");
  Region R;
  R.kind = RegionKind::Cube;
  R.center = std::move(c);
  R.r = half_side;
  return R;
}

bool Region::vertical_cylinder() const {
  if (!axis_plane) return true;
  int n = axis_plane->ambient();
  return (axis_plane->projection() - base_plane(n).projection()).norm() <= 1e-12;
}

std::string Region::kind_name() const {
  switch (kind) {
    case RegionKind::Ball: return "ball";
    case RegionKind::Cylinder: return "cylinder";
    case RegionKind::Cube: return "cube";
  }
  return "?";
}

bool Region::contains(const double* z, int n) const {
  switch (kind) {
    case RegionKind::Ball: {
      double s = 0;
      for (int i = 0; i < n; ++i) s += (z[i] - center[i]) * (z[i] - center[i]);
      return s <= r * r;
    }
    case RegionKind::Cube: {
      for (int i = 0; i < n; ++i)
        if (std::fabs(z[i] - center[i]) > r) return false;
      return true;
    }
    case RegionKind::Cylinder: {
      if (vertical_cylinder()) {
        double s = 0;
        for (int i = 0; i < n; ++i)
          if (i != kVertical) s += (z[i] - center[i]) * (z[i] - center[i]);
        return s <= r * r && std::fabs(z[kVertical] - center[kVertical]) <= h;
      }
      Eigen::VectorXd v(n);
      for (int i = 0; i < n; ++i) v[i] = z[i] - center[i];
      Eigen::VectorXd p = axis_plane->projection() * v;
      return p.norm() <= r && (v - p).norm() <= h;
    }
  }
  return false;
}

Eigen::MatrixXd atom_projection(const VarifoldAtom& a, int n, int m) {
  return atom_proj4(a, m).topLeftCorner(n, n);
}

double atom_tilt(const VarifoldAtom& a, int n, int m, const Eigen::MatrixXd& PT, TiltNorm norm) {
  (void)n;
  return tilt4(atom_proj4(a, m) - pad(PT), norm);
}

std::vector<VarifoldAtom> discretize_profile(const RadialProfile& p, const Placement& at, int n, int resolution) {
  if (n != 3) throw std::invalid_argument("discretize_profile: n = 3 only");
  if (resolution < 8) throw std::invalid_argument("discretize_profile: resolution >= 8 required");
  if (std::fabs(at.vscale - at.scale) > 1e-14 * at.scale)
    throw std::invalid_argument("discretize_profile: anisotropic placement unsupported");
  if (!(at.scale > 0)) throw std::invalid_argument("discretize_profile: scale must be positive");
  double sig = at.scale;
  double rho_max = 0.0;
  for (std::size_t k = 0; k < p.pieces.size(); ++k) {
    rho_max = std::max(rho_max, p.tau_of(k, p.pieces[k].w0));
    rho_max = std::max(rho_max, p.tau_of(k, p.pieces[k].w1));
  }
  std::vector<VarifoldAtom> out;
  for (std::size_t k = 0; k < p.pieces.size(); ++k) {
    const ProfilePiece& pc = p.pieces[k];
    int panels = 1;
    if (pc.kind == PieceKind::CatenoidW) panels = std::max(1, static_cast<int>(std::ceil((pc.w1 - pc.w0) / 1.5)));
    for (const QuadNode& nd : composite_nodes(pc.w0, pc.w1, panels, resolution)) {
      RingPoint rp = p.eval(k, nd.x);
      double rho = std::exp(rp.ln_tau);
      int nth = std::max(8, static_cast<int>(std::ceil(4.0 * resolution * rho / rho_max)));
      double dth = 2.0 * kPi / nth;
      double w = std::exp(rp.ln_area) * nd.w * dth * sig * sig;
      double hv = std::exp(rp.ln_h) / sig, bv = std::exp(rp.ln_b) / sig;
      for (int sheet = 0; sheet < (at.reflect ? 2 : 1); ++sheet) {
        double sg = sheet == 0 ? 1.0 : -1.0;
        for (int j = 0; j < nth; ++j) {
          double th = (j + 0.5) * dth, ct = std::cos(th), st = std::sin(th);
          VarifoldAtom a;
          a.point = {at.center[0] + sig * rho * ct, at.center[1] + sig * rho * st, at.center[2] + sg * sig * rp.height, 0.0};
          a.frame[0] = {rp.cos_s * ct, rp.cos_s * st, sg * rp.sin_s, 0.0};
          a.frame[1] = {-st, ct, 0.0, 0.0};
          a.weight = w;
          a.density = at.density;
          a.mean_curv = hv;
          a.sff = bv;
          out.push_back(a);
        }
      }
    }
  }
  return out;
}

double mass(const DiscreteVarifold& V, const Region& R) {
  check_center(R.center, V.n, "mass");
  double atoms = atom_reduce(V, R, [](const VarifoldAtom& a) { return a.weight * a.density; });
  return atoms + background_mass(V, R);
}

double tilt_excess(const DiscreteVarifold& V, const Region& R, const Plane& T, double q, TiltNorm norm) {
  check_center(R.center, V.n, "tilt_excess");
  if (T.dim() != V.m || T.ambient() != V.n) throw std::invalid_argument("tilt_excess: plane dimension mismatch");
  Mat4 PT = pad(T.projection());
  int m = V.m;
  double atoms = atom_reduce(V, R, [&](const VarifoldAtom& a) {
    return a.weight * a.density * std::pow(tilt4(atom_proj4(a, m) - PT, norm), q);
  });
  double bg = 0.0;
  if (V.background) {
    double t0 = tilt4(pad(base_plane(V.n).projection()) - PT, norm);
    if (t0 > 0) bg = std::pow(t0, q) * background_mass(V, R);
  }
  return atoms + bg;
}

double height_excess(const DiscreteVarifold& V, const Region& R, const std::vector<double>& c, const Plane& T,
                     double q) {
  check_center(R.center, V.n, "height_excess");
  check_center(c, V.n, "height_excess");
  Mat4 PT = pad(T.projection());
  double atoms = atom_reduce(V, R, [&](const VarifoldAtom& a) {
    return a.weight * a.density * std::pow(dist_to_plane(a.point.data(), c, PT, V.n), q);
  });
  double bg = 0.0;
  if (V.background) {
    double bm = background_mass(V, R);
    if (bm > 0) {
      double hgt = background_height(V, c, PT);
      if (hgt > 0) bg = std::pow(hgt, q) * bm;
    }
  }
  return atoms + bg;
}

double height_sup(const DiscreteVarifold& V, const Region& R, const std::vector<double>& c, const Plane& T) {
  check_center(c, V.n, "height_sup");
  Mat4 PT = pad(T.projection());
  const auto& A = V.atoms;
  double best = reduce_max(A.size(), [&](std::size_t i) {
    if (!R.contains(A[i].point.data(), V.n)) return 0.0;
    return dist_to_plane(A[i].point.data(), c, PT, V.n);
  }, exec_policy());
  best = std::max(best, 0.0);
  if (V.background && background_mass(V, R) > 0) best = std::max(best, background_height(V, c, PT));
  return best;
}

double height_orlicz(const DiscreteVarifold& V, const Region& R, const std::vector<double>& c, const Plane& T,
                     const OrliczFunction& phi) {
  check_center(c, V.n, "height_orlicz");
  Mat4 PT = pad(T.projection());
  WeightedSamples S;
  for (const VarifoldAtom& a : V.atoms) {
    if (!R.contains(a.point.data(), V.n)) continue;
    double h = dist_to_plane(a.point.data(), c, PT, V.n);
    if (h > 0 && a.weight > 0) S.add(h, a.weight * a.density);
  }
  if (V.background) {
    double bm = background_mass(V, R);
    if (bm > 0) {
      double hgt = background_height(V, c, PT);
      if (hgt > 0) S.add(hgt, bm);
    }
  }
  if (S.values.empty()) return 0.0;
  return luxemburg_norm(S, phi);
}

double first_variation_mass(const DiscreteVarifold& V, const Region& R) {
  check_center(R.center, V.n, "first_variation_mass");
  return atom_reduce(V, R, [](const VarifoldAtom& a) { return a.weight * a.density * a.mean_curv; });
}

double level_set_mass(const DiscreteVarifold& V, const Region& R, const LevelSetPredicate& pred) {
  check_center(R.center, V.n, "level_set_mass");
  using K = LevelSetPredicate::Kind;
  switch (pred.kind) {
    case K::TiltAtLeast: {
      Plane T = pred.T ? *pred.T : base_plane(V.n);
      Mat4 PT = pad(T.projection());
      int m = V.m;
      double atoms = atom_reduce(V, R, [&](const VarifoldAtom& a) {
        return tilt4(atom_proj4(a, m) - PT, TiltNorm::Operator) >= pred.theta ? a.weight * a.density : 0.0;
      });
      double bg = 0.0;
      if (V.background && tilt4(pad(base_plane(V.n).projection()) - PT, TiltNorm::Operator) >= pred.theta)
        bg = background_mass(V, R);
      return atoms + bg;
    }
    case K::DensityEquals:
    case K::DensityAtMost: {
      auto ok = [&](int d) { return pred.kind == K::DensityEquals ? d == pred.d : d <= pred.d; };
      double atoms = atom_reduce(V, R, [&](const VarifoldAtom& a) { return ok(a.density) ? a.weight * a.density : 0.0; });
      double bg = (V.background && ok(V.background->multiplicity)) ? background_mass(V, R) : 0.0;
      return atoms + bg;
    }
  }
  return 0.0;
}

double hole_measure(const DiscreteVarifold& V, const Plane& T, const std::vector<double>& c, double r) {
  if (!V.holes) throw std::runtime_error("hole_measure: unsupported, varifold carries no hole metadata");
  check_center(c, V.n, "hole_measure");
  Eigen::VectorXd cv(V.n);
  for (int i = 0; i < V.n; ++i) cv[i] = c[i];
  Eigen::VectorXd u = T.frame().transpose() * cv;
  KahanSum s;
  for (const Disk& d : *V.holes) s.add(lens_area(r, d.r, std::hypot(u[0] - d.cx, u[1] - d.cy)));
  return s.sum;
}

double second_fund_integral(const DiscreteVarifold& V, const Region& R, double q) {
  check_center(R.center, V.n, "second_fund_integral");
  return atom_reduce(V, R, [&](const VarifoldAtom& a) { return a.weight * a.density * std::pow(a.sff, q); });
}

double coercive_rhs_scalar(int m, double r, double delta_mass_K, double orlicz, double height2) {
  double rm = std::pow(r, -m);
  double t1 = rm * std::pow(delta_mass_K, static_cast<double>(m) / (m - 1));
  double t2 = KappaFunction{m}(rm * delta_mass_K * orlicz);
  double t3 = rm / (r * r) * height2;
  return t1 + t2 + t3;
}

namespace {

// Largest s with the closed ball B(z, s) inside K.
double room_in(const Region& K, const double* z, int n) {
  double best = kInf;
  if (K.kind == RegionKind::Ball) {
    double d = 0;
    for (int i = 0; i < n; ++i) d += (z[i] - K.center[i]) * (z[i] - K.center[i]);
    return K.r - std::sqrt(d);
  }
  if (K.kind == RegionKind::Cube) {
    for (int i = 0; i < n; ++i) best = std::min(best, K.r - std::fabs(z[i] - K.center[i]));
    return best;
  }
  throw std::invalid_argument("coercive_sides: K must be a ball or a cube");
}

// {z : B(z, r) inside C}
Region shrink(const Region& C, double r) {
  if (C.kind == RegionKind::Ball || C.kind == RegionKind::Cube) {
    Region S = C;
    S.r = C.r - r;
    return S;
  }
  throw std::invalid_argument("coercive_sides: C must be a ball or a cube");
}

}  // namespace

CoerciveSides coercive_sides(const DiscreteVarifold& V, const Region& C, const Region& K, const std::vector<double>& c,
                             const Plane& T, double r, double gamma_iso) {
  int m = V.m;
  CoerciveSides out;
  out.gamma_iso = gamma_iso;
  double rm = std::pow(r, -m);
  Region Cin = shrink(C, r);
  if (Cin.r > 0) out.lhs = rm * tilt_excess(V, Cin, T, 2.0, TiltNorm::Operator);
  out.delta_mass_K = first_variation_mass(V, K);

  // Membership in H: density lower bound on a geometric grid of balls inside K.
  double lower = std::pow(40.0 * gamma_iso * m, -m);
  const auto& A = V.atoms;
  std::vector<char> inH(A.size(), 0);
  for_each_index(A.size(), [&](std::size_t i) {
    const double* z = A[i].point.data();
    if (!C.contains(z, V.n)) return;
    double smax = room_in(K, z, V.n);
    bool ok = true;
    for (int j = 0; j < 6 && ok; ++j) {
      double s = smax * std::ldexp(1.0, -j);
      if (!(s > 0)) break;
      std::vector<double> zc(z, z + V.n);
      Region B = Region::ball(zc, s);
      double mb = 0.0;
      for (const VarifoldAtom& b : A)
        if (B.contains(b.point.data(), V.n)) mb += b.weight * b.density;
      mb += background_mass(V, B);
      ok = mb >= lower * std::pow(s, m);
    }
    inH[i] = ok ? 1 : 0;
  });

  Mat4 PT = pad(T.projection());
  WeightedSamples S;
  KahanSum h2;
  for (std::size_t i = 0; i < A.size(); ++i) {
    if (!inH[i]) continue;
    double h = dist_to_plane(A[i].point.data(), c, PT, V.n);
    double w = A[i].weight * A[i].density;
    h2.add(w * h * h);
    if (h > 0 && w > 0) S.add(h, w);
  }
  if (V.background) {
    double bm = background_mass(V, C);
    if (bm > 0) {
      double hgt = background_height(V, c, PT);
      h2.add(bm * hgt * hgt);
      if (hgt > 0) S.add(hgt, bm);
    }
  }
  out.orlicz = S.values.empty() ? 0.0 : luxemburg_norm(S, OrliczFunction{m, rm});
  out.rhs[0] = rm * std::pow(out.delta_mass_K, static_cast<double>(m) / (m - 1));
  out.rhs[1] = KappaFunction{m}(rm * out.delta_mass_K * out.orlicz);
  out.rhs[2] = rm / (r * r) * h2.sum;
  return out;
}

namespace {

double cube_query(const DiscreteVarifold& V, const Region& cube, const ProductQuery& q) {
  switch (q.kind) {
    case ProductQuantity::Mass: return mass(V, cube);
    case ProductQuantity::Tilt: return tilt_excess(V, cube, base_plane(V.n), q.q, q.norm);
    case ProductQuantity::LevelSetTilt: {
      LevelSetPredicate p;
      p.kind = LevelSetPredicate::Kind::TiltAtLeast;
      p.theta = q.theta;
      return level_set_mass(V, cube, p);
    }
  }
  return 0.0;
}

}  // namespace

double product_cube_measurement(const DiscreteVarifold& V2, int k, const Region& cube, const ProductQuery& q) {
  if (V2.n != 3 || V2.m != 2) throw std::invalid_argument("product: factor must be a 2-varifold in R^3");
  if (k < 1) throw std::invalid_argument("product: k >= 1");
  if (cube.kind != RegionKind::Cube) throw std::invalid_argument("product: unsupported region, cubes only");
  if (static_cast<int>(cube.center.size()) != 3 + k) throw std::invalid_argument("product: cube dimension mismatch");
  Region cross = Region::cube({cube.center[0], cube.center[1], cube.center[2]}, cube.r);
  return cube_query(V2, cross, q) * std::pow(2.0 * cube.r, k);
}

double lifted_cube_measurement(const DiscreteVarifold& V4, const Region& cube, const ProductQuery& q) {
  if (V4.n != 4 || V4.m != 3) throw std::invalid_argument("lifted: expects a 3-varifold in R^4");
  if (cube.kind != RegionKind::Cube) throw std::invalid_argument("lifted: cubes only");
  return cube_query(V4, cube, q);
}

DiscreteVarifold lift_product(const DiscreteVarifold& V2, double lo, double hi, int nodes) {
  if (V2.n != 3 || V2.m != 2) throw std::invalid_argument("lift_product: factor must be a 2-varifold in R^3");
  if (!(hi > lo)) throw std::invalid_argument("lift_product: empty interval");
  DiscreteVarifold W;
  W.n = 4;
  W.m = 3;
  if (V2.background) {
    W.background = V2.background;
    W.background->lift_lo = lo;
    W.background->lift_hi = hi;
  }
  W.holes = V2.holes;
  W.provenance = {{"lift_of", V2.provenance}, {"interval", {lo, hi}}, {"nodes", nodes}};
  auto nds = composite_nodes(lo, hi, 1, nodes);
  W.atoms.reserve(nds.size() * V2.atoms.size());
  for (const QuadNode& nd : nds) {
    for (const VarifoldAtom& a : V2.atoms) {
      VarifoldAtom b = a;
      b.point[3] = nd.x;
      b.frame[0][3] = 0.0;
      b.frame[1][3] = 0.0;
      b.frame[2] = {0.0, 0.0, 0.0, 1.0};
      b.weight = a.weight * nd.w;
      W.atoms.push_back(b);
    }
  }
  return W;
}

DiscreteVarifold make_neck_varifold(double s, double r, int resolution) {
  DiscreteVarifold V;
  V.background = AnalyticBackground{1, {Disk{0, 0, r}}};
  V.atoms = discretize_profile(neck_profile(s, r), Placement{}, 3, resolution);
  V.holes = std::vector<Disk>{};
  V.provenance = {{"kind", "neck"}, {"s", s}, {"r", r}, {"resolution", resolution}};
  return V;
}

DiscreteVarifold make_bent_varifold(double r, int resolution) {
  DiscreteVarifold V;
  V.background = AnalyticBackground{2, {Disk{0, 0, r}}};
  Placement pl;
  pl.reflect = true;
  V.atoms = discretize_profile(bent_profile(r), pl, 3, resolution);
  V.holes = std::vector<Disk>{Disk{0, 0, 1.0}};
  V.provenance = {{"kind", "bent"}, {"r", r}, {"resolution", resolution}};
  return V;
}

DiscreteVarifold make_catenoid_varifold(double r, int resolution) {
  DiscreteVarifold V;
  Placement pl;
  pl.reflect = true;
  V.atoms = discretize_profile(catenoid_profile(r), pl, 3, resolution);
  V.provenance = {{"kind", "catenoid"}, {"r", r}, {"resolution", resolution}};
  return V;
}

}  // namespace vl
