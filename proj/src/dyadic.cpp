#include "varifold_lab/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "varifold_lab/quadrature.hpp"

namespace vl {

namespace {

mpz_class pow2z(int64_t e) {
  mpz_class z = 1;
  mpz_mul_2exp(z.get_mpz_t(), z.get_mpz_t(), static_cast<mp_bitcnt_t>(e));
  return z;
}

double ln_mpz(const mpz_class& z) {
  if (z == 0) return kNegInf;
  long e = 0;
  double d = mpz_get_d_2exp(&e, z.get_mpz_t());
  return std::log(std::fabs(d)) + static_cast<double>(e) * kLn2;
}

double ln_mpq(const mpq_class& q) { return ln_mpz(q.get_num()) - ln_mpz(q.get_den()); }

}  // namespace

XReal to_xreal(const mpz_class& z, int64_t level) {
  if (z == 0) return XReal();
  long e = 0;
  double d = mpz_get_d_2exp(&e, z.get_mpz_t());
  return XReal(d) * XReal::pow2(static_cast<int64_t>(e) - level);
}

double DyadicPoint::coord(int j) const { return to_xreal(num[j], level).to_double(); }

mpz_class DyadicPoint::cell_index(int j, int64_t L) const {
  mpz_class r;
  if (L <= level)
    mpz_fdiv_q_2exp(r.get_mpz_t(), num[j].get_mpz_t(), static_cast<mp_bitcnt_t>(level - L));
  else
    mpz_mul_2exp(r.get_mpz_t(), num[j].get_mpz_t(), static_cast<mp_bitcnt_t>(L - level));
  return r;
}

DyadicPoint DyadicPoint::at_level(int64_t L) const {
  if (L < level) throw std::invalid_argument("DyadicPoint::at_level: cannot coarsen exactly");
  DyadicPoint p;
  p.level = L;
  for (const auto& z : num) {
    mpz_class r;
    mpz_mul_2exp(r.get_mpz_t(), z.get_mpz_t(), static_cast<mp_bitcnt_t>(L - level));
    p.num.push_back(r);
  }
  return p;
}

DyadicPoint DyadicPoint::from_doubles(const std::vector<double>& x, int64_t level) {
  DyadicPoint p;
  p.level = level;
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("DyadicPoint: coordinate outside [0,1]");
    mpf_class f(v, 64);
    mpf_mul_2exp(f.get_mpf_t(), f.get_mpf_t(), static_cast<mp_bitcnt_t>(level));
    mpz_class z(f);
    p.num.push_back(z);
  }
  return p;
}

bool DyadicCube::contains(const DyadicPoint& x) const {
  int64_t P = std::max(level, x.level);
  for (int j = 0; j < dim(); ++j) {
    mpz_class lo = corner[j], v = x.num[j];
    mpz_mul_2exp(lo.get_mpz_t(), lo.get_mpz_t(), static_cast<mp_bitcnt_t>(P - level));
    mpz_mul_2exp(v.get_mpz_t(), v.get_mpz_t(), static_cast<mp_bitcnt_t>(P - x.level));
    if (v <= lo) return false;
    mpz_class hi = lo + pow2z(P - level);
    if (v >= hi) return false;
  }
  return true;
}

bool DyadicCube::contains(const DyadicCube& q) const {
  if (q.level < level) return false;
  for (int j = 0; j < dim(); ++j) {
    mpz_class a;
    mpz_fdiv_q_2exp(a.get_mpz_t(), q.corner[j].get_mpz_t(), static_cast<mp_bitcnt_t>(q.level - level));
    if (a != corner[j]) return false;
  }
  return true;
}

bool DyadicCube::intersects(const DyadicCube& q) const { return contains(q) || q.contains(*this); }

DyadicPoint DyadicCube::center() const {
  DyadicPoint p;
  p.level = level + 1;
  for (const auto& c : corner) p.num.push_back(2 * c + 1);
  return p;
}

std::string variant_name(FamilyVariant v) { return v == FamilyVariant::Dini ? "dini" : "sparse"; }

// ---- family ----

double CubeFamily::ln_phi(int64_t level) const {
  double L = static_cast<double>(level) * kLn2;
  if (L < -ln_s) return 0.0;
  double lp = 2.0 * m * kLn2 + 0.5 * m * std::log(static_cast<double>(m)) +
              omega.ln_at(L - std::log(2.0 * std::sqrt(static_cast<double>(m))));
  return std::min(0.0, lp);
}

mpq_class CubeFamily::measure() const {
  mpq_class s = 0;
  for (const auto& g : gens) {
    mpq_class term(g.count, pow2z(static_cast<int64_t>(m) * g.beta));
    term.canonicalize();
    s += term;
  }
  return s;
}

bool CubeFamily::budget_ok() const {
  mpq_class tail;
  if (variant == FamilyVariant::Sparse) {
    tail = mpq_class(1) - mpq_class(lambda);
    tail /= mpq_class(pow2z(depth - 1));
  } else {
    tail = mpq_class(tail_bound * (1.0 + 1e-12));
  }
  return measure() + tail <= mpq_class(1) - mpq_class(lambda);
}

double CubeFamily::ln_floor() const {
  double half_ln_m = 0.5 * std::log(static_cast<double>(m));
  if (variant == FamilyVariant::Dini) return half_ln_m - depth * kLn2;
  return half_ln_m + static_cast<double>(1 - alpha.back()) * kLn2;
}

const Generation& CubeFamily::gen(int index) const {
  for (const auto& g : gens)
    if (g.index == index) return g;
  throw std::out_of_range("no generation with that index");
}

int CubeFamily::locate(const DyadicPoint& x0) const {
  const DyadicPoint* x = &x0;
  DyadicPoint fine;
  if (!gens.empty() && x0.level < gens.back().beta) {
    fine = x0.at_level(gens.back().beta);
    x = &fine;
  }
  int64_t P = x->level;
  for (std::size_t p = 0; p < gens.size(); ++p) {
    const auto& g = gens[p];
    bool in = true;
    for (int j = 0; j < x->dim() && in; ++j) {
      mpz_srcptr z = x->num[j].get_mpz_t();
      mp_bitcnt_t first = mpz_scan1(z, static_cast<mp_bitcnt_t>(P - g.beta));
      if (first < static_cast<mp_bitcnt_t>(P - g.source_level)) in = false;
      if (in && mpz_scan1(z, 0) >= static_cast<mp_bitcnt_t>(P - g.beta)) in = false;
    }
    if (in) return static_cast<int>(p);
  }
  return -1;
}

DyadicCube CubeFamily::cube_of(int gen_pos, const DyadicPoint& x) const {
  const auto& g = gens.at(gen_pos);
  DyadicCube q;
  q.level = g.beta;
  for (int j = 0; j < x.dim(); ++j) {
    mpz_class c = x.cell_index(j, g.source_level);
    mpz_mul_2exp(c.get_mpz_t(), c.get_mpz_t(), static_cast<mp_bitcnt_t>(g.beta - g.source_level));
    q.corner.push_back(c);
  }
  return q;
}

int CubeFamily::covering_generation(const DyadicCube& cell) const {
  int p = locate(cell.center());
  if (p >= 0 && gens[p].beta <= cell.level) return p;
  return -1;
}

std::vector<mpz_class> CubeFamily::counts_in_cell(const DyadicCube& cell) const {
  std::vector<mpz_class> cnt(gens.size(), mpz_class(0));
  if (covering_generation(cell) >= 0) return cnt;
  const int64_t L = cell.level;
  for (std::size_t j = 0; j < gens.size(); ++j) {
    const auto& gj = gens[j];
    mpz_class P = 0;
    if (gj.beta < L) {
      P = 0;
    } else if (gj.source_level >= L) {
      P = pow2z(static_cast<int64_t>(m) * (gj.source_level - L));
    } else {
      bool aligned = true;
      for (const auto& c : cell.corner)
        if (mpz_scan1(c.get_mpz_t(), 0) < static_cast<mp_bitcnt_t>(L - gj.source_level)) aligned = false;
      P = aligned ? 1 : 0;
    }
    for (std::size_t i = 0; i < j && P > 0; ++i) {
      if (cnt[i] == 0) continue;
      const auto& gi = gens[i];
      if (gi.beta <= gj.source_level)
        P -= cnt[i] * pow2z(static_cast<int64_t>(m) * (gj.source_level - gi.beta));
      else
        P -= cnt[i];
    }
    if (P < 0) throw std::logic_error("counts_in_cell: negative count");
    cnt[j] = P;
  }
  return cnt;
}

bool CubeFamily::is_residual(const DyadicPoint& x) const {
  if (locate(x) >= 0) return false;
  int64_t Lf = finest_level();
  const DyadicPoint& y = x.level >= Lf + 8 ? x : x.at_level(Lf + 8);
  for (int j = 0; j < y.dim(); ++j) {
    mpz_class top;
    mpz_fdiv_q_2exp(top.get_mpz_t(), y.num[j].get_mpz_t(), static_cast<mp_bitcnt_t>(y.level - Lf - 8));
    unsigned long b = mpz_fdiv_ui(top.get_mpz_t(), 256);
    if (b == 0 || b == 255) return false;
  }
  return true;
}

namespace {

// integral over L in [L0, inf) of phi(e^-L)
double phi_tail_integral(const CubeFamily& f, double L0) {
  const auto& gl = gauss_legendre(24);
  double Ls = -f.ln_s;
  double cst = 2.0 * f.m * kLn2 + 0.5 * f.m * std::log(static_cast<double>(f.m));
  double shift = std::log(2.0 * std::sqrt(static_cast<double>(f.m)));
  KahanSum tot;
  double a = L0;
  if (a < Ls) {
    tot.add(Ls - a);
    a = Ls;
  }
  auto piece = [&](double x0, double x1) {
    double h = 0.5 * (x1 - x0), c = 0.5 * (x0 + x1);
    KahanSum s;
    for (std::size_t i = 0; i < gl.x.size(); ++i) s.add(gl.w[i] * std::exp(std::min(0.0, cst + f.omega.ln_at(c + h * gl.x[i] - shift))));
    return s.sum * h;
  };
  for (int i = 0; i < 256; ++i, a += kLn2) tot.add(piece(a, a + kLn2));
  for (double L = a; L < 1e300; L *= 2.0) tot.add(piece(L, 2.0 * L));
  return tot.sum;
}

void fill_counts(CubeFamily& f) {
  DyadicCube root;
  root.level = 0;
  root.corner.assign(f.m, mpz_class(0));
  // root is never covered by a generated cube
  const int64_t L = 0;
  std::vector<mpz_class> cnt(f.gens.size());
  for (std::size_t j = 0; j < f.gens.size(); ++j) {
    auto& gj = f.gens[j];
    mpz_class P = pow2z(static_cast<int64_t>(f.m) * (gj.source_level - L));
    for (std::size_t i = 0; i < j; ++i) {
      const auto& gi = f.gens[i];
      if (gi.beta <= gj.source_level)
        P -= cnt[i] * pow2z(static_cast<int64_t>(f.m) * (gj.source_level - gi.beta));
      else
        P -= cnt[i];
    }
    cnt[j] = P;
    gj.count = P;
  }
}

double solve_ln_s(int m, const Modulus& omega) {
  double target = -2.0 * m * kLn2 - 0.5 * m * std::log(static_cast<double>(m)) - 1e-12;
  auto ok = [&](double L) { return omega.ln_at(L) <= target; };
  double lo = 0.0, hi = 1.0;
  if (ok(lo)) {
    hi = lo;
  } else {
    while (!ok(hi)) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e15) throw std::invalid_argument("modulus does not decay to zero");
    }
    while (hi - lo > 1e-13 * hi) {
      double mid = 0.5 * (lo + hi);
      if (ok(mid))
        hi = mid;
      else
        lo = mid;
    }
  }
  return -hi - std::log(2.0 * std::sqrt(static_cast<double>(m)));
}

int64_t floor_log2_phi_over_m(const CubeFamily& f, int64_t level) {
  return static_cast<int64_t>(std::floor(f.ln_phi(level) / (f.m * kLn2) + 1e-9));
}

}  // namespace

CubeFamily build_dini_family(int m, const Modulus& omega, double lambda, int depth) {
  if (m < 1) throw std::invalid_argument("build_dini_family: m >= 1");
  if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("build_dini_family: lambda in [0,1)");
  if (dini_integral(omega).divergent) throw std::invalid_argument("build_dini_family: omega fails the Dini condition");
  CubeFamily f;
  f.m = m;
  f.omega = omega;
  f.lambda = lambda;
  f.variant = FamilyVariant::Dini;
  f.depth = depth;
  f.ln_s = solve_ln_s(m, omega);
  int k = 0;
  for (int c = 1; c <= 40; ++c) {
    if (-c * kLn2 > f.ln_s) continue;
    double I = phi_tail_integral(f, (c - 1) * kLn2) / kLn2;
    if (I <= 1.0 - lambda) {
      k = c;
      break;
    }
  }
  if (k == 0) throw std::invalid_argument("build_dini_family: starting index k exceeds cap 40");
  if (depth < k) throw std::invalid_argument("build_dini_family: depth below starting index k = " + std::to_string(k));
  f.k = k;
  for (int i = k; i <= depth; ++i) {
    Generation g;
    g.index = i;
    g.source_level = i;
    g.beta = i - floor_log2_phi_over_m(f, i);
    f.gens.push_back(g);
  }
  fill_counts(f);
  f.ln_epsilon = 0.5 * std::log(static_cast<double>(m)) + (1 - k) * kLn2;
  f.tail_bound = phi_tail_integral(f, depth * kLn2) / kLn2;
  return f;
}

CubeFamily build_sparse_family(int m, const Modulus& omega, double lambda, int depth) {
  if (m < 1) throw std::invalid_argument("build_sparse_family: m >= 1");
  if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("build_sparse_family: lambda in [0,1)");
  if (depth < 2) throw std::invalid_argument("build_sparse_family: depth >= 2");
  CubeFamily f;
  f.m = m;
  f.omega = omega;
  f.lambda = lambda;
  f.variant = FamilyVariant::Sparse;
  f.depth = depth;
  f.ln_s = solve_ln_s(m, omega);
  const double ln_budget = std::log1p(-lambda);
  for (int i = 1; i <= depth; ++i) {
    double bound = ln_budget - i * kLn2 - 1e-12;
    auto ok = [&](int64_t a) { return f.ln_phi(a) <= bound; };
    int64_t lo = i == 1 ? 0 : f.beta.back() + 1;
    int64_t a = lo;
    if (!ok(lo)) {
      int64_t step = 1, hi = lo + 1;
      while (!ok(hi)) {
        lo = hi;
        step *= 2;
        hi = lo + step;
        if (hi > (int64_t(1) << 40)) throw std::invalid_argument("build_sparse_family: levels exceed 2^40");
      }
      while (hi - lo > 1) {
        int64_t mid = lo + (hi - lo) / 2;
        if (ok(mid))
          hi = mid;
        else
          lo = mid;
      }
      a = hi;
    }
    int64_t b = i == 1 ? a : a - floor_log2_phi_over_m(f, f.alpha.back());
    f.alpha.push_back(a);
    f.beta.push_back(b);
    if (i > 1) {
      Generation g;
      g.index = i;
      g.source_level = a;
      g.beta = b;
      f.gens.push_back(g);
    }
  }
  fill_counts(f);
  const double half_ln_m = 0.5 * std::log(static_cast<double>(m));
  for (int i = 2; i <= depth; ++i) f.ln_B.push_back(half_ln_m + static_cast<double>(1 - f.alpha[i - 1]) * kLn2);
  f.ln_epsilon = std::min(half_ln_m - static_cast<double>(f.alpha[0]) * kLn2, kLn2 + half_ln_m + f.ln_s);
  f.tail_bound = (1.0 - lambda) * std::ldexp(1.0, 1 - depth);
  return f;
}

CubeFamily family_from_json(const nlohmann::json& j) {
  Modulus w = Modulus::parse(j.at("omega").get<std::string>());
  int m = j.at("m");
  double lambda = j.at("lambda");
  int depth = j.at("depth");
  if (j.at("variant") == "dini") return build_dini_family(m, w, lambda, depth);
  return build_sparse_family(m, w, lambda, depth);
}

nlohmann::json CubeFamily::to_json(std::size_t cube_list_cap) const {
  nlohmann::json j;
  j["m"] = m;
  j["variant"] = variant_name(variant);
  j["lambda"] = lambda;
  j["omega"] = omega.descriptor();
  j["depth"] = depth;
  j["ln_s"] = ln_s;
  if (variant == FamilyVariant::Dini) j["k"] = k;
  nlohmann::json gj = nlohmann::json::array(), beta_list = nlohmann::json::array(), alpha_list = nlohmann::json::array();
  mpz_class total = 0;
  for (const auto& g : gens) {
    nlohmann::json e;
    e["index"] = g.index;
    e["source_level"] = g.source_level;
    e["beta"] = g.beta;
    if (mpz_sizeinbase(g.count.get_mpz_t(), 2) < 1024)
      e["count"] = g.count.get_str();
    else
      e["log2_count"] = ln_mpz(g.count) / kLn2;
    gj.push_back(e);
    total += g.count;
  }
  j["generations"] = gj;
  if (variant == FamilyVariant::Sparse) {
    for (auto a : alpha) alpha_list.push_back(a);
    for (auto b : beta) beta_list.push_back(b);
  } else {
    for (const auto& g : gens) beta_list.push_back(g.beta);
  }
  j["alpha"] = alpha_list;
  j["beta"] = beta_list;
  nlohmann::json B = nlohmann::json::array(), lnB = nlohmann::json::array();
  for (double l : ln_B) {
    B.push_back(std::exp(l));
    lnB.push_back(l);
  }
  j["B"] = B;
  j["ln_B"] = lnB;
  j["epsilon"] = std::exp(ln_epsilon);
  j["ln_epsilon"] = ln_epsilon;
  j["tail_bound"] = tail_bound;
  j["measure"] = measure().get_d();
  if (total <= cube_list_cap) {
    nlohmann::json cubes = nlohmann::json::array();
    for (const auto& [gi, q] : enumerate_cubes(*this, 1u << 22)) {
      nlohmann::json c = nlohmann::json::array();
      c.push_back(q.level);
      for (const auto& z : q.corner) c.push_back(z.get_str());
      cubes.push_back(c);
    }
    j["cubes"] = cubes;
  } else {
    j["cubes"] = nlohmann::json::array();
    j["cubes_truncated"] = true;
  }
  return j;
}

std::vector<std::pair<int, DyadicCube>> enumerate_cubes(const CubeFamily& f, std::size_t limit) {
  double cells = 0.0;
  for (const auto& g : f.gens) cells += std::ldexp(1.0, static_cast<int>(std::min<int64_t>(f.m * g.source_level, 1000)));
  if (cells > static_cast<double>(limit)) throw std::length_error("enumerate_cubes: family too large to enumerate");
  std::vector<std::pair<int, DyadicCube>> out;
  for (std::size_t p = 0; p < f.gens.size(); ++p) {
    const auto& g = f.gens[p];
    uint64_t side = uint64_t(1) << g.source_level;
    std::vector<uint64_t> idx(f.m, 0);
    while (true) {
      DyadicCube q;
      q.level = g.beta;
      for (int j = 0; j < f.m; ++j) {
        mpz_class c(static_cast<unsigned long>(idx[j]));
        mpz_mul_2exp(c.get_mpz_t(), c.get_mpz_t(), static_cast<mp_bitcnt_t>(g.beta - g.source_level));
        q.corner.push_back(c);
      }
      if (f.locate(q.center()) == static_cast<int>(p)) out.emplace_back(g.index, q);
      int j = 0;
      while (j < f.m && ++idx[j] == side) idx[j++] = 0;
      if (j == f.m) break;
    }
  }
  return out;
}

namespace {

bool cube_in_ball(const DyadicCube& q, const DyadicPoint& a, double ln_r) {
  int64_t P = std::max(q.level, a.level);
  XReal d2;
  for (int j = 0; j < a.dim(); ++j) {
    mpz_class lo = q.corner[j], v = a.num[j];
    mpz_mul_2exp(lo.get_mpz_t(), lo.get_mpz_t(), static_cast<mp_bitcnt_t>(P - q.level));
    mpz_mul_2exp(v.get_mpz_t(), v.get_mpz_t(), static_cast<mp_bitcnt_t>(P - a.level));
    mpz_class hi = lo + pow2z(P - q.level);
    mpz_class d1 = abs(v - lo), d2z = abs(hi - v);
    XReal far = to_xreal(d1 > d2z ? d1 : d2z, P);
    d2 += far * far;
  }
  return d2 < XReal::from_log(2.0 * ln_r);
}

}  // namespace

CoveringResult covering_cubes(const CubeFamily& f, const DyadicPoint& a, double ln_r) {
  if (ln_r > f.ln_epsilon + 1e-12) throw std::invalid_argument("covering_cubes: r exceeds epsilon");
  if (ln_r < f.ln_floor() - 1e-12) throw TruncationError("covering_cubes: r below the truncation floor");
  if (f.locate(a) >= 0) throw NotResidualError("covering_cubes: point lies in a generated cube");
  const double half_ln_m = 0.5 * std::log(static_cast<double>(f.m));
  const double x = (half_ln_m - ln_r) / kLn2;  // log2(sqrt(m)/r)
  CoveringResult res;
  DyadicCube S;
  if (f.variant == FamilyVariant::Dini) {
    int i = std::max<int>(f.k, static_cast<int>(std::ceil(x - 1e-9)));
    if (i > f.depth) throw TruncationError("covering_cubes: generation beyond depth");
    const auto& g = f.gen(i);
    S.level = i;
    DyadicCube cand;
    cand.level = g.beta;
    for (int j = 0; j < f.m; ++j) {
      mpz_class c = a.cell_index(j, i);
      S.corner.push_back(c);
      mpz_mul_2exp(c.get_mpz_t(), c.get_mpz_t(), static_cast<mp_bitcnt_t>(g.beta - i));
      cand.corner.push_back(c);
    }
    int p = f.locate(cand.center());
    if (p < 0 || f.gens[p].index > i) throw std::logic_error("covering_cubes: candidate not covered");
    DyadicCube Q = f.gens[p].index == i ? cand : f.cube_of(p, cand.center());
    res.cubes.emplace_back(f.gens[p].index, Q);
    res.card = 1;
    res.measure = mpq_class(mpz_class(1), pow2z(static_cast<int64_t>(f.m) * Q.level));
    res.inside_ball = cube_in_ball(S, a, ln_r) && S.contains(Q);
  } else {
    int64_t kk = static_cast<int64_t>(std::floor(x + 1e-9)) + 1;
    int gi = -1;
    for (int i = 2; i <= f.depth; ++i)
      if (f.alpha[i - 2] < kk && kk <= f.alpha[i - 1]) gi = i;
    if (gi < 0) throw TruncationError("covering_cubes: no generation at this scale");
    const auto& g = f.gen(gi);
    S.level = kk;
    for (int j = 0; j < f.m; ++j) S.corner.push_back(a.cell_index(j, kk));
    res.block = true;
    res.block_generation = gi;
    res.block_cell = S;
    res.card = pow2z(static_cast<int64_t>(f.m) * (g.source_level - kk));
    res.measure = mpq_class(res.card, pow2z(static_cast<int64_t>(f.m) * g.beta));
    if (res.card == 1) {
      DyadicCube Q;
      Q.level = g.beta;
      for (int j = 0; j < f.m; ++j) {
        mpz_class c = S.corner[j];
        mpz_mul_2exp(c.get_mpz_t(), c.get_mpz_t(), static_cast<mp_bitcnt_t>(g.beta - kk));
        Q.corner.push_back(c);
      }
      res.cubes.emplace_back(gi, Q);
    }
    // every candidate of generation gi inside S is generated
    std::size_t pos = 0;
    while (f.gens[pos].index != gi) ++pos;
    if (f.counts_in_cell(S)[pos] != res.card) throw std::logic_error("covering_cubes: block count mismatch");
    res.inside_ball = cube_in_ball(S, a, ln_r);
  }
  res.measure.canonicalize();
  res.ln_measure = ln_mpq(res.measure);
  res.ln_bound = f.omega.ln_at(-ln_r) + f.m * ln_r;
  return res;
}

std::vector<DyadicPoint> sample_residual_points(const CubeFamily& f, std::size_t count, uint64_t seed,
                                                double* acceptance_rate) {
  std::vector<DyadicPoint> out;
  if (acceptance_rate) *acceptance_rate = 1.0;
  if (count == 0) return out;
  std::mt19937_64 rng(seed);
  const int64_t P = f.finest_level() + 64;
  const std::size_t words = static_cast<std::size_t>((P + 63) / 64);
  std::vector<uint64_t> buf(words);
  std::size_t attempts = 0;
  while (out.size() < count) {
    ++attempts;
    DyadicPoint x;
    x.level = P;
    for (int j = 0; j < f.m; ++j) {
      for (auto& w : buf) w = rng();
      mpz_class z;
      mpz_import(z.get_mpz_t(), words, -1, sizeof(uint64_t), 0, 0, buf.data());
      mpz_fdiv_r_2exp(z.get_mpz_t(), z.get_mpz_t(), static_cast<mp_bitcnt_t>(P));
      x.num.push_back(z);
    }
    if (f.is_residual(x)) out.push_back(std::move(x));
    if (attempts >= 1000 && out.size() * 100 < attempts)
      throw std::runtime_error("sample_residual_points: rejection rate above 99%");
  }
  if (acceptance_rate) *acceptance_rate = static_cast<double>(out.size()) / attempts;
  return out;
}

}  // namespace vl
