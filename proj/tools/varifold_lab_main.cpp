#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <string>

#include "varifold_lab/analysis.hpp"
#include "varifold_lab/io.hpp"

using namespace vl;

namespace {

struct RegionArg {
  RegionKind kind = RegionKind::Ball;
  double ln_r = 0.0;
};

// ball:0.01, ball:log2=-40, ball:B3 (also cylinder: and cube:)
RegionArg parse_region_arg(const std::string& s, const Scenario& sc) {
  auto colon = s.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("region must look like ball:r");
  RegionArg a;
  a.kind = parse_region(s.substr(0, colon));
  std::string v = s.substr(colon + 1);
  if (v.rfind("log2=", 0) == 0) {
    a.ln_r = std::stod(v.substr(5)) * kLn2;
  } else if (!v.empty() && v[0] == 'B') {
    std::size_t i = std::stoul(v.substr(1));
    if (i >= sc.ln_B.size()) throw std::invalid_argument("scenario has only " + std::to_string(sc.ln_B.size()) + " B radii");
    a.ln_r = sc.ln_B[i];
  } else {
    double r = std::stod(v);
    if (!(r > 0)) throw std::invalid_argument("radius must be positive");
    a.ln_r = std::log(r);
  }
  return a;
}

// K -> C[K]; CK -> C[K]; ZK -> K-th off-C point; axis -> control
ScanPoint parse_point(const std::string& s, const Scenario& sc) {
  if (sc.is_control()) return {"axis", {}};
  if (s.empty()) throw std::invalid_argument("point id required");
  if (s[0] == 'Z') {
    std::size_t k = std::stoul(s.substr(1));
    auto z = sc.off_c_points(k + 1);
    if (z.size() <= k) throw std::invalid_argument("not enough off-C points");
    return {s, z[k]};
  }
  std::size_t k = std::stoul(s[0] == 'C' ? s.substr(1) : s);
  if (k >= sc.C.size()) throw std::invalid_argument("scenario has only " + std::to_string(sc.C.size()) + " C points");
  return {"C" + std::to_string(k), sc.C[k]};
}

std::vector<Quantity> parse_quantities(const std::string& list) {
  std::vector<Quantity> qs;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    std::size_t c = list.find(',', pos);
    std::string item = list.substr(pos, c == std::string::npos ? std::string::npos : c - pos);
    if (!item.empty()) qs.push_back(Quantity::parse(item));
    if (c == std::string::npos) break;
    pos = c + 1;
  }
  if (qs.empty()) throw std::invalid_argument("no quantities given");
  return qs;
}

std::vector<double> parse_radii(const std::string& s, const Scenario& sc) {
  if (s == "from-B") return sc.is_control() ? control_radii() : sc.ln_B;
  if (s.rfind("dyadic:", 0) == 0) {
    int K = std::stoi(s.substr(7));
    double top = std::floor(sc.ln_epsilon / kLn2);
    std::vector<double> out;
    for (int k = 0; k < K; ++k) out.push_back((top - k) * kLn2);
    return out;
  }
  throw std::invalid_argument("radii must be dyadic:K or from-B");
}

Scenario load(const std::string& path) { return Scenario::from_json(read_json_file(path)); }

void emit(const ScanTable& t, const std::string& out, const std::string& gp) {
  if (out.empty() || out == "-")
    write_csv(std::cout, t);
  else
    write_csv_file(out, t);
  if (!gp.empty()) {
    std::ofstream f(gp);
    f << gnuplot_script(out.empty() ? "-" : out, t);
  }
  for (const auto& r : t.rows)
    if (!r.valid) std::cerr << "warning: " << r.point_id << " r=" << XReal::from_log(r.ln_r).str() << " " << r.quantity << ": " << r.note << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"varifold-lab: multi-scale varifold constructions and excess measurements"};
  app.require_subcommand(1);

  ScenarioParams bp;
  std::string kind = "theorem-b", out;
  auto* build = app.add_subcommand("build", "build a scenario descriptor");
  build->add_option("--scenario", kind)->check(CLI::IsMember({"theorem-b", "theorem-c-dini", "theorem-c-sparse", "sphere", "graph"}));
  build->add_option("--omega", bp.omega, "power:p | loginv:k | logloglog | table:path");
  build->add_option("--lambda", bp.lambda);
  build->add_option("--epsilon", bp.epsilon_lip, "Lipschitz bound of the neck/bent layer");
  build->add_option("--depth", bp.depth);
  build->add_option("--m", bp.m, "dimension (theorem-c only, product with R^(m-2))");
  build->add_option("--resolution", bp.resolution);
  build->add_option("--seed", bp.seed);
  build->add_option("--samples", bp.samples, "residual points to sample");
  build->add_option("--param", bp.control_param, "sphere radius or paraboloid coefficient");
  build->add_option("--extent", bp.control_extent, "paraboloid cap radius");
  build->add_option("--out", out)->required();

  std::string sfile, point = "0", region, quantity, qlist = "mass,tilt2", radii = "from-B", gp, report, csv;
  std::size_t npoints = 0;  // 0: per-command default
  auto* measure = app.add_subcommand("measure", "measure quantities at one point and radius");
  measure->add_option("--scenario", sfile)->required();
  measure->add_option("--point-id", point);
  measure->add_option("--region", region)->required();
  measure->add_option("--quantity", quantity)->required();
  measure->add_option("--out", out);

  std::string scan_region = "ball";
  auto* scan = app.add_subcommand("scan", "radius scan over C points");
  scan->add_option("--scenario", sfile)->required();
  scan->add_option("--radii", radii, "dyadic:K | from-B");
  scan->add_option("--quantities", qlist);
  scan->add_option("--points", npoints);
  scan->add_option("--region", scan_region)->check(CLI::IsMember({"ball", "cylinder", "cube"}));
  scan->add_option("--out", out);
  scan->add_option("--gnuplot", gp, "also write a gnuplot script");

  std::string theorem;
  auto* verify = app.add_subcommand("verify", "run a theorem verification suite");
  verify->add_option("--theorem", theorem)->required()->check(CLI::IsMember({"a", "b", "c"}));
  verify->add_option("--scenario", sfile)->required();
  verify->add_option("--report", report)->required();
  verify->add_option("--points", npoints);
  verify->add_option("--csv", csv, "write the underlying scan table");
  verify->add_option("--gnuplot", gp);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build) {
      bp.kind = parse_scenario_kind(kind);
      Scenario s = build_scenario(bp);
      write_json_file(out, s.to_json());
      std::cerr << s.id << ": written to " << out << "\n";
      return 0;
    }
    if (*measure) {
      Scenario s = load(sfile);
      RegionArg ra = parse_region_arg(region, s);
      ScanTable t = radius_scan(s, {parse_point(point, s)}, {ra.ln_r}, parse_quantities(quantity), ra.kind);
      emit(t, out, "");
      return 0;
    }
    if (*scan) {
      Scenario s = load(sfile);
      std::vector<ScanPoint> pts;
      if (s.is_control())
        pts.push_back({"axis", {}});
      else
        for (std::size_t i = 0; i < std::min(npoints ? npoints : 4, s.C.size()); ++i) pts.push_back({"C" + std::to_string(i), s.C[i]});
      ScanTable t = radius_scan(s, pts, parse_radii(radii, s), parse_quantities(qlist), parse_region(scan_region));
      emit(t, out, gp);
      return 0;
    }
    if (*verify) {
      Scenario s = load(sfile);
      TheoremReport r = theorem == "a" ? verify_theorem_a(s, npoints ? npoints : 8)
                        : theorem == "b" ? verify_theorem_b(s, npoints ? npoints : 16)
                                         : verify_theorem_c(s, npoints ? npoints : 8);
      write_json_file(report, r.to_json());
      if (!csv.empty()) emit(r.table, csv, gp);
      for (const auto& p : r.points)
        std::cout << "theorem " << theorem << " " << p.point_id << (p.item.empty() ? "" : " (" + p.item + ")") << ": "
                  << verdict_name(p.verdict.verdict) << " constant=" << p.verdict.constant << "\n";
      std::cout << (r.pass() ? "PASS" : r.inconclusive() ? "INCONCLUSIVE" : "FAIL") << "\n";
      return r.exit_code();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
