#include "varifold_lab/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vl {

XReal parse_xreal(const std::string& s) {
  if (s.empty() || s == "nan") return XReal(std::nan(""));
  std::size_t e = s.find_first_of("eE");
  if (e == std::string::npos) return XReal(std::stod(s));
  double mant = std::stod(s.substr(0, e));
  long long ex = std::stoll(s.substr(e + 1));
  if (std::llabs(ex) < 300) return XReal(std::stod(s));
  if (mant == 0.0) return XReal();
  XReal x = XReal::from_log(std::log(std::fabs(mant)) + static_cast<double>(ex) * std::log(10.0));
  return mant < 0 ? -x : x;
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> f;
  std::string cur;
  bool inq = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (inq) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        inq = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      inq = true;
    } else if (c == ',') {
      f.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  f.push_back(cur);
  return f;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

constexpr const char* kHeader = "scenario_id,point_id,region_kind,r,quantity,q,norm,value,resolution,uncertainty,note";

}  // namespace

void write_csv(std::ostream& os, const ScanTable& t) {
  os << kHeader << "\n";
  for (const auto& r : t.rows) {
    os << quote(r.scenario_id) << ',' << quote(r.point_id) << ',' << r.region_kind << ','
       << XReal::from_log(r.ln_r).str() << ',' << quote(r.quantity) << ',' << num(r.q) << ',' << r.norm << ','
       << (r.valid ? r.value.str() : "nan") << ',' << r.resolution << ',' << (r.valid ? r.uncertainty.str() : "nan")
       << ',' << quote(r.note) << "\n";
  }
}

void write_csv_file(const std::string& path, const ScanTable& t) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  write_csv(f, t);
}

ScanTable read_csv(std::istream& is) {
  ScanTable t;
  std::string line;
  if (!std::getline(is, line) || line != kHeader) throw std::runtime_error("read_csv: unexpected header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 11) throw std::runtime_error("read_csv: expected 11 fields");
    ScanRow r;
    r.scenario_id = f[0];
    r.point_id = f[1];
    r.region_kind = f[2];
    r.ln_r = parse_xreal(f[3]).log();
    r.quantity = f[4];
    r.q = std::stod(f[5]);
    r.norm = f[6];
    r.valid = f[7] != "nan";
    if (r.valid) {
      r.value = parse_xreal(f[7]);
      r.uncertainty = parse_xreal(f[9]);
    }
    r.resolution = std::stoi(f[8]);
    r.note = f[10];
    t.rows.push_back(r);
  }
  return t;
}

ScanTable read_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  return read_csv(f);
}

std::string gnuplot_script(const std::string& csv_path, const ScanTable& t) {
  std::ostringstream os;
  os << "# log10 of r and value are taken from the text columns, so extreme exponents survive\n";
  os << "set xlabel 'log10 r'\nset ylabel 'log10 value'\nset key outside\n";
  std::vector<std::pair<std::string, std::string>> groups;
  for (const auto& r : t.rows) {
    auto g = std::make_pair(r.point_id, r.quantity);
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
  }
  const std::string awk =
      "function l(s,  a,n){n=split(s,a,/[eE]/); return log(a[1])/log(10)+(n>1?a[2]:0)} ";
  if (groups.empty()) return os.str() + "# no rows\n";
  os << "plot \\\n";
  for (std::size_t i = 0; i < groups.size(); ++i) {
    os << "  \"< awk -F, 'NR>1 && $2==\\\"" << groups[i].first << "\\\" && $5==\\\"" << groups[i].second
       << "\\\" && $8!=\\\"nan\\\" && $8!=\\\"0\\\" {" << "print l($4), l($8)}" << " " << awk << "' " << csv_path
       << "\" using 1:2 with linespoints title '" << groups[i].first << " " << groups[i].second << "'"
       << (i + 1 < groups.size() ? ", \\\n" : "\n");
  }
  return os.str();
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  return nlohmann::json::parse(f);
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << j.dump(2) << "\n";
}

}  // namespace vl
