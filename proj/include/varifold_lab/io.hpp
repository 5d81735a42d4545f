#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "varifold_lab/analysis.hpp"

namespace vl {

// Parses XReal::str output, including exponents far outside double range.
XReal parse_xreal(const std::string& s);

// Header: scenario_id,point_id,region_kind,r,quantity,q,norm,value,resolution,uncertainty,note
void write_csv(std::ostream& os, const ScanTable& t);
void write_csv_file(const std::string& path, const ScanTable& t);
ScanTable read_csv(std::istream& is);
ScanTable read_csv_file(const std::string& path);

// Log-log plot of every (point, quantity) group of the CSV.
std::string gnuplot_script(const std::string& csv_path, const ScanTable& t);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace vl
