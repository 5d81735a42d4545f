#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "varifold_lab/core.hpp"

namespace vl {

struct TruncationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotResidualError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Point of [0,1]^m with coordinates num[j] / 2^level.
struct DyadicPoint {
  int64_t level = 0;
  std::vector<mpz_class> num;

  int dim() const { return static_cast<int>(num.size()); }
  double coord(int j) const;
  // floor(x_j * 2^L), L <= level
  mpz_class cell_index(int j, int64_t L) const;
  DyadicPoint at_level(int64_t L) const;  // L >= level, exact
  static DyadicPoint from_doubles(const std::vector<double>& x, int64_t level);
};

XReal to_xreal(const mpz_class& z, int64_t level);

// Open cube C(2^-level * corner, 2^-level).
struct DyadicCube {
  int64_t level = 0;
  std::vector<mpz_class> corner;

  int dim() const { return static_cast<int>(corner.size()); }
  bool contains(const DyadicPoint& x) const;
  bool contains(const DyadicCube& q) const;  // q subset of this
  bool intersects(const DyadicCube& q) const;
  DyadicPoint center() const;
  bool operator==(const DyadicCube& o) const { return level == o.level && corner == o.corner; }
};

enum class FamilyVariant { Dini, Sparse };
std::string variant_name(FamilyVariant v);

struct Generation {
  int index = 0;
  int64_t source_level = 0;  // i (Dini) or alpha_i (sparse)
  int64_t beta = 0;
  mpz_class count;  // exact card F_i
};

struct CoveringResult {
  std::vector<std::pair<int, DyadicCube>> cubes;  // explicit members of H with generation index
  bool block = false;  // H additionally holds every generation-`block_generation` cube inside `block_cell`
  int block_generation = -1;
  DyadicCube block_cell;
  mpz_class card;
  mpq_class measure;
  double ln_measure = kNegInf;
  bool inside_ball = true;
  double ln_bound = kNegInf;  // ln(omega(r) r^m)
};

class CubeFamily {
 public:
  int m = 2;
  Modulus omega;
  double lambda = 0.5;
  FamilyVariant variant = FamilyVariant::Sparse;
  int depth = 0;
  double ln_s = 0.0;
  int k = 0;  // Dini starting index
  std::vector<Generation> gens;
  std::vector<int64_t> alpha, beta;  // sparse: alpha_i, beta_i for i = 1..depth (index i-1)
  std::vector<double> ln_B;  // sparse, decreasing
  double ln_epsilon = 0.0;
  double tail_bound = 0.0;

  double ln_phi(int64_t level) const;  // ln phi(2^-level)
  mpq_class measure() const;
  bool budget_ok() const;  // exact: measure + tail <= 1 - lambda (tail rounded up)
  int64_t finest_level() const { return gens.empty() ? 0 : gens.back().beta; }
  double ln_floor() const;  // ln of the smallest admissible covering radius
  const Generation& gen(int index) const;

  // First generation whose cube contains x; -1 if none.
  int locate(const DyadicPoint& x) const;
  DyadicCube cube_of(int gen_pos, const DyadicPoint& x) const;  // cube of gens[gen_pos] near x
  // Generated cube (by position in gens) containing the cell, or -1.
  int covering_generation(const DyadicCube& cell) const;
  // Exact number of generated cubes of each generation inside the cell.
  std::vector<mpz_class> counts_in_cell(const DyadicCube& cell) const;
  bool is_residual(const DyadicPoint& x) const;

  nlohmann::json to_json(std::size_t cube_list_cap = 4096) const;
};

CubeFamily build_dini_family(int m, const Modulus& omega, double lambda, int depth);
CubeFamily build_sparse_family(int m, const Modulus& omega, double lambda, int depth);
CubeFamily family_from_json(const nlohmann::json& j);

CoveringResult covering_cubes(const CubeFamily& family, const DyadicPoint& a, double ln_r);

std::vector<DyadicPoint> sample_residual_points(const CubeFamily& family, std::size_t count, uint64_t seed,
                                                double* acceptance_rate = nullptr);

// Every generated cube; throws if more than `limit` source cells would be visited.
std::vector<std::pair<int, DyadicCube>> enumerate_cubes(const CubeFamily& family, std::size_t limit);

}  // namespace vl
