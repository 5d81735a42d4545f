#pragma once

#include <limits>
#include <vector>

#include "varifold_lab/core.hpp"
#include "varifold_lab/profiles.hpp"
#include "varifold_lab/varifold.hpp"
#include "varifold_lab/xreal.hpp"

namespace vl {

// Region in a local frame whose base plane is {z = 0}; centered on that plane.
struct LocalRegion {
  RegionKind kind = RegionKind::Ball;
  double cx = 0, cy = 0;
  double r = 1;
  double h = std::numeric_limits<double>::infinity();  // cylinder half-height
};

enum class RingQuantity { Mass, Tilt, Height, FirstVariation, SecondFund, LevelTilt };

struct RingSpec {
  RingQuantity kind = RingQuantity::Mass;
  double q = 2.0;
  TiltNorm norm = TiltNorm::Frobenius;
  double theta = 1.0 / 3.0;
  bool operator<(const RingSpec& o) const;
};

// Power of the placement scale by which a quantity scales.
double scale_power(const RingSpec& s);

// Profile placed with axis (px, py), scale exp(ln_sigma), one or two mirrored sheets.
struct PatchPlacement {
  double px = 0, py = 0;
  double ln_sigma = 0;
  int sheets = 1;
  int density = 1;
};

struct RingOptions {
  double rel_tol = 1e-11;
  int max_depth = 48;
  int probe_points = 96;
};

// Integral over patch intersected with the region. Height is measured from z = 0.
// When `samples` is given, height samples (value, weight) of the clipped patch are appended.
XReal integrate_patch(const RadialProfile& p, const PatchPlacement& at, const LocalRegion& R, const RingSpec& spec,
                      const RingOptions& opt = {}, XWeightedSamples* samples = nullptr);

// Whole patch at unit scale, sheets and density included.
XReal patch_total(const RadialProfile& p, int sheets, int density, const RingSpec& spec, const RingOptions& opt = {},
                  XWeightedSamples* samples = nullptr);

enum class PatchRelation { Outside, Inside, Straddle };
// Patch inside the cylinder over its footprint disk with |height| <= zmax (local units).
PatchRelation classify_disk(double px, double py, double rho, double zmax, const LocalRegion& R);
// Square [x0,x1]x[y0,y1] with heights <= zmax.
PatchRelation classify_square(double x0, double x1, double y0, double y1, double zmax, const LocalRegion& R);

// Largest |g| of the profile (upper bound), unscaled.
double profile_height_bound(const RadialProfile& p);

}  // namespace vl
