#pragma once

#include <optional>
#include <string>
#include <vector>

#include "slmopt/domain.hpp"

namespace slmopt {

// Absolute coordinate tolerance (mm) absorbing float noise in geometry
// comparisons; separations within tol of the required gap count as feasible.
inline constexpr double kGeomTol = 1e-6;

// Axis-aligned projection of an orientation on the platform.
// rotated == true keeps length along the platform length; false swaps.
struct Footprint {
  double effective_length = 0;  // along platform length (x)
  double effective_width = 0;   // along platform width (y)
};

Footprint footprint(const OrientationGeometry& orientation, bool rotated);

Footprint placement_footprint(const Placement& placement,
                              const Instance& instance);

struct GeometryViolation {
  enum class Kind { boundary, overlap, height };
  Kind kind = Kind::boundary;
  std::vector<std::string> instance_ids;
  double magnitude = 0;  // mm beyond the feasible region
};

// Feasibility oracle for a plan's geometry: boundary containment with the
// margin, pairwise separation of at least the part gap along x or y (closed:
// touching at exactly the gap is feasible), and batch height under the
// chamber height. Aggregate batches carry no geometry and are skipped.
std::vector<GeometryViolation> check_plan_geometry(const Plan& plan,
                                                   const Instance& instance);

struct PackItem {
  std::string instance_id;
  Footprint shape;  // as-given; the packer may swap the two sides
};

struct PackedItem {
  std::string instance_id;
  double x = 0;
  double y = 0;
  bool swapped = false;  // true when the packer used (width, length)
};

// Greedy bottom-left-fill on the candidate grid spanned by the margin corner
// and the placed rectangles' far edges (+gap). Items are placed in the given
// order, each at the lowest then leftmost feasible grid point, trying both
// axis swaps. Returns nothing when some item finds no spot under this order;
// that is not a proof of infeasibility. Throws when an item exceeds the
// platform in both swaps.
std::optional<std::vector<PackedItem>> pack_bottom_left(
    const std::vector<PackItem>& items, double platform_length,
    double platform_width, double margin, double gap);

}  // namespace slmopt
