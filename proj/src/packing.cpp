#include "slmopt/packing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slmopt {

Footprint footprint(const OrientationGeometry& o, bool rotated) {
  return rotated ? Footprint{o.length, o.width} : Footprint{o.width, o.length};
}

Footprint placement_footprint(const Placement& pl, const Instance& ins) {
  const int idx = ins.find_part(pl.instance_id);
  if (idx < 0)
    throw std::out_of_range("placement_footprint: unknown instance id " +
                            pl.instance_id);
  const PartType& t = ins.type_of_part(idx);
  const OrientationGeometry& o =
      t.orientations.at(static_cast<std::size_t>(pl.orientation_index));
  return footprint(o, pl.rotated);
}

namespace {

struct Rect {
  std::string id;
  double x, y, l, w;  // left-bottom corner and footprint extents
  double height;
};

// Largest axis gap between two rectangles; negative when they overlap on
// both axes.
double separation(const Rect& a, const Rect& b) {
  const double gap_x = std::max(b.x - (a.x + a.l), a.x - (b.x + b.l));
  const double gap_y = std::max(b.y - (a.y + a.w), a.y - (b.y + b.w));
  return std::max(gap_x, gap_y);
}

}  // namespace

std::vector<GeometryViolation> check_plan_geometry(const Plan& plan,
                                                   const Instance& ins) {
  std::vector<GeometryViolation> out;
  const MachineSpec& m = ins.machine;
  const double margin = m.boundary_margin;
  const double gap = m.part_gap;

  for (const Batch& batch : plan.batches) {
    if (batch.is_aggregate()) continue;

    std::vector<Rect> rects;
    rects.reserve(batch.placements.size());
    double batch_height = 0;
    for (const Placement& pl : batch.placements) {
      const int idx = ins.find_part(pl.instance_id);
      if (idx < 0)
        throw std::out_of_range("check_plan_geometry: unknown instance id " +
                                pl.instance_id);
      const PartType& t = ins.type_of_part(idx);
      const OrientationGeometry& o =
          t.orientations.at(static_cast<std::size_t>(pl.orientation_index));
      const Footprint fp = footprint(o, pl.rotated);
      rects.push_back({pl.instance_id, pl.x, pl.y, fp.effective_length,
                       fp.effective_width, o.height});
      batch_height = std::max(batch_height, o.height);
    }

    for (const Rect& r : rects) {
      const double over = std::max(
          {margin - r.x, margin - r.y,
           r.x + r.l - (m.platform_length - margin),
           r.y + r.w - (m.platform_width - margin)});
      if (over > kGeomTol)
        out.push_back({GeometryViolation::Kind::boundary, {r.id}, over});
    }

    for (std::size_t i = 0; i < rects.size(); ++i)
      for (std::size_t j = i + 1; j < rects.size(); ++j) {
        const double sep = separation(rects[i], rects[j]);
        if (sep < gap - kGeomTol)
          out.push_back({GeometryViolation::Kind::overlap,
                         {rects[i].id, rects[j].id},
                         gap - sep});
      }

    if (batch_height > m.platform_height + kGeomTol) {
      std::vector<std::string> ids;
      for (const Rect& r : rects)
        if (r.height > m.platform_height + kGeomTol) ids.push_back(r.id);
      out.push_back({GeometryViolation::Kind::height, std::move(ids),
                     batch_height - m.platform_height});
    }
  }
  return out;
}

namespace {

struct Placed {
  double x, y, l, w;
};

bool spot_feasible(double x, double y, double l, double w, double lw,
                   double ww, double margin, double gap,
                   const std::vector<Placed>& placed) {
  if (x + l > lw - margin + kGeomTol) return false;
  if (y + w > ww - margin + kGeomTol) return false;
  for (const Placed& p : placed) {
    const double gap_x = std::max(p.x - (x + l), x - (p.x + p.l));
    const double gap_y = std::max(p.y - (y + w), y - (p.y + p.w));
    if (std::max(gap_x, gap_y) < gap - kGeomTol) return false;
  }
  return true;
}

}  // namespace

std::optional<std::vector<PackedItem>> pack_bottom_left(
    const std::vector<PackItem>& items, double platform_length,
    double platform_width, double margin, double gap) {
  const double usable_l = platform_length - 2 * margin;
  const double usable_w = platform_width - 2 * margin;

  std::vector<Placed> placed;
  std::vector<PackedItem> out;
  std::vector<double> xs{margin}, ys{margin};

  for (const PackItem& item : items) {
    const double a = item.shape.effective_length;
    const double b = item.shape.effective_width;
    const bool fits_as_given = a <= usable_l + kGeomTol && b <= usable_w + kGeomTol;
    const bool fits_swapped = b <= usable_l + kGeomTol && a <= usable_w + kGeomTol;
    if (!fits_as_given && !fits_swapped)
      throw std::invalid_argument("pack_bottom_left: item " + item.instance_id +
                                  " exceeds the platform in both rotations");

    bool found = false;
    double best_x = 0, best_y = 0;
    bool best_swapped = false;
    for (int swap = 0; swap < 2; ++swap) {
      if (swap == 0 && !fits_as_given) continue;
      if (swap == 1 && !fits_swapped) continue;
      const double l = swap ? b : a;
      const double w = swap ? a : b;
      for (double y : ys)
        for (double x : xs) {
          if (!spot_feasible(x, y, l, w, platform_length, platform_width,
                             margin, gap, placed))
            continue;
          const bool better =
              !found || y < best_y - kGeomTol ||
              (std::abs(y - best_y) <= kGeomTol && x < best_x - kGeomTol);
          if (better) {
            found = true;
            best_x = x;
            best_y = y;
            best_swapped = swap;
          }
        }
    }
    if (!found) return std::nullopt;

    const double l = best_swapped ? b : a;
    const double w = best_swapped ? a : b;
    placed.push_back({best_x, best_y, l, w});
    out.push_back({item.instance_id, best_x, best_y, best_swapped});
    xs.push_back(best_x + l + gap);
    ys.push_back(best_y + w + gap);
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
  }
  return out;
}

}  // namespace slmopt
