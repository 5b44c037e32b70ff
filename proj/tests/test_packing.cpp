#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "slmopt/packing.hpp"
#include "test_support.hpp"

using namespace slmopt;
using namespace slmopt::testing;

namespace {

Plan one_batch_plan(std::vector<Placement> placements) {
  Plan plan;
  Batch b;
  b.placements = std::move(placements);
  plan.batches.push_back(std::move(b));
  return plan;
}

Placement place(const std::string& id, int k, double x, double y,
                bool rotated = true) {
  Placement pl;
  pl.instance_id = id;
  pl.orientation_index = k;
  pl.x = x;
  pl.y = y;
  pl.rotated = rotated;
  return pl;
}

// Independent overlap route: inflate both rectangles by half the required
// gap and test for strict interval overlap on both axes.
bool inflated_overlap(double x1, double y1, double l1, double w1, double x2,
                      double y2, double l2, double w2, double gap) {
  const double h = gap / 2;
  const double depth_x =
      std::min(x1 + l1 + h, x2 + l2 + h) - std::max(x1 - h, x2 - h);
  const double depth_y =
      std::min(y1 + w1 + h, y2 + w2 + h) - std::max(y1 - h, y2 - h);
  return depth_x > kGeomTol && depth_y > kGeomTol;
}

}  // namespace

TEST_CASE("footprint follows the axis flag") {
  const OrientationGeometry o = orient(57.5, 24.6, 18.0, 0);
  const Footprint kept = footprint(o, true);
  CHECK(kept.effective_length == 57.5);
  CHECK(kept.effective_width == 24.6);
  const Footprint swapped = footprint(o, false);
  CHECK(swapped.effective_length == 24.6);
  CHECK(swapped.effective_width == 57.5);
  const OrientationGeometry sq = orient(30, 30, 5, 0);
  CHECK(footprint(sq, true).effective_length ==
        footprint(sq, false).effective_length);
}

TEST_CASE("geometry oracle: single part, touching pair, boundary, height") {
  Instance ins = make_instance({catalog_part1()}, {{0, 2}});
  const std::string id1 = ins.parts[0].instance_id;
  const std::string id2 = ins.parts[1].instance_id;

  SUBCASE("single part at the origin is feasible") {
    CHECK(check_plan_geometry(one_batch_plan({place(id1, 0, 0, 0)}), ins)
              .empty());
  }
  SUBCASE("touching parts are feasible at gap zero") {
    const Plan plan = one_batch_plan(
        {place(id1, 0, 0, 0), place(id2, 0, 57.5, 0)});
    CHECK(check_plan_geometry(plan, ins).empty());
  }
  SUBCASE("gap of one reports an overlap of magnitude one") {
    ins.machine.part_gap = 1;
    const Plan plan = one_batch_plan(
        {place(id1, 0, 0, 0), place(id2, 0, 57.5, 0)});
    const auto v = check_plan_geometry(plan, ins);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == GeometryViolation::Kind::overlap);
    CHECK(v[0].magnitude == doctest::Approx(1.0));
  }
  SUBCASE("boundary overhang magnitude is the overshoot") {
    const Plan plan = one_batch_plan({place(id1, 0, 250, 0)});
    const auto v = check_plan_geometry(plan, ins);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == GeometryViolation::Kind::boundary);
    CHECK(v[0].magnitude == doctest::Approx(39.5));  // 250 + 57.5 - 268
  }
  SUBCASE("batch height above the chamber is a violation") {
    ins.machine.platform_height = 17.0;
    const Plan plan = one_batch_plan({place(id1, 0, 0, 0)});
    const auto v = check_plan_geometry(plan, ins);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == GeometryViolation::Kind::height);
    CHECK(v[0].magnitude == doctest::Approx(1.0));
  }
  SUBCASE("margins shrink the usable area") {
    ins.machine.boundary_margin = 5;
    CHECK(!check_plan_geometry(one_batch_plan({place(id1, 0, 0, 0)}), ins)
               .empty());
    CHECK(check_plan_geometry(one_batch_plan({place(id1, 0, 5, 5)}), ins)
              .empty());
  }
}

TEST_CASE("bottom-left packer") {
  SUBCASE("single item lands on the margin corner") {
    const auto packed =
        pack_bottom_left({{"a", {50, 30}}}, 268, 268, 3, 0);
    REQUIRE(packed.has_value());
    CHECK((*packed)[0].x == doctest::Approx(3));
    CHECK((*packed)[0].y == doctest::Approx(3));
  }
  SUBCASE("four half-side squares tile the platform exactly") {
    std::vector<PackItem> items;
    for (int i = 0; i < 4; ++i)
      items.push_back({"sq" + std::to_string(i), {134, 134}});
    const auto packed = pack_bottom_left(items, 268, 268, 0, 0);
    REQUIRE(packed.has_value());
    std::vector<std::pair<double, double>> corners;
    for (const auto& p : *packed) corners.emplace_back(p.x, p.y);
    std::sort(corners.begin(), corners.end());
    CHECK(corners == std::vector<std::pair<double, double>>{
                         {0, 0}, {0, 134}, {134, 0}, {134, 134}});
  }
  SUBCASE("a fifth half-side square finds no spot") {
    std::vector<PackItem> items;
    for (int i = 0; i < 5; ++i)
      items.push_back({"sq" + std::to_string(i), {134, 134}});
    CHECK(!pack_bottom_left(items, 268, 268, 0, 0).has_value());
  }
  SUBCASE("an item larger than the platform in both rotations throws") {
    CHECK_THROWS_AS(pack_bottom_left({{"x", {300, 280}}}, 268, 268, 0, 0),
                    std::invalid_argument);
  }
  SUBCASE("rotation is used when only the swapped shape fits") {
    const auto packed = pack_bottom_left({{"a", {260, 40}}}, 100, 268, 0, 0);
    REQUIRE(packed.has_value());
    CHECK((*packed)[0].swapped);
  }
}

TEST_CASE("packer output always passes the geometry oracle") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> count(1, 8);
  std::uniform_real_distribution<double> dim(10, 120);
  std::uniform_real_distribution<double> gap_dist(0, 4);

  for (int trial = 0; trial < 200; ++trial) {
    const double gap = gap_dist(rng);
    std::vector<PartType> types;
    std::vector<std::pair<int, int>> copies;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      types.push_back(part_type("p" + std::to_string(i), 10, 10,
                                {orient(dim(rng), dim(rng), 10, 0)}));
      copies.emplace_back(i, 1);
    }
    MachineSpec m = reference_machine();
    m.part_gap = gap;
    const Instance ins = make_instance(types, copies, m);

    std::vector<PackItem> items;
    for (const PartInstance& part : ins.parts)
      items.push_back({part.instance_id,
                       footprint(ins.type_of(part).orientations[0], true)});
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
      return a.shape.effective_length * a.shape.effective_width >
             b.shape.effective_length * b.shape.effective_width;
    });
    const auto packed = pack_bottom_left(items, 268, 268, 0, gap);
    if (!packed) continue;

    std::vector<Placement> placements;
    for (const auto& p : *packed)
      placements.push_back(place(p.instance_id, 0, p.x, p.y, !p.swapped));
    CHECK(check_plan_geometry(one_batch_plan(std::move(placements)), ins)
              .empty());
  }
}

TEST_CASE("oracle agrees with the independent inflated-interval checker") {
  std::mt19937 rng(20240911);
  std::uniform_real_distribution<double> pos(-20, 280);
  std::uniform_real_distribution<double> dim(5, 120);
  std::uniform_real_distribution<double> gap_dist(0, 5);
  std::uniform_int_distribution<int> count(2, 7);
  std::bernoulli_distribution flip(0.5);

  int disagreements = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const double gap = gap_dist(rng);
    const int n = count(rng);
    std::vector<PartType> types;
    std::vector<std::pair<int, int>> copies;
    for (int i = 0; i < n; ++i) {
      types.push_back(part_type("p" + std::to_string(i), 10, 10,
                                {orient(dim(rng), dim(rng), 10, 0)}));
      copies.emplace_back(i, 1);
    }
    MachineSpec m = reference_machine();
    m.part_gap = gap;
    const Instance ins = make_instance(types, copies, m);

    std::vector<Placement> placements;
    for (const PartInstance& part : ins.parts)
      placements.push_back(place(part.instance_id, 0, pos(rng), pos(rng),
                                 flip(rng)));
    const Plan plan = one_batch_plan(placements);

    // overlap verdicts from the library
    std::set<std::pair<std::string, std::string>> reported;
    for (const auto& v : check_plan_geometry(plan, ins))
      if (v.kind == GeometryViolation::Kind::overlap)
        reported.insert({v.instance_ids[0], v.instance_ids[1]});

    // independent route
    std::set<std::pair<std::string, std::string>> expected;
    for (std::size_t i = 0; i < placements.size(); ++i)
      for (std::size_t j = i + 1; j < placements.size(); ++j) {
        const Footprint fi = placement_footprint(placements[i], ins);
        const Footprint fj = placement_footprint(placements[j], ins);
        if (inflated_overlap(placements[i].x, placements[i].y,
                             fi.effective_length, fi.effective_width,
                             placements[j].x, placements[j].y,
                             fj.effective_length, fj.effective_width, gap))
          expected.insert({placements[i].instance_id,
                           placements[j].instance_id});
      }
    if (reported != expected) ++disagreements;
  }
  CHECK(disagreements == 0);
}

TEST_CASE("single-part feasibility is invariant under rotation + platform swap") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> dim(5, 300);
  for (int trial = 0; trial < 200; ++trial) {
    const double l = dim(rng), w = dim(rng);
    const PartType t = part_type("p", 10, 10, {orient(l, w, 10, 0)});

    MachineSpec m1 = reference_machine();
    m1.platform_length = 268;
    m1.platform_width = 150;
    MachineSpec m2 = m1;
    std::swap(m2.platform_length, m2.platform_width);

    const Instance i1 = make_instance({t}, {{0, 1}}, m1);
    const Instance i2 = make_instance({t}, {{0, 1}}, m2);
    const Plan p1 = one_batch_plan({place(i1.parts[0].instance_id, 0, 0, 0, true)});
    const Plan p2 = one_batch_plan({place(i2.parts[0].instance_id, 0, 0, 0, false)});
    CHECK(check_plan_geometry(p1, i1).empty() ==
          check_plan_geometry(p2, i2).empty());
  }
}
