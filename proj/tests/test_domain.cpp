#include <doctest.h>

#include "slmopt/domain.hpp"
#include "slmopt/packing.hpp"
#include "test_support.hpp"

using namespace slmopt;
using namespace slmopt::testing;

namespace {

bool has_code(const std::vector<Violation>& vs, const std::string& code) {
  for (const auto& v : vs)
    if (v.code == code) return true;
  return false;
}

}  // namespace

TEST_CASE("catalog part on the reference platform is valid") {
  const Instance ins = make_instance({catalog_part1()}, {{0, 1}});
  CHECK(validate_instance(ins).empty());
}

TEST_CASE("non-positive dimensions are reported") {
  Instance ins = make_instance(
      {part_type("bad", 10, 10, {orient(0.0, 5.0, 5.0, 0.0)})}, {{0, 1}});
  CHECK(has_code(validate_instance(ins), "non-positive-dimension"));
}

TEST_CASE("part that fits in no orientation is reported") {
  // 300 mm exceeds the 268 mm platform along both axes in either rotation.
  const Instance ins = make_instance(
      {part_type("huge", 10, 10, {orient(300.0, 300.0, 10.0, 0.0)})}, {{0, 1}});
  CHECK(has_code(validate_instance(ins), "fits-no-orientation"));
}

TEST_CASE("too-tall part is reported as unfitting") {
  const Instance ins = make_instance(
      {part_type("tall", 10, 10, {orient(10.0, 10.0, 400.0, 0.0)})}, {{0, 1}});
  CHECK(has_code(validate_instance(ins), "fits-no-orientation"));
}

TEST_CASE("duplicate instance ids are reported") {
  Instance ins = make_instance({catalog_part1()}, {{0, 2}});
  ins.parts[1].instance_id = ins.parts[0].instance_id;
  CHECK(has_code(validate_instance(ins), "duplicate-instance-id"));
}

TEST_CASE("empty orientation set is reported") {
  const Instance ins =
      make_instance({part_type("none", 10, 10, {})}, {{0, 1}});
  CHECK(has_code(validate_instance(ins), "empty-orientations"));
}

TEST_CASE("out-of-range state coefficient is reported with the subsystem") {
  MachineSpec m = reference_machine();
  m.state_coefficient[1][2] = 1.5;
  const Instance ins = make_instance({catalog_part1()}, {{0, 1}}, m);
  const auto report = validate_instance(ins);
  CHECK(has_code(report, "bad-state-coefficient"));
  bool names_subsystem = false;
  for (const auto& v : report)
    if (v.message.find("ht") != std::string::npos) names_subsystem = true;
  CHECK(names_subsystem);
}

TEST_CASE("validation is pure and idempotent") {
  Instance ins = make_instance(
      {catalog_part1(), part_type("bad", -1, 10, {orient(1, 1, 1, 0)})},
      {{0, 1}, {1, 1}});
  const auto first = validate_instance(ins);
  const auto second = validate_instance(ins);
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].code == second[i].code);
    CHECK(first[i].message == second[i].message);
  }
}

TEST_CASE("a valid instance admits the singleton-batch plan") {
  const Instance ins = make_instance(
      {catalog_part1(), catalog_part2(), catalog_part3()},
      {{0, 2}, {1, 2}, {2, 1}});
  REQUIRE(validate_instance(ins).empty());
  const Plan plan = make_singleton_plan(ins);
  CHECK(plan.batches.size() == ins.parts.size());
  CHECK(check_plan_geometry(plan, ins).empty());
  CHECK(validate_plan_structure(plan, ins).empty());
}

TEST_CASE("plan structure validation catches coverage and dangling parts") {
  const Instance ins = make_instance({catalog_part1()}, {{0, 2}});
  Plan plan = make_singleton_plan(ins);

  SUBCASE("valid plan passes") {
    CHECK(validate_plan_structure(plan, ins).empty());
  }
  SUBCASE("missing part") {
    plan.batches.pop_back();
    CHECK(has_code(validate_plan_structure(plan, ins), "coverage"));
  }
  SUBCASE("duplicated part") {
    plan.batches[1].placements[0].instance_id =
        plan.batches[0].placements[0].instance_id;
    CHECK(has_code(validate_plan_structure(plan, ins), "coverage"));
  }
  SUBCASE("unknown id") {
    plan.batches[0].placements[0].instance_id = "ghost";
    CHECK(has_code(validate_plan_structure(plan, ins), "dangling-part"));
  }
  SUBCASE("orientation index out of range") {
    plan.batches[0].placements[0].orientation_index = 99;
    CHECK(has_code(validate_plan_structure(plan, ins), "bad-orientation-index"));
  }
  SUBCASE("empty batch") {
    plan.batches.push_back(Batch{});
    CHECK(has_code(validate_plan_structure(plan, ins), "empty-batch"));
  }
}

TEST_CASE("slice count rounds a started layer up, robust to division noise") {
  CHECK(slice_count(18.0, 0.03) == 600);   // 18/0.03 must not become 601
  CHECK(slice_count(74.4, 0.03) == 2480);  // 74.4/0.03 sits just above 2480
  CHECK(slice_count(18.015, 0.03) == 601);
  CHECK(slice_count(0.0, 0.03) == 0);
  CHECK(slice_count(0.01, 0.03) == 1);
}

TEST_CASE("fingerprints react to content changes only") {
  const Instance a = make_instance({catalog_part1()}, {{0, 2}});
  Instance b = make_instance({catalog_part1()}, {{0, 2}});
  CHECK(instance_fingerprint(a) == instance_fingerprint(b));
  CHECK(machine_fingerprint(a.machine) == machine_fingerprint(b.machine));
  b.machine.recoat_layer_time = 12;
  CHECK(machine_fingerprint(a.machine) != machine_fingerprint(b.machine));
  const Instance c = make_instance({catalog_part1()}, {{0, 3}});
  CHECK(instance_fingerprint(a) != instance_fingerprint(c));
}
