#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace slmopt {

// Machine subsystems: basic system, platform heater, water circulation,
// water cooling, the four laser roles, recoater motor, electric valves,
// gas circulation pump.
enum class Subsystem : int { bs, ht, wc, co, lsb, lfc, lvh, lss, rm, ev, gp };
inline constexpr int kSubsystemCount = 11;

// Build subprocesses: preheating, scan border, fill contour, volume hatching,
// support structure, recoating, cooling.
enum class Subprocess : int { ph, sb, fc, vh, ss, rc, co };
inline constexpr int kSubprocessCount = 7;

inline constexpr std::array<const char*, kSubsystemCount> kSubsystemNames{
    "bs", "ht", "wc", "co", "lsb", "lfc", "lvh", "lss", "rm", "ev", "gp"};
inline constexpr std::array<const char*, kSubprocessCount> kSubprocessNames{
    "ph", "sb", "fc", "vh", "ss", "rc", "co"};
inline constexpr std::array<const char*, kSubsystemCount> kSubsystemLabels{
    "basic subsystem",       "platform heater",      "water circulation unit",
    "water cooling unit",    "laser scan border",    "laser fill contour",
    "laser volume hatching", "laser support structure", "recoater motor",
    "electric valves",       "gas circulation pump"};
inline constexpr std::array<const char*, kSubprocessCount> kSubprocessLabels{
    "preheating", "scan border",  "fill contour", "volume hatching",
    "support structure", "recoating", "cooling"};

std::optional<Subsystem> subsystem_from_name(std::string_view name);
std::optional<Subprocess> subprocess_from_name(std::string_view name);

// One admissible build orientation of a part: bounding-box projection plus
// the support material it requires. Dimensions in mm, volume in mm^3.
struct OrientationGeometry {
  double height = 0;
  double length = 0;
  double width = 0;
  double support_volume = 0;
};

struct PartType {
  std::string id;
  double volume = 0;        // mm^3
  double surface_area = 0;  // mm^2, scanned as border and contour
  std::vector<OrientationGeometry> orientations;
};

// A concrete copy of a part type to be printed.
struct PartInstance {
  std::string instance_id;
  int type_index = -1;  // into Instance::part_types
};

// Quadratic time-vs-temperature fit. Heating evaluates a*T^2 + b*T - c,
// cooling evaluates a*T^2 - b*T + c.
struct RegressionConstants {
  double a = 0;
  double b = 0;
  double c = 0;
};

struct PlatformTemperatures {
  double initial = 0;         // T_i, before preheating
  double preheated = 0;       // T_f, after preheating
  double before_cooling = 0;  // T_b
  double final = 0;           // T_c, after cooling
};

struct MachineSpec {
  double platform_length = 0;  // mm, along x
  double platform_width = 0;   // mm, along y
  double platform_height = 0;  // mm
  double boundary_margin = 0;  // mm, min distance from parts to the boundary
  double part_gap = 0;         // mm, min distance between parts
  double recoat_layer_time = 0;  // s per layer

  // Resolved subprocess durations. When the regression constants and
  // temperatures are supplied, loaders overwrite these with the fitted values.
  double preheat_time = 0;  // s
  double cool_time = 0;     // s
  std::optional<RegressionConstants> heating_constants;
  std::optional<RegressionConstants> cooling_constants;
  std::optional<PlatformTemperatures> temperatures;

  std::array<double, kSubsystemCount> subsystem_power{};  // W
  // state_coefficient[f][l]: fraction of subprocess l during which
  // subsystem f draws power; constant per subprocess.
  std::array<std::array<double, kSubprocessCount>, kSubsystemCount>
      state_coefficient{};

  double power(Subsystem f) const {
    return subsystem_power[static_cast<int>(f)];
  }
  double coefficient(Subsystem f, Subprocess l) const {
    return state_coefficient[static_cast<int>(f)][static_cast<int>(l)];
  }
};

struct ProcessParams {
  int laser_count = 1;
  double border_speed = 0;        // mm/s
  double contour_speed = 0;       // mm/s
  double part_scan_speed = 0;     // mm/s, volume hatching
  double support_scan_speed = 0;  // mm/s
  double layer_thickness = 0;     // mm
  double hatch_distance = 0;      // mm
};

// Position of one part copy on the platform. rotated == true places the
// orientation's length parallel to the platform length.
struct Placement {
  std::string instance_id;
  int orientation_index = 0;
  double x = 0;
  double y = 0;
  bool rotated = true;
};

// Batch totals supplied directly instead of placements, for plans published
// only in aggregate form. Geometry cannot be checked for such batches.
struct BatchAggregate {
  double surface_area = 0;    // mm^2
  double part_volume = 0;     // mm^3
  double support_volume = 0;  // mm^3
  long slices = 0;
  int part_count = 0;
};

struct Batch {
  std::vector<Placement> placements;
  std::optional<BatchAggregate> aggregate;

  bool is_aggregate() const { return aggregate.has_value(); }
};

struct Plan {
  std::vector<Batch> batches;

  bool has_aggregates() const {
    for (const auto& b : batches)
      if (b.is_aggregate()) return true;
    return false;
  }
};

struct Instance {
  MachineSpec machine;
  ProcessParams process;
  std::vector<PartType> part_types;
  std::vector<PartInstance> parts;

  // -1 when the id is unknown.
  int find_part(std::string_view instance_id) const;
  const PartType& type_of(const PartInstance& part) const {
    return part_types[static_cast<std::size_t>(part.type_index)];
  }
  const PartType& type_of_part(int part_index) const {
    return type_of(parts[static_cast<std::size_t>(part_index)]);
  }
};

struct Violation {
  std::string code;
  std::string message;
};

// Static validation of an instance: dimension signs, orientation sets,
// id uniqueness, coefficient table completeness, and that every part fits
// the platform alone in at least one orientation.
std::vector<Violation> validate_instance(const Instance& instance);

// Structural plan check (not geometry): every part of the instance appears
// in exactly one batch exactly once, ids resolve, orientation indices are
// valid, batches are non-empty. Aggregate batches skip the coverage check.
std::vector<Violation> validate_plan_structure(const Plan& plan,
                                               const Instance& instance);

// Singleton plan used as a feasibility witness: each part alone in its own
// batch, placed at the margin corner in the first orientation that fits.
Plan make_singleton_plan(const Instance& instance);

// Layers needed to build to `height`; a started layer counts fully.
long slice_count(double height, double layer_thickness);

// Content hashes used to tie energy breakdowns and plan files to the
// machine/instance they were computed for.
std::uint64_t machine_fingerprint(const MachineSpec& machine);
std::uint64_t instance_fingerprint(const Instance& instance);

}  // namespace slmopt
