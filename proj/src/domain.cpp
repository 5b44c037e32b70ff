#include "slmopt/domain.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <set>
#include <sstream>

namespace slmopt {

std::optional<Subsystem> subsystem_from_name(std::string_view name) {
  for (int f = 0; f < kSubsystemCount; ++f)
    if (name == kSubsystemNames[static_cast<std::size_t>(f)])
      return static_cast<Subsystem>(f);
  return std::nullopt;
}

std::optional<Subprocess> subprocess_from_name(std::string_view name) {
  for (int l = 0; l < kSubprocessCount; ++l)
    if (name == kSubprocessNames[static_cast<std::size_t>(l)])
      return static_cast<Subprocess>(l);
  return std::nullopt;
}

int Instance::find_part(std::string_view instance_id) const {
  for (std::size_t i = 0; i < parts.size(); ++i)
    if (parts[i].instance_id == instance_id) return static_cast<int>(i);
  return -1;
}

long slice_count(double height, double layer_thickness) {
  if (height <= 0) return 0;
  // 1e-9 absorbs division noise so grid-aligned heights do not gain a layer.
  return static_cast<long>(std::ceil(height / layer_thickness - 1e-9));
}

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0; }
bool finite_pos(double v) { return std::isfinite(v) && v > 0; }

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// True when the orientation fits the platform alone in either rotation,
// margin included, and under the chamber height.
bool orientation_fits(const OrientationGeometry& o, const MachineSpec& m) {
  const double usable_l = m.platform_length - 2 * m.boundary_margin;
  const double usable_w = m.platform_width - 2 * m.boundary_margin;
  if (o.height > m.platform_height) return false;
  const bool as_given = o.length <= usable_l && o.width <= usable_w;
  const bool swapped = o.width <= usable_l && o.length <= usable_w;
  return as_given || swapped;
}

}  // namespace

std::vector<Violation> validate_instance(const Instance& ins) {
  std::vector<Violation> out;
  const auto add = [&out](std::string code, std::string msg) {
    out.push_back({std::move(code), std::move(msg)});
  };

  const MachineSpec& m = ins.machine;
  if (!finite_pos(m.platform_length) || !finite_pos(m.platform_width) ||
      !finite_pos(m.platform_height))
    add("bad-machine", "platform dimensions must be positive");
  if (!finite_nonneg(m.boundary_margin) || !finite_nonneg(m.part_gap))
    add("bad-machine", "boundary margin and part gap must be non-negative");
  if (!finite_pos(m.recoat_layer_time))
    add("bad-machine", "recoat layer time must be positive");
  if (!finite_nonneg(m.preheat_time) || !finite_nonneg(m.cool_time))
    add("bad-machine", "preheat/cool times must be non-negative");
  for (int f = 0; f < kSubsystemCount; ++f) {
    const auto fi = static_cast<std::size_t>(f);
    if (!finite_nonneg(m.subsystem_power[fi]))
      add("bad-machine", std::string("power of subsystem ") +
                             kSubsystemNames[fi] + " must be non-negative");
    for (int l = 0; l < kSubprocessCount; ++l) {
      const double c = m.state_coefficient[fi][static_cast<std::size_t>(l)];
      if (!std::isfinite(c) || c < 0 || c > 1)
        add("bad-state-coefficient",
            std::string("coefficient (") + kSubsystemNames[fi] + ", " +
                kSubprocessNames[static_cast<std::size_t>(l)] +
                ") must lie in [0, 1], got " + fmt(c));
    }
  }

  const ProcessParams& p = ins.process;
  if (p.laser_count < 1) add("bad-process", "laser count must be >= 1");
  if (!finite_pos(p.border_speed) || !finite_pos(p.contour_speed) ||
      !finite_pos(p.part_scan_speed) || !finite_pos(p.support_scan_speed))
    add("bad-process", "scan speeds must be positive");
  if (!finite_pos(p.layer_thickness))
    add("bad-process", "layer thickness must be positive");
  if (!finite_pos(p.hatch_distance))
    add("bad-process", "hatch distance must be positive");

  for (const PartType& t : ins.part_types) {
    if (!finite_pos(t.volume))
      add("non-positive-dimension", "part type " + t.id + ": volume must be positive");
    if (!finite_pos(t.surface_area))
      add("non-positive-dimension",
          "part type " + t.id + ": surface area must be positive");
    if (t.orientations.empty())
      add("empty-orientations", "part type " + t.id + " has no orientations");
    for (std::size_t k = 0; k < t.orientations.size(); ++k) {
      const OrientationGeometry& o = t.orientations[k];
      if (!finite_pos(o.length) || !finite_pos(o.width) || !finite_pos(o.height))
        add("non-positive-dimension", "part type " + t.id + " orientation " +
                                          std::to_string(k) +
                                          ": length, width, height must be positive");
      if (!finite_nonneg(o.support_volume))
        add("non-positive-dimension", "part type " + t.id + " orientation " +
                                          std::to_string(k) +
                                          ": support volume must be non-negative");
    }
  }

  std::set<std::string> seen;
  for (const PartInstance& part : ins.parts) {
    if (!seen.insert(part.instance_id).second)
      add("duplicate-instance-id", "instance id " + part.instance_id + " repeats");
    if (part.type_index < 0 ||
        part.type_index >= static_cast<int>(ins.part_types.size())) {
      add("dangling-part-type",
          "instance " + part.instance_id + " references no known part type");
      continue;
    }
    const PartType& t = ins.type_of(part);
    bool fits = false;
    for (const OrientationGeometry& o : t.orientations)
      if (orientation_fits(o, m)) {
        fits = true;
        break;
      }
    if (!fits && !t.orientations.empty())
      add("fits-no-orientation",
          "part " + part.instance_id + " (type " + t.id +
              ") fits the platform in no orientation");
  }

  return out;
}

std::vector<Violation> validate_plan_structure(const Plan& plan,
                                               const Instance& ins) {
  std::vector<Violation> out;
  const auto add = [&out](std::string code, std::string msg) {
    out.push_back({std::move(code), std::move(msg)});
  };

  bool any_aggregate = false;
  std::map<std::string, int> count;
  for (std::size_t b = 0; b < plan.batches.size(); ++b) {
    const Batch& batch = plan.batches[b];
    if (batch.is_aggregate()) {
      any_aggregate = true;
      if (!batch.placements.empty())
        add("mixed-batch", "batch " + std::to_string(b) +
                               " carries both placements and aggregates");
      continue;
    }
    if (batch.placements.empty())
      add("empty-batch", "batch " + std::to_string(b) + " is empty");
    for (const Placement& pl : batch.placements) {
      ++count[pl.instance_id];
      const int idx = ins.find_part(pl.instance_id);
      if (idx < 0) {
        add("dangling-part", "placement references unknown instance id " +
                                 pl.instance_id);
        continue;
      }
      const PartType& t = ins.type_of_part(idx);
      if (pl.orientation_index < 0 ||
          pl.orientation_index >= static_cast<int>(t.orientations.size()))
        add("bad-orientation-index",
            pl.instance_id + ": orientation index " +
                std::to_string(pl.orientation_index) + " out of range");
    }
  }

  if (!any_aggregate) {
    for (const PartInstance& part : ins.parts) {
      const auto it = count.find(part.instance_id);
      const int n = it == count.end() ? 0 : it->second;
      if (n != 1)
        add("coverage", "part " + part.instance_id + " appears " +
                            std::to_string(n) + " times, expected once");
    }
  }
  for (const auto& [id, n] : count)
    if (n > 1 && ins.find_part(id) >= 0 && any_aggregate)
      add("coverage", "part " + id + " appears " + std::to_string(n) + " times");

  return out;
}

Plan make_singleton_plan(const Instance& ins) {
  Plan plan;
  const MachineSpec& m = ins.machine;
  for (const PartInstance& part : ins.parts) {
    const PartType& t = ins.type_of(part);
    Batch batch;
    for (std::size_t k = 0; k < t.orientations.size(); ++k) {
      const OrientationGeometry& o = t.orientations[k];
      if (!orientation_fits(o, m)) continue;
      const double usable_l = m.platform_length - 2 * m.boundary_margin;
      const double usable_w = m.platform_width - 2 * m.boundary_margin;
      const bool as_given = o.length <= usable_l && o.width <= usable_w;
      Placement pl;
      pl.instance_id = part.instance_id;
      pl.orientation_index = static_cast<int>(k);
      pl.x = m.boundary_margin;
      pl.y = m.boundary_margin;
      pl.rotated = as_given;  // fall back to the swapped footprint otherwise
      batch.placements.push_back(std::move(pl));
      break;
    }
    if (batch.placements.empty())
      // No fitting orientation; validation reports this, keep plan honest.
      continue;
    plan.batches.push_back(std::move(batch));
  }
  return plan;
}

namespace {

struct Fnv1a {
  std::uint64_t state = 1469598103934665603ull;
  void feed_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state ^= p[i];
      state *= 1099511628211ull;
    }
  }
  void feed(double v) {
    // Normalize -0.0 so equal machines hash equally.
    if (v == 0.0) v = 0.0;
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    feed_bytes(&bits, sizeof bits);
  }
  void feed(long v) {
    feed_bytes(&v, sizeof v);
  }
  void feed(std::string_view s) {
    feed(static_cast<long>(s.size()));
    feed_bytes(s.data(), s.size());
  }
};

void feed_machine(Fnv1a& h, const MachineSpec& m) {
  h.feed(m.platform_length);
  h.feed(m.platform_width);
  h.feed(m.platform_height);
  h.feed(m.boundary_margin);
  h.feed(m.part_gap);
  h.feed(m.recoat_layer_time);
  h.feed(m.preheat_time);
  h.feed(m.cool_time);
  for (double p : m.subsystem_power) h.feed(p);
  for (const auto& row : m.state_coefficient)
    for (double c : row) h.feed(c);
}

}  // namespace

std::uint64_t machine_fingerprint(const MachineSpec& m) {
  Fnv1a h;
  feed_machine(h, m);
  return h.state;
}

std::uint64_t instance_fingerprint(const Instance& ins) {
  Fnv1a h;
  feed_machine(h, ins.machine);
  h.feed(static_cast<long>(ins.process.laser_count));
  h.feed(ins.process.border_speed);
  h.feed(ins.process.contour_speed);
  h.feed(ins.process.part_scan_speed);
  h.feed(ins.process.support_scan_speed);
  h.feed(ins.process.layer_thickness);
  h.feed(ins.process.hatch_distance);
  h.feed(static_cast<long>(ins.part_types.size()));
  for (const PartType& t : ins.part_types) {
    h.feed(t.id);
    h.feed(t.volume);
    h.feed(t.surface_area);
    h.feed(static_cast<long>(t.orientations.size()));
    for (const OrientationGeometry& o : t.orientations) {
      h.feed(o.height);
      h.feed(o.length);
      h.feed(o.width);
      h.feed(o.support_volume);
    }
  }
  h.feed(static_cast<long>(ins.parts.size()));
  for (const PartInstance& part : ins.parts) {
    h.feed(part.instance_id);
    h.feed(static_cast<long>(part.type_index));
  }
  return h.state;
}

}  // namespace slmopt
