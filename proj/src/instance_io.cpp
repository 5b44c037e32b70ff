#include "slmopt/instance_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "slmopt/energy.hpp"

namespace slmopt {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error("instance/plan file: " + what);
}

const json& field(const json& obj, const char* key, const std::string& ctx) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(ctx + ": missing field '" + key + "'");
  return *it;
}

double number(const json& obj, const char* key, const std::string& ctx) {
  const json& v = field(obj, key, ctx);
  if (!v.is_number()) fail(ctx + ": field '" + key + "' must be a number");
  return v.get<double>();
}

double number_or(const json& obj, const char* key, double fallback,
                 const std::string& ctx) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) fail(ctx + ": field '" + key + "' must be a number");
  return it->get<double>();
}

RegressionConstants regression(const json& obj, const std::string& ctx) {
  return {number(obj, "a", ctx), number(obj, "b", ctx), number(obj, "c", ctx)};
}

}  // namespace

Instance parse_instance(const json& doc) {
  if (!doc.is_object()) fail("top level must be an object");
  const int version =
      field(doc, "schema_version", "instance").get<int>();
  if (version != kInstanceSchemaVersion)
    fail("unsupported instance schema_version " + std::to_string(version));

  Instance ins;

  {
    const json& m = field(doc, "machine", "instance");
    const std::string ctx = "machine";
    MachineSpec& spec = ins.machine;
    spec.platform_length = number(m, "platform_length_mm", ctx);
    spec.platform_width = number(m, "platform_width_mm", ctx);
    spec.platform_height = number(m, "platform_height_mm", ctx);
    spec.boundary_margin = number_or(m, "boundary_margin_mm", 0.0, ctx);
    spec.part_gap = number_or(m, "part_gap_mm", 0.0, ctx);
    spec.recoat_layer_time = number(m, "recoat_layer_time_s", ctx);
    spec.preheat_time = number_or(m, "preheat_time_s", 0.0, ctx);
    spec.cool_time = number_or(m, "cool_time_s", 0.0, ctx);

    if (m.contains("heating_constants"))
      spec.heating_constants = regression(m["heating_constants"], ctx);
    if (m.contains("cooling_constants"))
      spec.cooling_constants = regression(m["cooling_constants"], ctx);
    if (m.contains("temperatures_c")) {
      const json& t = m["temperatures_c"];
      spec.temperatures = PlatformTemperatures{
          number(t, "initial", ctx), number(t, "preheated", ctx),
          number(t, "before_cooling", ctx), number(t, "final", ctx)};
    }
    // The regressions, when supplied with temperatures, define the durations.
    if (spec.heating_constants && spec.temperatures)
      spec.preheat_time = regression_duration(
          RegressionKind::heating, *spec.heating_constants,
          spec.temperatures->initial, spec.temperatures->preheated);
    if (spec.cooling_constants && spec.temperatures)
      spec.cool_time = regression_duration(
          RegressionKind::cooling, *spec.cooling_constants,
          spec.temperatures->before_cooling, spec.temperatures->final);

    const json& powers = field(m, "subsystem_power_w", ctx);
    const json& coeffs = field(m, "state_coefficients", ctx);
    for (int f = 0; f < kSubsystemCount; ++f) {
      const auto fi = static_cast<std::size_t>(f);
      const char* fname = kSubsystemNames[fi];
      spec.subsystem_power[fi] =
          number(powers, fname, ctx + ".subsystem_power_w");
      const json& row = field(coeffs, fname, ctx + ".state_coefficients");
      for (int l = 0; l < kSubprocessCount; ++l) {
        const auto li = static_cast<std::size_t>(l);
        spec.state_coefficient[fi][li] = number(
            row, kSubprocessNames[li],
            ctx + ".state_coefficients." + fname);
      }
    }
  }

  {
    const json& p = field(doc, "process", "instance");
    const std::string ctx = "process";
    ProcessParams& proc = ins.process;
    proc.laser_count = field(p, "laser_count", ctx).get<int>();
    proc.border_speed = number(p, "border_speed_mm_s", ctx);
    proc.contour_speed = number(p, "contour_speed_mm_s", ctx);
    proc.part_scan_speed = number(p, "part_scan_speed_mm_s", ctx);
    proc.support_scan_speed = number(p, "support_scan_speed_mm_s", ctx);
    proc.layer_thickness = number(p, "layer_thickness_mm", ctx);
    proc.hatch_distance = number(p, "hatch_distance_mm", ctx);
  }

  {
    const json& types = field(doc, "part_types", "instance");
    if (!types.is_array()) fail("part_types must be an array");
    for (const json& t : types) {
      const std::string ctx =
          "part_types[" + std::to_string(ins.part_types.size()) + "]";
      PartType type;
      type.id = field(t, "id", ctx).get<std::string>();
      type.volume = number(t, "volume_mm3", ctx);
      type.surface_area = number(t, "surface_area_mm2", ctx);
      const json& orients = field(t, "orientations", ctx);
      if (!orients.is_array()) fail(ctx + ": orientations must be an array");
      for (const json& o : orients) {
        OrientationGeometry g;
        g.length = number(o, "length_mm", ctx);
        g.width = number(o, "width_mm", ctx);
        g.height = number(o, "height_mm", ctx);
        g.support_volume = number(o, "support_volume_mm3", ctx);
        type.orientations.push_back(g);
      }
      ins.part_types.push_back(std::move(type));
    }
  }

  {
    const json& list = field(doc, "instances", "instance");
    if (!list.is_array()) fail("instances must be an array");
    for (const json& e : list) {
      const std::string ctx =
          "instances[" + std::to_string(ins.parts.size()) + "]";
      const std::string type_id = field(e, "part_type", ctx).get<std::string>();
      int type_index = -1;
      for (std::size_t i = 0; i < ins.part_types.size(); ++i)
        if (ins.part_types[i].id == type_id) type_index = static_cast<int>(i);
      if (type_index < 0) fail(ctx + ": unknown part_type '" + type_id + "'");
      const long copies = field(e, "copies", ctx).get<long>();
      if (copies < 1) fail(ctx + ": copies must be >= 1");
      for (long c = 1; c <= copies; ++c)
        ins.parts.push_back(
            {type_id + "#" + std::to_string(c), type_index});
    }
  }

  return ins;
}

Instance load_instance_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path.string());
  json doc;
  in >> doc;  // json parse errors carry line/column context
  return parse_instance(doc);
}

PlanFile parse_plan(const json& doc) {
  if (!doc.is_object()) fail("top level must be an object");
  const int version = field(doc, "schema_version", "plan").get<int>();
  if (version != kPlanSchemaVersion)
    fail("unsupported plan schema_version " + std::to_string(version));

  PlanFile out;
  out.instance_checksum =
      field(doc, "instance_checksum", "plan").get<std::string>();

  if (doc.contains("provenance")) {
    const json& p = doc["provenance"];
    if (p.contains("solver")) out.provenance.solver = p["solver"].get<std::string>();
    if (p.contains("seed")) out.provenance.seed = p["seed"].get<long>();
    if (p.contains("gap") && p["gap"].is_number())
      out.provenance.gap = p["gap"].get<double>();
  }

  const json& batches = field(doc, "batches", "plan");
  if (!batches.is_array()) fail("batches must be an array");
  for (const json& b : batches) {
    const std::string ctx =
        "batches[" + std::to_string(out.plan.batches.size()) + "]";
    Batch batch;
    if (b.contains("aggregate")) {
      const json& a = b["aggregate"];
      BatchAggregate agg;
      agg.surface_area = number(a, "surface_area_mm2", ctx);
      agg.part_volume = number(a, "part_volume_mm3", ctx);
      agg.support_volume = number(a, "support_volume_mm3", ctx);
      agg.slices = field(a, "slices", ctx).get<long>();
      agg.part_count = field(a, "part_count", ctx).get<int>();
      batch.aggregate = agg;
      if (b.contains("placements") && !b["placements"].empty())
        fail(ctx + ": a batch carries either placements or an aggregate");
    } else {
      const json& placements = field(b, "placements", ctx);
      if (!placements.is_array()) fail(ctx + ": placements must be an array");
      for (const json& p : placements) {
        Placement pl;
        pl.instance_id = field(p, "instance_id", ctx).get<std::string>();
        pl.orientation_index = field(p, "orientation_index", ctx).get<int>();
        pl.x = number(p, "x_mm", ctx);
        pl.y = number(p, "y_mm", ctx);
        pl.rotated = field(p, "rotated", ctx).get<bool>();
        batch.placements.push_back(std::move(pl));
      }
    }
    out.plan.batches.push_back(std::move(batch));
  }
  return out;
}

PlanFile load_plan_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path.string());
  json doc;
  in >> doc;
  return parse_plan(doc);
}

json plan_to_json(const PlanFile& pf) {
  json doc;
  doc["schema_version"] = kPlanSchemaVersion;
  doc["instance_checksum"] = pf.instance_checksum;
  if (pf.provenance.solver || pf.provenance.seed || pf.provenance.gap) {
    json p = json::object();
    if (pf.provenance.solver) p["solver"] = *pf.provenance.solver;
    if (pf.provenance.seed) p["seed"] = *pf.provenance.seed;
    if (pf.provenance.gap) p["gap"] = *pf.provenance.gap;
    doc["provenance"] = std::move(p);
  }
  json batches = json::array();
  for (const Batch& b : pf.plan.batches) {
    json jb = json::object();
    if (b.is_aggregate()) {
      const BatchAggregate& a = *b.aggregate;
      jb["aggregate"] = {{"surface_area_mm2", a.surface_area},
                         {"part_volume_mm3", a.part_volume},
                         {"support_volume_mm3", a.support_volume},
                         {"slices", a.slices},
                         {"part_count", a.part_count}};
    } else {
      json pls = json::array();
      for (const Placement& pl : b.placements)
        pls.push_back({{"instance_id", pl.instance_id},
                       {"orientation_index", pl.orientation_index},
                       {"x_mm", pl.x},
                       {"y_mm", pl.y},
                       {"rotated", pl.rotated}});
      jb["placements"] = std::move(pls);
    }
    batches.push_back(std::move(jb));
  }
  doc["batches"] = std::move(batches);
  return doc;
}

void save_plan_file(const std::filesystem::path& path, const PlanFile& pf) {
  std::ofstream out(path);
  if (!out) fail("cannot write " + path.string());
  out << plan_to_json(pf).dump(2) << '\n';
}

std::string checksum_hex(std::uint64_t fingerprint) {
  std::ostringstream os;
  os << std::hex << fingerprint;
  return os.str();
}

PlanFile make_plan_file(const Plan& plan, const Instance& ins,
                        PlanProvenance provenance) {
  PlanFile pf;
  pf.instance_checksum = checksum_hex(instance_fingerprint(ins));
  pf.plan = plan;
  pf.provenance = std::move(provenance);
  return pf;
}

}  // namespace slmopt
