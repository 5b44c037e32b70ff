#include "slmopt/report.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "slmopt/packing.hpp"

namespace slmopt {

namespace {

constexpr double kMj = 1e6;

double round2(double v) {
  const double r = std::round(v * 100.0) / 100.0;
  return r == 0 ? 0.0 : r;  // avoid "-0.00" cells
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return std::string(buf);
}

constexpr const char* kUtilizationNote =
    "utilization_pct is the summed projected part area divided by the "
    "platform area; reported as an indicative figure, no standard definition "
    "exists for it";

}  // namespace

EvaluationReport evaluate_plan(const Plan& plan, const Instance& ins) {
  EvaluationReport rep;
  rep.breakdown = plan_energy(plan, ins);

  const double platform_area =
      ins.machine.platform_length * ins.machine.platform_width;

  for (std::size_t b = 0; b < plan.batches.size(); ++b) {
    const Batch& batch = plan.batches[b];
    BatchRow row;
    row.index = static_cast<int>(b) + 1;

    if (batch.is_aggregate()) {
      const BatchAggregate& a = *batch.aggregate;
      row.parts = a.part_count;
      row.surface_area = a.surface_area;
      row.part_volume = a.part_volume;
      row.support_volume = a.support_volume;
      row.slices = a.slices;
    } else {
      double area = 0, hmax = 0;
      for (const Placement& pl : batch.placements) {
        const PartType& t = ins.type_of_part(ins.find_part(pl.instance_id));
        const OrientationGeometry& o =
            t.orientations[static_cast<std::size_t>(pl.orientation_index)];
        row.surface_area += t.surface_area;
        row.part_volume += t.volume;
        row.support_volume += o.support_volume;
        area += o.length * o.width;
        hmax = std::max(hmax, o.height);
      }
      row.parts = static_cast<int>(batch.placements.size());
      row.slices = slice_count(hmax, ins.process.layer_thickness);
      row.utilization_pct = area / platform_area * 100.0;
    }

    const SubprocessTimes& t = rep.breakdown.times[b];
    row.makespan_s = std::accumulate(t.begin(), t.end(), 0.0);
    row.energy_j = rep.breakdown.by_batch[b];
    rep.rows.push_back(row);
  }

  BatchRow& total = rep.total;
  total.index = 0;
  double area_sum = 0;
  bool any_util = false;
  for (const BatchRow& r : rep.rows) {
    total.parts += r.parts;
    total.surface_area += r.surface_area;
    total.part_volume += r.part_volume;
    total.support_volume += r.support_volume;
    total.slices += r.slices;
    total.makespan_s += r.makespan_s;
    total.energy_j += r.energy_j;
    if (r.utilization_pct) {
      any_util = true;
      area_sum += *r.utilization_pct / 100.0 * platform_area;
    }
  }
  if (any_util && !rep.rows.empty())
    total.utilization_pct =
        area_sum / (platform_area * static_cast<double>(rep.rows.size())) *
        100.0;

  rep.energy_excl_phco_j =
      rep.breakdown.total -
      rep.breakdown.by_subprocess[static_cast<int>(Subprocess::ph)] -
      rep.breakdown.by_subprocess[static_cast<int>(Subprocess::co)];

  double instance_volume = 0;
  for (const PartInstance& part : ins.parts)
    instance_volume += ins.type_of(part).volume;
  rep.ev_j_per_mm3 =
      instance_volume > 0 ? rep.breakdown.total / instance_volume : 0;

  rep.notes.push_back(kUtilizationNote);
  return rep;
}

nlohmann::json report_to_json(const EvaluationReport& rep) {
  using nlohmann::json;
  json doc;
  json rows = json::array();
  const auto row_json = [](const BatchRow& r, bool is_total) {
    json jr;
    jr["batch"] = is_total ? json("total") : json(r.index);
    jr["parts"] = r.parts;
    jr["surface_area_mm2"] = r.surface_area;
    jr["part_volume_mm3"] = r.part_volume;
    jr["support_volume_mm3"] = r.support_volume;
    jr["slices"] = r.slices;
    if (r.utilization_pct) jr["utilization_pct"] = *r.utilization_pct;
    jr["makespan_s"] = r.makespan_s;
    jr["energy_j"] = r.energy_j;
    return jr;
  };
  for (const BatchRow& r : rep.rows) rows.push_back(row_json(r, false));
  doc["batches"] = std::move(rows);
  doc["total"] = row_json(rep.total, true);

  json by_subsystem = json::object();
  for (int f = 0; f < kSubsystemCount; ++f)
    by_subsystem[kSubsystemNames[static_cast<std::size_t>(f)]] =
        rep.breakdown.by_subsystem[static_cast<std::size_t>(f)];
  json by_subprocess = json::object();
  json times = json::object();
  for (int l = 0; l < kSubprocessCount; ++l) {
    double t = 0;
    for (const SubprocessTimes& bt : rep.breakdown.times)
      t += bt[static_cast<std::size_t>(l)];
    by_subprocess[kSubprocessNames[static_cast<std::size_t>(l)]] =
        rep.breakdown.by_subprocess[static_cast<std::size_t>(l)];
    times[kSubprocessNames[static_cast<std::size_t>(l)]] = t;
  }
  doc["energy_by_subsystem_j"] = std::move(by_subsystem);
  doc["energy_by_subprocess_j"] = std::move(by_subprocess);
  doc["time_by_subprocess_s"] = std::move(times);
  doc["energy_total_j"] = rep.breakdown.total;
  doc["energy_excl_phco_j"] = rep.energy_excl_phco_j;
  doc["ev_j_per_mm3"] = rep.ev_j_per_mm3;
  doc["notes"] = rep.notes;
  return doc;
}

std::string batch_table_csv(const EvaluationReport& rep) {
  std::ostringstream os;
  os << "batch,parts,surface_area_mm2,part_volume_mm3,support_volume_mm3,"
        "slices,utilization_pct,makespan_s,energy_mj\n";
  // Rows are rounded first and the total recomputed from the rounded values,
  // keeping the file internally additive.
  double sum_surface = 0, sum_volume = 0, sum_support = 0, sum_makespan = 0,
         sum_energy = 0;
  long sum_slices = 0;
  int sum_parts = 0;
  for (const BatchRow& r : rep.rows) {
    const double surface = round2(r.surface_area);
    const double volume = round2(r.part_volume);
    const double support = round2(r.support_volume);
    const double makespan = round2(r.makespan_s);
    const double energy = round2(r.energy_j / kMj);
    sum_surface += surface;
    sum_volume += volume;
    sum_support += support;
    sum_makespan += makespan;
    sum_energy += energy;
    sum_slices += r.slices;
    sum_parts += r.parts;
    os << r.index << ',' << r.parts << ',' << fixed2(surface) << ','
       << fixed2(volume) << ',' << fixed2(support) << ',' << r.slices << ',';
    if (r.utilization_pct) os << fixed2(round2(*r.utilization_pct));
    os << ',' << fixed2(makespan) << ',' << fixed2(energy) << '\n';
  }
  os << "total," << sum_parts << ',' << fixed2(sum_surface) << ','
     << fixed2(sum_volume) << ',' << fixed2(sum_support) << ',' << sum_slices
     << ',';
  if (rep.total.utilization_pct) os << fixed2(round2(*rep.total.utilization_pct));
  os << ',' << fixed2(sum_makespan) << ',' << fixed2(sum_energy) << '\n';
  return os.str();
}

std::string subsystem_energy_csv(const EnergyBreakdown& bd) {
  std::ostringstream os;
  os << "subsystem,label,energy_mj\n";
  double sum = 0;
  for (int f = 0; f < kSubsystemCount; ++f) {
    const auto fi = static_cast<std::size_t>(f);
    const double e = round2(bd.by_subsystem[fi] / kMj);
    sum += e;
    os << kSubsystemNames[fi] << ',' << kSubsystemLabels[fi] << ','
       << fixed2(e) << '\n';
  }
  os << "total,," << fixed2(sum) << '\n';
  return os.str();
}

std::string subprocess_energy_csv(const EnergyBreakdown& bd) {
  std::ostringstream os;
  os << "subprocess,label,time_s,energy_mj\n";
  double sum_e = 0, sum_t = 0;
  for (int l = 0; l < kSubprocessCount; ++l) {
    const auto li = static_cast<std::size_t>(l);
    double t = 0;
    for (const SubprocessTimes& bt : bd.times) t += bt[li];
    const double tr = round2(t);
    const double e = round2(bd.by_subprocess[li] / kMj);
    sum_t += tr;
    sum_e += e;
    os << kSubprocessNames[li] << ',' << kSubprocessLabels[li] << ','
       << fixed2(tr) << ',' << fixed2(e) << '\n';
  }
  os << "total,," << fixed2(sum_t) << ',' << fixed2(sum_e) << '\n';
  return os.str();
}

ReferenceSavings parse_reference_savings(const nlohmann::json& doc) {
  ReferenceSavings ref;
  if (doc.contains("by_subsystem_mj"))
    for (const auto& [key, value] : doc["by_subsystem_mj"].items())
      ref.by_subsystem_mj[key] = value.get<double>();
  if (doc.contains("by_subprocess_mj"))
    for (const auto& [key, value] : doc["by_subprocess_mj"].items())
      ref.by_subprocess_mj[key] = value.get<double>();
  if (doc.contains("total_mj")) ref.total_mj = doc["total_mj"].get<double>();
  return ref;
}

ComparisonReport compare_with_reference(
    const EnergyBreakdown& baseline, const EnergyBreakdown& candidate,
    const std::optional<ReferenceSavings>& reference) {
  ComparisonReport rep;
  rep.savings = compare_plans(baseline, candidate);

  if (reference) {
    const auto reconcile = [&rep](const std::string& name, double computed_mj,
                                  double reference_mj) {
      ReconciliationRow row;
      row.name = name;
      row.computed_mj = computed_mj;
      row.reference_mj = reference_mj;
      const double denom = std::max(std::abs(reference_mj), 1e-9);
      row.deviation_pct = (computed_mj - reference_mj) / denom * 100.0;
      row.mismatch = std::abs(computed_mj - reference_mj) >
                     0.05 * std::max(std::abs(reference_mj), 0.01);
      rep.reconciliation.push_back(row);
      if (row.mismatch)
        rep.notes.push_back(
            "reconciliation mismatch for '" + name + "': computed " +
            fixed2(computed_mj) + " MJ vs reference " + fixed2(reference_mj) +
            " MJ; the computed value is kept, the reference is not "
            "reproducible from the given inputs");
    };
    for (const auto& [name, mj] : reference->by_subsystem_mj) {
      const auto f = subsystem_from_name(name);
      if (!f) continue;
      reconcile("subsystem " + name,
                rep.savings.by_subsystem[static_cast<std::size_t>(
                    static_cast<int>(*f))] /
                    kMj,
                mj);
    }
    for (const auto& [name, mj] : reference->by_subprocess_mj) {
      const auto l = subprocess_from_name(name);
      if (!l) continue;
      reconcile("subprocess " + name,
                rep.savings.by_subprocess[static_cast<std::size_t>(
                    static_cast<int>(*l))] /
                    kMj,
                mj);
    }
    if (reference->total_mj)
      reconcile("total", rep.savings.total_saving / kMj, *reference->total_mj);
  }
  return rep;
}

nlohmann::json comparison_to_json(const ComparisonReport& rep) {
  using nlohmann::json;
  json doc;
  doc["total_saving_j"] = rep.savings.total_saving;
  doc["baseline_batches"] = rep.savings.baseline_batches;
  doc["candidate_batches"] = rep.savings.candidate_batches;
  json fs = json::object(), fp = json::object();
  json ls = json::object(), lp = json::object();
  for (int f = 0; f < kSubsystemCount; ++f) {
    const auto fi = static_cast<std::size_t>(f);
    fs[kSubsystemNames[fi]] = rep.savings.by_subsystem[fi];
    fp[kSubsystemNames[fi]] = rep.savings.subsystem_share_pct[fi];
  }
  for (int l = 0; l < kSubprocessCount; ++l) {
    const auto li = static_cast<std::size_t>(l);
    ls[kSubprocessNames[li]] = rep.savings.by_subprocess[li];
    lp[kSubprocessNames[li]] = rep.savings.subprocess_share_pct[li];
  }
  doc["saving_by_subsystem_j"] = std::move(fs);
  doc["subsystem_share_pct"] = std::move(fp);
  doc["saving_by_subprocess_j"] = std::move(ls);
  doc["subprocess_share_pct"] = std::move(lp);
  if (!rep.reconciliation.empty()) {
    json rows = json::array();
    for (const ReconciliationRow& r : rep.reconciliation)
      rows.push_back({{"name", r.name},
                      {"computed_mj", r.computed_mj},
                      {"reference_mj", r.reference_mj},
                      {"deviation_pct", r.deviation_pct},
                      {"mismatch", r.mismatch}});
    doc["reconciliation"] = std::move(rows);
  }
  doc["notes"] = rep.notes;
  return doc;
}

std::string savings_by_subsystem_csv(const ComparisonReport& rep) {
  std::ostringstream os;
  os << "subsystem,label,saving_mj,share_pct\n";
  double sum = 0;
  for (int f = 0; f < kSubsystemCount; ++f) {
    const auto fi = static_cast<std::size_t>(f);
    const double mj = round2(rep.savings.by_subsystem[fi] / kMj);
    sum += mj;
    os << kSubsystemNames[fi] << ',' << kSubsystemLabels[fi] << ','
       << fixed2(mj) << ','
       << fixed2(round2(rep.savings.subsystem_share_pct[fi])) << '\n';
  }
  os << "total,," << fixed2(sum) << ",\n";
  return os.str();
}

std::string savings_by_subprocess_csv(const ComparisonReport& rep) {
  std::ostringstream os;
  os << "subprocess,label,saving_mj,share_pct\n";
  double sum = 0;
  for (int l = 0; l < kSubprocessCount; ++l) {
    const auto li = static_cast<std::size_t>(l);
    const double mj = round2(rep.savings.by_subprocess[li] / kMj);
    sum += mj;
    os << kSubprocessNames[li] << ',' << kSubprocessLabels[li] << ','
       << fixed2(mj) << ','
       << fixed2(round2(rep.savings.subprocess_share_pct[li])) << '\n';
  }
  os << "total,," << fixed2(sum) << ",\n";
  return os.str();
}

std::string reconciliation_csv(const ComparisonReport& rep) {
  std::ostringstream os;
  os << "name,computed_mj,reference_mj,deviation_pct,mismatch\n";
  for (const ReconciliationRow& r : rep.reconciliation)
    os << r.name << ',' << fixed2(round2(r.computed_mj)) << ','
       << fixed2(round2(r.reference_mj)) << ','
       << fixed2(round2(r.deviation_pct)) << ','
       << (r.mismatch ? "yes" : "no") << '\n';
  return os.str();
}

}  // namespace slmopt
