#include "slmopt/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slmopt {

double buildup_rate(int laser_count, double hatch_distance,
                    double layer_thickness, double scan_speed) {
  if (laser_count < 1 || hatch_distance <= 0 || layer_thickness <= 0 ||
      scan_speed <= 0)
    throw std::invalid_argument("buildup_rate: all inputs must be positive");
  return laser_count * hatch_distance * layer_thickness * scan_speed;
}

double part_buildup_rate(const ProcessParams& p) {
  return buildup_rate(p.laser_count, p.hatch_distance, p.layer_thickness,
                      p.part_scan_speed);
}

double support_buildup_rate(const ProcessParams& p) {
  return buildup_rate(p.laser_count, p.hatch_distance, p.layer_thickness,
                      p.support_scan_speed);
}

double regression_duration(RegressionKind kind, const RegressionConstants& c,
                           double t_start, double t_end) {
  const auto eval = [&](double t) {
    return kind == RegressionKind::heating ? c.a * t * t + c.b * t - c.c
                                           : c.a * t * t - c.b * t + c.c;
  };
  const double dt = eval(t_end) - eval(t_start);
  if (dt < 0)
    throw std::domain_error(
        "regression_duration: non-physical regression constants");
  return dt;
}

SubprocessTimes subprocess_times(const Batch& batch, const Instance& ins) {
  SubprocessTimes t{};
  const MachineSpec& m = ins.machine;
  const ProcessParams& p = ins.process;

  t[static_cast<int>(Subprocess::ph)] = m.preheat_time;
  t[static_cast<int>(Subprocess::co)] = m.cool_time;

  if (batch.is_aggregate()) {
    const BatchAggregate& a = *batch.aggregate;
    const double border_rate = p.laser_count * p.border_speed * p.layer_thickness;
    const double contour_rate =
        p.laser_count * p.contour_speed * p.layer_thickness;
    t[static_cast<int>(Subprocess::sb)] = a.surface_area / border_rate;
    t[static_cast<int>(Subprocess::fc)] = a.surface_area / contour_rate;
    t[static_cast<int>(Subprocess::vh)] = a.part_volume / part_buildup_rate(p);
    t[static_cast<int>(Subprocess::ss)] =
        a.support_volume / support_buildup_rate(p);
    t[static_cast<int>(Subprocess::rc)] =
        static_cast<double>(a.slices) * m.recoat_layer_time;
    return t;
  }

  if (batch.placements.empty())
    throw std::invalid_argument("subprocess_times: empty batch");

  double surface = 0, volume = 0, support = 0, batch_height = 0;
  for (const Placement& pl : batch.placements) {
    const int idx = ins.find_part(pl.instance_id);
    if (idx < 0)
      throw std::out_of_range("subprocess_times: unknown instance id " +
                              pl.instance_id);
    const PartType& type = ins.type_of_part(idx);
    if (pl.orientation_index < 0 ||
        pl.orientation_index >= static_cast<int>(type.orientations.size()))
      throw std::out_of_range("subprocess_times: orientation index out of range for " +
                              pl.instance_id);
    const OrientationGeometry& o =
        type.orientations[static_cast<std::size_t>(pl.orientation_index)];
    surface += type.surface_area;
    volume += type.volume;
    support += o.support_volume;
    batch_height = std::max(batch_height, o.height);
  }

  t[static_cast<int>(Subprocess::sb)] =
      surface / (p.laser_count * p.border_speed * p.layer_thickness);
  t[static_cast<int>(Subprocess::fc)] =
      surface / (p.laser_count * p.contour_speed * p.layer_thickness);
  t[static_cast<int>(Subprocess::vh)] = volume / part_buildup_rate(p);
  t[static_cast<int>(Subprocess::ss)] = support / support_buildup_rate(p);
  t[static_cast<int>(Subprocess::rc)] =
      static_cast<double>(slice_count(batch_height, p.layer_thickness)) *
      m.recoat_layer_time;
  return t;
}

double subprocess_power(const MachineSpec& m, Subprocess l) {
  double watts = 0;
  for (int f = 0; f < kSubsystemCount; ++f)
    watts += m.subsystem_power[static_cast<std::size_t>(f)] *
             m.coefficient(static_cast<Subsystem>(f), l);
  return watts;
}

double batch_energy(const SubprocessTimes& times, const MachineSpec& m) {
  double joules = 0;
  for (int l = 0; l < kSubprocessCount; ++l)
    joules += subprocess_power(m, static_cast<Subprocess>(l)) *
              times[static_cast<std::size_t>(l)];
  return joules;
}

EnergyBreakdown plan_energy(const Plan& plan, const Instance& ins) {
  EnergyBreakdown out;
  out.machine_id = machine_fingerprint(ins.machine);
  const MachineSpec& m = ins.machine;

  for (const Batch& batch : plan.batches) {
    if (!batch.is_aggregate() && batch.placements.empty()) {
      // Unopened batches draw nothing.
      out.by_batch.push_back(0);
      out.times.push_back(SubprocessTimes{});
      continue;
    }
    const SubprocessTimes t = subprocess_times(batch, ins);
    double e_batch = 0;
    for (int l = 0; l < kSubprocessCount; ++l) {
      const auto li = static_cast<std::size_t>(l);
      for (int f = 0; f < kSubsystemCount; ++f) {
        const auto fi = static_cast<std::size_t>(f);
        const double e = m.subsystem_power[fi] *
                         m.coefficient(static_cast<Subsystem>(f),
                                       static_cast<Subprocess>(l)) *
                         t[li];
        out.by_subsystem[fi] += e;
        out.by_subprocess[li] += e;
        e_batch += e;
      }
    }
    out.by_batch.push_back(e_batch);
    out.times.push_back(t);
    out.total += e_batch;
    ++out.batch_count;
  }
  return out;
}

SavingsReport compare_plans(const EnergyBreakdown& baseline,
                            const EnergyBreakdown& candidate) {
  if (baseline.machine_id != candidate.machine_id)
    throw std::invalid_argument(
        "compare_plans: breakdowns computed against different machine specs");

  SavingsReport r;
  r.baseline_batches = baseline.batch_count;
  r.candidate_batches = candidate.batch_count;
  r.total_saving = baseline.total - candidate.total;
  for (int f = 0; f < kSubsystemCount; ++f) {
    const auto fi = static_cast<std::size_t>(f);
    r.by_subsystem[fi] = baseline.by_subsystem[fi] - candidate.by_subsystem[fi];
  }
  for (int l = 0; l < kSubprocessCount; ++l) {
    const auto li = static_cast<std::size_t>(l);
    r.by_subprocess[li] =
        baseline.by_subprocess[li] - candidate.by_subprocess[li];
  }
  if (r.total_saving != 0) {
    for (int f = 0; f < kSubsystemCount; ++f) {
      const auto fi = static_cast<std::size_t>(f);
      r.subsystem_share_pct[fi] = r.by_subsystem[fi] / r.total_saving * 100.0;
    }
    for (int l = 0; l < kSubprocessCount; ++l) {
      const auto li = static_cast<std::size_t>(l);
      r.subprocess_share_pct[li] =
          r.by_subprocess[li] / r.total_saving * 100.0;
    }
  }
  return r;
}

}  // namespace slmopt
