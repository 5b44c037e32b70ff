#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "slmopt/domain.hpp"

namespace slmopt {

using SubprocessTimes = std::array<double, kSubprocessCount>;

// Volumetric deposition rate: lasers * hatch distance * layer thickness * speed.
double buildup_rate(int laser_count, double hatch_distance,
                    double layer_thickness, double scan_speed);

double part_buildup_rate(const ProcessParams& p);
double support_buildup_rate(const ProcessParams& p);

enum class RegressionKind { heating, cooling };

// Duration of a heating or cooling ramp between two platform temperatures,
// from the quadratic time-temperature fit. Heating: t(T) = a*T^2 + b*T - c;
// cooling: t(T) = a*T^2 - b*T + c. Returns t(t_end) - t(t_start); throws
// when the fit yields a negative duration.
double regression_duration(RegressionKind kind, const RegressionConstants& c,
                           double t_start, double t_end);

// Durations of the seven subprocesses for one batch. Scan terms are sums over
// the parts in the batch; recoating follows the tallest chosen orientation.
SubprocessTimes subprocess_times(const Batch& batch, const Instance& instance);

// Combined power drawn during subprocess l: sum over subsystems of
// power * state coefficient.
double subprocess_power(const MachineSpec& machine, Subprocess l);

// Energy of one batch given its subprocess durations.
double batch_energy(const SubprocessTimes& times, const MachineSpec& machine);

struct EnergyBreakdown {
  double total = 0;  // J
  std::array<double, kSubsystemCount> by_subsystem{};
  std::array<double, kSubprocessCount> by_subprocess{};
  std::vector<double> by_batch;
  std::vector<SubprocessTimes> times;  // per batch
  std::uint64_t machine_id = 0;
  int batch_count = 0;
};

EnergyBreakdown plan_energy(const Plan& plan, const Instance& instance);

// Savings of `candidate` relative to `baseline`; positive entries mean the
// candidate consumes less. Percentages are shares of the total saving.
struct SavingsReport {
  double total_saving = 0;  // J
  std::array<double, kSubsystemCount> by_subsystem{};
  std::array<double, kSubprocessCount> by_subprocess{};
  std::array<double, kSubsystemCount> subsystem_share_pct{};
  std::array<double, kSubprocessCount> subprocess_share_pct{};
  int baseline_batches = 0;
  int candidate_batches = 0;
};

// Throws when the two breakdowns were computed against different machines.
SavingsReport compare_plans(const EnergyBreakdown& baseline,
                            const EnergyBreakdown& candidate);

}  // namespace slmopt
