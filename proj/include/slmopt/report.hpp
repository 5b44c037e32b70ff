#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "slmopt/domain.hpp"
#include "slmopt/energy.hpp"

namespace slmopt {

struct BatchRow {
  int index = 0;  // 1-based in output
  int parts = 0;
  double surface_area = 0;     // mm^2
  double part_volume = 0;      // mm^3
  double support_volume = 0;   // mm^3
  long slices = 0;
  std::optional<double> utilization_pct;  // placement batches only
  double makespan_s = 0;       // sum of subprocess times
  double energy_j = 0;
};

struct EvaluationReport {
  std::vector<BatchRow> rows;
  BatchRow total;
  EnergyBreakdown breakdown;
  double energy_excl_phco_j = 0;
  double ev_j_per_mm3 = 0;  // total energy / total part volume of the instance
  std::vector<std::string> notes;
};

EvaluationReport evaluate_plan(const Plan& plan, const Instance& instance);

nlohmann::json report_to_json(const EvaluationReport& report);

// Table-style CSVs; values rounded to 2 decimals, total rows computed from
// the rounded values so the files stay internally additive.
std::string batch_table_csv(const EvaluationReport& report);
std::string subsystem_energy_csv(const EnergyBreakdown& breakdown);
std::string subprocess_energy_csv(const EnergyBreakdown& breakdown);

// Expected savings used to reconcile a comparison against published numbers;
// keys are subsystem/subprocess short names, values in MJ.
struct ReferenceSavings {
  std::map<std::string, double> by_subsystem_mj;
  std::map<std::string, double> by_subprocess_mj;
  std::optional<double> total_mj;
};

ReferenceSavings parse_reference_savings(const nlohmann::json& doc);

struct ReconciliationRow {
  std::string name;
  double computed_mj = 0;
  double reference_mj = 0;
  double deviation_pct = 0;
  bool mismatch = false;
};

struct ComparisonReport {
  SavingsReport savings;
  std::vector<ReconciliationRow> reconciliation;
  std::vector<std::string> notes;
};

ComparisonReport compare_with_reference(
    const EnergyBreakdown& baseline, const EnergyBreakdown& candidate,
    const std::optional<ReferenceSavings>& reference);

nlohmann::json comparison_to_json(const ComparisonReport& report);
std::string savings_by_subsystem_csv(const ComparisonReport& report);
std::string savings_by_subprocess_csv(const ComparisonReport& report);
std::string reconciliation_csv(const ComparisonReport& report);

}  // namespace slmopt
