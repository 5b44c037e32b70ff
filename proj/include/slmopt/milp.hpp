#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "slmopt/domain.hpp"

namespace slmopt {

enum class VarKind { binary, continuous };

struct Variable {
  std::string name;
  VarKind kind = VarKind::continuous;
  double lb = 0;
  double ub = std::numeric_limits<double>::infinity();
};

struct LinearTerm {
  int var = -1;
  double coef = 0;
};

enum class Sense { le, ge, eq };

struct Constraint {
  std::string name;
  std::vector<LinearTerm> terms;
  Sense sense = Sense::le;
  double rhs = 0;
};

struct LinearModel {
  std::vector<Variable> variables;
  std::vector<Constraint> constraints;
  std::vector<LinearTerm> objective;  // minimized

  int add_variable(std::string name, VarKind kind, double lb, double ub);
  void add_constraint(std::string name, std::vector<LinearTerm> terms,
                      Sense sense, double rhs);
  int find_variable(std::string_view name) const;  // -1 when absent
};

// Structured variable ids of the batch-scheduling model. Name indices are
// 1-based to keep exported files readable; accessors take 0-based indices.
struct VariableRegistry {
  int part_count = 0;
  int batch_count = 0;
  std::vector<int> orientation_counts;

  std::vector<std::vector<int>> assign;            // X[j][b]
  std::vector<std::vector<int>> orientation;       // Y[j][k]
  std::vector<int> opened;                         // Z[b]
  std::vector<int> pos_x, pos_y, axis_aligned;     // x, y, O per part
  std::vector<std::vector<int>> left_of, below;    // PL[j][j2], PB[j][j2]
  std::vector<int> batch_height, batch_energy;     // H[b], E[b]
  std::vector<std::vector<int>> subprocess_time;   // T[l][b]
  std::vector<std::vector<int>> support_in_batch;  // e[j][b]
};

// Big-M bounds per constraint family, each covering the supremum of the
// gated expression over the instance.
struct BigMTable {
  double assignment = 0;   // batch-use gate
  double height = 0;       // height linking
  double length_gate = 0;  // boundary along the length axis
  double width_gate = 0;   // boundary along the width axis
  double left_len = 0;     // left-of separation, length footprint
  double left_wid = 0;     // left-of separation, width footprint
  double below_wid = 0;    // below separation, width footprint
  double below_len = 0;    // below separation, length footprint
  double support = 0;      // support-volume linking
};

BigMTable bigM_values(const Instance& instance);

struct ModelOptions {
  bool symmetry_break = true;
  bool tight_bigM = true;
  // Scale preheat/cool durations by the batch-open indicator so unopened
  // batches carry no constant energy offset. Off reproduces the fixed-time
  // formulation.
  bool gate_ph_co = true;
};

struct BuiltModel {
  LinearModel model;
  VariableRegistry registry;
  ModelOptions options;
  int n_batches = 0;
  std::uint64_t instance_id = 0;
};

BuiltModel build_model(const Instance& instance, int n_batches,
                       ModelOptions options = {});

// Deterministic LP-format text (Minimize / Subject To / Bounds / Binaries /
// End). Byte-identical for identical models.
std::string emit_lp(const LinearModel& model);

struct Solution {
  std::vector<double> values;  // indexed like model.variables
  std::optional<double> objective;
};

// Parses "name value" lines; '#' starts a comment, "=obj= value" carries the
// solver objective. Missing variables default to 0. Binaries are rounded to
// the nearest bit; values farther than 1e-4 from {0, 1} are an error.
Solution parse_solution(std::string_view text, const LinearModel& model);

// Reconstructs the plan encoded by an integral assignment: batch membership
// from X/Z, orientations from Y, placements from (x, y, O). Only batches with
// parts are emitted.
Plan decode_plan(const Solution& solution, const BuiltModel& built,
                 const Instance& instance);

using SolveHook = std::function<std::optional<Solution>(const BuiltModel&)>;

// Batch-count search: start at ceil(eta*|J|) available batches and grow by
// one while the model is infeasible or the optimum opens every batch.
Plan batch_count_trial(const Instance& instance, double eta,
                       const SolveHook& solve_hook, ModelOptions options = {});

int initial_batch_count(double eta, int part_count);

}  // namespace slmopt
