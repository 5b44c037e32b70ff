// Acceptance suite: one line per criterion, non-zero exit when any fails.
// Criteria 1 and 2 call the external reference solver (HiGHS through
// tools/solve_lp.py) on exported LP files.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "slmopt/domain.hpp"
#include "slmopt/energy.hpp"
#include "slmopt/instance_io.hpp"
#include "slmopt/milp.hpp"
#include "slmopt/packing.hpp"
#include "slmopt/report.hpp"
#include "slmopt/solver.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace slmopt;
using namespace slmopt::testing;

namespace {

const std::string kDataDir = SLMOPT_DATA_DIR;
const std::string kToolsDir = SLMOPT_TOOLS_DIR;

int g_failures = 0;

void report(int number, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("%s  %d. %s — %s\n", pass ? "PASS" : "FAIL", number, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The twenty deterministic tiny instances shared by criteria 1 and 2.
std::vector<Instance> tiny_instances() {
  std::vector<Instance> out;
  std::mt19937 rng(424242);
  while (out.size() < 20) {
    Instance ins = random_tiny_instance(rng);
    if (validate_instance(ins).empty()) out.push_back(std::move(ins));
  }
  return out;
}

struct SolvedLp {
  std::optional<double> objective;  // nullopt = infeasible
  Solution solution;
};

// Exports every model, solves them in one python invocation, parses back.
std::vector<SolvedLp> solve_externally(
    const std::vector<BuiltModel>& models, const fs::path& dir,
    const std::string& tag) {
  fs::create_directories(dir);
  std::string cmd = "python3 " + kToolsDir + "/solve_lp.py";
  std::vector<fs::path> sol_paths;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const fs::path lp = dir / (tag + std::to_string(i) + ".lp");
    const fs::path sol = dir / (tag + std::to_string(i) + ".sol");
    std::ofstream(lp) << emit_lp(models[i].model);
    sol_paths.push_back(sol);
    cmd += " " + lp.string() + " " + sol.string();
  }
  cmd += " > /dev/null";
  if (std::system(cmd.c_str()) != 0)
    throw std::runtime_error("external solver invocation failed");

  std::vector<SolvedLp> out;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const std::string text = read_file(sol_paths[i]);
    SolvedLp solved;
    if (text.find("# infeasible") == std::string::npos) {
      solved.solution = parse_solution(text, models[i].model);
      solved.objective = solved.solution.objective;
      if (!solved.objective)
        throw std::runtime_error("solution file without an objective line");
    }
    out.push_back(std::move(solved));
  }
  return out;
}

void criterion_1_and_2() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<Instance> instances = tiny_instances();

  struct Combo {
    bool symmetry, tight;
  };
  const std::vector<Combo> combos{{true, true}, {true, false},
                                  {false, true}, {false, false}};

  std::vector<BuiltModel> models;
  for (const Instance& ins : instances)
    for (const Combo& combo : combos) {
      ModelOptions opts;
      opts.symmetry_break = combo.symmetry;
      opts.tight_bigM = combo.tight;
      models.push_back(
          build_model(ins, static_cast<int>(ins.parts.size()), opts));
    }

  const std::vector<SolvedLp> solved =
      solve_externally(models, "acceptance_tmp", "tiny_");

  bool c1_pass = true, c2_pass = true;
  std::string c1_detail, c2_detail;
  double worst_c1 = 0, worst_c2 = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const Instance& ins = instances[i];
    const Plan oracle_plan = brute_force_optimal(ins);
    const double oracle = plan_energy(oracle_plan, ins).total;

    std::vector<double> objectives;
    for (std::size_t c = 0; c < combos.size(); ++c) {
      const std::size_t k = i * combos.size() + c;
      if (!solved[k].objective) {
        c1_pass = false;
        c1_detail = "external solver reported infeasible on instance " +
                    std::to_string(i);
        continue;
      }
      objectives.push_back(*solved[k].objective);

      // decode soundness on the default combo
      if (c == 0) {
        const Plan decoded = decode_plan(solved[k].solution, models[k], ins);
        if (!check_plan_geometry(decoded, ins).empty()) {
          c1_pass = false;
          c1_detail = "decoded optimum violates geometry on instance " +
                      std::to_string(i);
        }
        const double redone = plan_energy(decoded, ins).total;
        worst_c1 = std::max(worst_c1, std::abs(redone - oracle) /
                                          std::max(1.0, oracle));
        if (!rel_close(redone, oracle, 1e-6) ||
            !rel_close(*solved[k].objective, oracle, 1e-6)) {
          c1_pass = false;
          c1_detail = "objective mismatch on instance " + std::to_string(i);
        }
      }
    }
    for (double obj : objectives) {
      worst_c2 = std::max(worst_c2,
                          std::abs(obj - objectives[0]) /
                              std::max(1.0, std::abs(objectives[0])));
      if (!rel_close(obj, objectives[0], 1e-6)) {
        c2_pass = false;
        c2_detail = "option combos disagree on instance " + std::to_string(i);
      }
    }
  }

  const double elapsed = seconds_since(t0);
  if (elapsed >= 60 && c1_pass) {
    c1_pass = false;
    c1_detail = "runtime over budget";
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "20 instances, worst rel gap %.2e, %.1f s (budget 60 s)",
                worst_c1, elapsed);
  report(1, "oracle equivalence (brute force == external MILP optimum)",
         c1_pass, c1_pass ? buf : c1_detail);
  std::snprintf(buf, sizeof buf,
                "symmetry x big-M ablations, worst rel gap %.2e", worst_c2);
  report(2, "ablation invariance of the tiny-instance optimum", c2_pass,
         c2_pass ? buf : c2_detail);
}

void criterion_3_and_4() {
  const auto t0 = std::chrono::steady_clock::now();
  const Instance ins = load_instance_file(kDataDir + "/ins_20_5.json");
  const PlanFile base = load_plan_file(kDataDir + "/baseline_magics_20.json");
  const PlanFile cand = load_plan_file(kDataDir + "/plan_milp_20.json");

  std::ifstream ref_in(kDataDir + "/reference_savings_20.json");
  nlohmann::json ref_doc;
  ref_in >> ref_doc;
  const ReferenceSavings reference = parse_reference_savings(ref_doc);

  const EnergyBreakdown eb = plan_energy(base.plan, ins);
  const EnergyBreakdown ec = plan_energy(cand.plan, ins);
  const ComparisonReport rep = compare_with_reference(eb, ec, reference);
  const double elapsed = seconds_since(t0);

  const double rc_mj =
      rep.savings.by_subprocess[static_cast<int>(Subprocess::rc)] / 1e6;
  const bool c3_pass =
      std::abs(rc_mj - 1.67) <= 0.03 * 1.67 && elapsed < 1.0;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "recoat saving %.3f MJ (target 1.67 +/- 3%%), %.3f s", rc_mj,
                elapsed);
  report(3, "recoating-saving reproduction from published aggregates", c3_pass,
         buf);

  const double ss_mj =
      rep.savings.by_subprocess[static_cast<int>(Subprocess::ss)] / 1e6;
  bool c4_pass = ss_mj >= 30.0 && ss_mj <= 60.0;
  bool flagged = false;
  for (const ReconciliationRow& row : rep.reconciliation)
    if (row.name == "subprocess ss" && row.mismatch) flagged = true;
  c4_pass = c4_pass && flagged;
  // the shared scan totals must cancel; preheat/cool are structural zeros
  for (Subprocess l : {Subprocess::ph, Subprocess::sb, Subprocess::fc,
                       Subprocess::vh, Subprocess::co}) {
    const double mj = rep.savings.by_subprocess[static_cast<int>(l)];
    if (std::abs(mj) > 1e-3) c4_pass = false;  // joules of fp residue at most
  }
  std::snprintf(buf, sizeof buf,
                "support saving %.2f MJ in [30, 60], discrepancy flagged: %s, "
                "other rows zero",
                ss_mj, flagged ? "yes" : "no");
  report(4, "support-saving reconciliation with residual-discrepancy flag",
         c4_pass, buf);
}

void criterion_5() {
  const auto t0 = std::chrono::steady_clock::now();
  const Instance ins = load_instance_file(kDataDir + "/ins_20_5.json");
  const PlanFile base = load_plan_file(kDataDir + "/baseline_magics_20.json");

  const EvaluationReport base_rep = evaluate_plan(base.plan, ins);
  const double baseline_excl = base_rep.energy_excl_phco_j;

  std::mt19937 rng(0);
  const Plan start = construct_initial(ins, rng);
  SearchBudget budget;
  budget.max_iterations = 3000;
  budget.max_wall_time_s = 240;
  budget.random_seed = 0;
  const Plan plan = local_search(ins, start, budget);
  const double elapsed = seconds_since(t0);

  const bool feasible = check_plan_geometry(plan, ins).empty();
  const EvaluationReport rep = evaluate_plan(plan, ins);
  const double candidate_excl = rep.energy_excl_phco_j;
  const double improvement = 1.0 - candidate_excl / baseline_excl;

  const bool pass =
      feasible && improvement >= 0.05 && elapsed < 300.0;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "EC excl ph/co %.2f MJ vs baseline %.2f MJ: %.1f%% below "
                "(need >= 5%%), feasible: %s, %.1f s",
                candidate_excl / 1e6, baseline_excl / 1e6, improvement * 100,
                feasible ? "yes" : "no", elapsed);
  report(5, "heuristic beats the published baseline on the bundled job", pass,
         buf);
}

void criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(1618);
  std::uniform_real_distribution<double> pos(-20, 280);
  std::uniform_real_distribution<double> dim(5, 120);
  std::uniform_real_distribution<double> gap_dist(0, 5);
  std::uniform_int_distribution<int> count(2, 8);
  std::bernoulli_distribution flip(0.5);

  long disagreements = 0;
  const long trials = 10000;
  for (long trial = 0; trial < trials; ++trial) {
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

    Plan plan;
    plan.batches.emplace_back();
    std::vector<Placement> placements;
    for (const PartInstance& part : ins.parts) {
      Placement pl;
      pl.instance_id = part.instance_id;
      pl.orientation_index = 0;
      pl.x = pos(rng);
      pl.y = pos(rng);
      pl.rotated = flip(rng);
      plan.batches[0].placements.push_back(pl);
      placements.push_back(plan.batches[0].placements.back());
    }

    std::set<std::pair<std::string, std::string>> reported;
    for (const auto& v : check_plan_geometry(plan, ins))
      if (v.kind == GeometryViolation::Kind::overlap)
        reported.insert({v.instance_ids[0], v.instance_ids[1]});

    // independent route: inflate by half the gap and test strict overlap
    std::set<std::pair<std::string, std::string>> expected;
    const double h = gap / 2;
    for (std::size_t i = 0; i < placements.size(); ++i)
      for (std::size_t j = i + 1; j < placements.size(); ++j) {
        const Footprint fi = placement_footprint(placements[i], ins);
        const Footprint fj = placement_footprint(placements[j], ins);
        const double depth_x =
            std::min(placements[i].x + fi.effective_length + h,
                     placements[j].x + fj.effective_length + h) -
            std::max(placements[i].x - h, placements[j].x - h);
        const double depth_y =
            std::min(placements[i].y + fi.effective_width + h,
                     placements[j].y + fj.effective_width + h) -
            std::max(placements[i].y - h, placements[j].y - h);
        if (depth_x > kGeomTol && depth_y > kGeomTol)
          expected.insert(
              {placements[i].instance_id, placements[j].instance_id});
      }
    if (reported != expected) ++disagreements;
  }
  const double elapsed = seconds_since(t0);
  const bool pass = disagreements == 0 && elapsed < 10.0;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "%ld randomized plans, %ld disagreements, %.2f s (budget 10 s)",
                trials, disagreements, elapsed);
  report(6, "geometry oracle agrees with the independent overlap checker",
         pass, buf);
}

void criterion_7() {
  std::mt19937 rng(271828);
  const Instance ins = load_instance_file(kDataDir + "/ins_20_5.json");
  std::uniform_int_distribution<int> orientation(0, 4);
  std::uniform_int_distribution<int> batch_of(0, 3);
  std::uniform_real_distribution<double> pos(0, 268);
  std::bernoulli_distribution flip(0.5);

  bool pass = true;
  std::string detail = "1000 random plans, sums within 1e-9, placement-exact";
  for (int trial = 0; trial < 1000 && pass; ++trial) {
    Plan plan;
    plan.batches.resize(4);
    for (const PartInstance& part : ins.parts) {
      Placement pl;
      pl.instance_id = part.instance_id;
      pl.orientation_index = orientation(rng);
      pl.x = pos(rng);
      pl.y = pos(rng);
      pl.rotated = flip(rng);
      plan.batches[static_cast<std::size_t>(batch_of(rng))]
          .placements.push_back(pl);
    }
    plan.batches.erase(
        std::remove_if(plan.batches.begin(), plan.batches.end(),
                       [](const Batch& b) { return b.placements.empty(); }),
        plan.batches.end());

    const EnergyBreakdown e = plan_energy(plan, ins);
    double by_f = 0, by_l = 0;
    for (double v : e.by_subsystem) by_f += v;
    for (double v : e.by_subprocess) by_l += v;
    if (!rel_close(by_f, e.total, 1e-9) || !rel_close(by_l, e.total, 1e-9)) {
      pass = false;
      detail = "subsystem/subprocess sums drift beyond 1e-9";
    }

    Plan moved = plan;
    for (Batch& b : moved.batches)
      for (Placement& pl : b.placements) {
        pl.x = pos(rng);
        pl.y = pos(rng);
        pl.rotated = !pl.rotated;
      }
    if (plan_energy(moved, ins).total != e.total) {
      pass = false;
      detail = "energy depends on placement coordinates";
    }
  }
  report(7, "breakdown consistency and placement invariance", pass, detail);
}

void criterion_8() {
  std::mt19937 rng(31415);
  bool pass = true;
  std::string detail;
  int runs = 0;

  for (int trial = 0; trial < 50 && pass; ++trial) {
    const Instance ins = [&] {
      while (true) {
        Instance cand = random_tiny_instance(rng);
        if (validate_instance(cand).empty()) return cand;
      }
    }();
    const int n = static_cast<int>(ins.parts.size());

    for (double eta : {0.1, 0.3, 0.5}) {
      ++runs;
      std::vector<int> chain;
      std::vector<bool> feasible_chain;
      const SolveHook hook =
          [&](const BuiltModel& built) -> std::optional<Solution> {
        chain.push_back(built.n_batches);
        BruteForceLimits limits;
        limits.max_batches = built.n_batches;
        Plan plan;
        try {
          plan = brute_force_optimal(ins, limits);
        } catch (const std::runtime_error&) {
          feasible_chain.push_back(false);
          return std::nullopt;
        }
        feasible_chain.push_back(true);
        // encode the plan as a model assignment
        Solution s;
        s.values.assign(built.model.variables.size(), 0.0);
        for (std::size_t b = 0; b < plan.batches.size(); ++b) {
          s.values[static_cast<std::size_t>(
              built.registry.opened[b])] = 1;
          for (const Placement& pl : plan.batches[b].placements) {
            const int j = ins.find_part(pl.instance_id);
            const auto jz = static_cast<std::size_t>(j);
            s.values[static_cast<std::size_t>(
                built.registry.assign[jz][b])] = 1;
            s.values[static_cast<std::size_t>(
                built.registry
                    .orientation[jz][static_cast<std::size_t>(
                        pl.orientation_index)])] = 1;
            s.values[static_cast<std::size_t>(built.registry.pos_x[jz])] =
                pl.x;
            s.values[static_cast<std::size_t>(built.registry.pos_y[jz])] =
                pl.y;
            s.values[static_cast<std::size_t>(
                built.registry.axis_aligned[jz])] = pl.rotated ? 1.0 : 0.0;
          }
        }
        return s;
      };

      const Plan plan = batch_count_trial(ins, eta, hook);
      const int final_nb = chain.back();
      if (final_nb > n + 1 ||
          static_cast<int>(plan.batches.size()) >= final_nb) {
        pass = false;
        detail = "trial ended with an over-wide batch count";
      }
      // the chain grows by one and only flips infeasible -> feasible
      for (std::size_t i = 1; i < chain.size(); ++i) {
        if (chain[i] != chain[i - 1] + 1) pass = false;
        if (!feasible_chain[i - 1] && i + 1 < chain.size() &&
            feasible_chain[i] && !feasible_chain[i + 1])
          pass = false;
      }
      if (chain[0] != initial_batch_count(eta, n)) {
        pass = false;
        detail = "trial did not start at ceil(eta*|J|)";
      }
      if (!check_plan_geometry(plan, ins).empty()) {
        pass = false;
        detail = "trial returned an infeasible plan";
      }
    }
  }
  if (pass)
    detail = std::to_string(runs) + " trials terminated with open < available";
  report(8, "batch-count trial termination", pass, detail);
}

void criterion_9() {
  // byte-identical exports
  const Instance tiny = [] {
    std::mt19937 rng(8);
    while (true) {
      Instance cand = random_tiny_instance(rng, 3, 2);
      if (validate_instance(cand).empty() && cand.parts.size() >= 2)
        return cand;
    }
  }();
  const std::string lp1 =
      emit_lp(build_model(tiny, static_cast<int>(tiny.parts.size())).model);
  const std::string lp2 =
      emit_lp(build_model(tiny, static_cast<int>(tiny.parts.size())).model);
  bool pass = lp1 == lp2;

  const Instance ins = load_instance_file(kDataDir + "/ins_20_5.json");
  const auto run = [&ins] {
    std::mt19937 rng(11);
    const Plan start = construct_initial(ins, rng);
    SearchBudget budget;
    budget.max_iterations = 60;
    budget.max_wall_time_s = 600;  // the iteration budget binds
    budget.random_seed = 11;
    const Plan plan = local_search(ins, start, budget);
    return plan_to_json(make_plan_file(plan, ins)).dump();
  };
  const std::string first = run();
  const std::string second = run();
  pass = pass && first == second;
  report(9, "deterministic exports and seed-stable heuristic", pass,
         pass ? "LP bytes identical, heuristic plans identical"
              : "reproducibility violated");
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::pair<const char*, std::function<void()>>> stages = {
      {"criteria 1-2", criterion_1_and_2}, {"criteria 3-4", criterion_3_and_4},
      {"criterion 5", criterion_5},        {"criterion 6", criterion_6},
      {"criterion 7", criterion_7},        {"criterion 8", criterion_8},
      {"criterion 9", criterion_9}};
  for (const auto& [name, stage] : stages) {
    try {
      stage();
    } catch (const std::exception& e) {
      std::printf("FAIL  %s crashed: %s\n", name, e.what());
      ++g_failures;
    }
  }
  std::printf("%d criterion failure(s), %.1f s total\n", g_failures,
              seconds_since(t0));
  return g_failures == 0 ? 0 : 1;
}
