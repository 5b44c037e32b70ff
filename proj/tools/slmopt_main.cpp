#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "slmopt/domain.hpp"
#include "slmopt/energy.hpp"
#include "slmopt/instance_io.hpp"
#include "slmopt/milp.hpp"
#include "slmopt/packing.hpp"
#include "slmopt/report.hpp"
#include "slmopt/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 2;
constexpr int kExitInfeasible = 3;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

slmopt::Instance load_instance_checked(const std::string& path) {
  slmopt::Instance ins = slmopt::load_instance_file(path);
  const auto violations = slmopt::validate_instance(ins);
  if (!violations.empty()) {
    std::cerr << "invalid instance " << path << ":\n";
    for (const auto& v : violations)
      std::cerr << "  [" << v.code << "] " << v.message << "\n";
    throw std::runtime_error("instance failed validation");
  }
  return ins;
}

slmopt::PlanFile load_plan_checked(const std::string& path,
                                   const slmopt::Instance& ins) {
  slmopt::PlanFile pf = slmopt::load_plan_file(path);
  const std::string expected =
      slmopt::checksum_hex(slmopt::instance_fingerprint(ins));
  if (pf.instance_checksum != expected)
    throw std::runtime_error(
        "plan " + path + " was built for a different instance (checksum " +
        pf.instance_checksum + ", expected " + expected + ")");
  const auto violations = slmopt::validate_plan_structure(pf.plan, ins);
  if (!violations.empty()) {
    std::cerr << "malformed plan " << path << ":\n";
    for (const auto& v : violations)
      std::cerr << "  [" << v.code << "] " << v.message << "\n";
    throw std::runtime_error("plan failed structural validation");
  }
  return pf;
}

// Returns false when the plan has geometry violations (printed to stderr).
bool geometry_ok(const slmopt::Plan& plan, const slmopt::Instance& ins) {
  const auto violations = slmopt::check_plan_geometry(plan, ins);
  if (violations.empty()) return true;
  std::cerr << "plan is geometrically infeasible:\n";
  for (const auto& v : violations) {
    const char* kind = v.kind == slmopt::GeometryViolation::Kind::boundary
                           ? "boundary"
                       : v.kind == slmopt::GeometryViolation::Kind::overlap
                           ? "overlap"
                           : "height";
    std::cerr << "  [" << kind << "]";
    for (const auto& id : v.instance_ids) std::cerr << ' ' << id;
    std::cerr << " by " << v.magnitude << " mm\n";
  }
  return false;
}

void print_summary(const slmopt::EvaluationReport& rep) {
  std::printf("batches: %d\n", rep.breakdown.batch_count);
  std::printf("EC [MJ]: %.2f\n", rep.breakdown.total / 1e6);
  std::printf("EC excl ph/co [MJ]: %.2f\n", rep.energy_excl_phco_j / 1e6);
  std::printf("EV [J/mm3]: %.2f\n", rep.ev_j_per_mm3);
}

void write_report_files(const slmopt::EvaluationReport& rep,
                        const std::string& out_dir) {
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_text(dir / "report.json", slmopt::report_to_json(rep).dump(2) + "\n");
  write_text(dir / "batch_table.csv", slmopt::batch_table_csv(rep));
  write_text(dir / "subsystem_energy.csv",
             slmopt::subsystem_energy_csv(rep.breakdown));
  write_text(dir / "subprocess_energy.csv",
             slmopt::subprocess_energy_csv(rep.breakdown));
}

int cmd_validate(const std::string& instance_path) {
  const slmopt::Instance ins = slmopt::load_instance_file(instance_path);
  const auto violations = slmopt::validate_instance(ins);
  if (violations.empty()) {
    std::printf("OK: %zu part(s), %zu type(s)\n", ins.parts.size(),
                ins.part_types.size());
    std::printf("checksum: %s\n",
                slmopt::checksum_hex(slmopt::instance_fingerprint(ins)).c_str());
    return kExitOk;
  }
  for (const auto& v : violations)
    std::printf("[%s] %s\n", v.code.c_str(), v.message.c_str());
  return kExitInputError;
}

int cmd_evaluate(const std::string& instance_path, const std::string& plan_path,
                 const std::string& out_dir) {
  const slmopt::Instance ins = load_instance_checked(instance_path);
  const slmopt::PlanFile pf = load_plan_checked(plan_path, ins);
  if (!geometry_ok(pf.plan, ins)) return kExitInfeasible;
  const slmopt::EvaluationReport rep = slmopt::evaluate_plan(pf.plan, ins);
  print_summary(rep);
  if (!out_dir.empty()) write_report_files(rep, out_dir);
  return kExitOk;
}

int cmd_solve(const std::string& instance_path, const std::string& mode,
              unsigned seed, double budget_s, long max_iterations, double eta,
              const std::string& out_plan, const std::string& out_dir) {
  (void)eta;  // batch growth happens inside the constructor
  const slmopt::Instance ins = load_instance_checked(instance_path);

  slmopt::Plan plan;
  if (mode == "brute") {
    plan = slmopt::brute_force_optimal(ins);
  } else {
    std::mt19937 rng(seed);
    const slmopt::Plan start = slmopt::construct_initial(ins, rng);
    slmopt::SearchBudget budget;
    budget.max_iterations = max_iterations;
    budget.max_wall_time_s = budget_s;
    budget.random_seed = seed;
    plan = slmopt::local_search(ins, start, budget);
  }

  if (!geometry_ok(plan, ins)) return kExitInfeasible;
  const slmopt::EvaluationReport rep = slmopt::evaluate_plan(plan, ins);
  print_summary(rep);

  if (!out_plan.empty()) {
    slmopt::PlanProvenance prov;
    prov.solver = mode;
    prov.seed = static_cast<long>(seed);
    slmopt::save_plan_file(out_plan, slmopt::make_plan_file(plan, ins, prov));
    std::printf("plan written to %s\n", out_plan.c_str());
  }
  if (!out_dir.empty()) write_report_files(rep, out_dir);
  return kExitOk;
}

int cmd_export_milp(const std::string& instance_path,
                    std::optional<int> n_batches, double eta, bool no_symmetry,
                    bool loose_bigm, bool fixed_phco,
                    const std::string& out_lp) {
  const slmopt::Instance ins = load_instance_checked(instance_path);
  const int nb = n_batches
                     ? *n_batches
                     : slmopt::initial_batch_count(
                           eta, static_cast<int>(ins.parts.size()));
  slmopt::ModelOptions options;
  options.symmetry_break = !no_symmetry;
  options.tight_bigM = !loose_bigm;
  options.gate_ph_co = !fixed_phco;

  const slmopt::BuiltModel built = slmopt::build_model(ins, nb, options);
  write_text(out_lp, slmopt::emit_lp(built.model));

  json meta;
  meta["schema_version"] = 1;
  meta["instance_checksum"] =
      slmopt::checksum_hex(slmopt::instance_fingerprint(ins));
  meta["n_batches"] = nb;
  meta["options"] = {{"symmetry_break", options.symmetry_break},
                     {"tight_bigM", options.tight_bigM},
                     {"gate_ph_co", options.gate_ph_co}};
  write_text(out_lp + ".meta.json", meta.dump(2) + "\n");

  std::printf("batches: %d\n", nb);
  std::printf("variables: %zu\n", built.model.variables.size());
  std::printf("constraints: %zu\n", built.model.constraints.size());
  std::printf("model written to %s (metadata: %s.meta.json)\n", out_lp.c_str(),
              out_lp.c_str());
  return kExitOk;
}

int cmd_import_solution(const std::string& instance_path,
                        const std::string& meta_path,
                        const std::string& solution_path,
                        const std::string& out_plan,
                        const std::string& out_dir) {
  const slmopt::Instance ins = load_instance_checked(instance_path);

  std::ifstream meta_in(meta_path);
  if (!meta_in) throw std::runtime_error("cannot open " + meta_path);
  json meta;
  meta_in >> meta;
  const std::string expected =
      slmopt::checksum_hex(slmopt::instance_fingerprint(ins));
  if (meta.at("instance_checksum").get<std::string>() != expected)
    throw std::runtime_error(
        "model metadata was exported for a different instance");
  slmopt::ModelOptions options;
  options.symmetry_break = meta.at("options").at("symmetry_break").get<bool>();
  options.tight_bigM = meta.at("options").at("tight_bigM").get<bool>();
  options.gate_ph_co = meta.at("options").at("gate_ph_co").get<bool>();
  const int nb = meta.at("n_batches").get<int>();

  const slmopt::BuiltModel built = slmopt::build_model(ins, nb, options);

  std::ifstream sol_in(solution_path);
  if (!sol_in) throw std::runtime_error("cannot open " + solution_path);
  std::stringstream buffer;
  buffer << sol_in.rdbuf();
  const slmopt::Solution sol =
      slmopt::parse_solution(buffer.str(), built.model);

  const slmopt::Plan plan = slmopt::decode_plan(sol, built, ins);
  if (!geometry_ok(plan, ins)) return kExitInfeasible;

  const slmopt::EvaluationReport rep = slmopt::evaluate_plan(plan, ins);
  if (sol.objective) {
    const double rel = std::abs(*sol.objective - rep.breakdown.total) /
                       std::max(1.0, std::abs(*sol.objective));
    if (rel > 1e-4)
      std::fprintf(stderr,
                   "warning: solver objective %.6f J differs from re-evaluated "
                   "energy %.6f J (rel %.2e)\n",
                   *sol.objective, rep.breakdown.total, rel);
  }
  print_summary(rep);

  if (!out_plan.empty()) {
    slmopt::PlanProvenance prov;
    prov.solver = "external";
    if (sol.objective) prov.gap = 0.0;
    slmopt::save_plan_file(out_plan, slmopt::make_plan_file(plan, ins, prov));
    std::printf("plan written to %s\n", out_plan.c_str());
  }
  if (!out_dir.empty()) write_report_files(rep, out_dir);
  return kExitOk;
}

int cmd_compare(const std::string& instance_path, const std::string& baseline_path,
                const std::string& candidate_path,
                const std::string& reference_path, const std::string& out_dir) {
  const slmopt::Instance ins = load_instance_checked(instance_path);
  const slmopt::PlanFile base = load_plan_checked(baseline_path, ins);
  const slmopt::PlanFile cand = load_plan_checked(candidate_path, ins);
  if (!geometry_ok(base.plan, ins) || !geometry_ok(cand.plan, ins))
    return kExitInfeasible;

  std::optional<slmopt::ReferenceSavings> reference;
  if (!reference_path.empty()) {
    std::ifstream in(reference_path);
    if (!in) throw std::runtime_error("cannot open " + reference_path);
    json doc;
    in >> doc;
    reference = slmopt::parse_reference_savings(doc);
  }

  const slmopt::EnergyBreakdown eb = slmopt::plan_energy(base.plan, ins);
  const slmopt::EnergyBreakdown ec = slmopt::plan_energy(cand.plan, ins);
  const slmopt::ComparisonReport rep =
      slmopt::compare_with_reference(eb, ec, reference);

  std::printf("baseline EC [MJ]: %.2f\n", eb.total / 1e6);
  std::printf("candidate EC [MJ]: %.2f\n", ec.total / 1e6);
  std::printf("total saving [MJ]: %.2f\n", rep.savings.total_saving / 1e6);
  for (const auto& note : rep.notes) std::printf("note: %s\n", note.c_str());

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    write_text(dir / "savings.json",
               slmopt::comparison_to_json(rep).dump(2) + "\n");
    write_text(dir / "savings_by_subsystem.csv",
               slmopt::savings_by_subsystem_csv(rep));
    write_text(dir / "savings_by_subprocess.csv",
               slmopt::savings_by_subprocess_csv(rep));
    if (!rep.reconciliation.empty())
      write_text(dir / "reconciliation.csv", slmopt::reconciliation_csv(rep));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "slmopt: energy evaluation and build-plan optimization for batch "
      "powder-bed machines"};
  app.require_subcommand(1);

  std::string instance_path, plan_path, out_dir, out_plan;

  auto* validate = app.add_subcommand("validate", "check an instance file");
  validate->add_option("instance", instance_path, "instance JSON")->required();

  auto* evaluate =
      app.add_subcommand("evaluate", "energy report for a given plan");
  evaluate->add_option("instance", instance_path, "instance JSON")->required();
  evaluate->add_option("plan", plan_path, "plan JSON")->required();
  evaluate->add_option("--out-dir", out_dir, "directory for report files");

  std::string mode = "heuristic";
  unsigned seed = 0;
  double budget_s = 300;
  long max_iterations = 20000;
  double eta = 0.3;
  auto* solve = app.add_subcommand("solve", "optimize a build plan");
  solve->add_option("instance", instance_path, "instance JSON")->required();
  solve->add_option("--mode", mode, "brute | heuristic")
      ->check(CLI::IsMember({"brute", "heuristic"}));
  solve->add_option("--seed", seed, "random seed (default 0)");
  solve->add_option("--budget", budget_s, "wall-time budget in seconds");
  solve->add_option("--max-iterations", max_iterations,
                    "search iteration budget");
  solve->add_option(
      "--eta", eta,
      "accepted for interface parity with export-milp; the constructive "
      "solver opens batches on demand");
  solve->add_option("--out", out_plan, "write the plan JSON here");
  solve->add_option("--out-dir", out_dir, "directory for report files");

  std::optional<int> n_batches;
  bool no_symmetry = false, loose_bigm = false, fixed_phco = false;
  std::string out_lp;
  auto* export_milp =
      app.add_subcommand("export-milp", "write the model in LP format");
  export_milp->add_option("instance", instance_path, "instance JSON")
      ->required();
  export_milp->add_option("--n-batches", n_batches, "available batches");
  export_milp->add_option("--eta", eta,
                          "batch-count fraction when --n-batches is not set");
  export_milp->add_flag("--no-symmetry", no_symmetry,
                        "drop the batch-order symmetry break");
  export_milp->add_flag("--loose-bigm", loose_bigm,
                        "use one global big-M instead of per-family bounds");
  export_milp->add_flag(
      "--fixed-phco", fixed_phco,
      "emit constant preheat/cool times for every available batch, "
      "including unused ones");
  export_milp->add_option("output", out_lp, "output .lp path")->required();

  std::string meta_path, solution_path;
  auto* import_solution = app.add_subcommand(
      "import-solution", "decode an external solver solution into a plan");
  import_solution->add_option("instance", instance_path, "instance JSON")
      ->required();
  import_solution->add_option("metadata", meta_path, "exported .meta.json")
      ->required();
  import_solution->add_option("solution", solution_path, "solution file")
      ->required();
  import_solution->add_option("--out", out_plan, "write the plan JSON here");
  import_solution->add_option("--out-dir", out_dir,
                              "directory for report files");

  std::string baseline_path, candidate_path, reference_path;
  auto* compare = app.add_subcommand(
      "compare", "savings of a candidate plan against a baseline plan");
  compare->add_option("instance", instance_path, "instance JSON")->required();
  compare->add_option("baseline", baseline_path, "baseline plan JSON")
      ->required();
  compare->add_option("candidate", candidate_path, "candidate plan JSON")
      ->required();
  compare->add_option("--reference", reference_path,
                      "expected savings JSON for reconciliation");
  compare->add_option("--out-dir", out_dir, "directory for report files");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(instance_path);
    if (evaluate->parsed()) return cmd_evaluate(instance_path, plan_path, out_dir);
    if (solve->parsed())
      return cmd_solve(instance_path, mode, seed, budget_s, max_iterations,
                       eta, out_plan, out_dir);
    if (export_milp->parsed())
      return cmd_export_milp(instance_path, n_batches, eta, no_symmetry,
                             loose_bigm, fixed_phco, out_lp);
    if (import_solution->parsed())
      return cmd_import_solution(instance_path, meta_path, solution_path,
                                 out_plan, out_dir);
    if (compare->parsed())
      return cmd_compare(instance_path, baseline_path, candidate_path,
                         reference_path, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
