#include "slmopt/milp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "slmopt/energy.hpp"

namespace slmopt {

int LinearModel::add_variable(std::string name, VarKind kind, double lb,
                              double ub) {
  variables.push_back({std::move(name), kind, lb, ub});
  return static_cast<int>(variables.size()) - 1;
}

void LinearModel::add_constraint(std::string name,
                                 std::vector<LinearTerm> terms, Sense sense,
                                 double rhs) {
  constraints.push_back({std::move(name), std::move(terms), sense, rhs});
}

int LinearModel::find_variable(std::string_view name) const {
  for (std::size_t i = 0; i < variables.size(); ++i)
    if (variables[i].name == name) return static_cast<int>(i);
  return -1;
}

BigMTable bigM_values(const Instance& ins) {
  if (ins.parts.empty())
    throw std::invalid_argument("bigM_values: empty instance");
  double max_l = 0, max_w = 0, max_h = 0, max_s = 0;
  for (const PartInstance& part : ins.parts) {
    for (const OrientationGeometry& o : ins.type_of(part).orientations) {
      max_l = std::max(max_l, o.length);
      max_w = std::max(max_w, o.width);
      max_h = std::max(max_h, o.height);
      max_s = std::max(max_s, o.support_volume);
    }
  }
  const double lw = ins.machine.platform_length;
  const double ww = ins.machine.platform_width;
  BigMTable t;
  t.assignment = static_cast<double>(ins.parts.size());
  t.height = max_h;
  t.length_gate = max_l;
  t.width_gate = max_w;
  t.left_len = max_l + lw;
  t.left_wid = max_w + lw;
  t.below_wid = max_w + ww;
  t.below_len = max_l + ww;
  t.support = max_s;
  return t;
}

namespace {

std::string idx1(std::string_view stem, int i) {
  return std::string(stem) + std::to_string(i + 1);
}

BigMTable loose_table(const Instance& ins) {
  const BigMTable tight = bigM_values(ins);
  const double m = 10.0 * std::max({ins.machine.platform_length,
                                    ins.machine.platform_width,
                                    ins.machine.platform_height,
                                    static_cast<double>(ins.parts.size()),
                                    tight.support});
  BigMTable t;
  t.assignment = t.height = t.length_gate = t.width_gate = m;
  t.left_len = t.left_wid = t.below_wid = t.below_len = t.support = m;
  return t;
}

}  // namespace

BuiltModel build_model(const Instance& ins, int n_batches,
                       ModelOptions options) {
  if (n_batches < 1)
    throw std::invalid_argument("build_model: need at least one batch");

  const int n = static_cast<int>(ins.parts.size());
  const int nb = n_batches;
  const MachineSpec& mach = ins.machine;
  const ProcessParams& proc = ins.process;
  const BigMTable M = options.tight_bigM ? bigM_values(ins) : loose_table(ins);

  BuiltModel out;
  out.options = options;
  out.n_batches = nb;
  out.instance_id = instance_fingerprint(ins);
  LinearModel& mdl = out.model;
  VariableRegistry& reg = out.registry;
  reg.part_count = n;
  reg.batch_count = nb;

  const auto type = [&](int j) -> const PartType& {
    return ins.type_of_part(j);
  };

  // Variables, family by family; name indices are 1-based.
  reg.assign.assign(static_cast<std::size_t>(n), {});
  for (int j = 0; j < n; ++j)
    for (int b = 0; b < nb; ++b)
      reg.assign[static_cast<std::size_t>(j)].push_back(mdl.add_variable(
          idx1("X_j", j) + idx1("_b", b), VarKind::binary, 0, 1));

  reg.orientation.assign(static_cast<std::size_t>(n), {});
  for (int j = 0; j < n; ++j) {
    const int nk = static_cast<int>(type(j).orientations.size());
    reg.orientation_counts.push_back(nk);
    for (int k = 0; k < nk; ++k)
      reg.orientation[static_cast<std::size_t>(j)].push_back(mdl.add_variable(
          idx1("Y_j", j) + idx1("_k", k), VarKind::binary, 0, 1));
  }

  for (int b = 0; b < nb; ++b)
    reg.opened.push_back(
        mdl.add_variable(idx1("Z_b", b), VarKind::binary, 0, 1));

  const double margin = mach.boundary_margin;
  for (int j = 0; j < n; ++j)
    reg.pos_x.push_back(mdl.add_variable(idx1("x_j", j), VarKind::continuous,
                                         margin, mach.platform_length));
  for (int j = 0; j < n; ++j)
    reg.pos_y.push_back(mdl.add_variable(idx1("y_j", j), VarKind::continuous,
                                         margin, mach.platform_width));
  for (int j = 0; j < n; ++j)
    reg.axis_aligned.push_back(
        mdl.add_variable(idx1("O_j", j), VarKind::binary, 0, 1));

  reg.left_of.assign(static_cast<std::size_t>(n),
                     std::vector<int>(static_cast<std::size_t>(n), -1));
  reg.below.assign(static_cast<std::size_t>(n),
                   std::vector<int>(static_cast<std::size_t>(n), -1));
  for (int j = 0; j < n; ++j)
    for (int j2 = 0; j2 < n; ++j2) {
      if (j == j2) continue;
      reg.left_of[static_cast<std::size_t>(j)][static_cast<std::size_t>(j2)] =
          mdl.add_variable(idx1("PL_j", j) + idx1("_j", j2), VarKind::binary,
                           0, 1);
    }
  for (int j = 0; j < n; ++j)
    for (int j2 = 0; j2 < n; ++j2) {
      if (j == j2) continue;
      reg.below[static_cast<std::size_t>(j)][static_cast<std::size_t>(j2)] =
          mdl.add_variable(idx1("PB_j", j) + idx1("_j", j2), VarKind::binary,
                           0, 1);
    }

  for (int b = 0; b < nb; ++b)
    reg.batch_height.push_back(
        mdl.add_variable(idx1("H_b", b), VarKind::continuous, 0,
                         std::numeric_limits<double>::infinity()));
  for (int b = 0; b < nb; ++b)
    reg.batch_energy.push_back(
        mdl.add_variable(idx1("E_b", b), VarKind::continuous, 0,
                         std::numeric_limits<double>::infinity()));

  reg.subprocess_time.assign(kSubprocessCount, {});
  for (int l = 0; l < kSubprocessCount; ++l)
    for (int b = 0; b < nb; ++b)
      reg.subprocess_time[static_cast<std::size_t>(l)].push_back(
          mdl.add_variable(std::string("T_") +
                               kSubprocessNames[static_cast<std::size_t>(l)] +
                               idx1("_b", b),
                           VarKind::continuous, 0,
                           std::numeric_limits<double>::infinity()));

  reg.support_in_batch.assign(static_cast<std::size_t>(n), {});
  for (int j = 0; j < n; ++j)
    for (int b = 0; b < nb; ++b)
      reg.support_in_batch[static_cast<std::size_t>(j)].push_back(
          mdl.add_variable(idx1("e_j", j) + idx1("_b", b), VarKind::continuous,
                           0, std::numeric_limits<double>::infinity()));

  const auto X = [&](int j, int b) {
    return reg.assign[static_cast<std::size_t>(j)][static_cast<std::size_t>(b)];
  };
  const auto Y = [&](int j, int k) {
    return reg.orientation[static_cast<std::size_t>(j)]
                          [static_cast<std::size_t>(k)];
  };
  const auto T = [&](Subprocess l, int b) {
    return reg.subprocess_time[static_cast<std::size_t>(
        static_cast<int>(l))][static_cast<std::size_t>(b)];
  };
  const auto E = [&](int j, int b) {
    return reg.support_in_batch[static_cast<std::size_t>(j)]
                               [static_cast<std::size_t>(b)];
  };

  // Objective: total energy over batches.
  for (int b = 0; b < nb; ++b)
    mdl.objective.push_back({reg.batch_energy[static_cast<std::size_t>(b)], 1});

  // c1: parts only in opened batches.
  for (int b = 0; b < nb; ++b) {
    std::vector<LinearTerm> terms;
    for (int j = 0; j < n; ++j) terms.push_back({X(j, b), 1});
    terms.push_back({reg.opened[static_cast<std::size_t>(b)], -M.assignment});
    mdl.add_constraint(idx1("c1_b", b), std::move(terms), Sense::le, 0);
  }
  // c2: each part in exactly one batch.
  for (int j = 0; j < n; ++j) {
    std::vector<LinearTerm> terms;
    for (int b = 0; b < nb; ++b) terms.push_back({X(j, b), 1});
    mdl.add_constraint(idx1("c2_j", j), std::move(terms), Sense::eq, 1);
  }
  // c3: each part picks one orientation.
  for (int j = 0; j < n; ++j) {
    std::vector<LinearTerm> terms;
    for (int k = 0; k < reg.orientation_counts[static_cast<std::size_t>(j)];
         ++k)
      terms.push_back({Y(j, k), 1});
    mdl.add_constraint(idx1("c3_j", j), std::move(terms), Sense::eq, 1);
  }

  const double border_rate =
      proc.laser_count * proc.border_speed * proc.layer_thickness;
  const double contour_rate =
      proc.laser_count * proc.contour_speed * proc.layer_thickness;
  const double v_part = part_buildup_rate(proc);
  const double v_support = support_buildup_rate(proc);

  // c4-c6: scan-time lower bounds from assigned surface and volume.
  for (int b = 0; b < nb; ++b) {
    std::vector<LinearTerm> terms;
    for (int j = 0; j < n; ++j)
      terms.push_back({X(j, b), type(j).surface_area / border_rate});
    terms.push_back({T(Subprocess::sb, b), -1});
    mdl.add_constraint(idx1("c4_b", b), std::move(terms), Sense::le, 0);
  }
  for (int b = 0; b < nb; ++b) {
    std::vector<LinearTerm> terms;
    for (int j = 0; j < n; ++j)
      terms.push_back({X(j, b), type(j).surface_area / contour_rate});
    terms.push_back({T(Subprocess::fc, b), -1});
    mdl.add_constraint(idx1("c5_b", b), std::move(terms), Sense::le, 0);
  }
  for (int b = 0; b < nb; ++b) {
    std::vector<LinearTerm> terms;
    for (int j = 0; j < n; ++j)
      terms.push_back({X(j, b), type(j).volume / v_part});
    terms.push_back({T(Subprocess::vh, b), -1});
    mdl.add_constraint(idx1("c6_b", b), std::move(terms), Sense::le, 0);
  }
  // The bilinear support-time bound is linearized by c32/c33 below.

  // c8-c9: preheat/cool durations, optionally gated on batch use.
  for (int b = 0; b < nb; ++b) {
    std::vector<LinearTerm> terms{{T(Subprocess::ph, b), 1}};
    double rhs = mach.preheat_time;
    if (options.gate_ph_co) {
      terms.push_back(
          {reg.opened[static_cast<std::size_t>(b)], -mach.preheat_time});
      rhs = 0;
    }
    mdl.add_constraint(idx1("c8_b", b), std::move(terms), Sense::eq, rhs);
  }
  for (int b = 0; b < nb; ++b) {
    std::vector<LinearTerm> terms{{T(Subprocess::co, b), 1}};
    double rhs = mach.cool_time;
    if (options.gate_ph_co) {
      terms.push_back(
          {reg.opened[static_cast<std::size_t>(b)], -mach.cool_time});
      rhs = 0;
    }
    mdl.add_constraint(idx1("c9_b", b), std::move(terms), Sense::eq, rhs);
  }

  // c10: batch height dominates every assigned part's height.
  for (int b = 0; b < nb; ++b)
    for (int j = 0; j < n; ++j) {
      std::vector<LinearTerm> terms{
          {reg.batch_height[static_cast<std::size_t>(b)], 1}};
      const PartType& t = type(j);
      for (int k = 0; k < static_cast<int>(t.orientations.size()); ++k)
        terms.push_back(
            {Y(j, k), -t.orientations[static_cast<std::size_t>(k)].height});
      terms.push_back({X(j, b), -M.height});
      mdl.add_constraint(idx1("c10_b", b) + idx1("_j", j), std::move(terms),
                         Sense::ge, -M.height);
    }
  // c11: recoating time from the layer count.
  for (int b = 0; b < nb; ++b) {
    std::vector<LinearTerm> terms{
        {reg.batch_height[static_cast<std::size_t>(b)],
         mach.recoat_layer_time / proc.layer_thickness},
        {T(Subprocess::rc, b), -1}};
    mdl.add_constraint(idx1("c11_b", b), std::move(terms), Sense::le, 0);
  }
  // c12: batch energy from subprocess durations.
  for (int b = 0; b < nb; ++b) {
    std::vector<LinearTerm> terms{
        {reg.batch_energy[static_cast<std::size_t>(b)], 1}};
    for (int l = 0; l < kSubprocessCount; ++l)
      terms.push_back({T(static_cast<Subprocess>(l), b),
                       -subprocess_power(mach, static_cast<Subprocess>(l))});
    mdl.add_constraint(idx1("c12_b", b), std::move(terms), Sense::ge, 0);
  }
  // c13: chamber height.
  for (int b = 0; b < nb; ++b)
    mdl.add_constraint(
        idx1("c13_b", b),
        {{reg.batch_height[static_cast<std::size_t>(b)], 1}}, Sense::le,
        mach.platform_height);

  // c14-c17: boundary containment, switched by the axis flag.
  const double len_limit = mach.platform_length - margin;
  const double wid_limit = mach.platform_width - margin;
  for (int j = 0; j < n; ++j) {
    const PartType& t = type(j);
    const int nk = static_cast<int>(t.orientations.size());
    const auto geom = [&](int k) -> const OrientationGeometry& {
      return t.orientations[static_cast<std::size_t>(k)];
    };
    {
      std::vector<LinearTerm> terms{{reg.pos_x[static_cast<std::size_t>(j)], 1}};
      for (int k = 0; k < nk; ++k) terms.push_back({Y(j, k), geom(k).length});
      terms.push_back(
          {reg.axis_aligned[static_cast<std::size_t>(j)], M.length_gate});
      mdl.add_constraint(idx1("c14_j", j), std::move(terms), Sense::le,
                         len_limit + M.length_gate);
    }
    {
      std::vector<LinearTerm> terms{{reg.pos_x[static_cast<std::size_t>(j)], 1}};
      for (int k = 0; k < nk; ++k) terms.push_back({Y(j, k), geom(k).width});
      terms.push_back(
          {reg.axis_aligned[static_cast<std::size_t>(j)], -M.width_gate});
      mdl.add_constraint(idx1("c15_j", j), std::move(terms), Sense::le,
                         len_limit);
    }
    {
      std::vector<LinearTerm> terms{{reg.pos_y[static_cast<std::size_t>(j)], 1}};
      for (int k = 0; k < nk; ++k) terms.push_back({Y(j, k), geom(k).width});
      terms.push_back(
          {reg.axis_aligned[static_cast<std::size_t>(j)], M.width_gate});
      mdl.add_constraint(idx1("c16_j", j), std::move(terms), Sense::le,
                         wid_limit + M.width_gate);
    }
    {
      std::vector<LinearTerm> terms{{reg.pos_y[static_cast<std::size_t>(j)], 1}};
      for (int k = 0; k < nk; ++k) terms.push_back({Y(j, k), geom(k).length});
      terms.push_back(
          {reg.axis_aligned[static_cast<std::size_t>(j)], -M.length_gate});
      mdl.add_constraint(idx1("c17_j", j), std::move(terms), Sense::le,
                         wid_limit);
    }
  }

  // c18-c21: non-overlap separations for ordered pairs, activated by the
  // positional indicators. The below-relations constrain y against y.
  const double gap = mach.part_gap;
  for (int j = 0; j < n; ++j)
    for (int j2 = 0; j2 < n; ++j2) {
      if (j == j2) continue;
      const PartType& t = type(j);
      const int nk = static_cast<int>(t.orientations.size());
      const auto geom = [&](int k) -> const OrientationGeometry& {
        return t.orientations[static_cast<std::size_t>(k)];
      };
      const int pl =
          reg.left_of[static_cast<std::size_t>(j)][static_cast<std::size_t>(j2)];
      const int pb =
          reg.below[static_cast<std::size_t>(j)][static_cast<std::size_t>(j2)];
      {
        std::vector<LinearTerm> terms{
            {reg.pos_x[static_cast<std::size_t>(j)], 1},
            {reg.pos_x[static_cast<std::size_t>(j2)], -1}};
        for (int k = 0; k < nk; ++k) terms.push_back({Y(j, k), geom(k).length});
        terms.push_back({pl, M.left_len});
        terms.push_back(
            {reg.axis_aligned[static_cast<std::size_t>(j)], M.left_len});
        mdl.add_constraint(idx1("c18_j", j) + idx1("_j", j2), std::move(terms),
                           Sense::le, 2 * M.left_len - gap);
      }
      {
        std::vector<LinearTerm> terms{
            {reg.pos_x[static_cast<std::size_t>(j)], 1},
            {reg.pos_x[static_cast<std::size_t>(j2)], -1}};
        for (int k = 0; k < nk; ++k) terms.push_back({Y(j, k), geom(k).width});
        terms.push_back({pl, M.left_wid});
        terms.push_back(
            {reg.axis_aligned[static_cast<std::size_t>(j)], -M.left_wid});
        mdl.add_constraint(idx1("c19_j", j) + idx1("_j", j2), std::move(terms),
                           Sense::le, M.left_wid - gap);
      }
      {
        std::vector<LinearTerm> terms{
            {reg.pos_y[static_cast<std::size_t>(j)], 1},
            {reg.pos_y[static_cast<std::size_t>(j2)], -1}};
        for (int k = 0; k < nk; ++k) terms.push_back({Y(j, k), geom(k).width});
        terms.push_back({pb, M.below_wid});
        terms.push_back(
            {reg.axis_aligned[static_cast<std::size_t>(j)], M.below_wid});
        mdl.add_constraint(idx1("c20_j", j) + idx1("_j", j2), std::move(terms),
                           Sense::le, 2 * M.below_wid - gap);
      }
      {
        std::vector<LinearTerm> terms{
            {reg.pos_y[static_cast<std::size_t>(j)], 1},
            {reg.pos_y[static_cast<std::size_t>(j2)], -1}};
        for (int k = 0; k < nk; ++k) terms.push_back({Y(j, k), geom(k).length});
        terms.push_back({pb, M.below_len});
        terms.push_back(
            {reg.axis_aligned[static_cast<std::size_t>(j)], -M.below_len});
        mdl.add_constraint(idx1("c21_j", j) + idx1("_j", j2), std::move(terms),
                           Sense::le, M.below_len - gap);
      }
    }

  // c22: parts sharing a batch pick at least one positional relation.
  for (int j = 0; j < n; ++j)
    for (int j2 = j + 1; j2 < n; ++j2)
      for (int b = 0; b < nb; ++b) {
        const auto js = static_cast<std::size_t>(j);
        const auto j2s = static_cast<std::size_t>(j2);
        std::vector<LinearTerm> terms{{reg.left_of[js][j2s], 1},
                                      {reg.below[js][j2s], 1},
                                      {reg.left_of[j2s][js], 1},
                                      {reg.below[j2s][js], 1},
                                      {X(j, b), -1},
                                      {X(j2, b), -1}};
        mdl.add_constraint(
            idx1("c22_j", j) + idx1("_j", j2) + idx1("_b", b),
            std::move(terms), Sense::ge, -1);
      }

  // c31: symmetry break; opened batches form a suffix of B.
  if (options.symmetry_break)
    for (int b = 1; b < nb; ++b)
      mdl.add_constraint(
          idx1("c31_b", b),
          {{reg.opened[static_cast<std::size_t>(b - 1)], 1},
           {reg.opened[static_cast<std::size_t>(b)], -1}},
          Sense::le, 0);

  // c32-c33: linearized support volume per batch and the support scan time.
  for (int j = 0; j < n; ++j)
    for (int b = 0; b < nb; ++b) {
      const PartType& t = type(j);
      std::vector<LinearTerm> terms{{E(j, b), 1}};
      for (int k = 0; k < static_cast<int>(t.orientations.size()); ++k)
        terms.push_back(
            {Y(j, k),
             -t.orientations[static_cast<std::size_t>(k)].support_volume});
      terms.push_back({X(j, b), -M.support});
      mdl.add_constraint(idx1("c32_j", j) + idx1("_b", b), std::move(terms),
                         Sense::ge, -M.support);
    }
  for (int b = 0; b < nb; ++b) {
    std::vector<LinearTerm> terms;
    for (int j = 0; j < n; ++j) terms.push_back({E(j, b), 1.0 / v_support});
    terms.push_back({T(Subprocess::ss, b), -1});
    mdl.add_constraint(idx1("c33_b", b), std::move(terms), Sense::le, 0);
  }

  return out;
}

namespace {

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Appends "coef * name" with LP sign conventions; `first` omits the leading +.
void append_term(std::string& line, double coef, const std::string& name,
                 bool first) {
  if (first) {
    if (coef < 0) line += "- ";
  } else {
    line += coef < 0 ? " - " : " + ";
  }
  const double mag = std::abs(coef);
  if (mag != 1.0) {
    line += format_number(mag);
    line += ' ';
  }
  line += name;
}

void flush_line(std::string& doc, std::string& line) {
  doc += line;
  doc += '\n';
  line.clear();
}

}  // namespace

std::string emit_lp(const LinearModel& mdl) {
  {
    std::map<std::string_view, int> seen;
    for (const Variable& v : mdl.variables)
      if (++seen[v.name] > 1)
        throw std::runtime_error("emit_lp: duplicate variable name " + v.name);
  }

  constexpr std::size_t kWrap = 200;
  std::string doc;
  doc.reserve(1 << 16);
  doc += "\\ batch build-plan energy model\n";
  doc += "Minimize\n";
  {
    std::string line = " obj:";
    bool first = true;
    for (const LinearTerm& t : mdl.objective) {
      if (t.coef == 0) continue;
      if (first) line += ' ';
      std::string term;
      append_term(term, t.coef, mdl.variables[static_cast<std::size_t>(t.var)].name,
                  first);
      line += term;
      first = false;
      if (line.size() > kWrap) flush_line(doc, line), line = " ";
    }
    if (!line.empty() && line != " ") flush_line(doc, line);
  }

  doc += "Subject To\n";
  for (const Constraint& c : mdl.constraints) {
    std::string line = " " + c.name + ":";
    bool first = true;
    for (const LinearTerm& t : c.terms) {
      if (t.coef == 0) continue;
      if (first) line += ' ';
      std::string term;
      append_term(term, t.coef, mdl.variables[static_cast<std::size_t>(t.var)].name,
                  first);
      line += term;
      first = false;
      if (line.size() > kWrap) flush_line(doc, line), line = " ";
    }
    if (first) line += " 0";  // degenerate constraint, keep the file parseable
    line += c.sense == Sense::le ? " <=" : c.sense == Sense::ge ? " >=" : " =";
    line += ' ';
    line += format_number(c.rhs);
    flush_line(doc, line);
  }

  doc += "Bounds\n";
  const double inf = std::numeric_limits<double>::infinity();
  for (const Variable& v : mdl.variables) {
    if (v.kind == VarKind::binary) continue;
    if (v.lb == 0 && v.ub == inf) continue;
    std::string line = " ";
    if (v.ub == inf) {
      line += v.name + " >= " + format_number(v.lb);
    } else if (v.lb == 0) {
      line += v.name + " <= " + format_number(v.ub);
    } else {
      line += format_number(v.lb) + " <= " + v.name + " <= " +
              format_number(v.ub);
    }
    flush_line(doc, line);
  }

  doc += "Binaries\n";
  std::string line;
  for (const Variable& v : mdl.variables) {
    if (v.kind != VarKind::binary) continue;
    line += ' ';
    line += v.name;
    if (line.size() > kWrap) flush_line(doc, line);
  }
  if (!line.empty()) flush_line(doc, line);
  doc += "End\n";
  return doc;
}

Solution parse_solution(std::string_view text, const LinearModel& mdl) {
  std::map<std::string, int, std::less<>> by_name;
  for (std::size_t i = 0; i < mdl.variables.size(); ++i)
    by_name.emplace(mdl.variables[i].name, static_cast<int>(i));

  Solution sol;
  sol.values.assign(mdl.variables.size(), 0.0);

  std::istringstream in{std::string(text)};
  std::string lineBuf;
  while (std::getline(in, lineBuf)) {
    std::istringstream ls(lineBuf);
    std::string name;
    if (!(ls >> name)) continue;
    if (name[0] == '#') continue;
    double value = 0;
    if (!(ls >> value))
      throw std::runtime_error("parse_solution: missing value for " + name);
    if (name == "=obj=") {
      sol.objective = value;
      continue;
    }
    const auto it = by_name.find(name);
    if (it == by_name.end())
      throw std::runtime_error("parse_solution: unknown variable name " + name);
    const Variable& var = mdl.variables[static_cast<std::size_t>(it->second)];
    if (var.kind == VarKind::binary) {
      const double rounded = value > 0.5 ? 1.0 : 0.0;
      if (std::abs(value - rounded) > 1e-4)
        throw std::runtime_error("parse_solution: non-integral binary " + name +
                                 " = " + std::to_string(value));
      value = rounded;
    }
    sol.values[static_cast<std::size_t>(it->second)] = value;
  }
  return sol;
}

Plan decode_plan(const Solution& sol, const BuiltModel& built,
                 const Instance& ins) {
  const VariableRegistry& reg = built.registry;
  const int n = reg.part_count;
  const int nb = reg.batch_count;
  if (n != static_cast<int>(ins.parts.size()))
    throw std::invalid_argument("decode_plan: registry does not match instance");

  const auto value = [&](int var) {
    return sol.values[static_cast<std::size_t>(var)];
  };

  std::vector<std::vector<int>> members(static_cast<std::size_t>(nb));
  for (int j = 0; j < n; ++j) {
    int chosen = -1;
    for (int b = 0; b < nb; ++b) {
      if (value(reg.assign[static_cast<std::size_t>(j)]
                          [static_cast<std::size_t>(b)]) > 0.5) {
        if (chosen >= 0)
          throw std::runtime_error("decode_plan: part " +
                                   ins.parts[static_cast<std::size_t>(j)]
                                       .instance_id +
                                   " assigned to multiple batches");
        chosen = b;
      }
    }
    if (chosen < 0)
      throw std::runtime_error(
          "decode_plan: part " +
          ins.parts[static_cast<std::size_t>(j)].instance_id +
          " assigned to no batch");
    members[static_cast<std::size_t>(chosen)].push_back(j);
  }

  Plan plan;
  for (int b = 0; b < nb; ++b) {
    const auto& js = members[static_cast<std::size_t>(b)];
    if (js.empty()) continue;
    Batch batch;
    for (int j : js) {
      const auto jz = static_cast<std::size_t>(j);
      int orientation = -1;
      for (int k = 0; k < reg.orientation_counts[jz]; ++k)
        if (value(reg.orientation[jz][static_cast<std::size_t>(k)]) > 0.5) {
          if (orientation >= 0)
            throw std::runtime_error(
                "decode_plan: multiple orientations selected for " +
                ins.parts[jz].instance_id);
          orientation = k;
        }
      if (orientation < 0)
        throw std::runtime_error("decode_plan: no orientation selected for " +
                                 ins.parts[jz].instance_id);
      Placement pl;
      pl.instance_id = ins.parts[jz].instance_id;
      pl.orientation_index = orientation;
      pl.x = value(reg.pos_x[jz]);
      pl.y = value(reg.pos_y[jz]);
      pl.rotated = value(reg.axis_aligned[jz]) > 0.5;
      batch.placements.push_back(std::move(pl));
    }
    plan.batches.push_back(std::move(batch));
  }
  return plan;
}

int initial_batch_count(double eta, int part_count) {
  if (eta <= 0 || eta >= 1)
    throw std::invalid_argument("initial_batch_count: eta must lie in (0,1)");
  const int nb = static_cast<int>(std::ceil(eta * part_count - 1e-9));
  return std::max(1, nb);
}

Plan batch_count_trial(const Instance& ins, double eta,
                       const SolveHook& solve_hook, ModelOptions options) {
  const int n = static_cast<int>(ins.parts.size());
  if (n == 0) return Plan{};
  int nb = initial_batch_count(eta, n);

  // n batches always suffice for a validated instance (one part per batch),
  // so the loop ends at n+1 at the latest.
  while (true) {
    BuiltModel built = build_model(ins, nb, options);
    const std::optional<Solution> sol = solve_hook(built);
    if (sol) {
      Plan plan = decode_plan(*sol, built, ins);
      if (static_cast<int>(plan.batches.size()) < nb) return plan;
    } else if (nb > n) {
      throw std::runtime_error(
          "batch_count_trial: infeasible even with one batch per part");
    }
    ++nb;
  }
}

}  // namespace slmopt
