#include "slmopt/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "slmopt/energy.hpp"
#include "slmopt/packing.hpp"

namespace slmopt {

namespace {

struct Shape {
  double l = 0;  // extent along platform length when not swapped
  double w = 0;
};

struct Spot {
  double x = 0, y = 0;
  bool swapped = false;
};

// Exhaustive packing decision on the normal-pattern grid. Any packing can be
// compacted so every rectangle rests at the margin or against another
// rectangle's far edge plus the gap; coordinates then lie in the subset sums
// of the other extents. Enumerating those positions for every rotation mask
// decides feasibility exactly.
class ExactPacker {
 public:
  ExactPacker(double platform_length, double platform_width, double margin,
              double gap)
      : lw_(platform_length), ww_(platform_width), margin_(margin), gap_(gap) {}

  std::optional<std::vector<Spot>> solve(const std::vector<Shape>& shapes) {
    const std::size_t m = shapes.size();
    if (m == 0) return std::vector<Spot>{};

    const double usable_l = lw_ - 2 * margin_;
    const double usable_w = ww_ - 2 * margin_;
    double area = 0;
    for (const Shape& s : shapes) area += s.l * s.w;
    if (area > usable_l * usable_w + kGeomTol) return std::nullopt;

    // Fast path: greedy bottom-left on a decreasing-area order.
    {
      std::vector<std::size_t> order(m);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double aa = shapes[a].l * shapes[a].w;
        const double ab = shapes[b].l * shapes[b].w;
        if (aa != ab) return aa > ab;
        return a < b;
      });
      std::vector<PackItem> items;
      for (std::size_t i : order)
        items.push_back({std::to_string(i), {shapes[i].l, shapes[i].w}});
      bool oversize = false;
      std::optional<std::vector<PackedItem>> packed;
      try {
        packed = pack_bottom_left(items, lw_, ww_, margin_, gap_);
      } catch (const std::invalid_argument&) {
        oversize = true;
      }
      if (oversize) return std::nullopt;
      if (packed) {
        std::vector<Spot> out(m);
        for (const PackedItem& p : *packed) {
          const auto i = static_cast<std::size_t>(std::stoul(p.instance_id));
          out[i] = {p.x, p.y, p.swapped};
        }
        return out;
      }
    }

    // Complete search over rotation masks and normal-pattern positions,
    // largest shapes first.
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double aa = shapes[a].l * shapes[a].w;
      const double ab = shapes[b].l * shapes[b].w;
      if (aa != ab) return aa > ab;
      return a < b;
    });

    for (unsigned mask = 0; mask < (1u << m); ++mask) {
      std::vector<Shape> eff(m);
      bool fits = true;
      for (std::size_t i = 0; i < m; ++i) {
        eff[i] = (mask >> i) & 1u ? Shape{shapes[i].w, shapes[i].l} : shapes[i];
        if (eff[i].l > usable_l + kGeomTol || eff[i].w > usable_w + kGeomTol) {
          fits = false;
          break;
        }
      }
      if (!fits) continue;

      std::vector<Spot> placed(m);
      std::vector<bool> done(m, false);
      if (dfs(order, 0, eff, placed, done)) {
        for (std::size_t i = 0; i < m; ++i)
          placed[i].swapped = (mask >> i) & 1u;
        return placed;
      }
    }
    return std::nullopt;
  }

 private:
  bool dfs(const std::vector<std::size_t>& order, std::size_t depth,
           const std::vector<Shape>& eff, std::vector<Spot>& placed,
           std::vector<bool>& done) {
    if (depth == order.size()) return true;
    const std::size_t t = order[depth];

    std::vector<double> xs{margin_}, ys{margin_};
    grow_sums(xs, eff, t, /*along_length=*/true);
    grow_sums(ys, eff, t, /*along_length=*/false);

    for (double y : ys) {
      if (y + eff[t].w > ww_ - margin_ + kGeomTol) continue;
      for (double x : xs) {
        if (x + eff[t].l > lw_ - margin_ + kGeomTol) continue;
        if (!conflict_free(x, y, t, eff, placed, done)) continue;
        placed[t] = {x, y, false};
        done[t] = true;
        if (dfs(order, depth + 1, eff, placed, done)) return true;
        done[t] = false;
      }
    }
    return false;
  }

  void grow_sums(std::vector<double>& vals, const std::vector<Shape>& eff,
                 std::size_t skip, bool along_length) const {
    std::vector<double> sums{0};
    for (std::size_t i = 0; i < eff.size(); ++i) {
      if (i == skip) continue;
      const double ext = (along_length ? eff[i].l : eff[i].w) + gap_;
      const std::size_t cur = sums.size();
      for (std::size_t s = 0; s < cur; ++s) sums.push_back(sums[s] + ext);
    }
    std::sort(sums.begin(), sums.end());
    for (double s : sums) {
      const double v = margin_ + s;
      if (vals.empty() || v > vals.back() + kGeomTol) vals.push_back(v);
    }
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end(),
                           [](double a, double b) {
                             return std::abs(a - b) <= kGeomTol;
                           }),
               vals.end());
  }

  bool conflict_free(double x, double y, std::size_t t,
                     const std::vector<Shape>& eff,
                     const std::vector<Spot>& placed,
                     const std::vector<bool>& done) const {
    for (std::size_t i = 0; i < eff.size(); ++i) {
      if (!done[i] || i == t) continue;
      const double gx =
          std::max(placed[i].x - (x + eff[t].l), x - (placed[i].x + eff[i].l));
      const double gy =
          std::max(placed[i].y - (y + eff[t].w), y - (placed[i].y + eff[i].w));
      if (std::max(gx, gy) < gap_ - kGeomTol) return false;
    }
    return true;
  }

  double lw_, ww_, margin_, gap_;
};

using FeasKey = std::vector<std::pair<long, long>>;

FeasKey feasibility_key(const std::vector<Shape>& shapes) {
  FeasKey key;
  key.reserve(shapes.size());
  for (const Shape& s : shapes) {
    const long a = std::lround(std::max(s.l, s.w) * 1e6);
    const long b = std::lround(std::min(s.l, s.w) * 1e6);
    key.emplace_back(a, b);
  }
  std::sort(key.begin(), key.end());
  return key;
}

Shape orientation_shape(const OrientationGeometry& o) {
  return {o.length, o.width};
}

// Batch evaluation shared by the enumerators: height gate + packing + energy.
class BatchFeasibility {
 public:
  explicit BatchFeasibility(const Instance& ins)
      : ins_(ins),
        packer_(ins.machine.platform_length, ins.machine.platform_width,
                ins.machine.boundary_margin, ins.machine.part_gap) {}

  bool packable(const std::vector<Shape>& shapes) {
    const FeasKey key = feasibility_key(shapes);
    const auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    const bool ok = packer_.solve(shapes).has_value();
    memo_.emplace(key, ok);
    return ok;
  }

  std::optional<std::vector<Spot>> positions(const std::vector<Shape>& shapes) {
    return packer_.solve(shapes);
  }

 private:
  const Instance& ins_;
  ExactPacker packer_;
  std::map<FeasKey, bool> memo_;
};

double batch_energy_of(const Instance& ins, const std::vector<int>& parts,
                       const std::vector<int>& orientations) {
  Batch batch;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    Placement pl;
    pl.instance_id =
        ins.parts[static_cast<std::size_t>(parts[i])].instance_id;
    pl.orientation_index = orientations[i];
    batch.placements.push_back(std::move(pl));
  }
  return batch_energy(subprocess_times(batch, ins), ins.machine);
}

}  // namespace

Plan brute_force_optimal(const Instance& ins, BruteForceLimits limits) {
  const int n = static_cast<int>(ins.parts.size());
  if (n == 0) return Plan{};
  if (n > limits.max_parts)
    throw std::invalid_argument("brute_force_optimal: too many parts");
  for (const PartInstance& part : ins.parts)
    if (static_cast<int>(ins.type_of(part).orientations.size()) >
        limits.max_orientations)
      throw std::invalid_argument("brute_force_optimal: too many orientations");

  BatchFeasibility feas(ins);
  const double hw = ins.machine.platform_height;

  std::vector<int> orient(static_cast<std::size_t>(n), 0);
  std::vector<int> best_orient, best_rgs;
  double best_energy = std::numeric_limits<double>::infinity();
  int best_batches = 0;
  bool have_best = false;

  const auto orientation_of = [&](int j, int k) -> const OrientationGeometry& {
    return ins.type_of_part(j).orientations[static_cast<std::size_t>(k)];
  };

  while (true) {
    // All partitions of parts into batches, as restricted growth strings.
    std::vector<int> rgs(static_cast<std::size_t>(n), 0);
    while (true) {
      const int groups =
          *std::max_element(rgs.begin(), rgs.end()) + 1;
      bool feasible = groups <= limits.max_batches;
      double energy = 0;
      for (int g = 0; g < groups && feasible; ++g) {
        std::vector<int> members, member_orients;
        std::vector<Shape> shapes;
        double hmax = 0;
        for (int j = 0; j < n; ++j) {
          if (rgs[static_cast<std::size_t>(j)] != g) continue;
          members.push_back(j);
          member_orients.push_back(orient[static_cast<std::size_t>(j)]);
          const OrientationGeometry& o =
              orientation_of(j, orient[static_cast<std::size_t>(j)]);
          shapes.push_back(orientation_shape(o));
          hmax = std::max(hmax, o.height);
        }
        if (hmax > hw + kGeomTol || !feas.packable(shapes)) {
          feasible = false;
          break;
        }
        energy += batch_energy_of(ins, members, member_orients);
      }

      if (feasible) {
        const double scale = std::max(1.0, std::abs(best_energy));
        const bool better =
            !have_best || energy < best_energy - 1e-9 * scale;
        const bool tie =
            have_best && std::abs(energy - best_energy) <= 1e-9 * scale;
        const bool wins_tie =
            tie && std::tuple(groups, rgs, orient) <
                       std::tuple(best_batches, best_rgs, best_orient);
        if (better || wins_tie) {
          have_best = true;
          best_energy = energy;
          best_batches = groups;
          best_rgs = rgs;
          best_orient = orient;
        }
      }

      // Next restricted growth string.
      int i = n - 1;
      for (; i > 0; --i) {
        const int prefix_max = *std::max_element(
            rgs.begin(), rgs.begin() + i);
        if (rgs[static_cast<std::size_t>(i)] <= prefix_max) {
          ++rgs[static_cast<std::size_t>(i)];
          std::fill(rgs.begin() + i + 1, rgs.end(), 0);
          break;
        }
      }
      if (i == 0) break;
    }

    // Next orientation assignment (mixed radix).
    int j = n - 1;
    for (; j >= 0; --j) {
      const int kj = static_cast<int>(
          ins.type_of_part(j).orientations.size());
      if (orient[static_cast<std::size_t>(j)] + 1 < kj) {
        ++orient[static_cast<std::size_t>(j)];
        std::fill(orient.begin() + j + 1, orient.end(), 0);
        break;
      }
    }
    if (j < 0) break;
  }

  if (!have_best)
    throw std::runtime_error(
        "brute_force_optimal: no feasible plan (is the instance valid?)");

  // Materialize placements for the winning configuration.
  Plan plan;
  for (int g = 0; g < best_batches; ++g) {
    std::vector<int> members;
    std::vector<Shape> shapes;
    for (int j = 0; j < n; ++j) {
      if (best_rgs[static_cast<std::size_t>(j)] != g) continue;
      members.push_back(j);
      shapes.push_back(orientation_shape(
          orientation_of(j, best_orient[static_cast<std::size_t>(j)])));
    }
    const auto spots = feas.positions(shapes);
    if (!spots)
      throw std::logic_error("brute_force_optimal: winner failed to repack");
    Batch batch;
    for (std::size_t i = 0; i < members.size(); ++i) {
      const auto jz = static_cast<std::size_t>(members[i]);
      Placement pl;
      pl.instance_id = ins.parts[jz].instance_id;
      pl.orientation_index = best_orient[jz];
      pl.x = (*spots)[i].x;
      pl.y = (*spots)[i].y;
      pl.rotated = !(*spots)[i].swapped;
      batch.placements.push_back(std::move(pl));
    }
    plan.batches.push_back(std::move(batch));
  }
  return plan;
}

namespace {

// Working representation for the constructive and local-search phases.
struct SearchState {
  std::vector<int> batch_of;   // per part index
  std::vector<int> orient_of;  // per part index
  int batch_count = 0;
};

int min_support_orientation(const PartType& t) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(t.orientations.size()); ++k) {
    const auto& cand = t.orientations[static_cast<std::size_t>(k)];
    const auto& cur = t.orientations[static_cast<std::size_t>(best)];
    if (cand.support_volume < cur.support_volume ||
        (cand.support_volume == cur.support_volume && cand.height < cur.height))
      best = k;
  }
  return best;
}

class PlanSearch {
 public:
  explicit PlanSearch(const Instance& ins)
      : ins_(ins),
        lw_(ins.machine.platform_length),
        ww_(ins.machine.platform_width),
        margin_(ins.machine.boundary_margin),
        gap_(ins.machine.part_gap) {}

  // Energy of one batch, or nothing when the batch cannot be packed or is
  // too tall. Results are memoized on the (part, orientation) membership.
  std::optional<double> batch_value(const std::vector<int>& members,
                                    const SearchState& st) {
    std::vector<std::pair<int, int>> key;
    key.reserve(members.size());
    for (int j : members)
      key.emplace_back(j, st.orient_of[static_cast<std::size_t>(j)]);
    std::sort(key.begin(), key.end());
    const auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;

    std::optional<double> value;
    if (batch_packs(members, st)) {
      std::vector<int> orients;
      for (int j : members)
        orients.push_back(st.orient_of[static_cast<std::size_t>(j)]);
      value = batch_energy_of(ins_, members, orients);
    }
    cache_.emplace(std::move(key), value);
    return value;
  }

  bool batch_packs(const std::vector<int>& members, const SearchState& st) {
    double hmax = 0;
    for (int j : members)
      hmax = std::max(hmax, geom(j, st).height);
    if (hmax > ins_.machine.platform_height + kGeomTol) return false;
    return pack(members, st).has_value();
  }

  std::optional<std::vector<PackedItem>> pack(const std::vector<int>& members,
                                              const SearchState& st) {
    std::vector<int> order = members;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double aa = area(a, st), ab = area(b, st);
      if (aa != ab) return aa > ab;
      return a < b;
    });
    std::vector<PackItem> items;
    for (int j : order) {
      const OrientationGeometry& o = geom(j, st);
      items.push_back({ins_.parts[static_cast<std::size_t>(j)].instance_id,
                       footprint(o, true)});
    }
    return pack_bottom_left(items, lw_, ww_, margin_, gap_);
  }

  Plan materialize(const SearchState& st) {
    Plan plan;
    for (int b = 0; b < st.batch_count; ++b) {
      std::vector<int> members = batch_members(st, b);
      if (members.empty()) continue;
      const auto packed = pack(members, st);
      if (!packed)
        throw std::logic_error("local_search: accepted batch failed to repack");
      Batch batch;
      for (const PackedItem& item : *packed) {
        const int j = ins_.find_part(item.instance_id);
        Placement pl;
        pl.instance_id = item.instance_id;
        pl.orientation_index = st.orient_of[static_cast<std::size_t>(j)];
        pl.x = item.x;
        pl.y = item.y;
        pl.rotated = !item.swapped;
        batch.placements.push_back(std::move(pl));
      }
      plan.batches.push_back(std::move(batch));
    }
    return plan;
  }

  std::vector<int> batch_members(const SearchState& st, int b) const {
    std::vector<int> members;
    for (int j = 0; j < static_cast<int>(st.batch_of.size()); ++j)
      if (st.batch_of[static_cast<std::size_t>(j)] == b) members.push_back(j);
    return members;
  }

  const OrientationGeometry& geom(int j, const SearchState& st) const {
    return ins_.type_of_part(j).orientations[static_cast<std::size_t>(
        st.orient_of[static_cast<std::size_t>(j)])];
  }

  double area(int j, const SearchState& st) const {
    const OrientationGeometry& o = geom(j, st);
    return o.length * o.width;
  }

  const Instance& ins_;

 private:
  double lw_, ww_, margin_, gap_;
  std::map<std::vector<std::pair<int, int>>, std::optional<double>> cache_;
};

enum class ConstructMode {
  base,       // minimal-support orientations, decreasing-area order
  random,     // perturbed orientations and order
  by_height,  // decreasing height first, groups tall parts together
};

// Greedy first-fit-decreasing construction with per-part orientations chosen
// up front.
SearchState construct_state(const Instance& ins, PlanSearch& search,
                            std::mt19937& rng, ConstructMode mode) {
  const int n = static_cast<int>(ins.parts.size());
  SearchState st;
  st.batch_of.assign(static_cast<std::size_t>(n), -1);
  st.orient_of.assign(static_cast<std::size_t>(n), 0);

  for (int j = 0; j < n; ++j) {
    const PartType& t = ins.type_of_part(j);
    int k = min_support_orientation(t);
    if (mode == ConstructMode::random && t.orientations.size() > 1) {
      std::uniform_real_distribution<double> coin(0.0, 1.0);
      if (coin(rng) < 0.5) {
        std::uniform_int_distribution<int> pick(
            0, static_cast<int>(t.orientations.size()) - 1);
        k = pick(rng);
      }
    }
    st.orient_of[static_cast<std::size_t>(j)] = k;
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  if (mode != ConstructMode::base) std::shuffle(order.begin(), order.end(), rng);
  if (mode == ConstructMode::by_height) {
    // Recoating follows the batch maximum, so filling batches tallest-first
    // lets short parts ride under tall ones at no extra layer cost.
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      const double ha = search.geom(a, st).height;
      const double hb = search.geom(b, st).height;
      if (ha != hb) return ha > hb;
      return search.area(a, st) > search.area(b, st);
    });
  } else {
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return search.area(a, st) > search.area(b, st);
    });
  }

  st.batch_count = 0;
  for (int j : order) {
    bool placed = false;
    for (int b = 0; b < st.batch_count && !placed; ++b) {
      std::vector<int> members = search.batch_members(st, b);
      members.push_back(j);
      st.batch_of[static_cast<std::size_t>(j)] = b;
      if (search.batch_packs(members, st)) {
        placed = true;
      } else {
        st.batch_of[static_cast<std::size_t>(j)] = -1;
      }
    }
    if (!placed) {
      st.batch_of[static_cast<std::size_t>(j)] = st.batch_count++;
      std::vector<int> single{j};
      if (!search.batch_packs(single, st))
        throw std::runtime_error(
            "construct_initial: part fits no batch alone; validate first");
    }
  }
  return st;
}

std::optional<double> state_energy(PlanSearch& search, const SearchState& st) {
  double total = 0;
  for (int b = 0; b < st.batch_count; ++b) {
    const std::vector<int> members = search.batch_members(st, b);
    if (members.empty()) continue;
    const auto value = search.batch_value(members, st);
    if (!value) return std::nullopt;
    total += *value;
  }
  return total;
}

void drop_empty_batches(SearchState& st) {
  std::vector<int> remap(static_cast<std::size_t>(st.batch_count), -1);
  int next = 0;
  for (int b = 0; b < st.batch_count; ++b) {
    for (int v : st.batch_of)
      if (v == b) {
        remap[static_cast<std::size_t>(b)] = next++;
        break;
      }
  }
  for (int& v : st.batch_of) v = remap[static_cast<std::size_t>(v)];
  st.batch_count = next;
}

}  // namespace

Plan construct_initial(const Instance& ins, std::mt19937& rng) {
  PlanSearch search(ins);
  const SearchState st = construct_state(ins, search, rng, ConstructMode::base);
  return search.materialize(st);
}

Plan local_search(const Instance& ins, const Plan& start,
                  const SearchBudget& budget) {
  if (budget.max_iterations <= 0 || budget.max_wall_time_s <= 0)
    throw std::invalid_argument("local_search: budget limits must be positive");

  const int n = static_cast<int>(ins.parts.size());
  PlanSearch search(ins);

  // Adopt the start plan as the incumbent state.
  SearchState st;
  st.batch_of.assign(static_cast<std::size_t>(n), -1);
  st.orient_of.assign(static_cast<std::size_t>(n), 0);
  st.batch_count = static_cast<int>(start.batches.size());
  for (int b = 0; b < st.batch_count; ++b)
    for (const Placement& pl : start.batches[static_cast<std::size_t>(b)]
                                   .placements) {
      const int j = ins.find_part(pl.instance_id);
      if (j < 0)
        throw std::invalid_argument("local_search: start plan references " +
                                    pl.instance_id);
      st.batch_of[static_cast<std::size_t>(j)] = b;
      st.orient_of[static_cast<std::size_t>(j)] = pl.orientation_index;
    }
  for (int j = 0; j < n; ++j)
    if (st.batch_of[static_cast<std::size_t>(j)] < 0)
      throw std::invalid_argument("local_search: start plan misses a part");

  std::optional<double> start_energy = state_energy(search, st);
  if (!start_energy)
    throw std::invalid_argument("local_search: start plan is infeasible");

  SearchState best_state = st;
  double best_energy = *start_energy;

  std::mt19937 rng(budget.random_seed);
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  long iterations = 0;
  long restarts = 0;
  double current = *start_energy;
  const double eps = 1e-9;

  while (iterations < budget.max_iterations &&
         elapsed() < budget.max_wall_time_s) {
    ++iterations;

    // One steepest-descent round: evaluate the whole neighborhood, apply the
    // best strictly improving move.
    double best_delta = -eps;
    SearchState best_move;
    bool found = false;

    std::vector<std::vector<int>> members(
        static_cast<std::size_t>(st.batch_count));
    std::vector<double> value(static_cast<std::size_t>(st.batch_count), 0);
    for (int b = 0; b < st.batch_count; ++b) {
      members[static_cast<std::size_t>(b)] = search.batch_members(st, b);
      value[static_cast<std::size_t>(b)] =
          *search.batch_value(members[static_cast<std::size_t>(b)], st);
    }

    const auto consider = [&](SearchState cand,
                              const std::vector<int>& touched,
                              double removed_value) {
      double delta = -removed_value;
      for (int b : touched) {
        const std::vector<int> mem = search.batch_members(cand, b);
        if (mem.empty()) continue;
        const auto v = search.batch_value(mem, cand);
        if (!v) return;
        delta += *v;
      }
      if (delta < best_delta) {
        best_delta = delta;
        best_move = std::move(cand);
        found = true;
      }
    };

    for (int j = 0; j < n; ++j) {
      const auto jz = static_cast<std::size_t>(j);
      const int b = st.batch_of[jz];
      const int nk =
          static_cast<int>(ins.type_of_part(j).orientations.size());
      // (a) switch the part's orientation in place
      for (int k = 0; k < nk; ++k) {
        if (k == st.orient_of[jz]) continue;
        SearchState cand = st;
        cand.orient_of[jz] = k;
        consider(std::move(cand), {b}, value[static_cast<std::size_t>(b)]);
      }
      // (b) relocate the part to another or a fresh batch
      for (int b2 = 0; b2 <= st.batch_count; ++b2) {
        if (b2 == b) continue;
        if (b2 == st.batch_count &&
            members[static_cast<std::size_t>(b)].size() == 1)
          continue;  // moving a singleton to a fresh batch is a no-op
        SearchState cand = st;
        cand.batch_of[jz] = b2;
        if (b2 == st.batch_count) ++cand.batch_count;
        const double removed =
            value[static_cast<std::size_t>(b)] +
            (b2 < st.batch_count ? value[static_cast<std::size_t>(b2)] : 0.0);
        consider(std::move(cand), {b, b2}, removed);
      }
    }
    // (c) swap two parts across batches
    for (int j1 = 0; j1 < n; ++j1)
      for (int j2 = j1 + 1; j2 < n; ++j2) {
        const int b1 = st.batch_of[static_cast<std::size_t>(j1)];
        const int b2 = st.batch_of[static_cast<std::size_t>(j2)];
        if (b1 == b2) continue;
        SearchState cand = st;
        cand.batch_of[static_cast<std::size_t>(j1)] = b2;
        cand.batch_of[static_cast<std::size_t>(j2)] = b1;
        consider(std::move(cand), {b1, b2},
                 value[static_cast<std::size_t>(b1)] +
                     value[static_cast<std::size_t>(b2)]);
      }
    // (d) merge two batches
    for (int b1 = 0; b1 < st.batch_count; ++b1)
      for (int b2 = b1 + 1; b2 < st.batch_count; ++b2) {
        SearchState cand = st;
        for (int& v : cand.batch_of)
          if (v == b2) v = b1;
        consider(std::move(cand), {b1},
                 value[static_cast<std::size_t>(b1)] +
                     value[static_cast<std::size_t>(b2)]);
      }

    if (found) {
      st = std::move(best_move);
      drop_empty_batches(st);
      current += best_delta;
      const auto verified = state_energy(search, st);
      current = verified ? *verified : current;
      if (current < best_energy - eps) {
        best_energy = current;
        best_state = st;
      }
      continue;
    }

    // Local optimum: restart from an alternative construction.
    const ConstructMode mode = restarts++ % 3 == 0 ? ConstructMode::by_height
                                                   : ConstructMode::random;
    SearchState fresh;
    try {
      fresh = construct_state(ins, search, rng, mode);
    } catch (const std::runtime_error&) {
      break;  // nothing constructible; keep the best found
    }
    const auto e = state_energy(search, fresh);
    if (!e) continue;
    st = std::move(fresh);
    current = *e;
    if (current < best_energy - eps) {
      best_energy = current;
      best_state = st;
    }
  }

  return search.materialize(best_state);
}

}  // namespace slmopt
