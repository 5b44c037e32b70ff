#pragma once

#include <random>

#include "slmopt/domain.hpp"

namespace slmopt {

struct SearchBudget {
  long max_iterations = 20000;
  double max_wall_time_s = 300;
  unsigned random_seed = 0;
};

struct BruteForceLimits {
  int max_parts = 6;
  int max_orientations = 3;
  // Partitions with more batches than this are skipped; by default any
  // count up to the part count is allowed.
  int max_batches = 1 << 20;
};

// Exhaustive optimum over all orientation assignments and part-to-batch
// partitions. Batch feasibility is decided exactly: rectangle positions are
// enumerated over the normal-pattern grid (margin plus subset sums of the
// other footprints' extents and gaps), which covers every left-bottom
// compacted packing. Intended as ground truth for tiny instances.
Plan brute_force_optimal(const Instance& instance, BruteForceLimits limits = {});

// Greedy start: minimal-support orientation per part, parts sorted by
// decreasing footprint area, first-fit into batches via bottom-left packing.
Plan construct_initial(const Instance& instance, std::mt19937& rng);

// Steepest-descent hill climbing with randomized restarts over orientation
// changes, part relocations, cross-batch swaps, and batch merges; modified
// batches are repacked bottom-left and moves that fail to pack are rejected.
// Deterministic for a fixed (instance, start, budget) when the iteration
// budget binds before the wall clock.
Plan local_search(const Instance& instance, const Plan& start,
                  const SearchBudget& budget);

}  // namespace slmopt
