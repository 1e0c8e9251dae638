#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cascade/branch_posterior.hpp"
#include "cascade/leaf_posterior.hpp"
#include "cascade/random.hpp"
#include "cascade/tree.hpp"

namespace cascade {

struct AnnealConfig {
  double epsilon = 0.05;              // structural-move probability, in (0,1)
  std::uint64_t iterations = 20000;   // > 0
  double initial_temperature = 1.0;   // > 0
  double cooling_rate = 0.9995;       // in (0,1), geometric schedule
  std::uint64_t restart_period = 5000;  // > 0
  std::uint64_t seed = 0;
  std::optional<Tree> warm_start;
};

void validate(const AnnealConfig& c);

struct TracePoint {
  std::uint64_t iteration;
  double current;
  double best;
};

struct TreeFit {
  Tree tree;
  LeafStats stats;
  double log_posterior;
  std::vector<TracePoint> trace;
};

// Scores a candidate tree; stats are the leaf counts of that tree on the
// training data the objective was built for.
using TreeObjective = std::function<double(const Tree&, const LeafStats&)>;

TreeObjective leaf_objective(const LeafModelHyper& hyper);
TreeObjective branch_objective(const Dataset& data, const BranchModelHyper& hyper);

// One local move, chosen by a single uniform draw u in (0,1):
//   u < (1-e)/4            delete the children of a parent-of-leaves
//   (1-e)/4 <= u < (1-e)/2 full-split a leaf on a feature
//   (1-e)/2 <= u < 3(1-e)/4 strip a node and split it into two subsets
//   3(1-e)/4 <= u < 1-e    merge two siblings (descendants deleted)
//   u >= 1-e               remove all children of a node
// Moves that cannot apply return the input tree unchanged.
Tree propose_neighbor(const Tree& tree, Rng& rng, double epsilon);

// Simulated annealing over tree structures; returns the best tree seen
// across all iterations.  Deterministic given the seed.
TreeFit anneal(const Dataset& data, const TreeObjective& objective, const AnnealConfig& config);

// Enumerates every structurally distinct tree up to depth_cap, exactly
// once.  Throws GuardError when more than max_trees would be produced.
void enumerate_trees(const SchemaPtr& schema, std::size_t depth_cap,
                     const std::function<void(const Tree&)>& yield,
                     std::uint64_t max_trees = 1000000);
std::vector<Tree> enumerate_trees(const SchemaPtr& schema, std::size_t depth_cap,
                                  std::uint64_t max_trees = 1000000);

}  // namespace cascade
