#include "cascade/branch_posterior.hpp"

#include <cmath>

#include "cascade/errors.hpp"

namespace cascade {

void validate(const BranchModelHyper& h) {
  if (!(h.lambda > 0.0)) throw DataError("branch model: lambda must be > 0");
  if (!(h.alpha >= 1.0)) throw DataError("branch model: alpha must be >= 1");
  if (h.gamma && !(*h.gamma > 0.0 && *h.gamma < 1.0))
    throw DataError("branch model: gamma must be in (0,1)");
}

std::vector<std::uint64_t> internal_node_counts(const Tree& tree, const Dataset& data) {
  std::vector<std::uint64_t> counts(tree.node_count(), 0);
  for (const auto& row : data.rows()) {
    NodeId cur = tree.assign_leaf(row);
    ++counts[cur];
    while (tree.node(cur).parent != kNoNode) {
      cur = tree.node(cur).parent;
      ++counts[cur];
    }
  }
  return counts;
}

double log_posterior_branch(const Tree& tree, const std::vector<std::uint64_t>& node_counts,
                            const LeafStats& stats, const BranchModelHyper& hyper) {
  validate(hyper);
  if (node_counts.size() != tree.node_count())
    throw InternalError("log_posterior_branch: node counts do not match the tree");
  if (stats.leaves.size() != tree.leaf_count())
    throw InternalError("log_posterior_branch: stats do not match the tree");
  if (node_counts[tree.root()] != stats.n)
    throw InternalError("log_posterior_branch: root count != n");

  const double a = hyper.alpha;
  double num_internal = 0.0;
  double lp = 0.0;

  for (NodeId id = 0; id < tree.node_count(); ++id) {
    const TreeNode& node = tree.node(id);
    if (node.is_leaf()) continue;
    num_internal += 1.0;
    const auto b = static_cast<double>(node.branches.size());
    lp -= std::lgamma(b + 1.0);
    // ln B(a+n_c1,...,a+n_cb) - ln B(a,...,a), both via log-gamma.
    std::uint64_t total = 0;
    for (const auto& br : node.branches) {
      const std::uint64_t nc = node_counts[br.child];
      total += nc;
      lp += std::lgamma(static_cast<double>(nc) + a);
    }
    if (total != node_counts[id])
      throw InternalError("log_posterior_branch: child counts do not sum to parent count");
    lp -= std::lgamma(static_cast<double>(total) + b * a);
    lp -= b * std::lgamma(a) - std::lgamma(b * a);
  }

  const auto num_leaves = static_cast<double>(stats.leaves.size());
  lp += -hyper.lambda * (num_internal + num_leaves) +
        (num_leaves + num_internal - 1.0) * std::log(hyper.lambda);

  for (const auto& leaf : stats.leaves)
    if (leaf.count > 0)
      lp -= static_cast<double>(leaf.count) * std::log(static_cast<double>(leaf.volume));

  if (hyper.gamma) {
    const double g = *hyper.gamma;
    const auto p = static_cast<double>(tree.schema().feature_count());
    const auto d = static_cast<double>(tree.distinct_split_features());
    lp += std::lgamma(p + 1.0) - std::lgamma(d + 1.0) - std::lgamma(p - d + 1.0);
    lp += d * std::log(g) + (p - d) * std::log(1.0 - g);
  }
  return lp;
}

}  // namespace cascade
