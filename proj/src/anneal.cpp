#include "cascade/anneal.hpp"

#include <algorithm>
#include <cmath>

#include "cascade/errors.hpp"

namespace cascade {

void validate(const AnnealConfig& c) {
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw DataError("anneal: epsilon must be in (0,1)");
  if (c.iterations == 0) throw DataError("anneal: iterations must be positive");
  if (!(c.initial_temperature > 0.0)) throw DataError("anneal: initial temperature must be > 0");
  if (!(c.cooling_rate > 0.0 && c.cooling_rate < 1.0))
    throw DataError("anneal: cooling rate must be in (0,1)");
  if (c.restart_period == 0) throw DataError("anneal: restart period must be positive");
}

TreeObjective leaf_objective(const LeafModelHyper& hyper) {
  validate(hyper);
  return [hyper](const Tree& tree, const LeafStats& stats) {
    return log_posterior_leaf(tree, stats, hyper);
  };
}

TreeObjective branch_objective(const Dataset& data, const BranchModelHyper& hyper) {
  validate(hyper);
  return [&data, hyper](const Tree& tree, const LeafStats& stats) {
    return log_posterior_branch(tree, internal_node_counts(tree, data), stats, hyper);
  };
}

namespace {

// Uniform nonempty proper subset of `values`; for ordinal features a
// contiguous prefix chosen by a uniform cut.  The complement is taken by
// the caller, so subset/complement symmetry needs no dedup.
std::vector<std::uint32_t> random_proper_subset(const std::vector<std::uint32_t>& values,
                                                bool ordinal, Rng& rng) {
  if (ordinal) {
    const std::size_t cut = 1 + static_cast<std::size_t>(rng.below(values.size() - 1));
    return {values.begin(), values.begin() + static_cast<std::ptrdiff_t>(cut)};
  }
  std::vector<std::uint32_t> subset;
  while (true) {
    subset.clear();
    for (std::uint32_t v : values)
      if (rng.coin()) subset.push_back(v);
    if (!subset.empty() && subset.size() < values.size()) return subset;
  }
}

std::vector<std::size_t> splittable_features(const TreeNode& node) {
  std::vector<std::size_t> feats;
  for (std::size_t j = 0; j < node.allowed.size(); ++j)
    if (node.allowed[j].size() >= 2) feats.push_back(j);
  return feats;
}

}  // namespace

Tree propose_neighbor(const Tree& tree, Rng& rng, double epsilon) {
  const double u = rng.unit();
  const double q = (1.0 - epsilon) / 4.0;
  Tree next = tree;

  if (u < q) {
    // Delete the children of a uniformly chosen parent-of-leaves.
    const auto candidates = next.leaf_parents();
    if (candidates.empty()) return next;  // root-only tree: skip
    next.remove_children(rng.pick(candidates));
  } else if (u < 2.0 * q) {
    // Full split of a uniformly chosen leaf on a uniformly chosen feature.
    const auto leaves = next.leaves();
    const NodeId leaf = rng.pick(leaves);
    const std::size_t feature = rng.below(next.schema().feature_count());
    if (next.node(leaf).allowed[feature].size() < 2) return next;  // skip
    next.split_leaf_full(leaf, feature);
  } else if (u < 3.0 * q) {
    // Strip a uniformly chosen node and split it into two value subsets.
    const NodeId id = static_cast<NodeId>(rng.below(next.node_count()));
    const auto feats = splittable_features(next.node(id));
    if (feats.empty()) return next;  // every feature pinned: skip
    const std::size_t feature = rng.pick(feats);
    next.remove_children(id);
    // remove_children compacted the arena; recover the node via its path
    // being unchanged: compaction keeps DFS order, so the stripped node
    // kept its id only if no descendants preceded it.  Easier: find the
    // unique leaf with the same allowed sets.
    NodeId target = kNoNode;
    for (NodeId i = 0; i < next.node_count(); ++i)
      if (next.node(i).is_leaf() && next.node(i).allowed == tree.node(id).allowed) {
        target = i;
        break;
      }
    if (target == kNoNode) throw InternalError("propose_neighbor: lost node after strip");
    const auto& sigma = next.node(target).allowed[feature];
    const auto first = random_proper_subset(sigma, next.schema().feature(feature).ordinal, rng);
    next.split_leaf_binary(target, feature, first);
  } else if (u < 4.0 * q) {
    // Merge two siblings under a uniformly chosen internal node.
    const auto internals = next.internal_nodes();
    if (internals.empty()) return next;
    const NodeId parent = rng.pick(internals);
    const auto& branches = next.node(parent).branches;
    const std::size_t b = branches.size();
    std::size_t i, j;
    if (next.schema().feature(static_cast<std::size_t>(next.node(parent).split_feature)).ordinal) {
      // Neighboring runs only; branches are sorted, so adjacent indices.
      i = rng.below(b - 1);
      j = i + 1;
    } else {
      i = rng.below(b);
      j = rng.below(b - 1);
      if (j >= i) ++j;
    }
    next.merge_siblings(parent, i, j);
  } else {
    // Remove all children of a uniformly chosen node.
    const NodeId id = static_cast<NodeId>(rng.below(next.node_count()));
    next.remove_children(id);  // no-op on leaves
  }
  return next;
}

TreeFit anneal(const Dataset& data, const TreeObjective& objective, const AnnealConfig& config) {
  validate(config);
  Rng rng(config.seed);

  Tree current = config.warm_start ? *config.warm_start : Tree(data.schema_ptr());
  if (config.warm_start && !(current.schema() == data.schema()))
    throw DataError("anneal: warm start tree is over a different schema");

  LeafStats current_stats = leaf_counts(current, data);
  double current_score = objective(current, current_stats);

  Tree best = current;
  LeafStats best_stats = current_stats;
  double best_score = current_score;

  std::vector<TracePoint> trace;
  trace.reserve(config.iterations);

  double temperature = config.initial_temperature;
  for (std::uint64_t iter = 1; iter <= config.iterations; ++iter) {
    Tree proposal = propose_neighbor(current, rng, config.epsilon);
    LeafStats proposal_stats = leaf_counts(proposal, data);
    const double proposal_score = objective(proposal, proposal_stats);

    const double delta = proposal_score - current_score;
    if (delta >= 0.0 || rng.unit() < std::exp(delta / temperature)) {
      current = std::move(proposal);
      current_stats = std::move(proposal_stats);
      current_score = proposal_score;
      if (current_score > best_score) {
        best = current;
        best_stats = current_stats;
        best_score = current_score;
      }
    }

    trace.push_back({iter, current_score, best_score});
    temperature *= config.cooling_rate;

    // Periodic reset to the best tree so far or the trivial root tree.
    if (iter % config.restart_period == 0 && iter < config.iterations) {
      if (rng.coin()) {
        current = best;
        current_stats = best_stats;
        current_score = best_score;
      } else {
        current = Tree(data.schema_ptr());
        current_stats = leaf_counts(current, data);
        current_score = objective(current, current_stats);
      }
    }
  }
  return TreeFit{std::move(best), std::move(best_stats), best_score, std::move(trace)};
}

namespace {

// All partitions of `values` into >= 2 unordered nonempty blocks.  For
// ordinal features only contiguous-run partitions are produced.
std::vector<std::vector<std::vector<std::uint32_t>>> set_partitions(
    const std::vector<std::uint32_t>& values, bool ordinal) {
  std::vector<std::vector<std::vector<std::uint32_t>>> out;
  const std::size_t s = values.size();
  if (s < 2) return out;
  if (ordinal) {
    // Choose a nonempty set of cut positions between consecutive values.
    for (std::uint64_t mask = 1; mask < (1ull << (s - 1)); ++mask) {
      std::vector<std::vector<std::uint32_t>> blocks(1);
      for (std::size_t i = 0; i < s; ++i) {
        blocks.back().push_back(values[i]);
        if (i + 1 < s && (mask >> i) & 1) blocks.emplace_back();
      }
      out.push_back(std::move(blocks));
    }
    return out;
  }
  // Restricted growth strings enumerate set partitions once each, with
  // blocks canonically ordered by first occurrence.
  std::vector<std::size_t> assign(s, 0);
  const auto advance = [&assign]() {
    for (std::size_t i = assign.size(); i-- > 1;) {
      std::size_t prefix_max = 0;
      for (std::size_t k = 0; k < i; ++k) prefix_max = std::max(prefix_max, assign[k]);
      if (assign[i] <= prefix_max) {
        ++assign[i];
        std::fill(assign.begin() + static_cast<std::ptrdiff_t>(i) + 1, assign.end(), 0);
        return true;
      }
    }
    return false;
  };
  while (true) {
    const std::size_t nblocks = 1 + *std::max_element(assign.begin(), assign.end());
    if (nblocks >= 2) {
      std::vector<std::vector<std::uint32_t>> blocks(nblocks);
      for (std::size_t i = 0; i < s; ++i) blocks[assign[i]].push_back(values[i]);
      out.push_back(std::move(blocks));
    }
    if (!advance()) return out;
  }
}

struct Enumerator {
  const Schema& schema;
  std::size_t depth_cap;
  std::uint64_t max_trees;
  std::uint64_t produced = 0;

  void count_shape() {
    if (++produced > max_trees)
      throw GuardError("enumerate_trees: more than " + std::to_string(max_trees) + " trees");
  }

  // Every subtree shape over the given context, as node lists rooted at 0.
  std::vector<std::vector<TreeNode>> subtrees(
      const std::vector<std::vector<std::uint32_t>>& allowed, std::size_t depth) {
    std::vector<std::vector<TreeNode>> result;
    TreeNode leaf;
    result.push_back({leaf});
    if (depth >= depth_cap) return result;

    for (std::size_t f = 0; f < schema.feature_count(); ++f) {
      if (allowed[f].size() < 2) continue;
      for (const auto& blocks : set_partitions(allowed[f], schema.feature(f).ordinal)) {
        // Recursively enumerate each block's subtrees, then take the
        // cartesian product.
        std::vector<std::vector<std::vector<TreeNode>>> per_block;
        per_block.reserve(blocks.size());
        for (const auto& block : blocks) {
          auto child_allowed = allowed;
          child_allowed[f] = block;
          per_block.push_back(subtrees(child_allowed, depth + 1));
        }
        std::vector<std::size_t> pick(blocks.size(), 0);
        while (true) {
          count_shape();
          std::vector<TreeNode> nodes(1);
          nodes[0].split_feature = static_cast<std::int32_t>(f);
          for (std::size_t b = 0; b < blocks.size(); ++b) {
            const auto& sub = per_block[b][pick[b]];
            const auto offset = static_cast<NodeId>(nodes.size());
            nodes[0].branches.push_back(Branch{blocks[b], offset});
            for (const auto& sn : sub) {
              nodes.push_back(sn);
              for (auto& br : nodes.back().branches) br.child += offset;
            }
          }
          result.push_back(std::move(nodes));
          std::size_t b = blocks.size();
          while (b-- > 0) {
            if (++pick[b] < per_block[b].size()) break;
            pick[b] = 0;
            if (b == 0) goto done_product;
          }
        }
      done_product:;
      }
    }
    return result;
  }
};

}  // namespace

void enumerate_trees(const SchemaPtr& schema, std::size_t depth_cap,
                     const std::function<void(const Tree&)>& yield, std::uint64_t max_trees) {
  std::vector<std::vector<std::uint32_t>> allowed(schema->feature_count());
  for (std::size_t j = 0; j < schema->feature_count(); ++j)
    for (std::uint32_t v = 0; v < schema->cardinality(j); ++v) allowed[j].push_back(v);

  // The recursion counts internal shapes as they are composed, so the guard
  // fires before memory blows up; the final count below covers the root
  // leaf shape as well.
  Enumerator e{*schema, depth_cap, max_trees, 1};
  const auto shapes = e.subtrees(allowed, 0);
  if (shapes.size() > max_trees)
    throw GuardError("enumerate_trees: more than " + std::to_string(max_trees) + " trees");
  for (const auto& nodes : shapes) yield(Tree::from_structure(schema, nodes, 0));
}

std::vector<Tree> enumerate_trees(const SchemaPtr& schema, std::size_t depth_cap,
                                  std::uint64_t max_trees) {
  std::vector<Tree> out;
  enumerate_trees(
      schema, depth_cap, [&out](const Tree& t) { out.push_back(t); }, max_trees);
  return out;
}

}  // namespace cascade
