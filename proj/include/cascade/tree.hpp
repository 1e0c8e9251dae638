#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "cascade/dataset.hpp"
#include "cascade/schema.hpp"

namespace cascade {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

struct Branch {
  std::vector<std::uint32_t> values;  // sorted subset of the parent's allowed set
  NodeId child = kNoNode;
};

struct TreeNode {
  NodeId parent = kNoNode;
  std::int32_t split_feature = -1;  // -1 marks a leaf
  std::vector<Branch> branches;     // kept sorted by values.front()
  // Allowed value set per feature along the path from the root (sigma sets).
  std::vector<std::vector<std::uint32_t>> allowed;

  bool is_leaf() const { return split_feature < 0; }
};

// A cascaded partition of the domain.  Every internal node splits one
// feature's allowed values into >= 2 disjoint subsets covering the set, so
// each domain point descends to exactly one leaf.  Value type: copy freely.
class Tree {
 public:
  explicit Tree(SchemaPtr schema);  // root-only tree

  const Schema& schema() const { return *schema_; }
  const SchemaPtr& schema_ptr() const { return schema_; }
  NodeId root() const { return root_; }
  std::size_t node_count() const { return nodes_.size(); }
  const TreeNode& node(NodeId id) const { return nodes_[id]; }
  bool is_root_only() const { return nodes_.size() == 1; }

  std::vector<NodeId> leaves() const;
  std::vector<NodeId> internal_nodes() const;
  std::size_t leaf_count() const;
  // Internal nodes whose children are all leaves.
  std::vector<NodeId> leaf_parents() const;
  // Number of distinct features split on anywhere in the tree.
  std::size_t distinct_split_features() const;

  // Structure edits.  All of them keep sigma caches consistent and compact
  // the arena, so node ids are invalidated by every edit.
  void split_leaf_full(NodeId leaf, std::size_t feature);
  void split_leaf_binary(NodeId leaf, std::size_t feature,
                         const std::vector<std::uint32_t>& first_part);
  void merge_siblings(NodeId parent, std::size_t branch_a, std::size_t branch_b);
  void remove_children(NodeId id);

  NodeId assign_leaf(const Point& x) const;
  std::uint64_t leaf_volume(NodeId leaf) const;  // throws on internal nodes
  std::uint64_t domain_size() const { return schema_->domain_size(); }

  // Full invariant check: partition property, branch arity, ordinal
  // contiguity, sigma-cache consistency.  Throws InternalError.
  void validate() const;
  // Recomputes a node's sigma sets from its root path; debug oracle for the
  // cached values.
  std::vector<std::vector<std::uint32_t>> allowed_from_path(NodeId id) const;

  bool structurally_equal(const Tree& other) const;

  // Arena-level construction for deserialization; branches must already
  // form a valid tree.  Validates and rebuilds sigma caches.
  static Tree from_structure(SchemaPtr schema, const std::vector<TreeNode>& nodes, NodeId root);

 private:
  SchemaPtr schema_;
  std::vector<TreeNode> nodes_;
  NodeId root_ = 0;

  NodeId add_node_(TreeNode n);
  void delete_descendants_(NodeId id);
  void compact_();
  void sort_branches_(NodeId id);
  static bool contiguous_(const std::vector<std::uint32_t>& values);
};

struct LeafStat {
  NodeId leaf = kNoNode;
  std::uint64_t count = 0;
  std::uint64_t volume = 0;
  double density = 0.0;  // count / (n * volume)
};

struct LeafStats {
  std::uint64_t n = 0;
  std::vector<LeafStat> leaves;
  const LeafStat& for_leaf(NodeId id) const;  // throws InternalError if absent
};

LeafStats leaf_counts(const Tree& tree, const Dataset& data);
double density_at(const Tree& tree, const LeafStats& stats, const Point& x);

// Definition-level density equivalence: true iff the two fitted trees give
// identical densities at every domain configuration.  Exact rational
// comparison; domain must be enumerable (<= 2^20 points).
bool trees_equivalent(const Tree& a, const LeafStats& sa, const Tree& b, const LeafStats& sb);

}  // namespace cascade
