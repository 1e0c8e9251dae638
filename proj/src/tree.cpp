#include "cascade/tree.hpp"

#include <algorithm>
#include <unordered_set>

#include "cascade/errors.hpp"

namespace cascade {

namespace {

std::vector<std::vector<std::uint32_t>> full_allowed(const Schema& schema) {
  std::vector<std::vector<std::uint32_t>> allowed(schema.feature_count());
  for (std::size_t j = 0; j < schema.feature_count(); ++j) {
    allowed[j].resize(schema.cardinality(j));
    for (std::uint32_t v = 0; v < schema.cardinality(j); ++v) allowed[j][v] = v;
  }
  return allowed;
}

bool contains(const std::vector<std::uint32_t>& sorted, std::uint32_t v) {
  return std::binary_search(sorted.begin(), sorted.end(), v);
}

}  // namespace

Tree::Tree(SchemaPtr schema) : schema_(std::move(schema)) {
  TreeNode root;
  root.allowed = full_allowed(*schema_);
  nodes_.push_back(std::move(root));
  root_ = 0;
}

std::vector<NodeId> Tree::leaves() const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].is_leaf()) out.push_back(i);
  return out;
}

std::vector<NodeId> Tree::internal_nodes() const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < nodes_.size(); ++i)
    if (!nodes_[i].is_leaf()) out.push_back(i);
  return out;
}

std::size_t Tree::leaf_count() const {
  std::size_t k = 0;
  for (const auto& n : nodes_)
    if (n.is_leaf()) ++k;
  return k;
}

std::vector<NodeId> Tree::leaf_parents() const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.is_leaf()) continue;
    bool all_leaves = true;
    for (const auto& b : n.branches)
      if (!nodes_[b.child].is_leaf()) {
        all_leaves = false;
        break;
      }
    if (all_leaves) out.push_back(i);
  }
  return out;
}

std::size_t Tree::distinct_split_features() const {
  std::unordered_set<std::int32_t> feats;
  for (const auto& n : nodes_)
    if (!n.is_leaf()) feats.insert(n.split_feature);
  return feats.size();
}

NodeId Tree::add_node_(TreeNode n) {
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

void Tree::sort_branches_(NodeId id) {
  auto& br = nodes_[id].branches;
  std::sort(br.begin(), br.end(),
            [](const Branch& a, const Branch& b) { return a.values.front() < b.values.front(); });
}

void Tree::split_leaf_full(NodeId leaf, std::size_t feature) {
  TreeNode& n = nodes_[leaf];
  if (!n.is_leaf()) throw InternalError("split_leaf_full: node is internal");
  if (n.allowed[feature].size() < 2)
    throw InternalError("split_leaf_full: feature has a single allowed value");
  const auto values = n.allowed[feature];
  n.split_feature = static_cast<std::int32_t>(feature);
  for (std::uint32_t v : values) {
    TreeNode child;
    child.parent = leaf;
    child.allowed = nodes_[leaf].allowed;
    child.allowed[feature] = {v};
    const NodeId cid = add_node_(std::move(child));
    nodes_[leaf].branches.push_back(Branch{{v}, cid});
  }
  sort_branches_(leaf);
  compact_();
}

void Tree::split_leaf_binary(NodeId leaf, std::size_t feature,
                             const std::vector<std::uint32_t>& first_part) {
  TreeNode& n = nodes_[leaf];
  if (!n.is_leaf()) throw InternalError("split_leaf_binary: node is internal");
  const auto& all = n.allowed[feature];
  if (first_part.empty() || first_part.size() >= all.size())
    throw InternalError("split_leaf_binary: part must be a nonempty proper subset");
  std::vector<std::uint32_t> second;
  for (std::uint32_t v : all)
    if (!contains(first_part, v)) second.push_back(v);
  for (std::uint32_t v : first_part)
    if (!contains(all, v)) throw InternalError("split_leaf_binary: value outside allowed set");
  if (schema_->feature(feature).ordinal &&
      (!contiguous_(first_part) || !contiguous_(second)))
    throw InternalError("split_leaf_binary: ordinal parts must be contiguous runs");

  n.split_feature = static_cast<std::int32_t>(feature);
  for (const auto& part : {first_part, second}) {
    TreeNode child;
    child.parent = leaf;
    child.allowed = nodes_[leaf].allowed;
    child.allowed[feature] = part;
    const NodeId cid = add_node_(std::move(child));
    nodes_[leaf].branches.push_back(Branch{part, cid});
  }
  sort_branches_(leaf);
  compact_();
}

void Tree::merge_siblings(NodeId parent, std::size_t branch_a, std::size_t branch_b) {
  TreeNode& p = nodes_[parent];
  if (p.is_leaf()) throw InternalError("merge_siblings: node is a leaf");
  if (branch_a == branch_b || branch_a >= p.branches.size() || branch_b >= p.branches.size())
    throw InternalError("merge_siblings: bad branch indices");

  const std::size_t feature = static_cast<std::size_t>(p.split_feature);
  if (p.branches.size() == 2) {
    // Merging the only two branches collapses the parent back to a leaf.
    delete_descendants_(parent);
    compact_();
    return;
  }

  std::vector<std::uint32_t> merged;
  merged.reserve(p.branches[branch_a].values.size() + p.branches[branch_b].values.size());
  std::merge(p.branches[branch_a].values.begin(), p.branches[branch_a].values.end(),
             p.branches[branch_b].values.begin(), p.branches[branch_b].values.end(),
             std::back_inserter(merged));
  if (schema_->feature(feature).ordinal && !contiguous_(merged))
    throw InternalError("merge_siblings: ordinal merge must join neighboring runs");

  delete_descendants_(p.branches[branch_a].child);
  delete_descendants_(p.branches[branch_b].child);

  TreeNode child;
  child.parent = parent;
  child.allowed = nodes_[parent].allowed;
  child.allowed[feature] = merged;
  const NodeId cid = add_node_(std::move(child));

  auto& br = nodes_[parent].branches;
  const std::size_t lo = std::min(branch_a, branch_b);
  const std::size_t hi = std::max(branch_a, branch_b);
  br.erase(br.begin() + static_cast<std::ptrdiff_t>(hi));
  br[lo] = Branch{std::move(merged), cid};
  sort_branches_(parent);
  compact_();
}

void Tree::remove_children(NodeId id) {
  if (nodes_[id].is_leaf()) return;
  delete_descendants_(id);
  compact_();
}

// Marks the subtree below id as dead and turns id into a leaf.  Dead nodes
// are reclaimed by compact_().
void Tree::delete_descendants_(NodeId id) {
  std::vector<NodeId> stack;
  for (const auto& b : nodes_[id].branches) stack.push_back(b.child);
  nodes_[id].branches.clear();
  nodes_[id].split_feature = -1;
  while (!stack.empty()) {
    const NodeId cur = stack.back();
    stack.pop_back();
    for (const auto& b : nodes_[cur].branches) stack.push_back(b.child);
    nodes_[cur].parent = kNoNode;
    nodes_[cur].branches.clear();
    nodes_[cur].split_feature = -1;
    nodes_[cur].allowed.clear();  // marks the node dead
  }
}

void Tree::compact_() {
  std::vector<TreeNode> fresh;
  fresh.reserve(nodes_.size());
  std::vector<NodeId> remap(nodes_.size(), kNoNode);

  // DFS from the root so ids are stable given structure.
  std::vector<NodeId> stack{root_};
  while (!stack.empty()) {
    const NodeId old_id = stack.back();
    stack.pop_back();
    remap[old_id] = static_cast<NodeId>(fresh.size());
    fresh.push_back(std::move(nodes_[old_id]));
    for (auto it = fresh.back().branches.rbegin(); it != fresh.back().branches.rend(); ++it)
      stack.push_back(it->child);
  }
  for (auto& n : fresh) {
    if (n.parent != kNoNode) n.parent = remap[n.parent];
    for (auto& b : n.branches) b.child = remap[b.child];
  }
  nodes_ = std::move(fresh);
  root_ = 0;
}

NodeId Tree::assign_leaf(const Point& x) const {
  NodeId cur = root_;
  while (!nodes_[cur].is_leaf()) {
    const auto& n = nodes_[cur];
    const std::uint32_t v = x[static_cast<std::size_t>(n.split_feature)];
    NodeId next = kNoNode;
    for (const auto& b : n.branches) {
      if (contains(b.values, v)) {
        next = b.child;
        break;
      }
    }
    if (next == kNoNode) throw InternalError("assign_leaf: point escaped the partition");
    cur = next;
  }
  return cur;
}

std::uint64_t Tree::leaf_volume(NodeId leaf) const {
  const TreeNode& n = nodes_[leaf];
  if (!n.is_leaf()) throw InternalError("leaf_volume: node is internal");
  std::uint64_t v = 1;
  for (const auto& sigma : n.allowed) v *= sigma.size();
  return v;
}

bool Tree::contiguous_(const std::vector<std::uint32_t>& values) {
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] != values[i - 1] + 1) return false;
  return true;
}

std::vector<std::vector<std::uint32_t>> Tree::allowed_from_path(NodeId id) const {
  auto allowed = full_allowed(*schema_);
  // Collect conditions from the root down.
  std::vector<NodeId> path;
  for (NodeId cur = id; cur != root_; cur = nodes_[cur].parent) path.push_back(cur);
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    const NodeId child = *it;
    const TreeNode& parent = nodes_[nodes_[child].parent];
    const auto f = static_cast<std::size_t>(parent.split_feature);
    const Branch* taken = nullptr;
    for (const auto& b : parent.branches)
      if (b.child == child) taken = &b;
    if (!taken) throw InternalError("allowed_from_path: broken parent link");
    std::vector<std::uint32_t> isect;
    std::set_intersection(allowed[f].begin(), allowed[f].end(), taken->values.begin(),
                          taken->values.end(), std::back_inserter(isect));
    allowed[f] = std::move(isect);
  }
  return allowed;
}

void Tree::validate() const {
  if (nodes_.empty()) throw InternalError("validate: empty arena");
  std::size_t reachable = 0;
  std::vector<NodeId> stack{root_};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    ++reachable;
    const TreeNode& n = nodes_[id];
    if (n.allowed.size() != schema_->feature_count())
      throw InternalError("validate: node missing sigma cache");
    if (n.allowed != allowed_from_path(id))
      throw InternalError("validate: sigma cache disagrees with root path");
    for (std::size_t j = 0; j < n.allowed.size(); ++j) {
      if (n.allowed[j].empty()) throw InternalError("validate: empty sigma set");
      if (schema_->feature(j).ordinal && !contiguous_(n.allowed[j]))
        throw InternalError("validate: ordinal sigma set not contiguous");
    }
    if (n.is_leaf()) {
      if (!n.branches.empty()) throw InternalError("validate: leaf with branches");
      continue;
    }
    if (n.branches.size() < 2) throw InternalError("validate: internal node with < 2 branches");
    const auto f = static_cast<std::size_t>(n.split_feature);
    std::vector<std::uint32_t> unioned;
    for (const auto& b : n.branches) {
      if (b.values.empty()) throw InternalError("validate: empty branch subset");
      if (!std::is_sorted(b.values.begin(), b.values.end()))
        throw InternalError("validate: branch subset not sorted");
      if (schema_->feature(f).ordinal && !contiguous_(b.values))
        throw InternalError("validate: ordinal branch subset not contiguous");
      for (std::uint32_t v : b.values) {
        if (!contains(n.allowed[f], v))
          throw InternalError("validate: branch value outside the node's allowed set");
        unioned.push_back(v);
      }
      if (nodes_[b.child].parent != id) throw InternalError("validate: broken parent link");
      stack.push_back(b.child);
    }
    std::sort(unioned.begin(), unioned.end());
    if (std::adjacent_find(unioned.begin(), unioned.end()) != unioned.end())
      throw InternalError("validate: branch subsets overlap");
    if (unioned != n.allowed[f])
      throw InternalError("validate: branch subsets do not cover the allowed set");
  }
  if (reachable != nodes_.size()) throw InternalError("validate: unreachable arena nodes");
}

bool Tree::structurally_equal(const Tree& other) const {
  if (!(schema() == other.schema())) return false;
  // Branches are kept in canonical order, so a parallel DFS suffices.
  std::vector<std::pair<NodeId, NodeId>> stack{{root_, other.root_}};
  while (!stack.empty()) {
    const auto [a, b] = stack.back();
    stack.pop_back();
    const TreeNode& na = nodes_[a];
    const TreeNode& nb = other.nodes_[b];
    if (na.split_feature != nb.split_feature) return false;
    if (na.branches.size() != nb.branches.size()) return false;
    for (std::size_t i = 0; i < na.branches.size(); ++i) {
      if (na.branches[i].values != nb.branches[i].values) return false;
      stack.emplace_back(na.branches[i].child, nb.branches[i].child);
    }
  }
  return true;
}

Tree Tree::from_structure(SchemaPtr schema, const std::vector<TreeNode>& nodes, NodeId root) {
  Tree t(schema);
  t.nodes_ = nodes;
  t.root_ = root;
  // Rebuild caches from paths, then let validate() cross-check everything.
  for (NodeId i = 0; i < t.nodes_.size(); ++i) t.nodes_[i].allowed.clear();
  std::vector<NodeId> stack{root};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    TreeNode& n = t.nodes_[id];
    if (id == root) {
      n.parent = kNoNode;
      n.allowed = full_allowed(*schema);
    }
    for (auto& b : n.branches) {
      TreeNode& c = t.nodes_[b.child];
      c.parent = id;
      std::sort(b.values.begin(), b.values.end());
      c.allowed = n.allowed;
      c.allowed[static_cast<std::size_t>(n.split_feature)] = b.values;
      stack.push_back(b.child);
    }
    t.sort_branches_(id);
  }
  t.compact_();
  t.validate();
  return t;
}

const LeafStat& LeafStats::for_leaf(NodeId id) const {
  for (const auto& s : leaves)
    if (s.leaf == id) return s;
  throw InternalError("LeafStats: unknown leaf id");
}

LeafStats leaf_counts(const Tree& tree, const Dataset& data) {
  LeafStats out;
  out.n = data.size();
  std::vector<std::uint64_t> counts(tree.node_count(), 0);
  for (const auto& row : data.rows()) ++counts[tree.assign_leaf(row)];
  for (NodeId id = 0; id < tree.node_count(); ++id) {
    if (!tree.node(id).is_leaf()) continue;
    LeafStat s;
    s.leaf = id;
    s.count = counts[id];
    s.volume = tree.leaf_volume(id);
    s.density = out.n == 0 ? 0.0
                           : static_cast<double>(s.count) /
                                 (static_cast<double>(out.n) * static_cast<double>(s.volume));
    out.leaves.push_back(s);
  }
  return out;
}

double density_at(const Tree& tree, const LeafStats& stats, const Point& x) {
  return stats.for_leaf(tree.assign_leaf(x)).density;
}

bool trees_equivalent(const Tree& a, const LeafStats& sa, const Tree& b, const LeafStats& sb) {
  if (!(a.schema() == b.schema()))
    throw DataError("trees_equivalent: trees are over different schemas");
  if (a.domain_size() > (1ull << 20))
    throw GuardError("trees_equivalent: domain too large to enumerate");

  for (DomainIterator it(a.schema()); !it.done(); ++it) {
    const LeafStat& la = sa.for_leaf(a.assign_leaf(*it));
    const LeafStat& lb = sb.for_leaf(b.assign_leaf(*it));
    // n_a/(n_A V_a) == n_b/(n_B V_b), compared in exact integer arithmetic.
    const unsigned __int128 lhs =
        static_cast<unsigned __int128>(la.count) * sb.n * lb.volume;
    const unsigned __int128 rhs =
        static_cast<unsigned __int128>(lb.count) * sa.n * la.volume;
    if (lhs != rhs) return false;
  }
  return true;
}

}  // namespace cascade
