#include <doctest.h>

#include <functional>
#include <map>

#include "cascade/errors.hpp"
#include "cascade/tree.hpp"
#include "test_support.hpp"

using namespace cascade;

namespace {

using LeafPredicate = std::function<bool(const TreeNode&)>;

NodeId find_leaf(const Tree& t, const LeafPredicate& pred) {
  for (NodeId id = 0; id < t.node_count(); ++id)
    if (t.node(id).is_leaf() && pred(t.node(id))) return id;
  REQUIRE(false);
  return kNoNode;
}

// The worked four-feature cascade: conditions x1 in {4,5,6}, x2 in
// {100,101}, x3 in {10,15}, then x1 refined to {4,5} along one path.
Tree worked_example_tree() {
  const auto schema = testing::volume_example_schema();
  Tree t(schema);
  const std::vector<std::uint32_t> x1_456 = {3, 4, 5};
  const std::vector<std::uint32_t> x2_100_101 = {0, 1};
  const std::vector<std::uint32_t> x3_10_15 = {0, 5};
  const std::vector<std::uint32_t> x1_45 = {3, 4};

  t.split_leaf_binary(t.root(), 0, x1_456);
  NodeId cur = find_leaf(t, [&](const TreeNode& n) { return n.allowed[0] == x1_456; });
  t.split_leaf_binary(cur, 1, x2_100_101);
  cur = find_leaf(t, [&](const TreeNode& n) {
    return n.allowed[0] == x1_456 && n.allowed[1] == x2_100_101;
  });
  t.split_leaf_binary(cur, 2, x3_10_15);
  cur = find_leaf(t, [&](const TreeNode& n) {
    return n.allowed[0] == x1_456 && n.allowed[1] == x2_100_101 && n.allowed[2] == x3_10_15;
  });
  t.split_leaf_binary(cur, 0, x1_45);
  t.validate();
  return t;
}

}  // namespace

TEST_CASE("leaf volume of the worked example is 24") {
  const Tree t = worked_example_tree();
  const NodeId leaf = find_leaf(t, [](const TreeNode& n) {
    return n.allowed[0] == std::vector<std::uint32_t>{3, 4} &&
           n.allowed[1] == std::vector<std::uint32_t>{0, 1} &&
           n.allowed[2] == std::vector<std::uint32_t>{0, 5};
  });
  CHECK(t.leaf_volume(leaf) == 24);
  CHECK(t.node(leaf).allowed[3].size() == 3);  // x4 unconstrained
}

TEST_CASE("root-only tree has the full domain as its volume") {
  const auto schema = testing::volume_example_schema();
  Tree t(schema);
  CHECK(t.leaf_volume(t.root()) == 504);
  CHECK_THROWS_AS((void)worked_example_tree().leaf_volume(0), InternalError);  // root is internal
}

TEST_CASE("leaf pinned to a single value in every feature has volume 1") {
  const auto schema = testing::make_schema({{"a", 2}, {"b", 3}});
  Tree t(schema);
  t.split_leaf_full(t.root(), 0);
  const NodeId leaf0 = find_leaf(t, [](const TreeNode& n) {
    return n.allowed[0] == std::vector<std::uint32_t>{0};
  });
  t.split_leaf_full(leaf0, 1);
  const NodeId pinned = find_leaf(t, [](const TreeNode& n) {
    return n.allowed[0] == std::vector<std::uint32_t>{0} &&
           n.allowed[1] == std::vector<std::uint32_t>{1};
  });
  CHECK(t.leaf_volume(pinned) == 1);
}

TEST_CASE("assign_leaf follows the worked example path") {
  const Tree t = worked_example_tree();
  const auto& schema = t.schema();
  // Point (x1=4, x2=100, x3=10, x4=8)
  const Point x = {schema.category_index(0, "4"), schema.category_index(1, "100"),
                   schema.category_index(2, "10"), schema.category_index(3, "8")};
  const NodeId leaf = t.assign_leaf(x);
  CHECK(t.leaf_volume(leaf) == 24);

  Tree root_only(testing::volume_example_schema());
  CHECK(root_only.assign_leaf(x) == root_only.root());
}

TEST_CASE("every domain point maps to exactly one leaf and volumes count assignments") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto schema = testing::make_schema({{"a", 3}, {"b", 2}, {"c", 4}});
    const Tree t = testing::random_tree(schema, seed);
    t.validate();
    std::map<NodeId, std::uint64_t> hits;
    for (DomainIterator it(*schema); !it.done(); ++it) ++hits[t.assign_leaf(*it)];
    std::uint64_t total_volume = 0;
    for (const NodeId leaf : t.leaves()) {
      CHECK(hits[leaf] == t.leaf_volume(leaf));
      total_volume += t.leaf_volume(leaf);
    }
    CHECK(total_volume == schema->domain_size());
  }
}

TEST_CASE("leaf_counts: totals, densities, and the uniform example") {
  const auto schema = testing::make_schema({{"x", 100}});
  const Dataset data = testing::random_dataset(schema, 100, 3);
  Tree root_only(schema);
  const LeafStats stats = leaf_counts(root_only, data);
  REQUIRE(stats.leaves.size() == 1);
  CHECK(stats.leaves[0].count == 100);
  CHECK(stats.leaves[0].density == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("density formula and empty leaves") {
  // n_l=100 of n=1000 in a volume-6 leaf: 100/6000.
  const auto schema = testing::make_schema({{"a", 2}, {"b", 6}});
  std::vector<Point> rows;
  for (int i = 0; i < 100; ++i) rows.push_back({0, static_cast<std::uint32_t>(i % 6)});
  for (int i = 0; i < 900; ++i) rows.push_back({1, static_cast<std::uint32_t>(i % 6)});
  const Dataset data(schema, rows);
  Tree t(schema);
  t.split_leaf_full(t.root(), 0);
  const LeafStats stats = leaf_counts(t, data);
  const NodeId left = find_leaf(t, [](const TreeNode& n) {
    return n.allowed[0] == std::vector<std::uint32_t>{0};
  });
  CHECK(stats.for_leaf(left).count == 100);
  CHECK(stats.for_leaf(left).density == doctest::Approx(100.0 / 6000.0).epsilon(1e-12));
  CHECK(density_at(t, stats, {0, 0}) == doctest::Approx(100.0 / 6000.0));

  // An untouched leaf stays at density zero.
  const Dataset one_sided(schema, {{0, 0}, {0, 1}});
  const LeafStats s2 = leaf_counts(t, one_sided);
  const NodeId right = find_leaf(t, [](const TreeNode& n) {
    return n.allowed[0] == std::vector<std::uint32_t>{1};
  });
  CHECK(s2.for_leaf(right).count == 0);
  CHECK(s2.for_leaf(right).density == 0.0);
}

TEST_CASE("density mass sums to one over the domain") {
  const auto schema = testing::make_schema({{"a", 3}, {"b", 3}});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Tree t = testing::random_tree(schema, 100 + seed);
    const Dataset data = testing::random_dataset(schema, 50, seed);
    const LeafStats stats = leaf_counts(t, data);
    double mass = 0.0;
    for (const auto& leaf : stats.leaves)
      mass += leaf.density * static_cast<double>(leaf.volume);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("sigma caches agree with the path oracle after random edits") {
  const auto schema = testing::make_schema({{"a", 3}, {"b", 4}, {"c", 2}});
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const Tree t = testing::random_tree(schema, 200 + seed, 20);
    for (NodeId id = 0; id < t.node_count(); ++id)
      CHECK(t.node(id).allowed == t.allowed_from_path(id));
  }
}

TEST_CASE("ordinal trees keep contiguous runs through random edits") {
  const auto schema = testing::make_schema({{"a", 5}, {"b", 4}}, /*ordinal=*/true);
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const Tree t = testing::random_tree(schema, 300 + seed, 25);
    CHECK_NOTHROW(t.validate());  // validate() checks contiguity
  }
}

TEST_CASE("trees_equivalent: reflexive, shape-insensitive, and detects missing splits") {
  const auto schema = testing::make_schema({{"a", 2}, {"b", 2}});
  const Dataset data(schema, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});

  Tree root_only(schema);
  const LeafStats s_root = leaf_counts(root_only, data);
  CHECK(trees_equivalent(root_only, s_root, root_only, s_root));

  // A split whose two leaves carry equal densities is equivalent to no
  // split at all.
  Tree split(schema);
  split.split_leaf_full(split.root(), 0);
  const LeafStats s_split = leaf_counts(split, data);
  CHECK(trees_equivalent(root_only, s_root, split, s_split));
  CHECK(trees_equivalent(split, s_split, root_only, s_root));

  // Unbalanced data breaks the equivalence.
  const Dataset skewed(schema, {{0, 0}, {0, 1}, {1, 0}});
  CHECK_FALSE(trees_equivalent(root_only, leaf_counts(root_only, skewed), split,
                               leaf_counts(split, skewed)));
}

TEST_CASE("trees_equivalent is transitive on constructed equal-density trees") {
  const auto schema = testing::make_schema({{"a", 2}, {"b", 2}});
  const Dataset data(schema, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  Tree t1(schema);
  Tree t2(schema);
  t2.split_leaf_full(t2.root(), 0);
  Tree t3(schema);
  t3.split_leaf_full(t3.root(), 1);
  const auto s1 = leaf_counts(t1, data);
  const auto s2 = leaf_counts(t2, data);
  const auto s3 = leaf_counts(t3, data);
  CHECK(trees_equivalent(t1, s1, t2, s2));
  CHECK(trees_equivalent(t2, s2, t3, s3));
  CHECK(trees_equivalent(t1, s1, t3, s3));
}

TEST_CASE("trees_equivalent refuses schemas too large to enumerate") {
  std::vector<std::pair<std::string, std::uint32_t>> feats;
  for (int i = 0; i < 6; ++i) feats.emplace_back("f" + std::to_string(i), 40);
  const auto schema = testing::make_schema(feats);  // 40^6 > 2^20
  Tree t(schema);
  const Dataset data(schema, {Point(6, 0)});
  const auto s = leaf_counts(t, data);
  CHECK_THROWS_AS((void)trees_equivalent(t, s, t, s), GuardError);
}

TEST_CASE("structural edits reject invariant-breaking inputs") {
  const auto schema = testing::make_schema({{"a", 4}, {"b", 2}}, /*ordinal=*/true);
  Tree t(schema);
  CHECK_THROWS_AS(t.split_leaf_binary(t.root(), 0, {0, 2}), InternalError);  // not contiguous
  CHECK_THROWS_AS(t.split_leaf_binary(t.root(), 0, {}), InternalError);
  CHECK_THROWS_AS(t.split_leaf_binary(t.root(), 0, {0, 1, 2, 3}), InternalError);
  t.split_leaf_full(t.root(), 1);
  CHECK_THROWS_AS(t.split_leaf_full(0, 1), InternalError);  // internal node
}
