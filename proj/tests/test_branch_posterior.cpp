#include <doctest.h>

#include <cmath>

#include "cascade/anneal.hpp"
#include "cascade/branch_posterior.hpp"
#include "cascade/errors.hpp"
#include "cascade/random.hpp"
#include "test_support.hpp"

using namespace cascade;

TEST_CASE("node counts: root carries n and children sum to parents") {
  const auto schema = testing::make_schema({{"a", 2}});
  std::vector<Point> rows;
  for (int i = 0; i < 3; ++i) rows.push_back({0});
  for (int i = 0; i < 7; ++i) rows.push_back({1});
  const Dataset data(schema, rows);

  Tree root_only(schema);
  auto counts = internal_node_counts(root_only, data);
  CHECK(counts[root_only.root()] == 10);

  Tree split(schema);
  split.split_leaf_full(split.root(), 0);
  counts = internal_node_counts(split, data);
  CHECK(counts[split.root()] == 10);
  std::vector<std::uint64_t> child_counts;
  for (const auto& b : split.node(split.root()).branches) child_counts.push_back(counts[b.child]);
  CHECK(child_counts == std::vector<std::uint64_t>{3, 7});
}

TEST_CASE("node counts are consistent on random trees") {
  const auto schema = testing::make_schema({{"a", 3}, {"b", 2}, {"c", 3}});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Tree t = testing::random_tree(schema, seed + 40);
    const Dataset data = testing::random_dataset(schema, 60, seed);
    const auto counts = internal_node_counts(t, data);
    CHECK(counts[t.root()] == data.size());
    std::uint64_t leaf_total = 0;
    for (NodeId id = 0; id < t.node_count(); ++id) {
      const auto& node = t.node(id);
      if (node.is_leaf()) {
        leaf_total += counts[id];
        continue;
      }
      std::uint64_t child_sum = 0;
      for (const auto& b : node.branches) child_sum += counts[b.child];
      CHECK(child_sum == counts[id]);
    }
    CHECK(leaf_total == data.size());
  }
}

TEST_CASE("root-only closed form") {
  // I empty, one leaf: -lambda + 0*ln(lambda) - n ln q.
  const auto schema = testing::make_schema({{"x", 100}});
  const Dataset data = testing::random_dataset(schema, 100, 1);
  Tree t(schema);
  const double got = log_posterior_branch(t, internal_node_counts(t, data), leaf_counts(t, data),
                                          {2.0, 2.0, {}});
  CHECK(got == doctest::Approx(-2.0 - 100.0 * std::log(100.0)).epsilon(1e-12));
  CHECK(got == doctest::Approx(-462.517019).epsilon(1e-6));
}

TEST_CASE("one binary split matches the closed form and Monte Carlo") {
  const auto schema = testing::make_schema({{"x", 2}});
  std::vector<Point> rows;
  for (int i = 0; i < 3; ++i) rows.push_back({0});
  for (int i = 0; i < 7; ++i) rows.push_back({1});
  const Dataset data(schema, rows);
  Tree t(schema);
  t.split_leaf_full(t.root(), 0);

  const BranchModelHyper hyper{2.0, 2.0, {}};
  const double got =
      log_posterior_branch(t, internal_node_counts(t, data), leaf_counts(t, data), hyper);
  const double direct = -3.0 * 2.0 + 2.0 * std::log(2.0) - std::log(2.0) +
                        (std::lgamma(5.0) + std::lgamma(9.0) - std::lgamma(14.0)) -
                        (2.0 * std::lgamma(2.0) - std::lgamma(4.0));
  CHECK(got == doctest::Approx(direct).epsilon(1e-12));

  // The per-node Dirichlet integral, by Monte Carlo.
  const double mc = testing::mc_log_dirichlet_moment({3, 7}, 2.0, 1000000, 7);
  const double prior_part = -3.0 * 2.0 + 2.0 * std::log(2.0) - std::log(2.0);
  CHECK(got == doctest::Approx(prior_part + mc).epsilon(0.02));
}

TEST_CASE("branch-count identity: sum b_i = |L| + |I| - 1") {
  const auto schema = testing::make_schema({{"a", 4}, {"b", 3}});
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Tree t = testing::random_tree(schema, 700 + seed, 15);
    std::size_t branch_sum = 0, internals = 0;
    for (const NodeId id : t.internal_nodes()) {
      branch_sum += t.node(id).branches.size();
      ++internals;
    }
    CHECK(branch_sum == t.leaf_count() + internals - 1);
  }
}

TEST_CASE("path-product and per-node likelihood factorizations agree") {
  // prod_l (prod_{(i,c) in P_l} theta_ic)^{n_l} == prod_i prod_c theta_ic^{n_c}
  const auto schema = testing::make_schema({{"a", 3}, {"b", 2}, {"c", 2}});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Tree t = testing::random_tree(schema, 900 + seed);
    const Dataset data = testing::random_dataset(schema, 40, seed);
    const auto counts = internal_node_counts(t, data);
    const LeafStats stats = leaf_counts(t, data);

    // Random transition probabilities per internal node.
    Rng rng(seed);
    std::vector<std::vector<double>> theta(t.node_count());
    for (const NodeId id : t.internal_nodes()) {
      double total = 0.0;
      for (std::size_t b = 0; b < t.node(id).branches.size(); ++b) {
        theta[id].push_back(0.1 + rng.unit());
        total += theta[id].back();
      }
      for (auto& v : theta[id]) v /= total;
    }

    double by_node = 0.0;
    for (const NodeId id : t.internal_nodes())
      for (std::size_t b = 0; b < t.node(id).branches.size(); ++b)
        by_node += static_cast<double>(counts[t.node(id).branches[b].child]) *
                   std::log(theta[id][b]);

    double by_path = 0.0;
    for (const auto& leaf : stats.leaves) {
      double path_log = 0.0;
      NodeId cur = leaf.leaf;
      while (t.node(cur).parent != kNoNode) {
        const NodeId parent = t.node(cur).parent;
        for (std::size_t b = 0; b < t.node(parent).branches.size(); ++b)
          if (t.node(parent).branches[b].child == cur) path_log += std::log(theta[parent][b]);
        cur = parent;
      }
      by_path += static_cast<double>(leaf.count) * path_log;
    }
    CHECK(by_path == doctest::Approx(by_node).epsilon(1e-9));
  }
}

TEST_CASE("feature-count regularizer adds the binomial factor") {
  const auto schema = testing::make_schema({{"a", 2}, {"b", 2}, {"c", 2}});
  const Dataset data = testing::random_dataset(schema, 20, 3);
  Tree t(schema);
  t.split_leaf_full(t.root(), 0);  // uses d = 1 of p = 3 features

  const auto counts = internal_node_counts(t, data);
  const LeafStats stats = leaf_counts(t, data);
  const double plain = log_posterior_branch(t, counts, stats, {2.0, 2.0, {}});
  const double reg = log_posterior_branch(t, counts, stats, {2.0, 2.0, 0.5});
  CHECK(reg - plain == doctest::Approx(std::log(3.0) + 3.0 * std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("at gamma = 1/2 trees using d and p-d features get equal regularizers") {
  const auto schema =
      testing::make_schema({{"a", 2}, {"b", 2}, {"c", 2}, {"d", 2}});
  const Dataset data = testing::random_dataset(schema, 16, 9);

  Tree t1(schema);
  t1.split_leaf_full(t1.root(), 0);  // d = 1
  Tree t3(schema);                   // d = 3: split on three distinct features
  t3.split_leaf_full(t3.root(), 0);
  for (const std::size_t f : {1u, 2u}) {
    const auto leaves = t3.leaves();
    t3.split_leaf_full(leaves.front(), f);
  }
  REQUIRE(t3.distinct_split_features() == 3);

  auto reg_delta = [&](const Tree& t) {
    const auto counts = internal_node_counts(t, data);
    const LeafStats stats = leaf_counts(t, data);
    return log_posterior_branch(t, counts, stats, {2.0, 2.0, 0.5}) -
           log_posterior_branch(t, counts, stats, {2.0, 2.0, {}});
  };
  CHECK(reg_delta(t1) == doctest::Approx(reg_delta(t3)).epsilon(1e-12));  // C(4,1) == C(4,3)
}

TEST_CASE("argmax is invariant under constant shifts") {
  const auto schema = testing::make_schema({{"a", 2}, {"b", 3}});
  const Dataset data = testing::random_dataset(schema, 24, 5);
  const auto trees = enumerate_trees(schema, 8);
  std::vector<double> scores;
  for (const auto& t : trees)
    scores.push_back(
        log_posterior_branch(t, internal_node_counts(t, data), leaf_counts(t, data), {2.0, 2.0, {}}));
  const auto argmax = std::max_element(scores.begin(), scores.end()) - scores.begin();
  for (auto& s : scores) s -= 77.0;
  CHECK(std::max_element(scores.begin(), scores.end()) - scores.begin() == argmax);
}

TEST_CASE("hyperparameter validation") {
  CHECK_THROWS_AS(validate(BranchModelHyper{-1.0, 2.0, {}}), DataError);
  CHECK_THROWS_AS(validate(BranchModelHyper{1.0, 0.0, {}}), DataError);
  CHECK_THROWS_AS(validate(BranchModelHyper{1.0, 2.0, 1.5}), DataError);
}
