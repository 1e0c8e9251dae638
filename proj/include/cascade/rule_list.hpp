#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "cascade/dataset.hpp"
#include "cascade/schema.hpp"

namespace cascade {

// A conjunction of feature = value conditions, at most one per feature.
struct Antecedent {
  // (feature index, category index), sorted by feature.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> conditions;

  std::size_t cardinality() const { return conditions.size(); }
  bool matches(const Point& x) const {
    for (const auto& [f, v] : conditions)
      if (x[f] != v) return false;
    return true;
  }
  bool operator==(const Antecedent& other) const = default;
  bool operator<(const Antecedent& other) const { return conditions < other.conditions; }
};

// Pre-mined pool of candidate antecedents of size 1..max_cardinality.
class AntecedentUniverse {
 public:
  AntecedentUniverse(std::vector<Antecedent> items, std::size_t max_cardinality,
                     std::uint64_t count_including_empty);

  const std::vector<Antecedent>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  std::size_t max_cardinality() const { return max_cardinality_; }
  // |A| in the prior: all conjunction shapes of size 0..H, whether or not
  // they survived support filtering.
  std::uint64_t count_including_empty() const { return count_including_empty_; }
  std::size_t count_of_size(std::size_t c) const {
    return c < count_by_size_.size() ? count_by_size_[c] : 0;
  }
  std::size_t index_of(const Antecedent& a) const;  // throws DataError if absent

 private:
  std::vector<Antecedent> items_;
  std::size_t max_cardinality_;
  std::uint64_t count_including_empty_;
  std::vector<std::size_t> count_by_size_;
};

// Closed-form count of all conjunctions of size 0..max_cardinality: the
// elementary symmetric polynomials of the feature cardinalities, summed.
std::uint64_t antecedent_count(const Schema& schema, std::size_t max_cardinality);

// Enumerates every conjunction of size 1..max_cardinality.  With
// min_support, antecedents matching fewer than that many rows of `data`
// are dropped.  Guarded against combinatorial explosion.
AntecedentUniverse mine_antecedents(const SchemaPtr& schema, std::size_t max_cardinality,
                                    std::optional<std::uint64_t> min_support = {},
                                    const Dataset* data = nullptr);

// Ordered rules with first-match semantics plus an implicit default leaf.
struct RuleList {
  SchemaPtr schema;
  std::vector<Antecedent> rules;

  std::size_t length() const { return rules.size(); }
};

// Per-leaf statistics; index i < m is rule i, index m is the default leaf.
struct ListStats {
  std::uint64_t n = 0;
  std::vector<std::uint64_t> counts;
  std::vector<std::uint64_t> volumes;
  double density(std::size_t leaf) const {
    if (n == 0 || volumes[leaf] == 0) return 0.0;
    return static_cast<double>(counts[leaf]) /
           (static_cast<double>(n) * static_cast<double>(volumes[leaf]));
  }
};

// Index of the first rule matching x, or rules.size() for the default leaf.
std::size_t assign_rule(const RuleList& list, const Point& x);

// Number of domain points satisfying all conditions; 0 on contradiction,
// otherwise the product of cardinalities of the unconstrained features.
std::uint64_t conjunction_volume(const Schema& schema, const std::vector<const Antecedent*>& conj);

// Volume of leaf i (0-based rule index, or m for the default leaf) by
// inclusion-exclusion over the preceding rules.  Throws GuardError when the
// subset expansion exceeds 2^20 terms; callers fall back to enumeration.
std::uint64_t list_leaf_volume(const RuleList& list, std::size_t leaf);

// All m+1 leaf volumes by inclusion-exclusion (shared memo across leaves).
std::vector<std::uint64_t> list_volumes(const RuleList& list);

// Exact volumes by scanning the full domain grid; the independent check
// for list_volumes.  Guarded at 2^22 domain points.
std::vector<std::uint64_t> volumes_by_enumeration(const RuleList& list);

ListStats list_stats(const RuleList& list, const Dataset& data);

struct ListModelHyper {
  double lambda = 3.0;  // Poisson mean over list length, > 0
  double eta = 1.0;     // Poisson mean over antecedent cardinality, > 0
  double alpha = 1.0;   // Dirichlet concentration, >= 1
  std::size_t max_cardinality = 3;
  std::optional<std::uint64_t> min_support;
  // The Dirichlet-multinomial prior-normalizer ratio G((m+1)a)/G(a)^(m+1)
  // varies with list length; disabling it reproduces a score that omits
  // that ratio.
  bool dirichlet_normalizer = true;
};

void validate(const ListModelHyper& h);

double log_posterior_list(const RuleList& list, const ListStats& stats,
                          const ListModelHyper& hyper, const AntecedentUniverse& universe);

// Potential scale reduction factor over the second half of each trace.
// Conventions: all values identical -> 1.0; zero within-chain variance with
// nonzero between-chain variance -> +infinity.
double gelman_rubin(const std::vector<std::vector<double>>& traces);

struct ListFit {
  RuleList list;
  ListStats stats;
  double log_posterior;
  std::vector<std::vector<double>> traces;  // per-chain log-posterior by iteration
  double rhat;
};

// Metropolis-Hastings over rule lists with add/remove/swap proposals run on
// `chains` independent chains (>= 2).  Stops early once the Gelman-Rubin
// statistic over the traces drops below 1.05, otherwise at budget
// iterations per chain.  Deterministic given the seed.
ListFit mcmc_search(const Dataset& data, const AntecedentUniverse& universe,
                    const ListModelHyper& hyper, unsigned chains, std::uint64_t budget,
                    std::uint64_t seed);

}  // namespace cascade
