#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cascade/tree.hpp"

namespace cascade {

// Hyperparameters for the branch-count tree model: a per-node Poisson over
// branch counts and a per-node symmetric Dirichlet over transition
// probabilities.  When gamma is set, an extra binomial layer regularizes
// the number of distinct features used by the cascade.
struct BranchModelHyper {
  double lambda = 2.0;  // Poisson mean per-node branch count, > 0
  double alpha = 2.0;   // Dirichlet concentration, >= 1
  std::optional<double> gamma;  // feature-usage regularizer, in (0,1)
};

void validate(const BranchModelHyper& h);

// Number of data points whose root path passes through each node, indexed
// by node id.  The root carries n and every internal node's children sum
// to its own count.
std::vector<std::uint64_t> internal_node_counts(const Tree& tree, const Dataset& data);

// Unnormalized log-posterior with per-node transition probabilities
// integrated out:
//
//   -lambda (|I|+|L|) + (|L|+|I|-1) ln lambda
//     + sum_{i in I} [ -ln b_i! + ln B(a+n_c1,...,a+n_cb) - ln B(a,...,a) ]
//     - sum_{l in L} n_l ln V_l
//     [ + ln C(p,d) + d ln gamma + (p-d) ln(1-gamma)   when gamma is set ]
double log_posterior_branch(const Tree& tree, const std::vector<std::uint64_t>& node_counts,
                            const LeafStats& stats, const BranchModelHyper& hyper);

}  // namespace cascade
