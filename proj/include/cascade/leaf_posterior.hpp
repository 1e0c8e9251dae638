#pragma once

#include "cascade/tree.hpp"

namespace cascade {

// Hyperparameters for the leaf-count tree model: a Poisson prior over the
// number of leaves and a symmetric Dirichlet over leaf probabilities.
struct LeafModelHyper {
  double lambda = 5.0;  // Poisson mean over leaf count, > 0
  double alpha = 2.0;   // Dirichlet concentration, >= 1
};

void validate(const LeafModelHyper& h);

// Unnormalized log-posterior of a fitted tree with the leaf probabilities
// integrated out:
//
//   ln Poisson(K; lambda) + ln G(K a) - ln G(n + K a)
//     + sum_l [ln G(n_l + a) - ln G(a)] - sum_l n_l ln V_l
//
// Comparable across trees over the same dataset (argmax contract); constant
// shifts independent of the tree are irrelevant.
double log_posterior_leaf(const Tree& tree, const LeafStats& stats, const LeafModelHyper& hyper);

}  // namespace cascade
