#include "cascade/leaf_posterior.hpp"

#include <cmath>

#include "cascade/errors.hpp"

namespace cascade {

void validate(const LeafModelHyper& h) {
  if (!(h.lambda > 0.0)) throw DataError("leaf model: lambda must be > 0");
  if (!(h.alpha >= 1.0)) throw DataError("leaf model: alpha must be >= 1");
}

double log_posterior_leaf(const Tree& tree, const LeafStats& stats,
                          const LeafModelHyper& hyper) {
  validate(hyper);
  if (stats.leaves.size() != tree.leaf_count())
    throw InternalError("log_posterior_leaf: stats do not match the tree");

  const double a = hyper.alpha;
  const auto k = static_cast<double>(stats.leaves.size());
  const auto n = static_cast<double>(stats.n);

  double lp = -hyper.lambda + k * std::log(hyper.lambda) - std::lgamma(k + 1.0);
  lp += std::lgamma(k * a) - std::lgamma(n + k * a);
  for (const auto& leaf : stats.leaves) {
    lp += std::lgamma(static_cast<double>(leaf.count) + a) - std::lgamma(a);
    if (leaf.count > 0)
      lp -= static_cast<double>(leaf.count) * std::log(static_cast<double>(leaf.volume));
  }
  return lp;
}

}  // namespace cascade
