#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "cascade/dataset.hpp"
#include "cascade/rule_list.hpp"
#include "cascade/tree.hpp"

namespace cascade {

struct LeafSummary {
  std::uint64_t count = 0;
  std::uint64_t volume = 0;
  double density = 0.0;
};

// Uniform facade over fitted estimators: anything with a piecewise-constant
// density and enumerable leaves.
class DensityModel {
 public:
  virtual ~DensityModel() = default;
  virtual const Schema& schema() const = 0;
  virtual std::uint64_t train_size() const = 0;
  virtual double density(const Point& x) const = 0;
  // Posterior-mean leaf masses: (n_l + alpha) / (n + K alpha) / V_l.
  virtual double smoothed_density(const Point& x, double alpha) const = 0;
  virtual std::vector<LeafSummary> leaf_summaries() const = 0;
  // The alpha the model was fitted with (1.0 where none applies).
  virtual double fit_alpha() const = 0;
};

class TreeDensityModel final : public DensityModel {
 public:
  TreeDensityModel(Tree tree, LeafStats stats, double alpha = 1.0);
  const Schema& schema() const override { return tree_.schema(); }
  std::uint64_t train_size() const override { return stats_.n; }
  double density(const Point& x) const override;
  double smoothed_density(const Point& x, double alpha) const override;
  std::vector<LeafSummary> leaf_summaries() const override;
  double fit_alpha() const override { return alpha_; }
  const Tree& tree() const { return tree_; }
  const LeafStats& stats() const { return stats_; }

 private:
  Tree tree_;
  LeafStats stats_;
  double alpha_;
};

class ListDensityModel final : public DensityModel {
 public:
  ListDensityModel(RuleList list, ListStats stats, double alpha = 1.0);
  const Schema& schema() const override { return *list_.schema; }
  std::uint64_t train_size() const override { return stats_.n; }
  double density(const Point& x) const override;
  double smoothed_density(const Point& x, double alpha) const override;
  std::vector<LeafSummary> leaf_summaries() const override;
  double fit_alpha() const override { return alpha_; }
  const RuleList& list() const { return list_; }
  const ListStats& stats() const { return stats_; }

 private:
  RuleList list_;
  ListStats stats_;
  double alpha_;
};

// Sum of log densities of the test rows.  Without smoothing, a test point
// in a zero-density region makes the result -infinity (a reported
// sentinel, not an error).  With smoothing, posterior-mean masses are used;
// alpha defaults to the model's fitted value.
double test_log_likelihood(const DensityModel& model, const Dataset& test, bool smoothed = false,
                           std::optional<double> alpha = {});

// Leave-one-out least-squares risk estimate,
//   sum_l (n_l/n - 2(n_l - 1)/(n - 1)) f_l ;
// more negative is better.  Requires n >= 2.
double loo_least_squares(const DensityModel& model, const Dataset& train);

// Training log-likelihood of the per-configuration histogram,
// sum_x n_x ln(n_x / n).  Upper-bounds every cascade's training fit.
double pointwise_histogram_log_likelihood(const Dataset& train);

}  // namespace cascade
