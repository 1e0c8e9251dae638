#pragma once

#include <map>

#include "cascade/evaluate.hpp"

namespace cascade {

// Baseline estimator: every observed configuration is its own unit-volume
// bin with density n_x / n; unobserved configurations have density 0.
class FullHistogram final : public DensityModel {
 public:
  explicit FullHistogram(const Dataset& data);

  const Schema& schema() const override { return *schema_; }
  std::uint64_t train_size() const override { return n_; }
  double density(const Point& x) const override;
  // Smoothing treats every domain configuration as a bin:
  // (n_x + alpha) / (n + D alpha) with D the domain size, so unobserved
  // configurations get nonzero mass.
  double smoothed_density(const Point& x, double alpha) const override;
  std::vector<LeafSummary> leaf_summaries() const override;  // observed bins only
  double fit_alpha() const override { return 1.0; }

  std::size_t bin_count() const { return bins_.size(); }

 private:
  SchemaPtr schema_;
  std::uint64_t n_;
  std::map<Point, std::uint64_t> bins_;
};

FullHistogram fit_full_histogram(const Dataset& data);

}  // namespace cascade
