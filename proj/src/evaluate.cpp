#include "cascade/evaluate.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "cascade/errors.hpp"

namespace cascade {

TreeDensityModel::TreeDensityModel(Tree tree, LeafStats stats, double alpha)
    : tree_(std::move(tree)), stats_(std::move(stats)), alpha_(alpha) {
  if (stats_.leaves.size() != tree_.leaf_count())
    throw InternalError("TreeDensityModel: stats do not match the tree");
}

double TreeDensityModel::density(const Point& x) const {
  return density_at(tree_, stats_, x);
}

double TreeDensityModel::smoothed_density(const Point& x, double alpha) const {
  const LeafStat& leaf = stats_.for_leaf(tree_.assign_leaf(x));
  const auto k = static_cast<double>(stats_.leaves.size());
  const double mass = (static_cast<double>(leaf.count) + alpha) /
                      (static_cast<double>(stats_.n) + k * alpha);
  return mass / static_cast<double>(leaf.volume);
}

std::vector<LeafSummary> TreeDensityModel::leaf_summaries() const {
  std::vector<LeafSummary> out;
  out.reserve(stats_.leaves.size());
  for (const auto& l : stats_.leaves) out.push_back({l.count, l.volume, l.density});
  return out;
}

ListDensityModel::ListDensityModel(RuleList list, ListStats stats, double alpha)
    : list_(std::move(list)), stats_(std::move(stats)), alpha_(alpha) {
  if (stats_.counts.size() != list_.rules.size() + 1)
    throw InternalError("ListDensityModel: stats do not match the list");
}

double ListDensityModel::density(const Point& x) const {
  return stats_.density(assign_rule(list_, x));
}

double ListDensityModel::smoothed_density(const Point& x, double alpha) const {
  const std::size_t leaf = assign_rule(list_, x);
  const auto k = static_cast<double>(list_.rules.size() + 1);
  const double mass = (static_cast<double>(stats_.counts[leaf]) + alpha) /
                      (static_cast<double>(stats_.n) + k * alpha);
  return mass / static_cast<double>(stats_.volumes[leaf]);
}

std::vector<LeafSummary> ListDensityModel::leaf_summaries() const {
  std::vector<LeafSummary> out;
  for (std::size_t l = 0; l < stats_.counts.size(); ++l)
    out.push_back({stats_.counts[l], stats_.volumes[l], stats_.density(l)});
  return out;
}

double test_log_likelihood(const DensityModel& model, const Dataset& test, bool smoothed,
                           std::optional<double> alpha) {
  if (!(model.schema() == test.schema()))
    throw DataError("test_log_likelihood: model and data schemas differ");
  const double a = alpha.value_or(model.fit_alpha());
  double total = 0.0;
  for (const auto& row : test.rows()) {
    const double f = smoothed ? model.smoothed_density(row, a) : model.density(row);
    if (f <= 0.0) return -std::numeric_limits<double>::infinity();
    total += std::log(f);
  }
  return total;
}

double loo_least_squares(const DensityModel& model, const Dataset& train) {
  if (!(model.schema() == train.schema()))
    throw DataError("loo_least_squares: model and data schemas differ");
  if (train.size() < 2) throw DataError("loo_least_squares: needs at least 2 training rows");
  if (model.train_size() != train.size())
    throw DataError("loo_least_squares: model was not fitted on this dataset");

  const auto n = static_cast<double>(train.size());
  double total = 0.0;
  for (const auto& leaf : model.leaf_summaries()) {
    const auto nl = static_cast<double>(leaf.count);
    total += (nl / n - 2.0 * (nl - 1.0) / (n - 1.0)) * leaf.density;
  }
  return total;
}

double pointwise_histogram_log_likelihood(const Dataset& train) {
  if (train.size() == 0) throw DataError("pointwise histogram: empty dataset");
  std::map<Point, std::uint64_t> counts;
  for (const auto& row : train.rows()) ++counts[row];
  const auto n = static_cast<double>(train.size());
  double total = 0.0;
  for (const auto& [x, c] : counts)
    total += static_cast<double>(c) * std::log(static_cast<double>(c) / n);
  return total;
}

}  // namespace cascade
