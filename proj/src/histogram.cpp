#include "cascade/histogram.hpp"

#include "cascade/errors.hpp"

namespace cascade {

FullHistogram::FullHistogram(const Dataset& data)
    : schema_(data.schema_ptr()), n_(data.size()) {
  if (n_ == 0) throw DataError("full histogram: empty dataset");
  for (const auto& row : data.rows()) ++bins_[row];
}

double FullHistogram::density(const Point& x) const {
  const auto it = bins_.find(x);
  if (it == bins_.end()) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(n_);
}

double FullHistogram::smoothed_density(const Point& x, double alpha) const {
  const auto it = bins_.find(x);
  const double count = it == bins_.end() ? 0.0 : static_cast<double>(it->second);
  const auto domain = static_cast<double>(schema_->domain_size());
  return (count + alpha) / (static_cast<double>(n_) + domain * alpha);
}

std::vector<LeafSummary> FullHistogram::leaf_summaries() const {
  std::vector<LeafSummary> out;
  out.reserve(bins_.size());
  for (const auto& [x, c] : bins_)
    out.push_back({c, 1, static_cast<double>(c) / static_cast<double>(n_)});
  return out;
}

FullHistogram fit_full_histogram(const Dataset& data) { return FullHistogram(data); }

}  // namespace cascade
