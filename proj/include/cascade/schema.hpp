#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cascade {

struct FeatureSpec {
  std::string name;
  std::vector<std::string> categories;  // ordered; for ordinal features this is the natural order
  bool ordinal = false;
};

// Immutable description of the discrete domain: an ordered list of
// categorical (optionally ordinal) features.  Safe to share across threads.
class Schema {
 public:
  explicit Schema(std::vector<FeatureSpec> features);

  static Schema from_json(const nlohmann::json& j);
  static std::shared_ptr<const Schema> load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  std::size_t feature_count() const { return features_.size(); }
  const FeatureSpec& feature(std::size_t i) const { return features_[i]; }
  std::uint32_t cardinality(std::size_t i) const {
    return static_cast<std::uint32_t>(features_[i].categories.size());
  }
  // Number of configurations in the full domain, prod of cardinalities.
  std::uint64_t domain_size() const { return domain_size_; }

  std::size_t feature_index(std::string_view name) const;          // throws DataError
  std::uint32_t category_index(std::size_t feature_idx,
                               std::string_view label) const;      // throws DataError

  bool operator==(const Schema& other) const;

 private:
  std::vector<FeatureSpec> features_;
  std::uint64_t domain_size_ = 1;
};

using SchemaPtr = std::shared_ptr<const Schema>;

// A data point: one category index per feature.
using Point = std::vector<std::uint32_t>;

// Visits every configuration of the domain in lexicographic order.
// Guarded by the caller: the full grid has schema.domain_size() points.
class DomainIterator {
 public:
  explicit DomainIterator(const Schema& schema);
  bool done() const { return done_; }
  const Point& operator*() const { return current_; }
  DomainIterator& operator++();

 private:
  const Schema* schema_;
  Point current_;
  bool done_ = false;
};

}  // namespace cascade
