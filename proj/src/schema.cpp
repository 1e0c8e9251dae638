#include "cascade/schema.hpp"

#include <fstream>
#include <unordered_set>

#include "cascade/errors.hpp"

namespace cascade {

Schema::Schema(std::vector<FeatureSpec> features) : features_(std::move(features)) {
  if (features_.empty()) throw DataError("schema has no features");
  std::unordered_set<std::string> names;
  for (const auto& f : features_) {
    if (!names.insert(f.name).second)
      throw DataError("duplicate feature name '" + f.name + "'");
    if (f.categories.size() < 2)
      throw DataError("feature '" + f.name + "' has fewer than 2 categories");
    std::unordered_set<std::string> labels;
    for (const auto& c : f.categories)
      if (!labels.insert(c).second)
        throw DataError("feature '" + f.name + "' has duplicate category '" + c + "'");
  }
  domain_size_ = 1;
  for (const auto& f : features_) {
    if (__builtin_mul_overflow(domain_size_, static_cast<std::uint64_t>(f.categories.size()),
                               &domain_size_))
      throw DataError("domain size overflows 64 bits");
  }
}

Schema Schema::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("features") || !j["features"].is_array())
    throw DataError("schema JSON must be an object with a 'features' array");
  std::vector<FeatureSpec> feats;
  for (const auto& fj : j["features"]) {
    FeatureSpec f;
    try {
      f.name = fj.at("name").get<std::string>();
      f.categories = fj.at("categories").get<std::vector<std::string>>();
      f.ordinal = fj.value("ordinal", false);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("malformed feature entry: ") + e.what());
    }
    feats.push_back(std::move(f));
  }
  return Schema(std::move(feats));
}

std::shared_ptr<const Schema> Schema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("schema parse error in " + path.string() + ": " + e.what());
  }
  return std::make_shared<const Schema>(Schema::from_json(j));
}

nlohmann::json Schema::to_json() const {
  nlohmann::json feats = nlohmann::json::array();
  for (const auto& f : features_) {
    feats.push_back({{"name", f.name}, {"categories", f.categories}, {"ordinal", f.ordinal}});
  }
  return {{"features", feats}};
}

std::size_t Schema::feature_index(std::string_view name) const {
  for (std::size_t i = 0; i < features_.size(); ++i)
    if (features_[i].name == name) return i;
  throw DataError("unknown feature '" + std::string(name) + "'");
}

std::uint32_t Schema::category_index(std::size_t feature_idx, std::string_view label) const {
  const auto& cats = features_[feature_idx].categories;
  for (std::size_t i = 0; i < cats.size(); ++i)
    if (cats[i] == label) return static_cast<std::uint32_t>(i);
  throw DataError("value '" + std::string(label) + "' not a category of feature '" +
                  features_[feature_idx].name + "'");
}

bool Schema::operator==(const Schema& other) const {
  if (features_.size() != other.features_.size()) return false;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    const auto& a = features_[i];
    const auto& b = other.features_[i];
    if (a.name != b.name || a.categories != b.categories || a.ordinal != b.ordinal) return false;
  }
  return true;
}

DomainIterator::DomainIterator(const Schema& schema)
    : schema_(&schema), current_(schema.feature_count(), 0) {}

DomainIterator& DomainIterator::operator++() {
  for (std::size_t j = current_.size(); j-- > 0;) {
    if (++current_[j] < schema_->cardinality(j)) return *this;
    current_[j] = 0;
  }
  done_ = true;
  return *this;
}

}  // namespace cascade
