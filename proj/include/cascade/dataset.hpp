#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "cascade/schema.hpp"

namespace cascade {

// Immutable collection of points over a schema.  Rows hold category
// indices; labels exist only at the I/O boundary.
class Dataset {
 public:
  Dataset(SchemaPtr schema, std::vector<Point> rows);  // validates indices

  static Dataset ingest_csv(const std::filesystem::path& path, SchemaPtr schema);
  void write_csv(const std::filesystem::path& path) const;

  // Disjoint partition: first part gets floor(fraction * n) rows, the rest
  // go to the second.  Identical seed gives an identical split.
  std::pair<Dataset, Dataset> split(double fraction, std::uint64_t seed) const;

  const Schema& schema() const { return *schema_; }
  const SchemaPtr& schema_ptr() const { return schema_; }
  std::size_t size() const { return rows_.size(); }
  const Point& row(std::size_t i) const { return rows_[i]; }
  const std::vector<Point>& rows() const { return rows_; }

 private:
  SchemaPtr schema_;
  std::vector<Point> rows_;
};

}  // namespace cascade
