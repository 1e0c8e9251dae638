#include "cascade/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cascade/errors.hpp"
#include "cascade/random.hpp"

namespace cascade {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

}  // namespace

Dataset::Dataset(SchemaPtr schema, std::vector<Point> rows)
    : schema_(std::move(schema)), rows_(std::move(rows)) {
  const std::size_t p = schema_->feature_count();
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (rows_[r].size() != p)
      throw DataError("row " + std::to_string(r + 1) + " has wrong arity");
    for (std::size_t j = 0; j < p; ++j)
      if (rows_[r][j] >= schema_->cardinality(j))
        throw DataError("row " + std::to_string(r + 1) + " has out-of-range index for feature '" +
                        schema_->feature(j).name + "'");
  }
}

Dataset Dataset::ingest_csv(const std::filesystem::path& path, SchemaPtr schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty dataset: " + path.string());
  strip_cr(line);
  const auto header = split_line(line);
  if (header.size() != schema->feature_count())
    throw DataError("header has " + std::to_string(header.size()) + " columns, schema has " +
                    std::to_string(schema->feature_count()) + " features");

  // Header columns may come in any order; map column -> feature index.
  std::vector<std::size_t> col_to_feature(header.size());
  std::vector<bool> seen(schema->feature_count(), false);
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::size_t f = schema->feature_index(header[c]);
    if (seen[f]) throw DataError("duplicate column '" + header[c] + "'");
    seen[f] = true;
    col_to_feature[c] = f;
  }

  std::vector<Point> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw DataError("row " + std::to_string(lineno - 1) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    Point pt(schema->feature_count());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::size_t f = col_to_feature[c];
      try {
        pt[f] = schema->category_index(f, cells[c]);
      } catch (const DataError& e) {
        throw DataError("row " + std::to_string(lineno - 1) + ", column '" + header[c] +
                        "': " + e.what());
      }
    }
    rows.push_back(std::move(pt));
  }
  if (rows.empty()) throw DataError("empty dataset: " + path.string());
  return Dataset(std::move(schema), std::move(rows));
}

void Dataset::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write data file: " + path.string());
  for (std::size_t j = 0; j < schema_->feature_count(); ++j)
    out << (j ? "," : "") << schema_->feature(j).name;
  out << "\n";
  for (const auto& row : rows_) {
    for (std::size_t j = 0; j < row.size(); ++j)
      out << (j ? "," : "") << schema_->feature(j).categories[row[j]];
    out << "\n";
  }
}

std::pair<Dataset, Dataset> Dataset::split(double fraction, std::uint64_t seed) const {
  if (rows_.size() < 2) throw DataError("cannot split a dataset with fewer than 2 rows");
  if (!(fraction > 0.0 && fraction < 1.0)) throw DataError("split fraction must be in (0,1)");

  std::vector<std::size_t> idx(rows_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed);
  // Fisher-Yates; std::shuffle's draw sequence is not pinned by the standard.
  for (std::size_t i = idx.size(); i-- > 1;) {
    std::swap(idx[i], idx[rng.below(i + 1)]);
  }

  const auto first_n =
      static_cast<std::size_t>(std::floor(fraction * static_cast<double>(rows_.size())));
  std::vector<Point> a, b;
  a.reserve(first_n);
  b.reserve(rows_.size() - first_n);
  for (std::size_t i = 0; i < idx.size(); ++i)
    (i < first_n ? a : b).push_back(rows_[idx[i]]);
  return {Dataset(schema_, std::move(a)), Dataset(schema_, std::move(b))};
}

}  // namespace cascade
