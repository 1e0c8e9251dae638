#include "cascade/synthetic.hpp"

namespace cascade {

Dataset gen_sparse_tree_dataset() {
  auto schema = std::make_shared<const Schema>(Schema({
      {"x1", {"1", "2"}, false},
      {"x2", {"1", "2"}, false},
      {"x3", {"1", "2"}, false},
  }));
  // (configuration, multiplicity), in sorted configuration order.
  const std::vector<std::pair<Point, std::size_t>> support = {
      {{0, 1, 0}, 100}, {{0, 1, 1}, 100}, {{1, 0, 0}, 100}, {{1, 0, 1}, 400}, {{1, 1, 1}, 300},
  };
  std::vector<Point> rows;
  rows.reserve(1000);
  for (const auto& [conf, times] : support)
    for (std::size_t i = 0; i < times; ++i) rows.push_back(conf);
  return Dataset(std::move(schema), std::move(rows));
}

Dataset gen_extreme_uniform() {
  std::vector<std::string> categories;
  categories.reserve(100);
  for (int v = 1; v <= 100; ++v) categories.push_back(std::to_string(v));
  auto schema = std::make_shared<const Schema>(Schema({{"x", std::move(categories), true}}));
  std::vector<Point> rows;
  rows.reserve(100);
  for (std::uint32_t v = 0; v < 100; ++v) rows.push_back({v});
  return Dataset(std::move(schema), std::move(rows));
}

}  // namespace cascade
