#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "cascade/evaluate.hpp"
#include "cascade/rule_list.hpp"
#include "cascade/tree.hpp"

namespace cascade {

nlohmann::json tree_to_json(const Tree& tree, const LeafStats& stats);
std::pair<Tree, LeafStats> tree_from_json(const nlohmann::json& j, SchemaPtr schema);

nlohmann::json list_to_json(const RuleList& list, const ListStats& stats);
std::pair<RuleList, ListStats> list_from_json(const nlohmann::json& j, SchemaPtr schema);

// Graphviz rendering: one box per node; leaves carry density, volume and
// leaf probability.
std::string tree_to_dot(const Tree& tree, const LeafStats& stats);
// Indented cascade rendering.
std::string tree_to_text(const Tree& tree, const LeafStats& stats);
// if / else if / else rendering.
std::string list_to_text(const RuleList& list, const ListStats& stats);

// A fitted model together with its schema and provenance, as written by
// the CLI and reloadable for evaluation/export.
struct SavedModel {
  std::string kind;  // "leaf" | "branch" | "list"
  SchemaPtr schema;
  nlohmann::json hyper;
  double log_posterior = 0.0;
  std::optional<Tree> tree;
  std::optional<LeafStats> tree_stats;
  std::optional<RuleList> list;
  std::optional<ListStats> list_stats;

  nlohmann::json to_json() const;
  static SavedModel from_json(const nlohmann::json& j);
  static SavedModel load(const std::filesystem::path& path);

  std::unique_ptr<DensityModel> to_density_model() const;
  std::size_t leaf_count() const;
};

}  // namespace cascade
