#include "cascade/model_io.hpp"

#include <fstream>
#include <sstream>

#include "cascade/errors.hpp"

namespace cascade {

namespace {

std::vector<std::string> value_labels(const Schema& schema, std::size_t feature,
                                      const std::vector<std::uint32_t>& values) {
  std::vector<std::string> out;
  out.reserve(values.size());
  for (std::uint32_t v : values) out.push_back(schema.feature(feature).categories[v]);
  return out;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string condition_label(const Schema& schema, std::size_t feature,
                            const std::vector<std::uint32_t>& values) {
  const auto labels = value_labels(schema, feature, values);
  if (labels.size() == 1) return schema.feature(feature).name + " = " + labels[0];
  return schema.feature(feature).name + " in {" + join(labels, ", ") + "}";
}

std::string format_density(double f) {
  std::ostringstream os;
  os << f;
  return os.str();
}

}  // namespace

nlohmann::json tree_to_json(const Tree& tree, const LeafStats& stats) {
  const Schema& schema = tree.schema();
  nlohmann::json nodes = nlohmann::json::array();
  for (NodeId id = 0; id < tree.node_count(); ++id) {
    const TreeNode& n = tree.node(id);
    nlohmann::json nj;
    nj["id"] = id;
    if (n.is_leaf()) {
      const LeafStat& s = stats.for_leaf(id);
      nj["kind"] = "leaf";
      nj["count"] = s.count;
      nj["volume"] = s.volume;
      nj["density"] = s.density;
    } else {
      nj["kind"] = "internal";
      nj["feature"] = schema.feature(static_cast<std::size_t>(n.split_feature)).name;
      nlohmann::json branches = nlohmann::json::array();
      for (const auto& b : n.branches)
        branches.push_back({
            {"values", value_labels(schema, static_cast<std::size_t>(n.split_feature), b.values)},
            {"child", b.child},
        });
      nj["branches"] = branches;
    }
    nodes.push_back(std::move(nj));
  }
  return {{"root", tree.root()}, {"n", stats.n}, {"nodes", nodes}};
}

std::pair<Tree, LeafStats> tree_from_json(const nlohmann::json& j, SchemaPtr schema) {
  try {
    const auto& jnodes = j.at("nodes");
    std::vector<TreeNode> nodes(jnodes.size());
    LeafStats stats;
    stats.n = j.at("n").get<std::uint64_t>();
    for (const auto& nj : jnodes) {
      const auto id = nj.at("id").get<NodeId>();
      if (id >= nodes.size()) throw DataError("tree JSON: node id out of range");
      TreeNode& n = nodes[id];
      if (nj.at("kind") == "leaf") {
        LeafStat s;
        s.leaf = id;
        s.count = nj.at("count").get<std::uint64_t>();
        s.volume = nj.at("volume").get<std::uint64_t>();
        s.density = nj.at("density").get<double>();
        stats.leaves.push_back(s);
      } else {
        const std::size_t f = schema->feature_index(nj.at("feature").get<std::string>());
        n.split_feature = static_cast<std::int32_t>(f);
        for (const auto& bj : nj.at("branches")) {
          Branch b;
          b.child = bj.at("child").get<NodeId>();
          for (const auto& label : bj.at("values"))
            b.values.push_back(schema->category_index(f, label.get<std::string>()));
          n.branches.push_back(std::move(b));
        }
      }
    }
    Tree tree = Tree::from_structure(schema, nodes, j.at("root").get<NodeId>());
    if (stats.leaves.size() != tree.leaf_count())
      throw DataError("tree JSON: leaf stats do not match the structure");
    return {std::move(tree), std::move(stats)};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed tree JSON: ") + e.what());
  }
}

nlohmann::json list_to_json(const RuleList& list, const ListStats& stats) {
  const Schema& schema = *list.schema;
  nlohmann::json rules = nlohmann::json::array();
  for (std::size_t i = 0; i < list.rules.size(); ++i) {
    nlohmann::json conds = nlohmann::json::object();
    for (const auto& [f, v] : list.rules[i].conditions)
      conds[schema.feature(f).name] = schema.feature(f).categories[v];
    rules.push_back({{"conditions", conds},
                     {"count", stats.counts[i]},
                     {"volume", stats.volumes[i]},
                     {"density", stats.density(i)}});
  }
  const std::size_t m = list.rules.size();
  return {{"rules", rules},
          {"default",
           {{"count", stats.counts[m]}, {"volume", stats.volumes[m]}, {"density", stats.density(m)}}},
          {"n", stats.n}};
}

std::pair<RuleList, ListStats> list_from_json(const nlohmann::json& j, SchemaPtr schema) {
  try {
    RuleList list{schema, {}};
    ListStats stats;
    stats.n = j.at("n").get<std::uint64_t>();
    for (const auto& rj : j.at("rules")) {
      Antecedent a;
      for (const auto& [fname, label] : rj.at("conditions").items()) {
        const std::size_t f = schema->feature_index(fname);
        a.conditions.emplace_back(static_cast<std::uint32_t>(f),
                                  schema->category_index(f, label.get<std::string>()));
      }
      std::sort(a.conditions.begin(), a.conditions.end());
      list.rules.push_back(std::move(a));
      stats.counts.push_back(rj.at("count").get<std::uint64_t>());
      stats.volumes.push_back(rj.at("volume").get<std::uint64_t>());
    }
    stats.counts.push_back(j.at("default").at("count").get<std::uint64_t>());
    stats.volumes.push_back(j.at("default").at("volume").get<std::uint64_t>());
    return {std::move(list), std::move(stats)};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed list JSON: ") + e.what());
  }
}

std::string tree_to_dot(const Tree& tree, const LeafStats& stats) {
  const Schema& schema = tree.schema();
  std::ostringstream os;
  os << "digraph cascade {\n  node [shape=box];\n";
  for (NodeId id = 0; id < tree.node_count(); ++id) {
    const TreeNode& n = tree.node(id);
    if (n.is_leaf()) {
      const LeafStat& s = stats.for_leaf(id);
      const double prob =
          stats.n == 0 ? 0.0 : static_cast<double>(s.count) / static_cast<double>(stats.n);
      os << "  n" << id << " [label=\"P = " << format_density(prob)
         << "\\nf = " << format_density(s.density) << "\\nVol = " << s.volume << "\"];\n";
    } else {
      os << "  n" << id << " [label=\""
         << schema.feature(static_cast<std::size_t>(n.split_feature)).name << "\"];\n";
    }
  }
  for (NodeId id = 0; id < tree.node_count(); ++id) {
    const TreeNode& n = tree.node(id);
    if (n.is_leaf()) continue;
    for (const auto& b : n.branches) {
      const auto labels =
          value_labels(schema, static_cast<std::size_t>(n.split_feature), b.values);
      os << "  n" << id << " -> n" << b.child << " [label=\"" << join(labels, ",") << "\"];\n";
    }
  }
  os << "}\n";
  return os.str();
}

std::string tree_to_text(const Tree& tree, const LeafStats& stats) {
  const Schema& schema = tree.schema();
  std::ostringstream os;
  auto rec = [&](auto&& self, NodeId id, int depth) -> void {
    const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
    const TreeNode& n = tree.node(id);
    if (n.is_leaf()) {
      const LeafStat& s = stats.for_leaf(id);
      os << indent << "density = " << format_density(s.density) << "  (count " << s.count
         << ", volume " << s.volume << ")\n";
      return;
    }
    for (const auto& b : n.branches) {
      os << indent << "if "
         << condition_label(schema, static_cast<std::size_t>(n.split_feature), b.values) << ":\n";
      self(self, b.child, depth + 1);
    }
  };
  rec(rec, tree.root(), 0);
  return os.str();
}

std::string list_to_text(const RuleList& list, const ListStats& stats) {
  const Schema& schema = *list.schema;
  std::ostringstream os;
  for (std::size_t i = 0; i < list.rules.size(); ++i) {
    std::vector<std::string> conds;
    for (const auto& [f, v] : list.rules[i].conditions)
      conds.push_back(schema.feature(f).name + " = " + schema.feature(f).categories[v]);
    os << (i == 0 ? "if " : "else if ") << join(conds, " and ")
       << " then density = " << format_density(stats.density(i)) << "\n";
  }
  os << (list.rules.empty() ? "density = " : "else density = ")
     << format_density(stats.density(list.rules.size())) << "\n";
  return os.str();
}

nlohmann::json SavedModel::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["schema"] = schema->to_json();
  j["hyper"] = hyper;
  j["log_posterior"] = log_posterior;
  if (tree) j["tree"] = tree_to_json(*tree, *tree_stats);
  if (list) j["list"] = list_to_json(*list, *list_stats);
  return j;
}

SavedModel SavedModel::from_json(const nlohmann::json& j) {
  SavedModel m;
  try {
    m.kind = j.at("kind").get<std::string>();
    m.schema = std::make_shared<const Schema>(Schema::from_json(j.at("schema")));
    m.hyper = j.value("hyper", nlohmann::json::object());
    m.log_posterior = j.value("log_posterior", 0.0);
    if (j.contains("tree")) {
      auto [tree, stats] = tree_from_json(j.at("tree"), m.schema);
      m.tree = std::move(tree);
      m.tree_stats = std::move(stats);
    } else if (j.contains("list")) {
      auto [list, stats] = list_from_json(j.at("list"), m.schema);
      m.list = std::move(list);
      m.list_stats = std::move(stats);
    } else {
      throw DataError("model JSON holds neither a tree nor a list");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model JSON: ") + e.what());
  }
  return m;
}

SavedModel SavedModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model parse error in " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

std::unique_ptr<DensityModel> SavedModel::to_density_model() const {
  const double alpha = hyper.value("alpha", 1.0);
  if (tree) return std::make_unique<TreeDensityModel>(*tree, *tree_stats, alpha);
  return std::make_unique<ListDensityModel>(*list, *list_stats, alpha);
}

std::size_t SavedModel::leaf_count() const {
  if (tree) return tree_stats->leaves.size();
  return list_stats->counts.size();
}

}  // namespace cascade
