#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ccf/errors.hpp"
#include "ccf/forest.hpp"

namespace ccf {
namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kFormatTag = "ccf-forest";

Json node_to_json(const Tree& tree, std::size_t index) {
  const TreeNode& node = tree.nodes[index];
  Json out;
  if (node.is_leaf()) {
    out["distribution"] = node.distribution;
    return out;
  }
  out["features"] = node.features;
  out["projection"] = node.projection;
  out["threshold"] = node.threshold;
  out["left"] = node_to_json(tree, static_cast<std::size_t>(node.left));
  out["right"] = node_to_json(tree, static_cast<std::size_t>(node.right));
  return out;
}

// Field access with a dotted path in every error message.
class Reader {
 public:
  explicit Reader(std::string path) : path_(std::move(path)) {}

  const Json& get(const Json& obj, const char* key) const {
    if (!obj.is_object()) fail("expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(std::string("missing field '") + key + "'");
    return *it;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("model document: " + what + (path_.empty() ? "" : " at '" + path_ + "'"));
  }

  Reader child(const std::string& name) const { return Reader(path_.empty() ? name : path_ + "." + name); }
  Reader item(std::size_t i) const { return Reader(path_ + "[" + std::to_string(i) + "]"); }

  template <typename T>
  T as(const Json& obj, const char* key) const {
    const Json& value = get(obj, key);
    try {
      return value.get<T>();
    } catch (const nlohmann::json::exception&) {
      child(key).fail("wrong type for field");
    }
  }

  std::size_t count(const Json& obj, const char* key) const {
    const Json& value = get(obj, key);
    if (!value.is_number_unsigned()) child(key).fail("expected a non-negative integer");
    return value.get<std::size_t>();
  }

 private:
  std::string path_;
};

void read_node(const Json& j, const Reader& at, const Forest& forest, Tree& tree) {
  const auto index = tree.nodes.size();
  tree.nodes.emplace_back();
  if (!j.is_object()) at.fail("expected a node object");

  if (j.contains("distribution")) {
    auto distribution = at.as<std::vector<double>>(j, "distribution");
    if (distribution.size() != forest.n_classes()) at.fail("distribution length differs from class count");
    double sum = 0.0;
    for (double p : distribution) {
      if (!std::isfinite(p) || p < 0.0) at.fail("distribution entries must be finite and >= 0");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) at.fail("distribution does not sum to 1");
    tree.nodes[index].distribution = std::move(distribution);
    return;
  }

  auto features = at.as<std::vector<std::uint32_t>>(j, "features");
  auto projection = at.as<std::vector<double>>(j, "projection");
  const double threshold = at.as<double>(j, "threshold");
  if (features.empty() || features.size() != projection.size()) {
    at.fail("features and projection must be non-empty and of equal length");
  }
  bool nonzero = false;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i] >= forest.n_features) at.fail("feature index out of range");
    if (!std::isfinite(projection[i])) at.fail("projection is not finite");
    nonzero = nonzero || projection[i] != 0.0;
  }
  if (!nonzero) at.fail("projection is all zero");
  if (!std::isfinite(threshold)) at.fail("threshold is not finite");

  const auto left = static_cast<std::int32_t>(tree.nodes.size());
  read_node(at.get(j, "left"), at.child("left"), forest, tree);
  const auto right = static_cast<std::int32_t>(tree.nodes.size());
  read_node(at.get(j, "right"), at.child("right"), forest, tree);

  TreeNode& node = tree.nodes[index];
  node.features = std::move(features);
  node.projection = std::move(projection);
  node.threshold = threshold;
  node.left = left;
  node.right = right;
}

}  // namespace

std::string serialize(const Forest& forest) {
  const ForestParams& p = forest.params;
  Json params;
  params["n_trees"] = p.n_trees;
  params["n_classes"] = p.n_classes;
  params["feature_subsample"] = p.feature_subsample;
  params["min_node_size"] = p.min_node_size;
  params["max_depth"] = p.max_depth ? Json(*p.max_depth) : Json(nullptr);
  params["impurity"] = to_string(p.impurity);
  params["mode"] = to_string(p.mode);
  params["gamma"] = p.gamma;
  params["seed"] = p.seed;

  Json doc;
  doc["format"] = kFormatTag;
  doc["format_version"] = forest.format_version;
  doc["n_features"] = forest.n_features;
  doc["class_names"] = forest.class_names;
  doc["params"] = std::move(params);
  Json trees = Json::array();
  for (const Tree& tree : forest.trees) trees.push_back(node_to_json(tree, 0));
  doc["trees"] = std::move(trees);
  return doc.dump(1) + "\n";
}

Forest deserialize(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model document: ") + e.what());
  }

  const Reader root("");
  if (!doc.is_object()) root.fail("top level is not an object");
  if (root.as<std::string>(doc, "format") != kFormatTag) root.child("format").fail("not a ccf-forest document");
  const std::size_t version = root.count(doc, "format_version");
  if (version != Forest::kFormatVersion) {
    throw UnsupportedVersionError("model document: unsupported format_version " + std::to_string(version) +
                                  " (this build reads version " + std::to_string(Forest::kFormatVersion) + ")");
  }

  Forest forest;
  forest.format_version = static_cast<std::uint32_t>(version);
  forest.n_features = root.count(doc, "n_features");
  forest.class_names = root.as<std::vector<std::string>>(doc, "class_names");
  if (forest.n_features == 0) root.child("n_features").fail("must be >= 1");
  if (forest.class_names.size() < 2) root.child("class_names").fail("need at least 2 classes");

  const Json& pj = root.get(doc, "params");
  const Reader pr = root.child("params");
  ForestParams& p = forest.params;
  p.n_trees = pr.count(pj, "n_trees");
  p.n_classes = pr.count(pj, "n_classes");
  p.feature_subsample = pr.count(pj, "feature_subsample");
  p.min_node_size = pr.count(pj, "min_node_size");
  const Json& depth = pr.get(pj, "max_depth");
  if (!depth.is_null()) p.max_depth = pr.count(pj, "max_depth");
  try {
    p.impurity = parse_impurity(pr.as<std::string>(pj, "impurity"));
    p.mode = parse_split_mode(pr.as<std::string>(pj, "mode"));
  } catch (const ParseError&) {
    throw;
  } catch (const InputError& e) {
    pr.fail(e.what());
  }
  p.gamma = pr.as<double>(pj, "gamma");
  const Json& seed = pr.get(pj, "seed");
  if (!seed.is_number_unsigned()) pr.child("seed").fail("expected a non-negative integer");
  p.seed = seed.get<std::uint64_t>();
  if (p.n_classes != forest.class_names.size()) pr.child("n_classes").fail("differs from class_names length");

  const Json& trees = root.get(doc, "trees");
  if (!trees.is_array()) root.child("trees").fail("expected an array");
  if (trees.size() != p.n_trees || p.n_trees == 0) root.child("trees").fail("tree count differs from params.n_trees");
  forest.trees.resize(trees.size());
  for (std::size_t i = 0; i < trees.size(); ++i) {
    read_node(trees[i], root.child("trees").item(i), forest, forest.trees[i]);
  }
  return forest;
}

void save_forest(const Forest& forest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot open '" + path + "' for writing");
  out << serialize(forest);
  if (!out) throw LoadError("failed writing '" + path + "'");
}

Forest load_forest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open model file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize(buffer.str());
}

}  // namespace ccf
