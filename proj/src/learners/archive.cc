/*
 * Copyright 2026 The TabAdv Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "tabadv/learners/archive.h"

#include <fstream>
#include <sstream>
#include <utility>

#include "absl/strings/str_cat.h"
#include "tabadv/common/status_macros.h"

namespace tabadv {
namespace {

using nlohmann::json;

absl::Status Malformed(absl::string_view what, const json::exception& e) {
  return absl::InvalidArgumentError(absl::StrCat("malformed ", what, ": ", e.what()));
}

absl::Status CheckTree(const Tree& t, int num_features) {
  const int n = static_cast<int>(t.nodes.size());
  if (n == 0) return absl::InvalidArgumentError("empty tree");
  for (int i = 0; i < n; ++i) {
    const TreeNode& node = t.nodes[i];
    if (node.is_leaf()) continue;
    if (node.feature < 0 || node.feature >= num_features || node.left <= i ||
        node.right <= i || node.left >= n || node.right >= n) {
      return absl::InvalidArgumentError(absl::StrCat("bad tree node ", i));
    }
  }
  return absl::OkStatus();
}

}  // namespace

json TreeEnsembleToJson(const TreeEnsemble& e) {
  json trees = json::array();
  for (const Tree& t : e.trees()) {
    json nodes = json::array();
    for (const TreeNode& n : t.nodes) {
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.weight});
    }
    trees.push_back(std::move(nodes));
  }
  return {{"kind", EnsembleKindName(e.kind())},
          {"num_features", e.num_features()},
          {"base_score", e.base_score()},
          {"learning_rate", e.learning_rate()},
          {"trees", std::move(trees)}};
}

absl::StatusOr<TreeEnsemble> TreeEnsembleFromJson(const json& j) {
  try {
    ASSIGN_OR_RETURN(const EnsembleKind kind,
                     ParseEnsembleKind(j.at("kind").get<std::string>()));
    const int d = j.at("num_features").get<int>();
    std::vector<Tree> trees;
    for (const json& jt : j.at("trees")) {
      Tree t;
      for (const json& jn : jt) {
        TreeNode n;
        n.feature = jn.at(0).get<int>();
        n.threshold = jn.at(1).get<double>();
        n.left = jn.at(2).get<int>();
        n.right = jn.at(3).get<int>();
        n.value = jn.at(4).get<double>();
        n.weight = jn.at(5).get<double>();
        t.nodes.push_back(n);
      }
      RETURN_IF_ERROR(CheckTree(t, d));
      trees.push_back(std::move(t));
    }
    return TreeEnsemble(kind, d, j.at("base_score").get<double>(),
                        j.at("learning_rate").get<double>(), std::move(trees));
  } catch (const json::exception& e) {
    return Malformed("tree ensemble", e);
  }
}

json MlpToJson(const Mlp& m) {
  json layers = json::array();
  for (const DenseLayer& l : m.layers()) {
    layers.push_back({{"in", l.in},
                      {"out", l.out},
                      {"activation", ActivationName(l.activation)},
                      {"weights", l.weights},
                      {"bias", l.bias},
                      {"prelu_slope", l.prelu_slope},
                      {"dropout", l.dropout}});
  }
  return layers;
}

absl::StatusOr<Mlp> MlpFromJson(const json& j) {
  try {
    std::vector<DenseLayer> layers;
    for (const json& jl : j) {
      DenseLayer l;
      l.in = jl.at("in").get<int>();
      l.out = jl.at("out").get<int>();
      ASSIGN_OR_RETURN(l.activation,
                       ParseActivation(jl.at("activation").get<std::string>()));
      l.weights = jl.at("weights").get<Vec>();
      l.bias = jl.at("bias").get<Vec>();
      l.prelu_slope = jl.at("prelu_slope").get<double>();
      l.dropout = jl.at("dropout").get<double>();
      if (l.in < 1 || l.out < 1 ||
          l.weights.size() != static_cast<size_t>(l.in) * l.out ||
          l.bias.size() != static_cast<size_t>(l.out)) {
        return absl::InvalidArgumentError("layer shape mismatch");
      }
      layers.push_back(std::move(l));
    }
    return Mlp(std::move(layers));
  } catch (const json::exception& e) {
    return Malformed("network", e);
  }
}

json SurrogateToJson(const SurrogateModel& m) {
  return {{"scaler", {{"mean", m.scaler().mean}, {"scale", m.scaler().scale}}},
          {"embed", MlpToJson(m.embed())},
          {"head", MlpToJson(m.head())}};
}

absl::StatusOr<SurrogateModel> SurrogateFromJson(const json& j) {
  try {
    Standardizer s;
    s.mean = j.at("scaler").at("mean").get<Vec>();
    s.scale = j.at("scaler").at("scale").get<Vec>();
    ASSIGN_OR_RETURN(Mlp embed, MlpFromJson(j.at("embed")));
    ASSIGN_OR_RETURN(Mlp head, MlpFromJson(j.at("head")));
    return SurrogateModel::FromParts(std::move(s), std::move(embed),
                                     std::move(head));
  } catch (const json::exception& e) {
    return Malformed("surrogate", e);
  }
}

json RegistryToJson(const DependencyRegistry& r) {
  json models = json::array();
  for (const auto& [feature, model] : r.models()) {
    models.push_back({{"feature", feature}, {"model", TreeEnsembleToJson(model)}});
  }
  return {{"inputs", r.input_features()}, {"models", std::move(models)}};
}

absl::StatusOr<DependencyRegistry> RegistryFromJson(const json& j) {
  try {
    std::vector<int> inputs = j.at("inputs").get<std::vector<int>>();
    std::map<int, TreeEnsemble> models;
    for (const json& jm : j.at("models")) {
      ASSIGN_OR_RETURN(TreeEnsemble e, TreeEnsembleFromJson(jm.at("model")));
      if (e.num_features() != static_cast<int>(inputs.size())) {
        return absl::InvalidArgumentError("regressor width mismatch");
      }
      models.emplace(jm.at("feature").get<int>(), std::move(e));
    }
    return DependencyRegistry(std::move(inputs), std::move(models));
  } catch (const json::exception& e) {
    return Malformed("registry", e);
  }
}

json ArchiveToJson(const ModelArchive& a) {
  json targets = json::object(), sources = json::object();
  for (const auto& [name, m] : a.targets) targets[name] = TreeEnsembleToJson(m);
  for (const auto& [name, m] : a.importance_sources) {
    sources[name] = TreeEnsembleToJson(m);
  }
  return {{"archive_version", kArchiveVersion},
          {"schema", SchemaToJson(a.schema)},
          {"targets", std::move(targets)},
          {"surrogate", a.surrogate ? SurrogateToJson(*a.surrogate) : json()},
          {"registry", RegistryToJson(a.registry)},
          {"importance_sources", std::move(sources)}};
}

absl::StatusOr<ModelArchive> ArchiveFromJson(const json& j) {
  try {
    if (j.at("archive_version").get<int>() != kArchiveVersion) {
      return absl::InvalidArgumentError(absl::StrCat(
          "unsupported archive version ", j.at("archive_version").dump()));
    }
    ModelArchive a;
    ASSIGN_OR_RETURN(a.schema, SchemaFromJson(j.at("schema")));
    const int d = static_cast<int>(a.schema.features.size());
    for (const auto& [name, jm] : j.at("targets").items()) {
      ASSIGN_OR_RETURN(TreeEnsemble m, TreeEnsembleFromJson(jm));
      if (m.num_features() != d) {
        return absl::InvalidArgumentError(absl::StrCat("model ", name, " width mismatch"));
      }
      a.targets.emplace(name, std::move(m));
    }
    for (const auto& [name, jm] : j.at("importance_sources").items()) {
      ASSIGN_OR_RETURN(TreeEnsemble m, TreeEnsembleFromJson(jm));
      a.importance_sources.emplace(name, std::move(m));
    }
    if (!j.at("surrogate").is_null()) {
      ASSIGN_OR_RETURN(a.surrogate, SurrogateFromJson(j.at("surrogate")));
    }
    ASSIGN_OR_RETURN(a.registry, RegistryFromJson(j.at("registry")));
    return a;
  } catch (const json::exception& e) {
    return Malformed("archive", e);
  }
}

absl::Status SaveArchive(const std::string& path, const ModelArchive& a) {
  std::ofstream out(path);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << ArchiveToJson(a).dump() << "\n";
  if (!out) return absl::UnavailableError(absl::StrCat("write failed: ", path));
  return absl::OkStatus();
}

absl::StatusOr<ModelArchive> LoadArchive(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buf;
  buf << in.rdbuf();
  const json j = json::parse(buf.str(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    return absl::InvalidArgumentError(absl::StrCat("invalid JSON in ", path));
  }
  return ArchiveFromJson(j);
}

}  // namespace tabadv
