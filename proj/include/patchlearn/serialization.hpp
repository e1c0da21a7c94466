#pragma once

#include <fstream>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "patchlearn/anfis.hpp"
#include "patchlearn/baselines.hpp"
#include "patchlearn/fuzzy.hpp"
#include "patchlearn/learner.hpp"
#include "patchlearn/patch_learning.hpp"

namespace patchlearn {

// Parse failures carry the JSON path of the offending field, e.g.
// "$.model.patches[0].box.bounds".
struct ModelParseError : std::runtime_error {
  std::string fieldPath;
  ModelParseError(std::string path, const std::string& what)
      : std::runtime_error("model parse error at " + path + ": " + what),
        fieldPath(std::move(path)) {}
};

namespace detail {

using nlohmann::json;

inline const json& jfield(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ModelParseError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ModelParseError(path + "." + key, "missing field");
  return *it;
}

inline double jnum(const json& obj, const char* key, const std::string& path) {
  const json& v = jfield(obj, key, path);
  if (!v.is_number()) throw ModelParseError(path + "." + key, "expected a number");
  return v.get<double>();
}

inline int jint(const json& obj, const char* key, const std::string& path) {
  const json& v = jfield(obj, key, path);
  if (!v.is_number_integer()) throw ModelParseError(path + "." + key, "expected an integer");
  return v.get<int>();
}

inline bool jbool(const json& obj, const char* key, const std::string& path) {
  const json& v = jfield(obj, key, path);
  if (!v.is_boolean()) throw ModelParseError(path + "." + key, "expected a boolean");
  return v.get<bool>();
}

inline std::string jstring(const json& obj, const char* key, const std::string& path) {
  const json& v = jfield(obj, key, path);
  if (!v.is_string()) throw ModelParseError(path + "." + key, "expected a string");
  return v.get<std::string>();
}

inline const json& jarray(const json& obj, const char* key, const std::string& path) {
  const json& v = jfield(obj, key, path);
  if (!v.is_array()) throw ModelParseError(path + "." + key, "expected an array");
  return v;
}

inline std::vector<double> jdoubles(const json& arr, const std::string& path) {
  std::vector<double> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number())
      throw ModelParseError(path + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(arr[i].get<double>());
  }
  return out;
}

inline std::vector<int> jints(const json& arr, const std::string& path) {
  std::vector<int> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number_integer())
      throw ModelParseError(path + "[" + std::to_string(i) + "]", "expected an integer");
    out.push_back(arr[i].get<int>());
  }
  return out;
}

}  // namespace detail

inline nlohmann::json learner_to_json(const BaseLearner& learner);

inline nlohmann::json ensemble_to_json(const EnsembleModel& ensemble) {
  nlohmann::json j;
  j["kind"] = "ensemble";
  j["combiner"] =
      ensemble.combiner == EnsembleModel::Combiner::average ? "average" : "boosted-sum";
  j["shrinkage"] = ensemble.shrinkage;
  j["f0"] = ensemble.f0;
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : ensemble.members) members.push_back(learner_to_json(*m));
  j["members"] = std::move(members);
  return j;
}

inline nlohmann::json patch_model_to_json(const PlModel& model) {
  auto box_json = [](const PatchBox& box) {
    nlohmann::json jb;
    nlohmann::json bounds = nlohmann::json::array();
    for (const auto& iv : box.bounds)
      bounds.push_back({{"lo", iv.lo}, {"hi", iv.hi}, {"closedAbove", iv.closedAbove}});
    jb["bounds"] = std::move(bounds);
    jb["flatIndex"] = box.flatIndex;
    jb["sourcePartition"] = box.sourcePartition;
    return jb;
  };

  nlohmann::json j;
  j["kind"] = "patch-learning";
  j["alpha"] = model.alpha;
  j["trainingRmse"] = model.trainingRmse;
  j["loss"] = model.loss;
  j["stagedRmse"] = model.stagedRmse;
  j["stagedLoss"] = model.stagedLoss;
  j["globalUpdateSkipped"] = model.globalUpdateSkipped;
  j["globalUpdateExamples"] = model.globalUpdateExamples;
  nlohmann::json patches = nlohmann::json::array();
  for (const auto& p : model.patches) {
    nlohmann::json jp;
    jp["box"] = box_json(p.box);
    jp["sse"] = p.sse;
    jp["trainExamples"] = p.trainExamples;
    jp["model"] = learner_to_json(*p.learner);
    patches.push_back(std::move(jp));
  }
  j["patches"] = std::move(patches);
  j["global"] = learner_to_json(*model.globalModel);
  if (model.initialGlobal && model.initialGlobal != model.globalModel)
    j["initialGlobal"] = learner_to_json(*model.initialGlobal);
  return j;
}

inline nlohmann::json learner_to_json(const BaseLearner& learner) {
  if (const auto* poly = dynamic_cast<const PolynomialLearner*>(&learner)) {
    nlohmann::json j;
    j["kind"] = "polynomial";
    j["degree"] = poly->model().degree;
    j["coeffs"] = poly->model().coeffs;
    return j;
  }
  if (const auto* tree = dynamic_cast<const TreeLearner*>(&learner)) {
    nlohmann::json j;
    j["kind"] = "tree";
    j["maxDepth"] = tree->tree().params.maxDepth;
    j["minLeaf"] = tree->tree().params.minLeaf;
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree->tree().nodes)
      nodes.push_back({{"leaf", n.leaf},
                       {"value", n.value},
                       {"count", n.count},
                       {"dim", n.dim},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right}});
    j["nodes"] = std::move(nodes);
    return j;
  }
  if (const auto* anfis = dynamic_cast<const AnfisLearner*>(&learner)) {
    const TskSystem& sys = anfis->system();
    nlohmann::json j;
    j["kind"] = "tsk-anfis";
    j["config"] = {{"mfsPerInput", anfis->config().mfsPerInput},
                   {"ridgeLambda", anfis->config().ridgeLambda},
                   {"premiseEpochs", anfis->config().premiseEpochs},
                   {"premiseStep", anfis->config().premiseStep}};
    nlohmann::json ranges = nlohmann::json::array();
    for (const auto& r : sys.ranges) ranges.push_back({r.lo, r.hi});
    j["ranges"] = std::move(ranges);
    nlohmann::json mfs = nlohmann::json::array();
    for (const auto& dimMfs : sys.mfs) {
      nlohmann::json dim = nlohmann::json::array();
      for (const auto& mf : dimMfs) dim.push_back({mf.a, mf.b, mf.c, mf.d});
      mfs.push_back(std::move(dim));
    }
    j["mfs"] = std::move(mfs);
    nlohmann::json rules = nlohmann::json::array();
    for (const auto& rule : sys.rules)
      rules.push_back({{"antecedent", rule.antecedent}, {"consequent", rule.consequent}});
    j["rules"] = std::move(rules);
    return j;
  }
  throw std::invalid_argument("model serialization: unsupported learner type");
}

inline std::shared_ptr<BaseLearner> learner_from_json(const nlohmann::json& j,
                                                      const std::string& path);

inline EnsembleModel ensemble_from_json(const nlohmann::json& j, const std::string& path) {
  using detail::jarray;
  using detail::jnum;
  using detail::jstring;
  EnsembleModel out;
  std::string combiner = jstring(j, "combiner", path);
  if (combiner == "average") {
    out.combiner = EnsembleModel::Combiner::average;
  } else if (combiner == "boosted-sum") {
    out.combiner = EnsembleModel::Combiner::boostedSum;
  } else {
    throw ModelParseError(path + ".combiner", "unknown combiner '" + combiner + "'");
  }
  out.shrinkage = jnum(j, "shrinkage", path);
  out.f0 = jnum(j, "f0", path);
  const auto& members = jarray(j, "members", path);
  if (members.empty()) throw ModelParseError(path + ".members", "ensemble has no members");
  for (std::size_t i = 0; i < members.size(); ++i)
    out.members.push_back(
        learner_from_json(members[i], path + ".members[" + std::to_string(i) + "]"));
  return out;
}

namespace detail {

inline PatchBox box_from_json(const json& j, const std::string& path) {
  PatchBox box;
  const auto& bounds = jarray(j, "bounds", path);
  if (bounds.empty()) throw ModelParseError(path + ".bounds", "box has no dimensions");
  for (std::size_t m = 0; m < bounds.size(); ++m) {
    std::string p = path + ".bounds[" + std::to_string(m) + "]";
    Interval iv;
    iv.lo = jnum(bounds[m], "lo", p);
    iv.hi = jnum(bounds[m], "hi", p);
    iv.closedAbove = jbool(bounds[m], "closedAbove", p);
    box.bounds.push_back(iv);
  }
  box.flatIndex = jint(j, "flatIndex", path);
  box.sourcePartition = jints(jarray(j, "sourcePartition", path), path + ".sourcePartition");
  return box;
}

}  // namespace detail

inline PlModel patch_model_from_json(const nlohmann::json& j, const std::string& path) {
  using namespace detail;
  PlModel model;
  model.alpha = jnum(j, "alpha", path);
  model.trainingRmse = jnum(j, "trainingRmse", path);
  model.loss = jnum(j, "loss", path);
  model.stagedRmse = jdoubles(jarray(j, "stagedRmse", path), path + ".stagedRmse");
  model.stagedLoss = jdoubles(jarray(j, "stagedLoss", path), path + ".stagedLoss");
  model.globalUpdateSkipped = jbool(j, "globalUpdateSkipped", path);
  model.globalUpdateExamples = jint(j, "globalUpdateExamples", path);
  const auto& patches = jarray(j, "patches", path);
  for (std::size_t i = 0; i < patches.size(); ++i) {
    std::string p = path + ".patches[" + std::to_string(i) + "]";
    PlPatch patch;
    patch.box = box_from_json(jfield(patches[i], "box", p), p + ".box");
    patch.sse = jnum(patches[i], "sse", p);
    patch.trainExamples = jint(patches[i], "trainExamples", p);
    patch.learner = learner_from_json(jfield(patches[i], "model", p), p + ".model");
    model.patches.push_back(std::move(patch));
  }
  model.globalModel = learner_from_json(jfield(j, "global", path), path + ".global");
  if (j.contains("initialGlobal"))
    model.initialGlobal = learner_from_json(j["initialGlobal"], path + ".initialGlobal");
  else
    model.initialGlobal = model.globalModel;
  return model;
}

inline std::shared_ptr<BaseLearner> learner_from_json(const nlohmann::json& j,
                                                      const std::string& path) {
  using namespace detail;
  std::string kind = jstring(j, "kind", path);
  try {
    if (kind == "polynomial") {
      PolynomialModel model;
      model.degree = jint(j, "degree", path);
      model.coeffs = jdoubles(jarray(j, "coeffs", path), path + ".coeffs");
      return std::make_shared<PolynomialLearner>(std::move(model));
    }
    if (kind == "tree") {
      RegressionTree tree;
      tree.params.maxDepth = jint(j, "maxDepth", path);
      tree.params.minLeaf = jint(j, "minLeaf", path);
      const auto& nodes = jarray(j, "nodes", path);
      if (nodes.empty()) throw ModelParseError(path + ".nodes", "tree has no nodes");
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        std::string p = path + ".nodes[" + std::to_string(i) + "]";
        RegressionTree::Node n;
        n.leaf = jbool(nodes[i], "leaf", p);
        n.value = jnum(nodes[i], "value", p);
        n.count = jint(nodes[i], "count", p);
        n.dim = jint(nodes[i], "dim", p);
        n.threshold = jnum(nodes[i], "threshold", p);
        n.left = jint(nodes[i], "left", p);
        n.right = jint(nodes[i], "right", p);
        if (!n.leaf && (n.left < 0 || n.right < 0 ||
                        n.left >= static_cast<int>(nodes.size()) ||
                        n.right >= static_cast<int>(nodes.size())))
          throw ModelParseError(p, "split node child out of range");
        tree.nodes.push_back(n);
      }
      return std::make_shared<TreeLearner>(std::move(tree));
    }
    if (kind == "tsk-anfis") {
      const auto& jcfg = jfield(j, "config", path);
      AnfisConfig cfg;
      cfg.mfsPerInput = jint(jcfg, "mfsPerInput", path + ".config");
      cfg.ridgeLambda = jnum(jcfg, "ridgeLambda", path + ".config");
      cfg.premiseEpochs = jint(jcfg, "premiseEpochs", path + ".config");
      cfg.premiseStep = jnum(jcfg, "premiseStep", path + ".config");

      TskSystem sys;
      const auto& ranges = jarray(j, "ranges", path);
      for (std::size_t m = 0; m < ranges.size(); ++m) {
        std::string p = path + ".ranges[" + std::to_string(m) + "]";
        if (!ranges[m].is_array() || ranges[m].size() != 2)
          throw ModelParseError(p, "expected [lo, hi]");
        auto pair = jdoubles(ranges[m], p);
        sys.ranges.push_back({pair[0], pair[1]});
      }
      const auto& mfs = jarray(j, "mfs", path);
      for (std::size_t m = 0; m < mfs.size(); ++m) {
        std::string p = path + ".mfs[" + std::to_string(m) + "]";
        if (!mfs[m].is_array()) throw ModelParseError(p, "expected an array");
        std::vector<TrapezoidMf> dim;
        for (std::size_t i = 0; i < mfs[m].size(); ++i) {
          std::string pm = p + "[" + std::to_string(i) + "]";
          if (!mfs[m][i].is_array() || mfs[m][i].size() != 4)
            throw ModelParseError(pm, "expected [a, b, c, d]");
          auto bp = jdoubles(mfs[m][i], pm);
          dim.push_back({bp[0], bp[1], bp[2], bp[3]});
        }
        sys.mfs.push_back(std::move(dim));
      }
      const auto& rules = jarray(j, "rules", path);
      for (std::size_t r = 0; r < rules.size(); ++r) {
        std::string p = path + ".rules[" + std::to_string(r) + "]";
        TskRule rule;
        rule.antecedent = jints(jarray(rules[r], "antecedent", p), p + ".antecedent");
        rule.consequent = jdoubles(jarray(rules[r], "consequent", p), p + ".consequent");
        sys.rules.push_back(std::move(rule));
      }
      return std::make_shared<AnfisLearner>(cfg, std::move(sys));
    }
  } catch (const std::invalid_argument& e) {
    // Structure was readable but violates a model invariant.
    throw ModelParseError(path, e.what());
  }
  throw ModelParseError(path + ".kind", "unknown model kind '" + kind + "'");
}

// One callable view over every storable model shape.
struct AnyModel {
  std::string kind;
  std::function<double(std::span<const double>)> fn;

  double predict(std::span<const double> x) const { return fn(x); }
};

inline AnyModel any_model_from_json(const nlohmann::json& j, const std::string& path) {
  std::string kind = detail::jstring(j, "kind", path);
  AnyModel out;
  out.kind = kind;
  if (kind == "patch-learning") {
    auto model = std::make_shared<PlModel>(patch_model_from_json(j, path));
    out.fn = [model](std::span<const double> x) { return model->predict(x); };
  } else if (kind == "ensemble") {
    auto model = std::make_shared<EnsembleModel>(ensemble_from_json(j, path));
    out.fn = [model](std::span<const double> x) { return model->predict(x); };
  } else {
    std::shared_ptr<BaseLearner> learner = learner_from_json(j, path);
    out.fn = [learner](std::span<const double> x) { return learner->predict(x); };
  }
  return out;
}

inline constexpr const char* kModelFileFormat = "patchlearn-model";
inline constexpr int kModelFileVersion = 1;

inline nlohmann::json wrap_model_file(nlohmann::json model) {
  return {{"format", kModelFileFormat}, {"version", kModelFileVersion},
          {"model", std::move(model)}};
}

inline nlohmann::json parse_model_file(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelParseError("$", e.what());
  }
  if (detail::jstring(root, "format", "$") != kModelFileFormat)
    throw ModelParseError("$.format", "not a model file");
  int version = detail::jint(root, "version", "$");
  if (version != kModelFileVersion)
    throw ModelParseError("$.version", "unsupported version " + std::to_string(version));
  return detail::jfield(root, "model", "$");
}

inline void save_model_file(const std::string& filePath, const nlohmann::json& model) {
  std::ofstream out(filePath);
  if (!out) throw std::runtime_error("cannot open for writing: " + filePath);
  out << wrap_model_file(model).dump(2) << '\n';
}

inline nlohmann::json load_model_file(const std::string& filePath) {
  std::ifstream in(filePath);
  if (!in) throw std::runtime_error("cannot open: " + filePath);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_model_file(text);
}

}  // namespace patchlearn
