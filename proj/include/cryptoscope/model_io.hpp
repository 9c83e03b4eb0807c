#pragma once

#include <optional>
#include <string>
#include <variant>

#include "json.hpp"

#include "cryptoscope/dataset.hpp"
#include "cryptoscope/eval/task.hpp"
#include "cryptoscope/learn/classifier.hpp"
#include "cryptoscope/learn/kmeans.hpp"

namespace cryptoscope {

using AnyModel = std::variant<learn::SvmModel, learn::GaussianNb, learn::MultinomialNb, learn::DecisionTree,
                              learn::KMeansModel>;

// Everything written to a `.model.json` file.
struct ModelFile {
  eval::Task task = eval::Task::DETECT;
  std::uint64_t seed = 0;
  FeatureSpace space;
  std::string manifest_hash;
  AnyModel model;
};

inline std::string_view model_type(const AnyModel& m) {
  constexpr std::string_view names[] = {"svm", "gnb", "mnb", "tree", "kmeans"};
  return names[m.index()];
}

namespace io {

using nlohmann::json;

inline json rows(const learn::Matrix& m) { return m.to_rows(); }

inline learn::Matrix matrix(const json& j, std::size_t cols) {
  learn::Matrix m(0, cols);
  for (const auto& r : j) m.push_row(r.get<std::vector<double>>());
  return m;
}

inline json kernel_json(const learn::KernelSpec& k) {
  json j = {{"kind", std::string(learn::kernel_name(k.kind))}, {"coef0", k.coef0}, {"degree", k.degree}};
  j["gamma"] = k.gamma ? json(*k.gamma) : json(nullptr);
  return j;
}

inline learn::KernelSpec kernel_from(const json& j) {
  learn::KernelSpec k;
  const auto kind = learn::parse_kernel(j.at("kind").get<std::string>());
  if (!kind) throw FormatError("unknown kernel '" + j.at("kind").get<std::string>() + "'");
  k.kind = *kind;
  if (!j.at("gamma").is_null()) k.gamma = j["gamma"].get<double>();
  k.coef0 = j.at("coef0").get<double>();
  k.degree = j.at("degree").get<int>();
  return k;
}

struct Writer {
  json operator()(const learn::SvmModel& m) const {
    json pairs = json::array();
    for (const auto& p : m.pairs)
      pairs.push_back({{"a", p.a},
                       {"b", p.b},
                       {"bias", p.machine.bias},
                       {"coef", p.machine.coef},
                       {"support_vectors", rows(p.machine.support_vectors)},
                       {"iterations", p.machine.iterations},
                       {"converged", p.machine.converged}});
    return {{"n_classes", m.n_classes}, {"dimension", m.dimension}, {"kernel", kernel_json(m.kernel)},
            {"C", m.C}, {"pairs", pairs}};
  }
  json operator()(const learn::GaussianNb& m) const {
    return {{"prior", m.prior}, {"mean", rows(m.mean)}, {"variance", rows(m.variance)}, {"epsilon", m.epsilon}};
  }
  json operator()(const learn::MultinomialNb& m) const {
    return {{"alpha", m.alpha}, {"log_prior", m.log_prior}, {"log_prob", rows(m.log_prob)}};
  }
  json operator()(const learn::DecisionTree& t) const {
    json nodes = json::array();
    for (const auto& n : t.nodes)
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"histogram", n.histogram}});
    return {{"n_classes", t.n_classes}, {"dimension", t.dimension}, {"nodes", nodes}};
  }
  json operator()(const learn::KMeansModel& m) const {
    return {{"k", m.k}, {"centroids", rows(m.centroids)}, {"inertia", m.inertia}};
  }
};

inline json hyperparameters(const AnyModel& m) {
  struct V {
    json operator()(const learn::SvmModel& s) const {
      return {{"kernel", kernel_json(s.kernel)}, {"C", s.C}, {"tolerance", learn::SmoOptions{}.tolerance}};
    }
    json operator()(const learn::GaussianNb&) const { return {{"variance_floor_scale", learn::kVarianceFloorScale}}; }
    json operator()(const learn::MultinomialNb& n) const { return {{"alpha", n.alpha}}; }
    json operator()(const learn::DecisionTree&) const { return {{"criterion", "gini"}}; }
    json operator()(const learn::KMeansModel& k) const {
      return {{"k", k.k}, {"n_init", k.n_init}, {"max_iter", k.max_iter}, {"rng", k.rng}};
    }
  };
  return std::visit(V{}, m);
}

inline AnyModel read_model(std::string_view type, const json& p, const json& hp, std::uint64_t seed) {
  if (type == "svm") {
    learn::SvmModel m;
    m.n_classes = p.at("n_classes").get<std::size_t>();
    m.dimension = p.at("dimension").get<std::size_t>();
    m.kernel = kernel_from(p.at("kernel"));
    m.C = p.at("C").get<double>();
    for (const auto& j : p.at("pairs")) {
      learn::SvmModel::Pair pr;
      pr.a = j.at("a").get<int>();
      pr.b = j.at("b").get<int>();
      pr.machine.kernel = m.kernel;
      pr.machine.C = m.C;
      pr.machine.bias = j.at("bias").get<double>();
      pr.machine.coef = j.at("coef").get<std::vector<double>>();
      pr.machine.support_vectors = matrix(j.at("support_vectors"), m.dimension);
      pr.machine.iterations = j.at("iterations").get<std::size_t>();
      pr.machine.converged = j.at("converged").get<bool>();
      if (pr.machine.coef.size() != pr.machine.support_vectors.rows())
        throw FormatError("support vector and coefficient counts differ");
      m.pairs.push_back(std::move(pr));
    }
    if (m.pairs.size() != m.n_classes * (m.n_classes - 1) / 2) throw FormatError("wrong number of one-vs-one machines");
    return m;
  }
  if (type == "gnb") {
    learn::GaussianNb m;
    m.prior = p.at("prior").get<std::vector<double>>();
    const auto dim = p.at("mean").empty() ? 0 : p["mean"][0].size();
    m.mean = matrix(p.at("mean"), dim);
    m.variance = matrix(p.at("variance"), dim);
    m.epsilon = p.at("epsilon").get<double>();
    return m;
  }
  if (type == "mnb") {
    learn::MultinomialNb m;
    m.alpha = p.at("alpha").get<double>();
    m.log_prior = p.at("log_prior").get<std::vector<double>>();
    const auto dim = p.at("log_prob").empty() ? 0 : p["log_prob"][0].size();
    m.log_prob = matrix(p.at("log_prob"), dim);
    return m;
  }
  if (type == "tree") {
    learn::DecisionTree t;
    t.n_classes = p.at("n_classes").get<std::size_t>();
    t.dimension = p.at("dimension").get<std::size_t>();
    for (const auto& j : p.at("nodes")) {
      learn::DecisionTree::Node n;
      n.feature = j.at("feature").get<int>();
      n.threshold = j.at("threshold").get<double>();
      n.left = j.at("left").get<int>();
      n.right = j.at("right").get<int>();
      n.histogram = j.at("histogram").get<std::vector<std::size_t>>();
      t.nodes.push_back(std::move(n));
    }
    if (t.nodes.empty()) throw FormatError("tree has no nodes");
    return t;
  }
  if (type == "kmeans") {
    learn::KMeansModel m;
    m.k = p.at("k").get<std::size_t>();
    const auto dim = p.at("centroids").empty() ? 0 : p["centroids"][0].size();
    m.centroids = matrix(p.at("centroids"), dim);
    m.inertia = p.at("inertia").get<double>();
    m.seed = seed;
    m.n_init = hp.at("n_init").get<int>();
    m.max_iter = hp.at("max_iter").get<int>();
    m.rng = hp.at("rng").get<std::string>();
    if (m.centroids.rows() != m.k) throw FormatError("centroid count differs from k");
    return m;
  }
  throw FormatError("unknown model_type '" + std::string(type) + "'");
}

}  // namespace io

inline nlohmann::json to_json(const ModelFile& f) {
  nlohmann::json j = {{"format_version", kFormatVersion},
                      {"model_type", std::string(model_type(f.model))},
                      {"task", std::string(eval::task_name(f.task))},
                      {"classes", eval::task_classes(f.task)},
                      {"hyperparameters", io::hyperparameters(f.model)},
                      {"seed", f.seed},
                      {"manifest_hash", f.manifest_hash},
                      {"feature_space", to_json(f.space)},
                      {"parameters", std::visit(io::Writer{}, f.model)}};
  return j;
}

inline std::string model_text(const ModelFile& f) { return to_json(f).dump(1) + "\n"; }

inline ModelFile model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kFormatVersion) throw FormatError("unsupported model format_version");
    ModelFile f;
    const auto task = eval::parse_task(j.at("task").get<std::string>());
    if (!task) throw FormatError("unknown task in model file");
    f.task = *task;
    f.seed = j.at("seed").get<std::uint64_t>();
    f.manifest_hash = j.value("manifest_hash", "");
    f.space = feature_space_from_json(j.at("feature_space"));
    f.model = io::read_model(j.at("model_type").get<std::string>(), j.at("parameters"), j.at("hyperparameters"), f.seed);
    return f;
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("model file: ") + ex.what());
  }
}

inline ModelFile parse_model(std::string_view text) {
  try {
    return model_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("model file: ") + ex.what());
  }
}

// Classifier view of a stored model; k-means models have none.
inline std::optional<learn::Classifier> as_classifier(const AnyModel& m) {
  return std::visit(
      [](const auto& v) -> std::optional<learn::Classifier> {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, learn::KMeansModel>) return std::nullopt;
        else return learn::Classifier(v);
      },
      m);
}

}  // namespace cryptoscope
