#pragma once

#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "cryptoscope/dataset.hpp"
#include "cryptoscope/eval/cv.hpp"
#include "cryptoscope/eval/task.hpp"
#include "cryptoscope/learn/kmeans.hpp"

namespace cryptoscope::eval {

struct ExperimentConfig {
  std::uint64_t seed = 42;
  std::size_t folds = kDefaultFolds;
  // Feature set behind the kernel table, the per-model tables and the CV matrix.
  FeatureConfig primary{Basis::CATEGORY, Representation::PROPORTION, true, 2};
  // The feature-set comparison uses the four basis/representation pairs
  // with this loop setting.
  bool feature_sets_include_loops = false;
  std::size_t k_detect = 2, k_type = 2, k_algo = 6;
};

inline std::size_t clusters_for(const ExperimentConfig& c, Task t) {
  return t == Task::DETECT ? c.k_detect : t == Task::TYPE ? c.k_type : c.k_algo;
}

inline std::vector<learn::ModelSpec> table_models() {
  learn::ModelSpec svm{learn::ModelKind::SVM};
  return {svm, {learn::ModelKind::GNB}, {learn::ModelKind::MNB}, {learn::ModelKind::TREE}};
}

inline std::vector<learn::ModelSpec> kernel_models() {
  std::vector<learn::ModelSpec> out;
  for (auto k : {learn::KernelKind::LINEAR, learn::KernelKind::RBF, learn::KernelKind::POLY, learn::KernelKind::SIGMOID}) {
    learn::ModelSpec s{learn::ModelKind::SVM};
    s.kernel.kind = k;
    out.push_back(s);
  }
  return out;
}

inline std::string feature_set_name(const FeatureConfig& c) {
  std::string n = std::string(basis_name(c.basis)) + "/" + std::string(representation_name(c.representation));
  if (c.include_loops) n += "+loops";
  return n;
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json kernels = nlohmann::json::array(), models = nlohmann::json::array();
  for (const auto& m : kernel_models()) kernels.push_back(m.name());
  for (const auto& m : table_models()) models.push_back(m.name());
  models.push_back("kmeans");
  return {{"folds", c.folds},
          {"fold_assignment", "stratified"},
          {"primary_features", cryptoscope::to_json(c.primary)},
          {"feature_sets_include_loops", c.feature_sets_include_loops},
          {"kernels", kernels},
          {"models", models},
          {"svm_C", 1.0},
          {"mnb_alpha", 1.0},
          {"kmeans", {{"k", {{"detect", c.k_detect}, {"type", c.k_type}, {"algo", c.k_algo}}}, {"n_init", 10}, {"max_iter", 300}}}};
}

inline nlohmann::json metrics_json(const ClassificationMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"accuracy", m.accuracy}};
}

inline nlohmann::json cluster_json(const ClusterMetrics& m) {
  return {{"homogeneity", m.homogeneity}, {"completeness", m.completeness}, {"v_score", m.v_score}};
}

inline nlohmann::json cv_json(const CvReport& r) {
  return {{"fold_accuracy", r.fold_accuracy}, {"mean_accuracy", r.mean_accuracy}, {"pooled", metrics_json(r.pooled)}};
}

inline ClusterMetrics cluster_task(const TaskData& d, std::size_t k, std::uint64_t seed) {
  const auto model = learn::kmeans_fit(d.x, k, seed);
  return cluster_metrics(d.y, model.labels);
}

// Mean bitwise ratio per program and per crypto/plain group, plus loop
// feature cardinality over crypto traces.
inline nlohmann::json corpus_summary(const CorpusStats& cs) {
  std::map<std::string, std::pair<double, std::size_t>> per_program;
  double crypto = 0, plain = 0;
  std::size_t n_crypto = 0, n_plain = 0;
  std::set<std::string> looped;
  for (const auto& e : cs.entries) {
    const double r = bitwise_ratio(e.stats);
    auto& [sum, n] = per_program[e.program_id];
    sum += r;
    ++n;
    if (e.label.has_crypto) {
      crypto += r;
      ++n_crypto;
      for (std::size_t i = 0; i < e.stats.looped.size(); ++i)
        if (e.stats.looped[i]) looped.insert(std::string(Mnemonic::from_index(static_cast<std::uint16_t>(i)).name()));
    } else {
      plain += r;
      ++n_plain;
    }
  }
  nlohmann::json programs = nlohmann::json::object(), above = nlohmann::json::array();
  for (const auto& [p, v] : per_program) {
    const double mean = v.first / static_cast<double>(v.second);
    programs[p] = mean;
    if (mean > 0.55) above.push_back(p);
  }
  return {{"samples", cs.entries.size()},
          {"failures", cs.failures.size()},
          {"bitwise_ratio",
           {{"crypto_mean", n_crypto ? crypto / static_cast<double>(n_crypto) : 0.0},
            {"plain_mean", n_plain ? plain / static_cast<double>(n_plain) : 0.0},
            {"per_program", programs},
            {"programs_above_0.55", above}}},
          {"crypto_looped_mnemonics", looped}};
}

// Regenerates the result tables from one corpus. Pure function of
// (corpus, config); no timings are recorded so reruns are byte-identical.
inline nlohmann::json run_experiment(const CorpusStats& cs, const ExperimentConfig& cfg) {
  nlohmann::json tables;
  const auto primary = build_dataset(cs, cfg.primary);
  std::map<Task, TaskData> data;
  for (auto t : kAllTasks) data.emplace(t, task_data(primary, t));
  const auto cv = [&](const TaskData& d, const learn::ModelSpec& s) {
    return cross_validate(d.x, d.y, d.n_classes, s, cfg.folds, cfg.seed);
  };

  // Accuracy of every SVM kernel on every task.
  nlohmann::json kernel_rows = nlohmann::json::object();
  for (const auto& spec : kernel_models()) {
    nlohmann::json row;
    double sum = 0;
    for (auto t : kAllTasks) {
      const double acc = cv(data.at(t), spec).mean_accuracy;
      row[std::string(task_name(t))] = acc;
      sum += acc;
    }
    row["mean"] = sum / 3.0;
    kernel_rows[std::string(learn::kernel_name(spec.kernel.kind))] = row;
  }
  tables["kernel_accuracy"] = {{"features", feature_set_name(cfg.primary)}, {"rows", kernel_rows}};

  // The four feature sets side by side.
  nlohmann::json fs_rows = nlohmann::json::array();
  for (auto basis : {Basis::INSTRUCTION, Basis::CATEGORY}) {
    for (auto rep : {Representation::COUNT, Representation::PROPORTION}) {
      FeatureConfig fc{basis, rep, cfg.feature_sets_include_loops, cfg.primary.loop_min};
      const auto ds = build_dataset(cs, fc);
      nlohmann::json row = {{"features", feature_set_name(fc)}, {"dimension", ds.space.dimension()}};
      double acc_sum = 0, v_sum = 0;
      std::size_t n_acc = 0;
      for (auto t : kAllTasks) {
        const auto d = task_data(ds, t);
        nlohmann::json cell;
        for (const auto& spec : table_models()) {
          const auto r = cv(d, spec);
          cell[spec.name()] = {{"accuracy", r.mean_accuracy}, {"f1", r.pooled.f1}};
          acc_sum += r.mean_accuracy;
          ++n_acc;
        }
        const auto cm = cluster_task(d, clusters_for(cfg, t), cfg.seed);
        cell["kmeans"] = cluster_json(cm);
        v_sum += cm.v_score;
        row[std::string(task_name(t))] = cell;
      }
      row["mean_accuracy"] = acc_sum / static_cast<double>(n_acc);
      row["mean_v_score"] = v_sum / 3.0;
      fs_rows.push_back(row);
    }
  }
  tables["feature_set_summary"] = {{"rows", fs_rows}};

  // Per-task model tables (pooled CV predictions) and the CV matrix.
  nlohmann::json cv_rows = nlohmann::json::object();
  int model_no = 1;
  for (auto t : kAllTasks) {
    const auto& d = data.at(t);
    nlohmann::json rows = nlohmann::json::object();
    for (const auto& spec : table_models()) {
      const auto r = cv(d, spec);
      rows[spec.name()] = metrics_json(r.pooled);
      cv_rows[spec.name()][std::string(task_name(t))] = cv_json(r);
    }
    const std::size_t k = clusters_for(cfg, t);
    rows["kmeans"] = cluster_json(cluster_task(d, k, cfg.seed));
    rows["kmeans"]["k"] = k;
    auto counts = nlohmann::json::array();
    for (std::size_t c = 0; c < d.n_classes; ++c)
      counts.push_back(static_cast<std::size_t>(std::ranges::count(d.y, static_cast<int>(c))));
    tables["model" + std::to_string(model_no++)] = {{"task", std::string(task_name(t))},
                                                    {"features", feature_set_name(cfg.primary)},
                                                    {"classes", task_classes(t)},
                                                    {"class_counts", counts},
                                                    {"rows", rows}};
  }
  tables["cv_matrix"] = {{"features", feature_set_name(cfg.primary)}, {"folds", cfg.folds}, {"rows", cv_rows}};

  return {{"format_version", kFormatVersion},
          {"corpus_fingerprint", cs.fingerprint},
          {"config_grid", to_json(cfg)},
          {"seeds", {{"corpus", cs.seed ? nlohmann::json(*cs.seed) : nlohmann::json(nullptr)},
                     {"cv", cfg.seed},
                     {"kmeans", cfg.seed},
                     {"rng", std::string(kRngName)}}},
          {"corpus_summary", corpus_summary(cs)},
          {"tables", tables}};
}

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

}  // namespace detail

// Plain-text tables in the same row/column layout as the JSON.
inline std::string render_text(const nlohmann::json& report) {
  using detail::fmt;
  using detail::pad;
  const auto& t = report.at("tables");
  std::string out;
  out += "corpus " + report.at("corpus_fingerprint").get<std::string>() + "\n\n";

  out += "SVM kernel accuracy (" + t["kernel_accuracy"]["features"].get<std::string>() + ")\n";
  out += pad("kernel", 10) + pad("detect", 9) + pad("type", 9) + pad("algo", 9) + "mean\n";
  for (const auto& [k, row] : t["kernel_accuracy"]["rows"].items())
    out += pad(k, 10) + pad(fmt(row["detect"]), 9) + pad(fmt(row["type"]), 9) + pad(fmt(row["algo"]), 9) +
           fmt(row["mean"]) + "\n";

  out += "\nFeature sets (mean CV accuracy over models and tasks, mean k-means v-score)\n";
  out += pad("features", 24) + pad("dim", 6) + pad("accuracy", 10) + pad("v-score", 9) + "algo v-score\n";
  for (const auto& row : t["feature_set_summary"]["rows"])
    out += pad(row["features"].get<std::string>(), 24) + pad(std::to_string(row["dimension"].get<int>()), 6) +
           pad(fmt(row["mean_accuracy"]), 10) + pad(fmt(row["mean_v_score"]), 9) +
           fmt(row["algo"]["kmeans"]["v_score"]) + "\n";

  for (int i = 1; i <= 3; ++i) {
    const auto& m = t["model" + std::to_string(i)];
    out += "\nModel " + std::to_string(i) + ": " + m["task"].get<std::string>() + " (" +
           m["features"].get<std::string>() + ")\n";
    out += pad("model", 12) + pad("precision", 11) + pad("recall", 9) + "f1\n";
    for (const auto& [name, row] : m["rows"].items()) {
      if (name == "kmeans") continue;
      out += pad(name, 12) + pad(fmt(row["precision"]), 11) + pad(fmt(row["recall"]), 9) + fmt(row["f1"]) + "\n";
    }
    const auto& km = m["rows"]["kmeans"];
    out += pad("kmeans k=" + std::to_string(km["k"].get<int>()), 12) + pad(fmt(km["homogeneity"]), 11) +
           pad(fmt(km["completeness"]), 9) + fmt(km["v_score"]) + "   (h / c / v)\n";
  }

  out += "\nCross-validation accuracy (" + std::to_string(t["cv_matrix"]["folds"].get<int>()) + " folds)\n";
  out += pad("model", 12) + pad("detect", 9) + pad("type", 9) + "algo\n";
  for (const auto& [name, row] : t["cv_matrix"]["rows"].items())
    out += pad(name, 12) + pad(fmt(row["detect"]["mean_accuracy"]), 9) + pad(fmt(row["type"]["mean_accuracy"]), 9) +
           fmt(row["algo"]["mean_accuracy"]) + "\n";

  const auto& bw = report.at("corpus_summary").at("bitwise_ratio");
  out += "\nBitwise ratio: crypto mean " + fmt(bw["crypto_mean"]) + ", plain mean " + fmt(bw["plain_mean"]) +
         "; programs above 0.55: ";
  if (bw["programs_above_0.55"].empty()) out += "none";
  for (std::size_t i = 0; i < bw["programs_above_0.55"].size(); ++i)
    out += (i ? ", " : "") + bw["programs_above_0.55"][i].get<std::string>();
  out += "\n";
  return out;
}

}  // namespace cryptoscope::eval
