#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cryptoscope/dataset.hpp"
#include "cryptoscope/eval/cv.hpp"
#include "cryptoscope/eval/experiment.hpp"
#include "cryptoscope/eval/task.hpp"
#include "cryptoscope/learn/kmeans.hpp"
#include "cryptoscope/model_io.hpp"

namespace cryptoscope::cli {

enum Exit : int { kOk = 0, kUsage = 2, kSemantic = 3, kInternal = 4 };

inline constexpr std::uint64_t kFallbackSeed = 42;

// CRYPTOSCOPE_SEED if set and numeric, else 42.
inline std::uint64_t default_seed() {
  if (const char* s = std::getenv("CRYPTOSCOPE_SEED")) {
    try {
      std::size_t pos = 0;
      const auto v = std::stoull(s, &pos);
      if (pos == std::string_view(s).size()) return v;
    } catch (const std::exception&) {
    }
  }
  return kFallbackSeed;
}

struct FeatureFlags {
  std::string basis = "category";
  std::string repr = "proportion";
  std::string loops = "on";
  int loop_min = 2;

  FeatureConfig config() const {
    return {basis == "instruction" ? Basis::INSTRUCTION : Basis::CATEGORY,
            repr == "count" ? Representation::COUNT : Representation::PROPORTION, loops == "on", loop_min};
  }
};

inline void add_feature_flags(CLI::App* cmd, FeatureFlags& f) {
  cmd->add_option("--basis", f.basis, "instruction or category")
      ->check(CLI::IsMember({"instruction", "category"}))
      ->capture_default_str();
  cmd->add_option("--repr", f.repr, "count or proportion")
      ->check(CLI::IsMember({"count", "proportion"}))
      ->capture_default_str();
  cmd->add_option("--loops", f.loops, "append loop features: on or off")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  cmd->add_option("--loop-min", f.loop_min, "executions before a site counts as looped")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

struct ModelFlags {
  std::string task = "detect";
  std::string model = "tree";
  std::string kernel = "linear";
  double C = 1.0;
  double alpha = 1.0;

  learn::ModelSpec spec() const {
    learn::ModelSpec s;
    s.kind = *learn::parse_model_kind(model);
    s.kernel.kind = *learn::parse_kernel(kernel);
    s.C = C;
    s.alpha = alpha;
    return s;
  }
};

inline void add_task_flag(CLI::App* cmd, std::string& task) {
  cmd->add_option("--task", task, "detect, type or algo")
      ->check(CLI::IsMember({"detect", "type", "algo"}))
      ->capture_default_str();
}

inline void add_model_flags(CLI::App* cmd, ModelFlags& m) {
  add_task_flag(cmd, m.task);
  cmd->add_option("--model", m.model, "svm, gnb, mnb or tree")
      ->check(CLI::IsMember({"svm", "gnb", "mnb", "tree"}))
      ->capture_default_str();
  cmd->add_option("--kernel", m.kernel, "SVM kernel")
      ->check(CLI::IsMember({"linear", "rbf", "poly", "sigmoid"}))
      ->capture_default_str();
  cmd->add_option("--C", m.C, "SVM box constraint")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--alpha", m.alpha, "MNB smoothing")->check(CLI::PositiveNumber)->capture_default_str();
}

inline Dataset load_dataset(const std::filesystem::path& p) { return parse_dataset(read_file(p)); }

// Rows of the dataset usable for a task; refuses crypto-only tasks on
// NONE-labeled data when `strict`.
inline eval::TaskData require_task_data(const Dataset& ds, eval::Task task, bool strict) {
  if (strict && task != eval::Task::DETECT) {
    for (const auto& e : ds.examples)
      if (!e.label.has_crypto)
        throw SemanticError(std::string(eval::task_name(task)) + " model cannot score '" + e.file +
                            "': it is labeled as containing no crypto");
  }
  auto d = eval::task_data(ds, task);
  if (d.y.empty()) throw SemanticError("dataset has no samples for task " + std::string(eval::task_name(task)));
  return d;
}

inline void emit(const std::string& out_path, const std::string& text, std::ostream& out) {
  if (out_path.empty() || out_path == "-") out << text;
  else write_file_atomic(out_path, text);
}

inline int cmd_corpus_generate(const std::string& dir, std::uint64_t seed, std::size_t vpp, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = generate_corpus(dir, seed, vpp);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out << "traces: " << m.entries.size() - m.failures() << "\nfailures: " << m.failures()
      << "\nfingerprint: " << corpus_fingerprint(m) << "\nseed: " << seed << "\nseconds: " << secs << "\n";
  for (const auto& e : m.entries)
    if (!e.ok) out << "FAILED " << e.file << "\n";
  return m.failures() ? kInternal : kOk;
}

inline int cmd_features_extract(const std::string& corpus, const std::string& out_path, const FeatureFlags& f,
                                bool per_trace, std::ostream& out) {
  const auto cs = load_corpus_stats(corpus, f.loop_min);
  if (per_trace)
    for (std::size_t i = 0; i < cs.entries.size(); ++i)
      out << cs.entries[i].file << " " << cs.entries[i].stats.total << " events " << cs.seconds[i] << " s\n";
  out << "feature set: " << eval::feature_set_name(f.config()) << "\n";
  out << "traces processed: " << cs.entries.size() << "\n";
  out << "average processing time (s): " << cs.mean_seconds() << "\n";
  out << "max processing time (s): " << cs.max_seconds() << "\n";
  out << "total failures: " << cs.failures.size() << "\n";
  for (const auto& fl : cs.failures) out << "failed: " << fl.file << ": " << fl.reason << "\n";
  if (cs.entries.empty()) throw SemanticError("no trace could be processed");
  const auto ds = build_dataset(cs, f.config());
  out << "dimension: " << ds.space.dimension() << "\n";
  write_file_atomic(out_path, dataset_text(ds));
  return kOk;
}

inline int cmd_train(const std::string& dataset, const ModelFlags& mf, std::uint64_t seed, const std::string& out_path,
                     std::ostream& out) {
  const auto ds = load_dataset(dataset);
  const auto task = *eval::parse_task(mf.task);
  const auto d = require_task_data(ds, task, false);
  ModelFile f;
  f.task = task;
  f.seed = seed;
  f.space = ds.space;
  f.manifest_hash = ds.manifest_hash;
  std::visit([&](auto&& m) { f.model = std::move(m); }, learn::train_classifier(mf.spec(), d.x, d.y, d.n_classes));
  write_file_atomic(out_path, model_text(f));
  out << "trained " << mf.spec().name() << " on " << d.y.size() << " samples for task " << mf.task << "\n";
  return kOk;
}

inline void print_prediction(const ModelFile& f, const learn::Prediction& p, std::ostream& out) {
  out << eval::describe_class(f.task, p.label) << "\n";
  const auto classes = eval::task_classes(f.task);
  out << "scores:";
  for (std::size_t c = 0; c < p.scores.size(); ++c) out << " " << classes[c] << "=" << p.scores[c];
  out << "\n";
}

inline int cmd_predict(const std::string& model_path, const std::string& trace_path, const std::string& dataset_path,
                       const FeatureFlags& f, const std::vector<std::string>& given, std::ostream& out) {
  const auto mf = parse_model(read_file(model_path));
  const auto clf = as_classifier(mf.model);
  if (!clf) throw SemanticError("k-means models do not predict labels");
  const auto want = f.config();
  const auto& have = mf.space.config;
  // Only flags given explicitly are compared against the model's space.
  const auto flagged = [&](const char* n) { return std::ranges::find(given, n) != given.end(); };
  if (flagged("--basis") && want.basis != have.basis)
    throw SemanticError("model was trained on " + std::string(basis_name(have.basis)) + " features, not " + f.basis);
  if (flagged("--repr") && want.representation != have.representation)
    throw SemanticError("model was trained on " + std::string(representation_name(have.representation)) +
                        " features, not " + f.repr);
  if (flagged("--loops") && want.include_loops != have.include_loops)
    throw SemanticError(std::string("model was trained with loop features ") + (have.include_loops ? "on" : "off"));
  if (flagged("--loop-min") && want.loop_min != have.loop_min)
    throw SemanticError("model was trained with loop_min " + std::to_string(have.loop_min));

  if (!trace_path.empty()) {
    std::ifstream in(trace_path, std::ios::binary);
    if (!in) throw IoError("cannot open " + trace_path);
    const Trace t = read_trace(in);
    if (mf.task != eval::Task::DETECT && !t.label.has_crypto)
      throw SemanticError(std::string(eval::task_name(mf.task)) + " model cannot score a trace labeled as containing no crypto");
    print_prediction(mf, learn::predict(*clf, extract(t, mf.space)), out);
    return kOk;
  }
  const auto ds = load_dataset(dataset_path);
  if (ds.space != mf.space) throw SemanticError("dataset feature space differs from the model's");
  const auto d = require_task_data(ds, mf.task, true);
  std::vector<int> pred;
  for (std::size_t i = 0; i < d.y.size(); ++i) {
    const auto p = learn::predict(*clf, d.x.row(i));
    pred.push_back(p.label);
    out << ds.examples[d.source[i]].file << " " << eval::describe_class(mf.task, p.label) << "\n";
  }
  const auto m = eval::classification_metrics(d.y, pred, d.n_classes);
  out << "accuracy: " << m.accuracy << "\nmacro_f1: " << m.f1 << "\n";
  return kOk;
}

inline int cmd_crossval(const std::string& dataset, const ModelFlags& mf, std::size_t folds, std::uint64_t seed,
                        const std::string& out_path, std::ostream& out) {
  const auto ds = load_dataset(dataset);
  const auto task = *eval::parse_task(mf.task);
  const auto d = require_task_data(ds, task, false);
  const auto r = eval::cross_validate(d.x, d.y, d.n_classes, mf.spec(), folds, seed);
  nlohmann::json j = eval::cv_json(r);
  j["format_version"] = kFormatVersion;
  j["task"] = mf.task;
  j["model"] = r.model;
  j["folds"] = folds;
  j["fold_assignment"] = "stratified";
  j["seed"] = seed;
  j["manifest_hash"] = ds.manifest_hash;
  j["feature_space"] = to_json(ds.space.config);
  emit(out_path, j.dump(1) + "\n", out);
  return kOk;
}

inline int cmd_cluster(const std::string& dataset, const std::string& task_name, std::size_t k, std::uint64_t seed,
                       const std::string& out_path, const std::string& model_out, std::ostream& out) {
  const auto ds = load_dataset(dataset);
  const auto task = *eval::parse_task(task_name);
  const auto d = require_task_data(ds, task, false);
  const auto model = learn::kmeans_fit(d.x, k, seed);
  nlohmann::json j = eval::cluster_json(eval::cluster_metrics(d.y, model.labels));
  j["format_version"] = kFormatVersion;
  j["task"] = task_name;
  j["k"] = k;
  j["seed"] = seed;
  j["inertia"] = model.inertia;
  j["n_init"] = model.n_init;
  j["max_iter"] = model.max_iter;
  j["rng"] = model.rng;
  j["manifest_hash"] = ds.manifest_hash;
  j["feature_space"] = to_json(ds.space.config);
  if (!model_out.empty()) write_file_atomic(model_out, model_text({task, seed, ds.space, ds.manifest_hash, model}));
  emit(out_path, j.dump(1) + "\n", out);
  return kOk;
}

inline int cmd_report(const std::string& corpus, std::uint64_t seed, const std::string& out_path,
                      const std::string& text_path, std::ostream& out) {
  eval::ExperimentConfig cfg;
  cfg.seed = seed;
  const auto cs = load_corpus_stats(corpus, cfg.primary.loop_min);
  if (!cs.failures.empty()) out << "skipped " << cs.failures.size() << " unreadable or failed traces\n";
  const auto report = eval::run_experiment(cs, cfg);
  const auto text = eval::render_text(report);
  write_file_atomic(out_path, report.dump(1) + "\n");
  if (!text_path.empty()) write_file_atomic(text_path, text);
  out << text;
  return kOk;
}

// Entry point shared by the binary and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Detects and identifies cryptographic code from instruction traces"};
  app.require_subcommand(1);
  std::uint64_t seed = default_seed();

  auto* corpus = app.add_subcommand("corpus", "Trace corpus")->require_subcommand(1);
  auto* gen = corpus->add_subcommand("generate", "Generate the labeled trace corpus");
  std::string gen_out;
  std::size_t vpp = kDefaultVariantsPerProgram;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--seed", seed, "corpus seed (default: $CRYPTOSCOPE_SEED or 42)");
  gen->add_option("--variants-per-program", vpp)->check(CLI::PositiveNumber)->capture_default_str();

  auto* features = app.add_subcommand("features", "Feature extraction")->require_subcommand(1);
  auto* extract_cmd = features->add_subcommand("extract", "Write a .dataset.jsonl from a corpus");
  std::string fx_corpus, fx_out;
  FeatureFlags ff;
  bool per_trace = false;
  extract_cmd->add_option("--corpus", fx_corpus, "corpus directory")->required()->check(CLI::ExistingDirectory);
  extract_cmd->add_option("--out", fx_out, "dataset file")->required();
  add_feature_flags(extract_cmd, ff);
  extract_cmd->add_flag("--per-trace", per_trace, "print the processing time of every trace");

  ModelFlags mflags;
  std::string dataset_path, out_path;

  auto* train = app.add_subcommand("train", "Train a classifier and write .model.json");
  train->add_option("--dataset", dataset_path)->required()->check(CLI::ExistingFile);
  add_model_flags(train, mflags);
  train->add_option("--seed", seed, "seed recorded in the model");
  train->add_option("--out", out_path, "model file")->required();

  auto* predict = app.add_subcommand("predict", "Classify a trace or a dataset with a stored model");
  std::string model_path, trace_path;
  FeatureFlags pf;
  predict->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  auto* trace_opt = predict->add_option("--trace", trace_path)->check(CLI::ExistingFile);
  auto* ds_opt = predict->add_option("--dataset", dataset_path)->check(CLI::ExistingFile);
  trace_opt->excludes(ds_opt);
  add_feature_flags(predict, pf);

  auto* crossval = app.add_subcommand("crossval", "Stratified k-fold cross-validation");
  std::size_t folds = eval::kDefaultFolds;
  ModelFlags cvflags;
  crossval->add_option("--dataset", dataset_path)->required()->check(CLI::ExistingFile);
  add_model_flags(crossval, cvflags);
  crossval->add_option("--folds", folds)->check(CLI::Range(2, 1000))->capture_default_str();
  crossval->add_option("--seed", seed, "fold assignment seed");
  crossval->add_option("--out", out_path, "report file (default: stdout)");

  auto* cluster = app.add_subcommand("cluster", "k-means clustering scored against the labels");
  std::string cl_task = "detect", cl_model;
  std::size_t k = 2;
  cluster->add_option("--dataset", dataset_path)->required()->check(CLI::ExistingFile);
  add_task_flag(cluster, cl_task);
  cluster->add_option("--k", k)->check(CLI::PositiveNumber)->capture_default_str();
  cluster->add_option("--seed", seed);
  cluster->add_option("--out", out_path, "metrics file (default: stdout)");
  cluster->add_option("--save-model", cl_model, "also write the k-means model");

  auto* report = app.add_subcommand("report", "Run the full experiment grid over a corpus");
  std::string rp_corpus, rp_text;
  report->add_option("--corpus", rp_corpus)->required()->check(CLI::ExistingDirectory);
  report->add_option("--out", out_path, "report.json path")->required();
  report->add_option("--text", rp_text, "also write the text tables here");
  report->add_option("--seed", seed, "CV and k-means seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_corpus_generate(gen_out, seed, vpp, out);
    if (extract_cmd->parsed()) return cmd_features_extract(fx_corpus, fx_out, ff, per_trace, out);
    if (train->parsed()) return cmd_train(dataset_path, mflags, seed, out_path, out);
    if (predict->parsed()) {
      if (trace_path.empty() && dataset_path.empty()) {
        err << "predict: one of --trace or --dataset is required\n";
        return kUsage;
      }
      std::vector<std::string> given;
      for (const char* n : {"--basis", "--repr", "--loops", "--loop-min"})
        if (predict->count(n)) given.emplace_back(n);
      return cmd_predict(model_path, trace_path, dataset_path, pf, given, out);
    }
    if (crossval->parsed()) return cmd_crossval(dataset_path, cvflags, folds, seed, out_path, out);
    if (cluster->parsed()) return cmd_cluster(dataset_path, cl_task, k, seed, out_path, cl_model, out);
    if (report->parsed()) return cmd_report(rp_corpus, seed, out_path, rp_text, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kInternal;
  } catch (const VectorMismatch& e) {
    err << "error: " << e.what() << "\n";
    return kInternal;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kSemantic;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

}  // namespace cryptoscope::cli
