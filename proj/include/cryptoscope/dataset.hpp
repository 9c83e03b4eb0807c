#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cryptoscope/features.hpp"
#include "cryptoscope/tracegen.hpp"
#include "cryptoscope/util.hpp"

namespace cryptoscope {

inline constexpr int kFormatVersion = 1;

// Hash of the manifest bytes; identifies a corpus in every derived artifact.
inline std::string corpus_fingerprint(const CorpusManifest& m) { return hex64(fnv1a64(manifest_text(m))); }

struct StatsEntry {
  std::string file;
  std::string program_id;
  LabelTriple label;
  TraceStats stats;
};

struct ExtractionFailure {
  std::string file;
  std::string reason;
};

// Per-trace summaries of a whole corpus plus the bookkeeping of the pass that
// produced them.
struct CorpusStats {
  std::string fingerprint;
  std::optional<std::string> seed;
  int loop_min = 2;
  std::vector<StatsEntry> entries;
  std::vector<ExtractionFailure> failures;
  std::vector<double> seconds;  // per successfully processed trace
  std::uint64_t max_events = 0;

  double mean_seconds() const {
    double s = 0;
    for (double v : seconds) s += v;
    return seconds.empty() ? 0.0 : s / static_cast<double>(seconds.size());
  }
  double max_seconds() const {
    double m = 0;
    for (double v : seconds) m = std::max(m, v);
    return m;
  }
};

// Reads every trace the manifest marks OK. A trace that fails to read or
// summarize is recorded as a failure and skipped; generator failures are
// recorded too.
inline CorpusStats load_corpus_stats(const std::filesystem::path& dir, int loop_min = 2) {
  const auto manifest = load_manifest(dir);
  CorpusStats cs;
  cs.fingerprint = corpus_fingerprint(manifest);
  cs.loop_min = loop_min;
  for (const auto& e : manifest.entries) {
    if (!e.ok) {
      cs.failures.push_back({e.file, "generation failed (trace too long)"});
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    try {
      std::ifstream in(dir / e.file, std::ios::binary);
      if (!in) throw IoError("cannot open " + (dir / e.file).string());
      const Trace t = read_trace(in);
      if (t.label != e.label) throw FormatError("trace label disagrees with manifest");
      if (!cs.seed) {
        if (auto it = t.meta.find("seed"); it != t.meta.end()) cs.seed = it->second;
      }
      StatsEntry se{e.file, e.program_id, t.label, summarize(t, loop_min)};
      cs.max_events = std::max(cs.max_events, se.stats.total);
      cs.entries.push_back(std::move(se));
    } catch (const Error& err) {
      cs.failures.push_back({e.file, err.what()});
      continue;
    }
    cs.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return cs;
}

// Same summaries as generating a corpus and loading it back, without the
// disk round trip.
inline CorpusStats generate_corpus_stats(std::uint64_t seed, std::size_t variants_per_program = kDefaultVariantsPerProgram,
                                         int loop_min = 2) {
  require_vectors();
  CorpusManifest manifest;
  CorpusStats cs;
  cs.loop_min = loop_min;
  cs.seed = std::to_string(seed);
  for_each_sample(seed, variants_per_program, [&](Sample& s) {
    manifest.entries.push_back(s.entry);
    if (!s.trace) {
      cs.failures.push_back({s.entry.file, "generation failed (trace too long)"});
      return;
    }
    const auto t0 = std::chrono::steady_clock::now();
    StatsEntry se{s.entry.file, s.entry.program_id, s.entry.label, summarize(*s.trace, loop_min)};
    cs.max_events = std::max(cs.max_events, se.stats.total);
    cs.entries.push_back(std::move(se));
    cs.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  });
  cs.fingerprint = corpus_fingerprint(manifest);
  return cs;
}

struct LabeledExample {
  std::string file;
  LabelTriple label;
  FeatureVector values;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

struct Dataset {
  FeatureSpace space;
  std::string manifest_hash;
  std::optional<std::string> seed;
  std::vector<LabeledExample> examples;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

inline Dataset build_dataset(const CorpusStats& cs, const FeatureConfig& config) {
  if (cs.entries.empty()) throw FitError("no traces to build a dataset from");
  if (config.loop_min != cs.loop_min) throw FitError("corpus was summarized with a different loop_min");
  std::vector<TraceStats> stats;
  stats.reserve(cs.entries.size());
  for (const auto& e : cs.entries) stats.push_back(e.stats);
  Dataset ds;
  ds.space = fit_space(stats, config);
  ds.manifest_hash = cs.fingerprint;
  ds.seed = cs.seed;
  for (const auto& e : cs.entries) ds.examples.push_back({e.file, e.label, extract(e.stats, ds.space)});
  return ds;
}

inline nlohmann::json dataset_header(const Dataset& ds) {
  nlohmann::json h = {{"format_version", kFormatVersion},
                      {"space", to_json(ds.space)},
                      {"manifest_hash", ds.manifest_hash}};
  h["seed"] = ds.seed ? nlohmann::json(*ds.seed) : nlohmann::json(nullptr);
  return h;
}

inline std::string dataset_text(const Dataset& ds) {
  std::string out = dataset_header(ds).dump() + "\n";
  for (const auto& e : ds.examples)
    out += nlohmann::json{{"file", e.file}, {"label", format_label(e.label)}, {"values", e.values}}.dump() + "\n";
  return out;
}

inline Dataset parse_dataset(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  Dataset ds;
  try {
    if (!std::getline(in, line)) throw FormatError("empty dataset file");
    ++line_no;
    const auto h = nlohmann::json::parse(line);
    if (h.at("format_version").get<int>() != kFormatVersion) throw FormatError("unsupported dataset format_version");
    ds.space = feature_space_from_json(h.at("space"));
    ds.manifest_hash = h.value("manifest_hash", "");
    if (h.contains("seed") && !h["seed"].is_null()) ds.seed = h["seed"].get<std::string>();
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      const auto label = parse_label(j.at("label").get<std::string>());
      if (!label) throw FormatError("line " + std::to_string(line_no) + ": bad label");
      LabeledExample e{j.at("file").get<std::string>(), *label, j.at("values").get<FeatureVector>()};
      if (e.values.size() != ds.space.dimension())
        throw FormatError("line " + std::to_string(line_no) + ": vector length differs from the space dimension");
      ds.examples.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError("dataset line " + std::to_string(line_no) + ": " + ex.what());
  }
  return ds;
}

}  // namespace cryptoscope
