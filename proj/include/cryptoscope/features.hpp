#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "cryptoscope/error.hpp"
#include "cryptoscope/trace.hpp"

namespace cryptoscope {

enum class Basis : std::uint8_t { INSTRUCTION, CATEGORY };
enum class Representation : std::uint8_t { COUNT, PROPORTION };

inline std::string_view basis_name(Basis b) { return b == Basis::INSTRUCTION ? "instruction" : "category"; }
inline std::string_view representation_name(Representation r) {
  return r == Representation::COUNT ? "count" : "proportion";
}

struct FeatureConfig {
  Basis basis = Basis::CATEGORY;
  Representation representation = Representation::PROPORTION;
  bool include_loops = false;
  int loop_min = 2;

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

inline constexpr std::string_view kLoopPrefix = "loop:";

// Frozen feature layout. Immutable once fitted.
struct FeatureSpace {
  FeatureConfig config;
  std::vector<std::string> vocabulary;

  std::size_t dimension() const { return vocabulary.size(); }
  // Number of leading entries that belong to the instruction/category block.
  std::size_t base_dimension() const {
    return static_cast<std::size_t>(std::ranges::count_if(
        vocabulary, [](const std::string& n) { return !n.starts_with(kLoopPrefix); }));
  }

  friend bool operator==(const FeatureSpace&, const FeatureSpace&) = default;
};

using FeatureVector = std::vector<double>;

// Everything any feature configuration needs from one trace, gathered in a
// single pass: per-mnemonic totals and per-mnemonic executions at looped sites.
struct TraceStats {
  int loop_min = 2;
  std::uint64_t total = 0;
  std::array<std::uint64_t, Mnemonic::table_size()> counts{};
  std::array<std::uint64_t, Mnemonic::table_size()> looped{};
};

inline TraceStats summarize(const Trace& trace, int loop_min) {
  if (trace.events.empty()) throw ExtractError("empty trace " + trace.program_id + "/" + trace.variant_id);
  if (loop_min < 1) throw ExtractError("loop_min must be positive");
  TraceStats st;
  st.loop_min = loop_min;
  st.total = trace.events.size();
  std::unordered_map<std::uint32_t, std::uint32_t> site_counts;
  site_counts.reserve(4096);
  for (const auto& e : trace.events) {
    ++st.counts[e.mnemonic.index()];
    ++site_counts[e.site];
  }
  for (const auto& e : trace.events)
    if (site_counts[e.site] >= static_cast<std::uint32_t>(loop_min)) ++st.looped[e.mnemonic.index()];
  return st;
}

// A site is looped when it executes at least `loop_min` times; the result maps
// each mnemonic to its total executions at looped sites.
inline std::map<std::string, std::uint64_t> loop_profile(const Trace& trace, int loop_min) {
  const auto st = summarize(trace, loop_min);
  std::map<std::string, std::uint64_t> out;
  for (std::size_t i = 0; i < st.looped.size(); ++i)
    if (st.looped[i]) out.emplace(Mnemonic::from_index(static_cast<std::uint16_t>(i)).name(), st.looped[i]);
  return out;
}

// Fraction of LOGICAL and SHIFT events.
inline double bitwise_ratio(const TraceStats& st) {
  std::uint64_t bitwise = 0;
  for (std::size_t i = 0; i < st.counts.size(); ++i)
    if (is_bitwise(Mnemonic::from_index(static_cast<std::uint16_t>(i)).category())) bitwise += st.counts[i];
  return static_cast<double>(bitwise) / static_cast<double>(st.total);
}

inline double bitwise_ratio(const Trace& trace) {
  if (trace.events.empty()) throw ExtractError("empty trace");
  std::size_t bitwise = 0;
  for (const auto& e : trace.events) bitwise += is_bitwise(e.category);
  return static_cast<double>(bitwise) / static_cast<double>(trace.events.size());
}

inline FeatureSpace fit_space(std::span<const TraceStats> stats, const FeatureConfig& config) {
  if (stats.empty()) throw FitError("cannot fit a feature space on zero traces");
  if (config.loop_min < 1) throw FitError("loop_min must be positive");
  FeatureSpace space{config, {}};
  const std::size_t n = Mnemonic::table_size();
  if (config.basis == Basis::CATEGORY) {
    for (auto name : kCategoryNames) space.vocabulary.emplace_back(name);
  } else {
    // Table order is lexicographic, so scanning it yields a sorted vocabulary.
    for (std::size_t i = 0; i < n; ++i)
      if (std::ranges::any_of(stats, [&](const TraceStats& s) { return s.counts[i] > 0; }))
        space.vocabulary.emplace_back(Mnemonic::from_index(static_cast<std::uint16_t>(i)).name());
  }
  if (config.include_loops) {
    for (std::size_t i = 0; i < n; ++i)
      if (std::ranges::any_of(stats, [&](const TraceStats& s) { return s.looped[i] > 0; }))
        space.vocabulary.push_back(std::string(kLoopPrefix) +
                                   std::string(Mnemonic::from_index(static_cast<std::uint16_t>(i)).name()));
  }
  return space;
}

inline FeatureSpace fit_space(std::span<const Trace> traces, const FeatureConfig& config) {
  if (traces.empty()) throw FitError("cannot fit a feature space on zero traces");
  std::vector<TraceStats> stats;
  stats.reserve(traces.size());
  for (const auto& t : traces) stats.push_back(summarize(t, config.loop_min));
  return fit_space(stats, config);
}

inline FeatureVector extract(const TraceStats& st, const FeatureSpace& space) {
  if (st.total == 0) throw ExtractError("empty trace");
  if (space.config.include_loops && st.loop_min != space.config.loop_min)
    throw ExtractError("trace stats were gathered with a different loop_min");
  const bool prop = space.config.representation == Representation::PROPORTION;
  const double denom = static_cast<double>(st.total);
  std::array<std::uint64_t, kCategoryCount> cat{};
  if (space.config.basis == Basis::CATEGORY)
    for (std::size_t i = 0; i < st.counts.size(); ++i)
      cat[static_cast<std::size_t>(Mnemonic::from_index(static_cast<std::uint16_t>(i)).category())] += st.counts[i];

  FeatureVector v;
  v.reserve(space.dimension());
  for (const auto& name : space.vocabulary) {
    std::uint64_t count = 0;
    bool loop = false;
    if (name.starts_with(kLoopPrefix)) {
      loop = true;
      count = st.looped[Mnemonic(std::string_view(name).substr(kLoopPrefix.size())).index()];
    } else if (space.config.basis == Basis::CATEGORY) {
      const auto c = parse_category(name);
      if (!c) throw ExtractError("bad category feature '" + name + "'");
      count = cat[static_cast<std::size_t>(*c)];
    } else {
      count = st.counts[Mnemonic(name).index()];
    }
    // Loop features stay in count units under both representations.
    v.push_back(prop && !loop ? static_cast<double>(count) / denom : static_cast<double>(count));
  }
  return v;
}

inline FeatureVector extract(const Trace& trace, const FeatureSpace& space) {
  return extract(summarize(trace, space.config.loop_min), space);
}

inline nlohmann::json to_json(const FeatureConfig& c) {
  return {{"basis", std::string(basis_name(c.basis))},
          {"representation", std::string(representation_name(c.representation))},
          {"include_loops", c.include_loops},
          {"loop_min", c.loop_min}};
}

inline FeatureConfig feature_config_from_json(const nlohmann::json& j) {
  FeatureConfig c;
  const auto b = j.at("basis").get<std::string>();
  const auto r = j.at("representation").get<std::string>();
  if (b != "instruction" && b != "category") throw FormatError("bad basis '" + b + "'");
  if (r != "count" && r != "proportion") throw FormatError("bad representation '" + r + "'");
  c.basis = b == "instruction" ? Basis::INSTRUCTION : Basis::CATEGORY;
  c.representation = r == "count" ? Representation::COUNT : Representation::PROPORTION;
  c.include_loops = j.at("include_loops").get<bool>();
  c.loop_min = j.at("loop_min").get<int>();
  return c;
}

inline nlohmann::json to_json(const FeatureSpace& s) {
  return {{"config", to_json(s.config)}, {"vocabulary", s.vocabulary}};
}

inline FeatureSpace feature_space_from_json(const nlohmann::json& j) {
  FeatureSpace s;
  s.config = feature_config_from_json(j.at("config"));
  s.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
  return s;
}

}  // namespace cryptoscope
