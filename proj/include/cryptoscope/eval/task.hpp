#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cryptoscope/dataset.hpp"
#include "cryptoscope/learn/matrix.hpp"

namespace cryptoscope::eval {

// DETECT: crypto vs plain. TYPE: encryption vs hashing. ALGO: which of the six
// algorithms. TYPE and ALGO only see crypto samples.
enum class Task { DETECT, TYPE, ALGO };

inline constexpr Task kAllTasks[] = {Task::DETECT, Task::TYPE, Task::ALGO};

inline std::string_view task_name(Task t) {
  constexpr std::string_view names[] = {"detect", "type", "algo"};
  return names[static_cast<int>(t)];
}

inline std::optional<Task> parse_task(std::string_view s) {
  for (auto t : kAllTasks)
    if (task_name(t) == s) return t;
  return std::nullopt;
}

inline std::vector<std::string> task_classes(Task t) {
  switch (t) {
    case Task::DETECT:
      return {"false", "true"};
    case Task::TYPE:
      return {"ENCRYPTION", "HASHING"};
    case Task::ALGO:
      return {"AES", "RC4", "RSA", "SHA1", "MD5", "DES3"};
  }
  return {};
}

// Class index of a label under a task, or nothing when the task excludes it.
inline std::optional<int> task_class(Task t, const LabelTriple& l) {
  switch (t) {
    case Task::DETECT:
      return l.has_crypto ? 1 : 0;
    case Task::TYPE:
      if (l.crypto_type == CryptoType::NONE) return std::nullopt;
      return l.crypto_type == CryptoType::ENCRYPTION ? 0 : 1;
    case Task::ALGO: {
      if (l.algorithm == Algorithm::NONE) return std::nullopt;
      const auto classes = task_classes(t);
      const auto name = algorithm_name(l.algorithm);
      for (std::size_t i = 0; i < classes.size(); ++i)
        if (classes[i] == name) return static_cast<int>(i);
      return std::nullopt;
    }
  }
  return std::nullopt;
}

// Label text a prediction stands for, in the trace label vocabulary.
inline std::string describe_class(Task t, int c) {
  const auto classes = task_classes(t);
  const std::string& n = classes.at(static_cast<std::size_t>(c));
  switch (t) {
    case Task::DETECT:
      return "has_crypto=" + n;
    case Task::TYPE:
      return "crypto_type=" + n;
    case Task::ALGO:
      return "algorithm=" + n;
  }
  return n;
}

struct TaskData {
  Task task = Task::DETECT;
  std::size_t n_classes = 0;
  learn::Matrix x;
  std::vector<int> y;
  std::vector<std::size_t> source;  // row index into the dataset
};

inline TaskData task_data(const Dataset& ds, Task t) {
  TaskData d;
  d.task = t;
  d.n_classes = task_classes(t).size();
  d.x = learn::Matrix(0, ds.space.dimension());
  for (std::size_t i = 0; i < ds.examples.size(); ++i) {
    const auto c = task_class(t, ds.examples[i].label);
    if (!c) continue;
    d.x.push_row(ds.examples[i].values);
    d.y.push_back(*c);
    d.source.push_back(i);
  }
  return d;
}

}  // namespace cryptoscope::eval
