#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cryptoscope {

// Root of every error raised by the library. Each subclass names one failure
// path so callers (and the CLI exit-code mapping) can tell them apart.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownMnemonic : Error {
  explicit UnknownMnemonic(const std::string& name)
      : Error("unknown mnemonic '" + name + "'"), mnemonic(name) {}
  std::string mnemonic;
};

struct ParseError : Error {
  ParseError(std::size_t line_no, const std::string& what)
      : Error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
  std::size_t line;
};

struct IoError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct EmptyTrace : Error { using Error::Error; };
struct TraceTooLong : Error { using Error::Error; };
struct VectorMismatch : Error { using Error::Error; };

struct FitError : Error { using Error::Error; };
struct ExtractError : Error { using Error::Error; };

struct DimError : Error { using Error::Error; };
struct TrainError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };

struct EvalError : Error { using Error::Error; };

// Inputs that are individually well formed but do not belong together,
// e.g. a model applied to features from a different space.
struct SemanticError : Error { using Error::Error; };

}  // namespace cryptoscope
