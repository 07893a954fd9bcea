#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace esv {

// Error taxonomy. ConfigError covers malformed inputs/files (CLI exit 2),
// ComputeError covers failures inside an otherwise valid computation (exit 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ComputeError : public Error {
 public:
  using Error::Error;
};

class InputShapeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class InputDomainError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class ParseError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class UnsupportedModelError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class IoError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class StructureError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class BudgetRefusedError : public ComputeError {
 public:
  using ComputeError::ComputeError;
};

class SingularSystemError : public ComputeError {
 public:
  using ComputeError::ComputeError;
};

class RenderInputError : public ComputeError {
 public:
  using ComputeError::ComputeError;
};

using FeatureVector = std::vector<double>;

inline bool all_finite(const FeatureVector& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

inline void require_finite(const FeatureVector& v, const char* what) {
  if (!all_finite(v)) {
    throw InputDomainError(std::string(what) + ": non-finite entry");
  }
}

// Compact, locale-independent number formatting shared by SVG/CSV writers.
inline std::string fmt_g(double v, int precision = 12) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

inline std::string fmt_px(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace esv
