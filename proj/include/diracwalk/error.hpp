#pragma once

#include <stdexcept>
#include <string>

namespace dqw {

/// Raised when a configuration violates a documented bound (grid size,
/// defect separation, coin angle range, ...). The CLI maps it to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

}  // namespace dqw
