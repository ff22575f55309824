#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace coalmine {

/// Invalid parameter or configuration. `key()` names the offending field when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, std::string detail, const std::string& context = {})
      : std::runtime_error((context.empty() ? "" : context + ": ") + (key.empty() ? "" : key + ": ") +
                           detail),
        key_(std::move(key)),
        detail_(std::move(detail)) {}

  const std::string& key() const noexcept { return key_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string key_;
  std::string detail_;
};

/// An iterative procedure hit its hard iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& message, std::vector<std::string> recent)
      : std::runtime_error(message), recent_(std::move(recent)) {}

  /// Most recent states visited before giving up (serialized, oldest first).
  const std::vector<std::string>& recent_states() const noexcept { return recent_; }

 private:
  std::vector<std::string> recent_;
};

}  // namespace coalmine
