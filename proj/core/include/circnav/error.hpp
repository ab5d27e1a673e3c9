#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace circnav {

enum class ErrorKind {
  invalid_state,
  invalid_control,
  invalid_measurement,
  invalid_depth,
  configuration,
  numerical_failure,
  precondition,
  controller_input,
  schema,
  empty_window,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Config validation failure carrying every offending field path.
class ConfigError : public Error {
 public:
  struct Issue {
    std::string field;
    std::string message;
  };

  explicit ConfigError(std::vector<Issue> issues);

  const std::vector<Issue>& issues() const noexcept { return issues_; }

 private:
  std::vector<Issue> issues_;
};

}  // namespace circnav
