#include "circnav/error.hpp"

namespace circnav {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_state: return "invalid-state";
    case ErrorKind::invalid_control: return "invalid-control";
    case ErrorKind::invalid_measurement: return "invalid-measurement";
    case ErrorKind::invalid_depth: return "invalid-depth";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::numerical_failure: return "numerical-failure";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::controller_input: return "controller-input";
    case ErrorKind::schema: return "schema";
    case ErrorKind::empty_window: return "empty-window";
  }
  return "unknown";
}

namespace {

std::string summarize(const std::vector<ConfigError::Issue>& issues) {
  std::string out = "invalid configuration:";
  for (const auto& issue : issues) {
    out += "\n  ";
    out += issue.field;
    out += ": ";
    out += issue.message;
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<Issue> issues)
    : Error(ErrorKind::configuration, summarize(issues)), issues_(std::move(issues)) {}

}  // namespace circnav
