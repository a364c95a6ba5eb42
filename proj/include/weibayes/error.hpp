#pragma once

#include <stdexcept>
#include <string>

namespace weibayes {

/// Input rejected before any computation ran. The CLI maps these to exit 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation started but could not produce a result. CLI exit 2.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IngestionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EstimationError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

class BootstrapError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

class SamplerError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

class DiagnosticError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

class AggregationError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

}  // namespace weibayes
