#pragma once

#include <stdexcept>
#include <string>

namespace cnas {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input: encodings, checkpoints, oracle files, JSON specs.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed value that violates a domain constraint (index out of range,
// architecture/stage mismatch, bad constructor argument).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// enumerate() refused: the stage's space size exceeds the caller's limit.
class SpaceTooLarge : public Error {
 public:
  using Error::Error;
};

// Policy extension against an incompatible or non-adjacent stage.
class StageMismatch : public Error {
 public:
  using Error::Error;
};

// Architecture does not fit the oracle's declared shape.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

// Invalid curriculum or experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Experiment spec violates the published JSON schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Tabular oracle lookup of an architecture outside the benchmark.
class UnknownArchitecture : public Error {
 public:
  using Error::Error;
};

// Trace files passed to summarize() do not belong to one experiment.
class InconsistentTraces : public Error {
 public:
  using Error::Error;
};

// One or more trials of an experiment failed; message carries their identity.
class TrialError : public Error {
 public:
  using Error::Error;
};

}  // namespace cnas
