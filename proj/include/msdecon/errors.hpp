#pragma once

#include <stdexcept>
#include <string>

namespace msdecon {

//! Base class for all library errors. The CLI maps the concrete type to an
//! exit code, so throw the most specific one that applies.
class error : public std::runtime_error {
public:
  explicit error(const std::string& what)
    : std::runtime_error(what)
  {
  }
};

//! Invalid or inconsistent configuration: bad parameters, unsupported model
//! combinations, malformed scenarios. CLI exit code 2.
class config_error : public error {
public:
  using error::error;
};

//! Quantile table does not belong to the scenario being analyzed
//! (scenario hash mismatch, missing alpha). CLI exit code 3.
class calibration_error : public error {
public:
  using error::error;
};

//! Malformed input file. CLI exit code 4.
class parse_error : public error {
public:
  using error::error;
};

//! Grid or spectral resolution too coarse for the requested computation
//! (aliasing detected, scale below grid feasibility). CLI exit code 5.
class resolution_error : public error {
public:
  using error::error;
};

//! Input violates a numerical precondition (e.g. a grid function that does
//! not decay at its ends). CLI exit code 2.
class precondition_error : public config_error {
public:
  using config_error::config_error;
};

} // namespace msdecon
