#pragma once

#include <stdexcept>
#include <string>

namespace sav {

/// Raised when a run fails numerically (NaN/overflow, singular spectral mode).
class numerical_error : public std::runtime_error {
public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised for malformed configuration input (files, presets, CLI values).
class config_error : public std::runtime_error {
public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace sav
