// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

#pragma once

#include <stdexcept>
#include <string>

namespace scd {

/// Bad user-supplied configuration (flags, files, incompatible modes).
/// The CLI maps this family, together with std::invalid_argument, to exit 2.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// A broken internal invariant (session divergence, impossible state).
/// The CLI maps this to exit 3.
class internal_error : public std::runtime_error {
 public:
  explicit internal_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace scd
