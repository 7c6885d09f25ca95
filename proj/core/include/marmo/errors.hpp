// Copyright 2026 Marmokit Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace marmo {

/// Bad or missing input data: unreadable files, malformed manifests,
/// dimension mismatches, labels out of range.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numeric failure during computation: divergence, non-finite activations,
/// degenerate filters.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace marmo
