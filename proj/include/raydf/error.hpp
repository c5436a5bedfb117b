// Copyright 2026 The raydf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace raydf {

/// Base class for all library errors. The category maps onto CLI exit codes.
class Error : public std::runtime_error {
 public:
  enum class Category { Usage, Data, Numeric };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

 private:
  Category category_;
};

/// Invalid arguments or preconditions violated by the caller.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(Category::Usage, what) {}
};

/// Malformed or inconsistent input data (files, meshes, empty sets).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(Category::Data, what) {}
};

/// A numeric procedure could not produce a result (e.g. lost root bracket).
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(Category::Numeric, what) {}
};

}  // namespace raydf
