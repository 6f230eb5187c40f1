// SPDX-License-Identifier: MIT
#pragma once

#include <stdexcept>
#include <string>

namespace jdexp {

/// Base class of every domain error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    [[nodiscard]] virtual const char* kind() const noexcept { return "domain_error"; }
};

class InvalidArgument : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "invalid_argument"; }
};

/// Total variance of a Gaussian bucket is not strictly positive.
class DegenerateVariance : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "degenerate_variance"; }
};

class UnsupportedOrder : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "unsupported_order"; }
};

/// Curves handed to the recursion do not share one breakpoint grid.
class GridMismatch : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "grid_mismatch"; }
};

/// Implied volatility inversion failed; carries the admissible price band.
class NoSolution : public Error {
public:
    NoSolution(const std::string& what, double lower, double upper)
        : Error(what), lower_(lower), upper_(upper) {}
    [[nodiscard]] const char* kind() const noexcept override { return "no_solution"; }
    [[nodiscard]] double lower() const noexcept { return lower_; }
    [[nodiscard]] double upper() const noexcept { return upper_; }

private:
    double lower_;
    double upper_;
};

class BudgetExceeded : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "budget_exceeded"; }
};

/// Input document does not follow the expected schema; `path` names the field.
class SchemaError : public Error {
public:
    SchemaError(std::string path, const std::string& what)
        : Error(path + ": " + what), path_(std::move(path)) {}
    [[nodiscard]] const char* kind() const noexcept override { return "schema_error"; }
    [[nodiscard]] const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace jdexp
