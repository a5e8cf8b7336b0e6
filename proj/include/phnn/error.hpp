#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace phnn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Vector or matrix shapes that do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A domain invariant was violated (bad config value, malformed dataset, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Integration or training produced non-finite or runaway values.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// File contents could not be parsed or do not match the expected schema.
class FormatError : public Error {
public:
    using Error::Error;
};

/// The least-squares regressor does not determine every unknown.
///
/// `null_space` holds an orthonormal basis (one column per unidentifiable
/// direction) in the coordinates of the unknowns.
class RankDeficiencyError : public Error {
public:
    RankDeficiencyError(const std::string& what, Eigen::MatrixXd null_space)
        : Error(what), null_space_(std::move(null_space)) {}

    const Eigen::MatrixXd& null_space() const noexcept { return null_space_; }

private:
    Eigen::MatrixXd null_space_;
};

namespace detail {

inline void require_size(Eigen::Index actual, Eigen::Index expected, const char* what) {
    if (actual != expected) {
        throw DimensionError(std::string(what) + ": expected length " + std::to_string(expected) +
                             ", got " + std::to_string(actual));
    }
}

}  // namespace detail

}  // namespace phnn
