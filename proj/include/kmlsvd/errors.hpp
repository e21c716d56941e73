#pragma once

#include <stdexcept>
#include <string>

namespace kmlsvd {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Dimension, shape or mode-index inconsistency between operands.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Invalid value: non-finite entries, bad parameters, empty inputs.
class ValueError : public Error {
public:
    using Error::Error;
};

/// Malformed file: bad magic, header or manifest.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Payload length disagrees with the declared shape.
class LengthError : public Error {
public:
    using Error::Error;
};

/// A materialized object would exceed the configured entry budget.
class BudgetError : public Error {
public:
    using Error::Error;
};

/// Requested rank exceeds what the input supports.
class RankError : public Error {
public:
    using Error::Error;
};

/// Numerical precondition violated: asymmetric, indefinite or singular
/// input, or weights not realizable in the feature range.
class NumericsError : public Error {
public:
    using Error::Error;
};

}  // namespace kmlsvd
