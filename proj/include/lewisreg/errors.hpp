#pragma once

#include <stdexcept>
#include <string>

namespace lewisreg {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input is structurally valid but numerically degenerate (all-zero matrix,
/// rank-deficient design, too few weighted rows).
class DegenerateInput : public Error {
public:
    using Error::Error;
};

/// A scalar argument lies outside its mathematical domain.
class DomainError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// A derived sampling parameter (u, m, budget) is unusable.
class ParameterError : public Error {
public:
    using Error::Error;
};

class BudgetExceeded : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

} // namespace lewisreg
