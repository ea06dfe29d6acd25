#pragma once

#include <stdexcept>
#include <string>

namespace entlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input outside the supported parameter range (bad lambda, negative time, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A functional was requested on a density the capability matrix marks as
/// infinite or undefined (e.g. Fisher information of a raw uniform).
class CapabilityError : public Error {
public:
    using Error::Error;
};

/// Quadrature, normalization or eigensolver failure.
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace entlab
