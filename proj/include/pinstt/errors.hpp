#pragma once

#include <stdexcept>
#include <string>

namespace pinstt {

/// Scenario or model file violates the documented schema or binary layout.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// A domain invariant does not hold (bad radius, set not contained, ...).
class InvariantError : public std::runtime_error {
public:
    explicit InvariantError(const std::string& what) : std::runtime_error(what) {}
};

/// A numeric quantity became non-finite where the algorithm requires finiteness.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pinstt
