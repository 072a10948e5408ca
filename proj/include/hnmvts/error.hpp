#pragma once

#include <stdexcept>
#include <string>

namespace hnmvts {

/// Operand shapes do not agree. The message names both shapes.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A documented precondition was violated by the caller.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// CSV ingestion failure; carries the offending row/column in the message.
class LoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A series segment is too short to produce a single (lookback, horizon) pair.
class WindowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// NaN or infinity where finite numbers are required.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed checkpoint or config file.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hnmvts
