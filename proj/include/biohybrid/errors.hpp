#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace biohybrid {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller-supplied argument violates an operation's precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// A configuration (preset, config file, library table) is inconsistent.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A cell state contains non-finite components.
class InvalidStateError : public Error {
public:
    using Error::Error;
};

// Numerical integration produced NaN/Inf.
class DivergenceError : public Error {
public:
    DivergenceError(std::string what, int neuron, double time_ms)
        : Error(std::move(what)), neuron_(neuron), time_ms_(time_ms) {}

    int neuron() const noexcept { return neuron_; }
    double time_ms() const noexcept { return time_ms_; }

private:
    int neuron_;
    double time_ms_;
};

// A curve never reaches any firing probability, so its expected minPreNum is undefined.
class UndefinedExpectationError : public Error {
public:
    using Error::Error;
};

// Malformed binary input. `offset` is the byte position where parsing failed.
class ParseError : public Error {
public:
    enum class Kind { MagicMismatch, Truncated, CountMismatch, Io, Format };

    ParseError(Kind kind, std::string what, std::size_t offset)
        : Error(std::move(what)), kind_(kind), offset_(offset) {}

    Kind kind() const noexcept { return kind_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    Kind kind_;
    std::size_t offset_;
};

}  // namespace biohybrid
