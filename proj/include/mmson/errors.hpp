#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mmson {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A configuration value violates a module precondition.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// The Poisson draw produced no base stations.
class EmptyNetworkError : public Error {
public:
    EmptyNetworkError() : Error("empty network: deployment produced 0 base stations") {}
};

/// The clustering protocol did not settle within its virtual-time budget.
class ConvergenceError : public Error {
public:
    ConvergenceError(std::string what, std::vector<int> unclustered)
        : Error(std::move(what)), unclustered_(std::move(unclustered)) {}

    const std::vector<int>& unclustered() const noexcept { return unclustered_; }

private:
    std::vector<int> unclustered_;
};

/// A node state machine received input it has no transition for.
class ProtocolError : public Error {
public:
    using Error::Error;
};

}  // namespace mmson
