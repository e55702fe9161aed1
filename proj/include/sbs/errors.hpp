#pragma once

#include <stdexcept>
#include <string>

namespace sbs {

// Error classes map 1:1 onto CLI exit codes (see tools/).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric blow-up inside the simulator or a training loop.
struct DivergenceError : std::runtime_error {
    DivergenceError(const std::string& msg, long index)
        : std::runtime_error(msg + " (index " + std::to_string(index) + ")"), index(index) {}
    long index;
};

struct ContractViolation : std::logic_error {
    explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace sbs
