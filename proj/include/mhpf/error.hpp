#pragma once

#include <stdexcept>
#include <string>

namespace mhpf {

/// Raised when an argument violates an operation's precondition.
class invalid_input : public std::invalid_argument {
public:
    explicit invalid_input(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a model cannot be constructed from otherwise valid data.
class construction_error : public std::runtime_error {
public:
    explicit construction_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mhpf
