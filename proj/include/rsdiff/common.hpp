#pragma once

#include <stdexcept>
#include <string>

namespace rsdiff {

/// Thrown when a combinatorial or memory guard trips (CLI maps this to exit 3).
class GuardError : public std::runtime_error {
public:
    explicit GuardError(const std::string& what) : std::runtime_error(what) {}
};

constexpr double kPi = 3.14159265358979323846;

} // namespace rsdiff
