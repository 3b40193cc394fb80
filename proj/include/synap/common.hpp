#pragma once

#include <numbers>
#include <stdexcept>
#include <string>

namespace synap {

/// Raised when an input lies outside the domain of an operation.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }

}  // namespace synap
