#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace biharm {

/// Raised when an iteration or linear solve fails to reach its tolerance.
/// Precondition violations use std::invalid_argument / std::domain_error.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, double achieved = 0.0)
        : std::runtime_error(what), achieved_(achieved) {}

    /// Best residual (or error measure) reached before giving up.
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

namespace detail {
inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}
} // namespace detail

} // namespace biharm
