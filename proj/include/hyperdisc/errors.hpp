#pragma once

#include <stdexcept>
#include <string>

namespace hyperdisc {

/// Numeric routine failed to reach its requested tolerance.
class numeric_error : public std::runtime_error {
public:
    numeric_error(const std::string& what, double achieved_tolerance)
        : std::runtime_error(what), achieved_tolerance_(achieved_tolerance) {}

    double achieved_tolerance() const { return achieved_tolerance_; }

private:
    double achieved_tolerance_;
};

/// Incompatible configuration (e.g. a prior whose support misses the ladder).
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hyperdisc
