#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace posds {

/// Raised when an input violates a hypothesis the construction depends on
/// (smallness of the perturbation, positivity of the measure, ...). The
/// condition name is kept separately so callers can report it verbatim.
class HypothesisViolation : public std::runtime_error {
public:
    HypothesisViolation(std::string condition, const std::string& detail)
        : std::runtime_error(condition + ": " + detail), condition_(std::move(condition)) {}

    const std::string& condition() const noexcept { return condition_; }

private:
    std::string condition_;
};

} // namespace posds
