#pragma once

#include <stdexcept>
#include <string>

namespace framepick {

// Raised for invalid arguments, shapes, parameters and infeasible requests.
// The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised for file format and I/O failures. The CLI maps this to exit code 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised by tune_lambda when the requested peak count cannot be reached even
// at the smallest admissible regularization. Carries the best achievable count.
class UnattainableTargetError : public ValidationError {
public:
    UnattainableTargetError(const std::string& msg, int max_achievable)
        : ValidationError(msg), max_achievable_(max_achievable) {}

    int max_achievable() const noexcept { return max_achievable_; }

private:
    int max_achievable_;
};

} // namespace framepick
