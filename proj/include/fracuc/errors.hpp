#pragma once

#include <stdexcept>
#include <string>

namespace fracuc {

// Malformed or inconsistent user data (files, case counts, series contents).
struct input_error : std::runtime_error {
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// Bad run configuration (flags, missing metadata such as population or dates).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown inside an algorithm (degenerate covariance, failed solve).
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fracuc
