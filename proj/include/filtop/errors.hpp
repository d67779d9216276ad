#pragma once

#include <stdexcept>
#include <string>

namespace filtop {

/// Bad inputs: malformed config, dimension mismatch, out-of-range parameter.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: singular system, solver blow-up, divergent training.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem failure: unreadable or unwritable artifact files.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace filtop
