#ifndef ESSEG_ERRORS_HPP
#define ESSEG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace esseg {

// Incompatible tensor/image dimensions.
struct shape_error : std::runtime_error {
    explicit shape_error(const std::string& what) : std::runtime_error(what) {}
};

// Out-of-range or inconsistent configuration values.
struct param_error : std::runtime_error {
    explicit param_error(const std::string& what) : std::runtime_error(what) {}
};

// NaN/Inf encountered, degenerate variance, or an iteration that cannot proceed.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// File not readable/writable or malformed content.
struct io_error : std::runtime_error {
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace esseg

#endif
