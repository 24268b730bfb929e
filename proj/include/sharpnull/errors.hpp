#ifndef SHARPNULL_ERRORS_HPP
#define SHARPNULL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sharpnull {

// Thrown when a numerical routine (quadrature, optimizer, calibration)
// fails to converge or leaves its validity regime.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent configuration (bad field values, impossible
// geometry such as sidebands falling off the histogram).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem / stream failures.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace sharpnull

#endif
