#pragma once

#include <stdexcept>
#include <string>

namespace avp {

// Raised for malformed or inconsistent input data (files, schemas, labels).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a computation produces or encounters non-finite values.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace avp
