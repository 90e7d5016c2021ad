#pragma once

#include <stdexcept>
#include <string>

namespace rankmerge {

// Raised when input data violates a format or consistency rule
// (bad record, duplicate id, coverage gap, out-of-range value).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace rankmerge
