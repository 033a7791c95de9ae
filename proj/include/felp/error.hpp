#pragma once

#include <stdexcept>
#include <string>

namespace felp {

enum class ErrorKind {
    InvalidInput,
    NoDominantDirection,
    EmptyDescriptor,
    BasisEstimationFailed,
    InvalidBasis,
    InvalidManifest,
    Io,
    Config,
};

const char* to_string(ErrorKind kind) noexcept;

/// Library-wide exception; `kind()` lets callers branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace felp
