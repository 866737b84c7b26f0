#ifndef PCE_COMMON_HPP
#define PCE_COMMON_HPP

#include <span>
#include <stdexcept>
#include <string>

namespace pce {

inline constexpr const char* kVersion = "0.1.0";

// Error hierarchy shared by the whole library. The C API maps each type to a
// status code, the CLI maps them to exit codes (2 for config-ish, 3 otherwise).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

class InfeasibleError : public Error {
public:
    InfeasibleError(const std::string& what, double best_violation)
        : Error(what), best_violation_(best_violation) {}
    double best_violation() const { return best_violation_; }

private:
    double best_violation_ = 0.0;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class RunError : public Error {
public:
    using Error::Error;
};

using VectorView = std::span<const double>;

}  // namespace pce

#endif
