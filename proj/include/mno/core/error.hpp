#pragma once

#include <stdexcept>
#include <string>

namespace mno {

/// Process exit codes shared by every command.
enum class ExitCode : int {
    ok = 0,
    validation = 2,
    numerical = 3,
    io = 4,
};

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

/// Bad configuration or shape mismatch.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ExitCode::validation, what) {}
};

/// Blow-up, non-finite values, degenerate norms.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ExitCode::numerical, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ExitCode::io, what) {}
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw ValidationError(what);
}

}  // namespace mno
