#pragma once

#include <stdexcept>
#include <string>

namespace dlsm {

// Error taxonomy mirrors the process exit codes: 2 usage, 3 data, 4 numeric.
class Error : public std::runtime_error {
public:
    Error(int code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    int code() const { return code_; }

private:
    int code_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& msg) : Error(2, msg) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(3, msg) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(4, msg) {}
};

} // namespace dlsm
