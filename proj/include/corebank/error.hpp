#pragma once

#include <stdexcept>
#include <string>

namespace corebank {

// Base for every error raised by the library. Callers that only care about
// "something in corebank failed" can catch this one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class EmptyBank : public Error {
public:
    EmptyBank() : Error("memory bank is empty") {}
    using Error::Error;
};

class DimMismatch : public Error {
public:
    DimMismatch(std::size_t expected, std::size_t got)
        : Error("dimension mismatch: expected " + std::to_string(expected) +
                ", got " + std::to_string(got)) {}
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace corebank
