#pragma once

#include <stdexcept>
#include <string>

namespace isac {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

class EmulationError : public Error {
public:
    using Error::Error;
};

class TilingError : public Error {
public:
    using Error::Error;
};

class DegenerateTargetError : public Error {
public:
    using Error::Error;
};

}  // namespace isac
