#pragma once

#include <stdexcept>
#include <string>

namespace socialscope {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller passed a value outside an operation's domain.
class ParameterError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration, lexicon, or pattern file. Raised at load time.
class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class IngestError : public Error {
public:
    using Error::Error;
};

/// A tail model could not be fitted; the message names the model.
class FitError : public Error {
public:
    using Error::Error;
};

/// A statistic has no defined value for the given input.
class UndefinedError : public Error {
public:
    using Error::Error;
};

}  // namespace socialscope
