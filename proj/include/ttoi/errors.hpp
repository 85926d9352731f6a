#pragma once

#include <stdexcept>
#include <string>

namespace ttoi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller passed an argument outside the documented domain.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Non-finite input or a numerical routine that could not produce a result.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Malformed file contents.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Failure to open, read or write a file.
class IoError : public Error {
public:
    using Error::Error;
};

/// An update was applied to a TTOI state of the wrong parity.
class StateError : public Error {
public:
    using Error::Error;
};

/// A requested size does not fit into addressable memory.
class ResourceError : public Error {
public:
    using Error::Error;
};

}  // namespace ttoi
