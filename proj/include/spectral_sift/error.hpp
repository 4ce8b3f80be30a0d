#pragma once

#include <stdexcept>
#include <string>

namespace spectral_sift {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad caller input: wrong shapes, out-of-range parameters, missing classes.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent file content (ENVI headers, model files, configs).
class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Data that makes a fit numerically meaningless (rank collapse, zero variance,
/// singular systems).
class DegenerateData : public Error {
public:
    using Error::Error;
};

/// A fit ran to completion but did not meet its quality criterion.
class ModelQualityError : public Error {
public:
    using Error::Error;
};

} // namespace spectral_sift
