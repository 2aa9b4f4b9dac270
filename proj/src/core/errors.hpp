#pragma once

#include <stdexcept>
#include <string>

namespace foldgate {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Filesystem-level failure: cannot open, read, write or rename.
struct IoError : Error {
    using Error::Error;
};

/// File contents do not match the expected format (NIfTI header, JSON schema).
struct FormatError : Error {
    using Error::Error;
};

/// Inputs violate a documented contract (geometry mismatch, bad config,
/// out-of-range value, missing input file).
struct ValidationError : Error {
    using Error::Error;
};

} // namespace foldgate
