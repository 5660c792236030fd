#pragma once

#include <stdexcept>
#include <string>

namespace annosim {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad input data, configuration, or argument values. CLI exit code 2.
struct ValidationError : Error {
    using Error::Error;
};

// File system and stream failures. CLI exit code 1.
struct IoError : Error {
    using Error::Error;
};

// A sweep cell failed mid-run; message carries the cell coordinates.
// CLI exit code 3.
struct CellError : Error {
    using Error::Error;
};

}  // namespace annosim
