#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dysalign {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unknown phoneme symbol or invalid token value.
class InventoryError : public Error {
public:
    using Error::Error;
};

/// Malformed gold alignment (groups overlapping, boundary outside span, ...).
class AlignmentError : public Error {
public:
    using Error::Error;
};

/// Label encoding that cannot be decoded into groups.
class CodecError : public Error {
public:
    using Error::Error;
};

/// Aligner precondition violated (empty input, level mismatch).
class AlignError : public Error {
public:
    using Error::Error;
};

class OracleError : public Error {
public:
    using Error::Error;
};

class ModelError : public Error {
public:
    using Error::Error;
};

class TrainError : public Error {
public:
    TrainError(std::size_t epoch, const std::string& what)
        : Error("epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}

    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

class EvalError : public Error {
public:
    using Error::Error;
};

/// Bad input data: unreadable file, malformed corpus line, invalid config.
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace dysalign
