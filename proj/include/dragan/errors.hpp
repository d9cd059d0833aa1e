#pragma once

#include <stdexcept>
#include <string>

namespace dragan {

/// Base of every error the library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Tensor or matrix extents that do not line up.
struct DimensionError : Error {
    using Error::Error;
};

/// Invalid layer, optimizer or run configuration.
struct ConfigError : Error {
    using Error::Error;
};

/// A caller broke a documented precondition (non-scalar loss, non-finite input, ...).
struct ContractError : Error {
    using Error::Error;
};

/// Malformed input file. Carries the 1-based row and column when known.
struct ParseError : Error {
    ParseError(const std::string& what, std::size_t row = 0, std::size_t column = 0)
        : Error(what), row(row), column(column) {}
    std::size_t row;
    std::size_t column;
};

/// Label column that cannot be mapped to a binary target.
struct LabelError : Error {
    using Error::Error;
};

/// Dataset missing one of the two classes (or emptied by an operation).
struct DegenerateDatasetError : Error {
    using Error::Error;
};

/// A class is too small to be dealt into the requested number of folds.
struct StratificationError : Error {
    using Error::Error;
};

/// Oversampler needs at least two minority rows.
struct InsufficientMinorityError : Error {
    using Error::Error;
};

/// Metric undefined for the input (single class, constant series, ...).
struct UndefinedMetricError : Error {
    using Error::Error;
};

/// Argument outside the mathematical domain of a closed form.
struct DomainError : Error {
    using Error::Error;
};

/// BatchNorm asked to normalize a batch of one in train mode.
struct DegenerateBatchError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace dragan
