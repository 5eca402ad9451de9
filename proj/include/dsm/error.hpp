#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dsm {

/// Base class for every error raised by the scheduler library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input file or cell could not be parsed. Row and column are 1-based; 0 means
/// "not applicable".
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t row, std::size_t column,
               const std::string& what)
        : Error(format(source, row, column, what)), row_(row), column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(const std::string& source, std::size_t row,
                              std::size_t column, const std::string& what) {
        std::string msg = source;
        if (row > 0) msg += ":" + std::to_string(row);
        if (column > 0) msg += ":" + std::to_string(column);
        return msg + ": " + what;
    }

    std::size_t row_;
    std::size_t column_;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class TopologyError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Raised when an exhaustive enumeration would exceed its size guard.
class GuardError : public Error {
public:
    GuardError(double count, double limit)
        : Error("enumeration guard exceeded: " + std::to_string(count) +
                " candidate schedules > limit " + std::to_string(limit)),
          count_(count) {}

    double count() const noexcept { return count_; }

private:
    double count_;
};

} // namespace dsm
