#pragma once

#include <stdexcept>
#include <string>

namespace rnnls {

/// Operand shapes do not agree (matvec, gram, sketch application, ...).
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input violates a documented precondition (non-finite entry, bad tolerance, r out of range).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A solver could not produce a solution.
class SolverError : public std::runtime_error {
public:
    enum class Kind { max_iterations, rank_deficient, retries_exhausted };

    SolverError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// A sketch plan kept no rows; the caller should redraw.
class EmptySketchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be read, parsed, or written. Parse errors carry the 1-based line number.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what, long line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    long line() const noexcept { return line_; }

private:
    long line_;
};

}  // namespace rnnls
