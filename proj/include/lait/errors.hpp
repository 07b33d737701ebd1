#pragma once

#include <stdexcept>
#include <string>

namespace lait {

// Dimension or shape violation in a numeric operation.
class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

// A softmax row with no allowed entry. LAIT masks never produce this:
// every token attends at least to itself.
class MaskedRowError : public std::invalid_argument {
public:
    explicit MaskedRowError(const std::string& what) : std::invalid_argument(what) {}
};

// Invalid model configuration, or a config/weights mismatch.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed serialized artifact: bad magic, bad version, truncation.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input data (JSONL line, template fields, labels). Carries the
// 1-based line number when the source is a file.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what, long line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

// Training loop hit a non-finite loss.
class TrainingDiverged : public std::runtime_error {
public:
    explicit TrainingDiverged(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lait
