// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace nocmap {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
   public:
    explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

class ParseError : public Error {
   public:
    ParseError(const std::string &msg, std::size_t line_number)
        : Error(msg + " (line " + std::to_string(line_number) + ")"), line(line_number) {}
    std::size_t line;
};

class InsufficientSupportError : public Error {
   public:
    using Error::Error;
};

class NonPositiveSlopeError : public Error {
   public:
    using Error::Error;
};

class EmptyGraphError : public Error {
   public:
    using Error::Error;
};

class NegativeWeightError : public Error {
   public:
    using Error::Error;
};

class NonConvergenceError : public Error {
   public:
    using Error::Error;
};

class UnmappedItemError : public Error {
   public:
    using Error::Error;
};

class PartitionError : public Error {
   public:
    using Error::Error;
};

class TraceMismatchError : public Error {
   public:
    using Error::Error;
};

class InfeasibleError : public Error {
   public:
    using Error::Error;
};

class UnplacedShardError : public Error {
   public:
    using Error::Error;
};

class ConfigError : public Error {
   public:
    using Error::Error;
};

class PipelineError : public Error {
   public:
    PipelineError(const std::string &stage, const std::string &msg)
        : Error("[" + stage + "] " + msg), stage_name(stage) {}
    std::string stage_name;
};

}  // namespace nocmap
