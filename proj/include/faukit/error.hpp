// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace faukit {

/// Base of every error the library throws. The CLI maps subclasses onto
/// process exit codes (see ExitCode in cli.hpp).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad invocation: unknown subcommand, unknown config key, malformed flag.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Vector/tensor length disagrees with what the consumer expects.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Value outside its mathematical domain (probability not in [0,1], ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Inconsistent or incomplete configuration (rules, generator, experiment).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed file on disk: bad magic, version, truncation, bad JSON schema.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Input data that cannot be processed (empty sets, missing labels, missing files).
class InputError : public Error {
public:
    using Error::Error;
};

/// Too few elements to satisfy a partitioning request.
class SizeError : public Error {
public:
    using Error::Error;
};

/// Non-finite values reached a numeric routine.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace faukit
