// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace hyperscar {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A problem size exceeds what the chosen code path supports.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// A lattice builder was asked for an impossible geometry.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// A caller violated a documented precondition (dimension mismatch, bad window).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Tower extraction or the quadratic fit had too little usable data.
class FitError : public Error {
public:
    using Error::Error;
};

/// An iterative numerical method failed to reach its tolerance.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// An experiment configuration file is malformed.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace hyperscar
