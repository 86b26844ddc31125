#pragma once

#include <stdexcept>
#include <string>

namespace mulharm {

// Base for every error raised by the library. Callers that only care about
// "the request was rejected" catch this one.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite samples, empty cubes, malformed CSV, unknown symbol families.
class RejectedInput : public Error {
public:
    using Error::Error;
};

// Exponent outside the range an operation accepts (p <= 0, delta <= 0, ...).
class InvalidExponent : public Error {
public:
    using Error::Error;
};

// Two objects that must share a grid (or a frequency lattice) do not.
class GridMismatch : public Error {
public:
    using Error::Error;
};

// Index outside what the torus can represent (dilate larger than the domain).
class OutOfRange : public Error {
public:
    using Error::Error;
};

// Experiment configuration violates a constraint checked at load time.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace mulharm
