#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssmap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model violates a structural invariant (bad levels, missing slot, ...).
class ModelError : public Error {
public:
    using Error::Error;
};

/// Arithmetic produced a non-finite value.
class NumericError : public Error {
public:
    using Error::Error;
};

/// An enumeration guard was exceeded.
class TooLarge : public Error {
public:
    using Error::Error;
};

class MarginTooLarge : public Error {
public:
    MarginTooLarge(std::size_t var, const std::string& what) : Error(what), var_(var) {}
    std::size_t var() const noexcept { return var_; }

private:
    std::size_t var_;
};

class ThresholdMismatch : public Error {
public:
    ThresholdMismatch(std::size_t var, std::size_t found, std::size_t expected, const std::string& what)
        : Error(what), var_(var), found_(found), expected_(expected)
    {
    }
    std::size_t var() const noexcept { return var_; }
    std::size_t found() const noexcept { return found_; }
    std::size_t expected() const noexcept { return expected_; }

private:
    std::size_t var_;
    std::size_t found_;
    std::size_t expected_;
};

/// A Hill term's threshold is not one of the declared thresholds of its variable.
class UndeclaredThreshold : public Error {
public:
    UndeclaredThreshold(std::size_t equation, std::size_t var, double threshold, const std::string& what)
        : Error(what), equation_(equation), var_(var), threshold_(threshold)
    {
    }
    std::size_t equation() const noexcept { return equation_; }
    std::size_t var() const noexcept { return var_; }
    double threshold() const noexcept { return threshold_; }

private:
    std::size_t equation_;
    std::size_t var_;
    double threshold_;
};

class DivergedOutsideCube : public Error {
public:
    using Error::Error;
};

} // namespace ssmap
