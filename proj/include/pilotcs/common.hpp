// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------
// Shared scalar types, error classes and seeded random helpers.

#ifndef PILOTCS_COMMON_HPP
#define PILOTCS_COMMON_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace pilotcs
{

using cplx = std::complex<double>;
using Rng = std::mt19937_64;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cplx kJ{0.0, 1.0};

/// Input is structurally valid but numerically unusable (zero channel, zero column, ...).
class DegenerateInputError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A dense materialization was requested above the documented memory cap.
class CapacityError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite loss or gradient during optimization.
class NumericalError : public std::runtime_error
{
public:
    NumericalError(const std::string &what, long iteration)
        : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration)
    {
    }
    long iteration() const noexcept { return iteration_; }

private:
    long iteration_;
};

/// Malformed experiment configuration; carries the offending key.
class ConfigError : public std::runtime_error
{
public:
    ConfigError(const std::string &key, const std::string &what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(key)
    {
    }
    const std::string &key() const noexcept { return key_; }

private:
    std::string key_;
};

/// CN(0, variance): independent real and imaginary parts with variance / 2 each.
inline cplx complex_normal(Rng &rng, double variance)
{
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

/// SplitMix64 finalizer, used to derive independent child seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace pilotcs

#endif
