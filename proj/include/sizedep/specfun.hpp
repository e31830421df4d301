#pragma once

///
/// \file specfun.hpp
///
/// Gamma and incomplete gamma functions.
///
/// The incomplete gamma functions use the power series for the lower
/// function when z < a + 1 and a modified Lentz continued fraction for the
/// upper function otherwise. Both branches carry the z^a e^{-z} prefactor in
/// log space, so the regularized forms never divide two large numbers.
///
/// Accuracy targets: ln_gamma to ~1e-14 relative (as exp) on [0.1, 50];
/// incomplete gamma to 1e-10 relative for a in [1, 10], z in [0, 100].
/// Outside that window the functions still compute but nothing is promised.
///

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "sizedep/errors.hpp"

namespace sizedep::specfun {

namespace detail {

inline void require_shape(double a, const char* fn)
{
    if (!std::isfinite(a) || !(a > 0.0))
        throw domain_error(std::string(fn) + ": shape must be finite and > 0, got " +
                           std::to_string(a));
}

inline void require_arg(double z, const char* fn)
{
    if (!std::isfinite(z) || z < 0.0)
        throw domain_error(std::string(fn) + ": argument must be finite and >= 0, got " +
                           std::to_string(z));
}

// Lanczos approximation, g = 7, n = 9.
inline double lanczos_ln_gamma(double a)
{
    static constexpr std::array<double, 9> coef = {
        0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
        771.32342877765313,      -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
    constexpr double g = 7.0;

    if (a < 0.5) {
        // Reflection: Gamma(a) Gamma(1 - a) = pi / sin(pi a).
        return std::log(std::numbers::pi / std::sin(std::numbers::pi * a)) -
               lanczos_ln_gamma(1.0 - a);
    }
    const double z = a - 1.0;
    double sum = coef[0];
    for (std::size_t i = 1; i < coef.size(); ++i)
        sum += coef[i] / (z + static_cast<double>(i));
    const double t = z + g + 0.5;
    return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(sum);
}

constexpr int max_iterations = 100000;
constexpr double series_eps = std::numeric_limits<double>::epsilon();
constexpr double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();

// sum_{n>=0} z^n / ((a+1)(a+2)...(a+n)); lower gamma = z^a e^{-z} / a * sum.
inline double lower_series_sum(double a, double z)
{
    double term = 1.0;
    double sum = 1.0;
    double ap = a;
    for (int n = 1; n < max_iterations; ++n) {
        ap += 1.0;
        term *= z / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * series_eps)
            break;
    }
    return sum;
}

// Continued fraction for Gamma(a,z) e^{z} z^{-a} (modified Lentz).
inline double upper_continued_fraction(double a, double z)
{
    double b = z + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < max_iterations; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny)
            d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < series_eps)
            break;
    }
    return h;
}

inline bool use_series(double a, double z) { return z < a + 1.0; }

} // namespace detail

/// ln Gamma(a) for a > 0.
inline double ln_gamma(double a)
{
    detail::require_shape(a, "ln_gamma");
    return detail::lanczos_ln_gamma(a);
}

/// Upper incomplete gamma Gamma(a, z) = int_z^inf t^{a-1} e^{-t} dt.
inline double upper_incomplete_gamma(double a, double z)
{
    detail::require_shape(a, "upper_incomplete_gamma");
    detail::require_arg(z, "upper_incomplete_gamma");
    if (z == 0.0)
        return std::exp(detail::lanczos_ln_gamma(a));
    const double log_prefix = a * std::log(z) - z;
    if (detail::use_series(a, z)) {
        const double lower = std::exp(log_prefix) / a * detail::lower_series_sum(a, z);
        return std::exp(detail::lanczos_ln_gamma(a)) - lower;
    }
    return std::exp(log_prefix) * detail::upper_continued_fraction(a, z);
}

/// ln P(a, z), the log of the regularized lower incomplete gamma function.
/// Finite for every z > 0 even when P itself would underflow.
inline double log_regularized_p(double a, double z)
{
    detail::require_shape(a, "log_regularized_p");
    detail::require_arg(z, "log_regularized_p");
    if (z == 0.0)
        return -std::numeric_limits<double>::infinity();
    const double log_prefix = a * std::log(z) - z;
    if (detail::use_series(a, z))
        return log_prefix - detail::lanczos_ln_gamma(a + 1.0) +
               std::log(detail::lower_series_sum(a, z));
    const double q = std::exp(log_prefix - detail::lanczos_ln_gamma(a)) *
                     detail::upper_continued_fraction(a, z);
    return std::log1p(-q);
}

/// Regularized lower incomplete gamma P(a, z) = 1 - Q(a, z).
inline double regularized_p(double a, double z)
{
    detail::require_shape(a, "regularized_p");
    detail::require_arg(z, "regularized_p");
    if (z == 0.0)
        return 0.0;
    const double log_prefix = a * std::log(z) - z;
    if (detail::use_series(a, z))
        return std::exp(log_prefix - detail::lanczos_ln_gamma(a + 1.0)) *
               detail::lower_series_sum(a, z);
    return 1.0 - std::exp(log_prefix - detail::lanczos_ln_gamma(a)) *
                     detail::upper_continued_fraction(a, z);
}

/// Regularized upper incomplete gamma Q(a, z) = Gamma(a, z) / Gamma(a).
inline double regularized_q(double a, double z)
{
    detail::require_shape(a, "regularized_q");
    detail::require_arg(z, "regularized_q");
    if (z == 0.0)
        return 1.0;
    const double log_prefix = a * std::log(z) - z;
    if (detail::use_series(a, z))
        return 1.0 - std::exp(log_prefix - detail::lanczos_ln_gamma(a + 1.0)) *
                         detail::lower_series_sum(a, z);
    return std::exp(log_prefix - detail::lanczos_ln_gamma(a)) *
           detail::upper_continued_fraction(a, z);
}

} // namespace sizedep::specfun
