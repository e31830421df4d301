#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "sizedep/errors.hpp"

namespace sizedep::quadrature {

struct Result {
    double value;
    double error_estimate;
    int levels;
};

struct Options {
    double rel_tol = 1e-12;
    int min_level = 3;
    int max_level = 12;
};

/// Integrates f over [lower, inf).
///
/// The half-line is compactified with u = v / (1 + v), v = (x - lower) / scale,
/// and u is integrated with a tanh-sinh rule whose step is halved until two
/// successive estimates agree. In the original variable this places nodes at
/// x = lower + scale * exp(pi sinh t), which resolves both an essential
/// cutoff near `lower` and algebraic tails. `scale` should be the
/// characteristic width of the integrand (1/lambda for the income density).
template <class F>
Result integrate_half_line(F&& f, double lower, double scale, const Options& opts = {})
{
    if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(lower))
        throw domain_error("integrate_half_line: scale must be finite and > 0");

    // exp(pi sinh 6) ~ 1e275; beyond that every node is outside double range.
    constexpr double t_max = 6.0;
    const double log_scale = std::log(scale);

    auto term = [&](double t) -> double {
        const double log_v = std::numbers::pi * std::sinh(t);
        const double v = std::exp(log_scale + log_v);
        if (!std::isfinite(v))
            return 0.0;
        const double x = lower + v;
        const double fx = f(x);
        if (fx == 0.0)
            return 0.0;
        const double weight = v * std::numbers::pi * std::cosh(t);
        const double contribution = fx * weight;
        return std::isfinite(contribution) ? contribution : 0.0;
    };

    double h = 1.0;
    double sum = term(0.0);
    for (int k = 1; k * h <= t_max; ++k)
        sum += term(k * h) + term(-k * h);
    double estimate = sum * h;

    for (int level = 1; level <= opts.max_level; ++level) {
        h *= 0.5;
        double added = 0.0;
        for (int k = 1; k * h <= t_max; k += 2)
            added += term(k * h) + term(-k * h);
        sum += added;
        const double refined = sum * h;
        const double diff = std::abs(refined - estimate);
        estimate = refined;
        if (level >= opts.min_level && diff <= opts.rel_tol * std::abs(refined))
            return {refined, diff, level};
        if (level >= opts.min_level && refined == 0.0 && diff == 0.0)
            return {0.0, 0.0, level};
    }
    throw numerical_error("integrate_half_line: no convergence after " +
                          std::to_string(opts.max_level) + " refinements");
}

/// Integrates f over (0, inf).
template <class F>
Result integrate_positive(F&& f, double scale, const Options& opts = {})
{
    return integrate_half_line(std::forward<F>(f), 0.0, scale, opts);
}

} // namespace sizedep::quadrature
