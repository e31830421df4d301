#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

namespace sizedep::optimize {

struct SimplexOptions {
    double ftol = 1e-10;         ///< stop when f(worst) - f(best) <= ftol * (1 + |f(best)|) ...
    double xtol = 1e-8;          ///< ... and every vertex is within xtol of the best (max norm)
    std::size_t max_evals = 20000;
};

template <std::size_t N>
struct SimplexResult {
    std::array<double, N> x{};
    double f = std::numeric_limits<double>::infinity();
    std::size_t evals = 0;
    bool converged = false;
};

/// Nelder-Mead downhill simplex (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). Non-finite objective values are treated as +inf.
template <std::size_t N, class F>
SimplexResult<N> nelder_mead(F&& f, const std::array<double, N>& start,
                             const std::array<double, N>& step, const SimplexOptions& opts = {})
{
    using Point = std::array<double, N>;
    constexpr double inf = std::numeric_limits<double>::infinity();

    SimplexResult<N> result;
    auto eval = [&](const Point& p) {
        ++result.evals;
        const double v = f(p);
        return std::isfinite(v) ? v : inf;
    };

    std::array<Point, N + 1> x;
    std::array<double, N + 1> fx;
    x[0] = start;
    for (std::size_t i = 0; i < N; ++i) {
        x[i + 1] = start;
        x[i + 1][i] += step[i];
    }
    for (std::size_t j = 0; j <= N; ++j)
        fx[j] = eval(x[j]);

    std::array<std::size_t, N + 1> order;
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
        std::array<Point, N + 1> xs;
        std::array<double, N + 1> fs;
        for (std::size_t k = 0; k <= N; ++k) {
            xs[k] = x[order[k]];
            fs[k] = fx[order[k]];
        }
        x = xs;
        fx = fs;
    };

    auto along = [](const Point& from, const Point& to, double t) {
        Point p;
        for (std::size_t i = 0; i < N; ++i)
            p[i] = from[i] + t * (to[i] - from[i]);
        return p;
    };

    while (result.evals < opts.max_evals) {
        sort_simplex();

        double diameter = 0.0;
        for (std::size_t j = 1; j <= N; ++j)
            for (std::size_t i = 0; i < N; ++i)
                diameter = std::max(diameter, std::abs(x[j][i] - x[0][i]));
        if (std::isfinite(fx[N]) && fx[N] - fx[0] <= opts.ftol * (1.0 + std::abs(fx[0])) &&
            diameter <= opts.xtol) {
            result.converged = true;
            break;
        }

        Point centroid{};
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t i = 0; i < N; ++i)
                centroid[i] += x[j][i] / static_cast<double>(N);

        const Point xr = along(centroid, x[N], -1.0);
        const double fr = eval(xr);
        if (fr < fx[0]) {
            const Point xe = along(centroid, x[N], -2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                x[N] = xe;
                fx[N] = fe;
            } else {
                x[N] = xr;
                fx[N] = fr;
            }
            continue;
        }
        if (fr < fx[N - 1]) {
            x[N] = xr;
            fx[N] = fr;
            continue;
        }
        // Outside contraction if the reflection beat the worst, inside otherwise.
        const bool outside = fr < fx[N];
        const Point xc = outside ? along(centroid, xr, 0.5) : along(centroid, x[N], 0.5);
        const double fc = eval(xc);
        if (fc < (outside ? fr : fx[N])) {
            x[N] = xc;
            fx[N] = fc;
            continue;
        }
        for (std::size_t j = 1; j <= N; ++j) {
            x[j] = along(x[0], x[j], 0.5);
            fx[j] = eval(x[j]);
        }
    }

    sort_simplex();
    result.x = x[0];
    result.f = fx[0];
    return result;
}

struct ScalarResult {
    double x;
    double f;
    std::size_t evals;
    bool converged;
};

/// Golden-section search for a minimum of f on [a, b]; stops when the
/// bracket is narrower than `xtol`.
template <class F>
ScalarResult golden_section(F&& f, double a, double b, double xtol, std::size_t max_evals = 500)
{
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c);
    double fd = f(d);
    std::size_t evals = 2;
    while (std::abs(b - a) > xtol && evals < max_evals) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
        ++evals;
    }
    if (fc <= fd)
        return {c, fc, evals, std::abs(b - a) <= xtol};
    return {d, fd, evals, std::abs(b - a) <= xtol};
}

} // namespace sizedep::optimize
