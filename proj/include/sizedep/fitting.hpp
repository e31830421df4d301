#pragma once

///
/// \file fitting.hpp
///
/// Two-step estimation of the income density on tail curves.
///
/// Step one fits (alpha, lambda) year by year. The objective is the sum of
/// squared vertical distances between log10 of the model tail probability
/// and log10 of the observed tail fraction, unweighted. Step two fixes alpha at
/// the arithmetic mean of the step-one values and refits lambda alone.
///
/// The two-parameter search runs in (log(alpha - 1), log lambda), so no
/// trial point can leave alpha > 1, lambda > 0. Points whose tail fraction
/// is exactly one are ignored.
///

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sizedep/errors.hpp"
#include "sizedep/ingest.hpp"
#include "sizedep/model.hpp"
#include "sizedep/optimize.hpp"

namespace sizedep {

struct FitOptions {
    double alpha_max = 6.0;
    int restarts = 16;
    double tol = 1e-10;            ///< objective spread at which a simplex run stops
    std::size_t max_evals = 20000; ///< evaluation budget of each simplex run
    std::uint64_t seed = 0;
};

struct FitResult {
    int year = 0;
    GlvParams params{2.0, 1.0};
    double objective = 0.0; ///< sum of squared log10 residuals
    std::size_t n_points = 0;
    bool converged = false;
    std::size_t n_evals = 0;
};

struct TwoStepResult {
    std::vector<FitResult> step1; ///< empty when alpha was fixed by the caller
    double alpha_bar = 0.0;
    std::vector<FitResult> step2;
};

inline void validate(const FitOptions& o)
{
    if (!std::isfinite(o.alpha_max) || !(o.alpha_max > 1.0))
        throw domain_error("FitOptions: alpha_max must be > 1");
    if (o.restarts < 1)
        throw domain_error("FitOptions: restarts must be >= 1");
    if (!(o.tol > 0.0))
        throw domain_error("FitOptions: tol must be > 0");
    if (o.max_evals < 10)
        throw domain_error("FitOptions: max_evals must be >= 10");
}

/// Points that enter the objective: tail fraction strictly below one.
inline std::vector<TailPoint> usable_points(const BinnedDistribution& d)
{
    std::vector<TailPoint> out;
    for (const auto& p : d.points)
        if (p.tail_fraction < 1.0)
            out.push_back(p);
    return out;
}

namespace detail {

constexpr double log10_e = 0.43429448190325182765;

inline double objective_on(const GlvParams& p, std::span<const TailPoint> points)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double model = log_ccdf(p, points[i].threshold);
        if (!std::isfinite(model))
            throw evaluation_error("model tail probability underflows at threshold " +
                                       format_number(points[i].threshold),
                                   i);
        const double r = log10_e * model - std::log10(points[i].tail_fraction);
        sum += r * r;
    }
    return sum;
}

inline std::vector<TailPoint> fit_points(const BinnedDistribution& d)
{
    validate(d);
    auto pts = usable_points(d);
    if (pts.size() < 4)
        throw invariant_error("year " + std::to_string(d.year) + ": " +
                              std::to_string(pts.size()) +
                              " points with tail fraction below one; at least 4 are needed");
    return pts;
}

/// Rough lambda: inverse of the income where the tail crosses one half,
/// interpolated in log-log coordinates.
inline double lambda_guess(std::span<const TailPoint> pts)
{
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].tail_fraction <= 0.5 && pts[i - 1].tail_fraction > 0.5) {
            const double lx0 = std::log(pts[i - 1].threshold), lx1 = std::log(pts[i].threshold);
            const double lc0 = std::log(pts[i - 1].tail_fraction),
                         lc1 = std::log(pts[i].tail_fraction);
            const double t = (std::log(0.5) - lc0) / (lc1 - lc0);
            return std::exp(-(lx0 + t * (lx1 - lx0)));
        }
    }
    double mean_log = 0.0;
    for (const auto& p : pts)
        mean_log += std::log(p.threshold);
    return std::exp(-mean_log / static_cast<double>(pts.size()));
}

inline std::mt19937_64 year_stream(std::uint64_t seed, int year)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(year)};
    return std::mt19937_64(seq);
}

struct NoObserver {
    void operator()(const GlvParams&) const noexcept {}
};

} // namespace detail

/// Sum of squared log10 residuals between the model tail and the data.
inline double loglog_objective(const GlvParams& p, const BinnedDistribution& d)
{
    const auto pts = usable_points(d);
    return detail::objective_on(p, pts);
}

/// Fits alpha and lambda jointly. `observer` sees every parameter pair the
/// search evaluates.
template <class Observer = detail::NoObserver>
FitResult fit_both(const BinnedDistribution& d, const FitOptions& opts, Observer&& observer = {})
{
    validate(opts);
    const auto pts = detail::fit_points(d);
    const double log_am1_max = std::log(opts.alpha_max - 1.0);

    auto objective = [&](const std::array<double, 2>& theta) {
        if (theta[0] > log_am1_max)
            return std::numeric_limits<double>::infinity();
        const double am1 = std::exp(theta[0]);
        const double alpha = 1.0 + am1;
        const double lambda = std::exp(theta[1]);
        if (!(alpha > 1.0) || !(lambda > 0.0) || !std::isfinite(lambda))
            return std::numeric_limits<double>::infinity();
        const GlvParams p(alpha, lambda);
        observer(p);
        try {
            return detail::objective_on(p, pts);
        } catch (const evaluation_error&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    optimize::SimplexOptions simplex;
    simplex.ftol = opts.tol;
    simplex.max_evals = opts.max_evals;

    auto rng = detail::year_stream(opts.seed, d.year);
    const double log_lambda0 = std::log(detail::lambda_guess(pts));
    std::uniform_real_distribution<double> shape_draw(std::log(0.05), log_am1_max);
    std::uniform_real_distribution<double> scale_draw(-2.5, 2.5);

    optimize::SimplexResult<2> best;
    std::size_t evals = 0;
    for (int r = 0; r < opts.restarts; ++r) {
        // Draws happen on every restart so restart r sees the same start
        // regardless of how many follow.
        std::array<double, 2> start{shape_draw(rng), log_lambda0 + scale_draw(rng)};
        if (r == 0)
            start = {std::min(std::log(0.75), log_am1_max - 0.1), log_lambda0};

        auto run = optimize::nelder_mead<2>(objective, start, {0.5, 0.5}, simplex);
        evals += run.evals;
        // Re-seed a small simplex at the optimum until it stops moving.
        for (int polish = 0; polish < 4 && std::isfinite(run.f); ++polish) {
            auto again = optimize::nelder_mead<2>(objective, run.x, {0.05, 0.05}, simplex);
            evals += again.evals;
            const bool improved = again.f < run.f - opts.tol * (1.0 + std::abs(run.f));
            if (again.f <= run.f)
                run = again;
            if (!improved)
                break;
        }
        if (run.f < best.f || (r == 0 && !std::isfinite(best.f)))
            best = run;
    }

    FitResult out;
    out.year = d.year;
    out.n_points = pts.size();
    out.n_evals = evals;
    if (!std::isfinite(best.f)) {
        out.objective = std::numeric_limits<double>::infinity();
        out.converged = false;
        out.params = GlvParams(1.0 + std::exp(std::log(0.75)), std::exp(log_lambda0));
        return out;
    }
    out.params = GlvParams(1.0 + std::exp(best.x[0]), std::exp(best.x[1]));
    out.objective = best.f;
    out.converged = best.converged;
    return out;
}

/// Fits lambda with alpha held fixed: a scan over log lambda in steps of
/// 0.25 to bracket the minimum, then golden-section search. The scan is
/// centred on `lambda_hint`, or on a guess from the data, so without a hint
/// the result depends on the data alone.
inline FitResult fit_lambda(const BinnedDistribution& d, double alpha, const FitOptions& opts,
                            std::optional<double> lambda_hint = std::nullopt)
{
    validate(opts);
    const auto pts = detail::fit_points(d);
    const double center0 = std::log(lambda_hint.value_or(detail::lambda_guess(pts)));
    (void)GlvParams(alpha, 1.0);

    std::size_t evals = 0;
    auto objective = [&](double log_lambda) {
        ++evals;
        const double lambda = std::exp(log_lambda);
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            return std::numeric_limits<double>::infinity();
        try {
            return detail::objective_on(GlvParams(alpha, lambda), pts);
        } catch (const evaluation_error&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    constexpr double step = 0.25;
    constexpr int half_width = 24;
    double center = center0;
    double best_u = center;
    bool interior = false;
    for (int shift = 0; shift < 8 && !interior; ++shift) {
        int best_k = -half_width;
        double best_f = std::numeric_limits<double>::infinity();
        for (int k = -half_width; k <= half_width; ++k) {
            const double v = objective(center + k * step);
            if (v < best_f) {
                best_f = v;
                best_k = k;
            }
        }
        best_u = center + best_k * step;
        interior = std::abs(best_k) < half_width && std::isfinite(best_f);
        center = best_u;
    }

    const auto golden = optimize::golden_section(objective, best_u - step, best_u + step, 1e-11);

    FitResult out;
    out.year = d.year;
    out.params = GlvParams(alpha, std::exp(golden.x));
    out.objective = golden.f;
    out.n_points = pts.size();
    out.converged = interior && golden.converged && std::isfinite(golden.f);
    out.n_evals = evals;
    return out;
}

/// Step two alone: lambda-only fits at a caller-chosen alpha.
inline TwoStepResult fixed_alpha_fit(std::span<const BinnedDistribution> ds, double alpha,
                                     const FitOptions& opts)
{
    if (ds.empty())
        throw invariant_error("fixed_alpha_fit: no distributions");
    TwoStepResult out;
    out.alpha_bar = alpha;
    for (const auto& d : ds)
        out.step2.push_back(fit_lambda(d, alpha, opts));
    if (std::none_of(out.step2.begin(), out.step2.end(),
                     [](const FitResult& r) { return r.converged; }))
        throw fit_failure("lambda fit failed to converge in every year");
    return out;
}

/// Arithmetic mean of alpha over a set of fits.
inline double pooled_alpha(std::span<const double> alphas)
{
    if (alphas.empty())
        throw domain_error("pooled_alpha: empty input");
    double sum = 0.0;
    for (double a : alphas)
        sum += a;
    return sum / static_cast<double>(alphas.size());
}

/// Per-year joint fits, alpha pooled by arithmetic mean over the converged
/// years, then lambda-only refits at the pooled alpha. Years are processed
/// in input order and each draws from its own (seed, year) stream.
inline TwoStepResult two_step_fit(std::span<const BinnedDistribution> ds, const FitOptions& opts)
{
    if (ds.size() < 2)
        throw invariant_error("two_step_fit: at least 2 years are needed, got " +
                              std::to_string(ds.size()));
    TwoStepResult out;
    std::vector<double> alphas;
    for (const auto& d : ds) {
        out.step1.push_back(fit_both(d, opts));
        if (out.step1.back().converged)
            alphas.push_back(out.step1.back().params.alpha());
    }
    if (alphas.empty())
        throw fit_failure("step one failed to converge in every year");
    out.alpha_bar = pooled_alpha(alphas);
    for (const auto& d : ds)
        out.step2.push_back(fit_lambda(d, out.alpha_bar, opts));
    return out;
}

} // namespace sizedep
