#pragma once

///
/// \file scaling.hpp
///
/// Power-law regressions in log10-log10 space, the size-dependency exponent
/// beta of lambda ~ P^(-beta), the allometric prediction GDP ~ P^(1+beta),
/// and the rescaling (data collapse) of tail curves by P^(-beta).
///
/// Mean income is 1/lambda, total income is proportional to P/lambda, and
/// with lambda ~ P^(-beta) that gives GDP ~ P^(1+beta).
///

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sizedep/errors.hpp"
#include "sizedep/ingest.hpp"

namespace sizedep {

struct ScalingFit {
    double exponent = 0.0;      ///< slope in log10-log10 space
    double log_prefactor = 0.0; ///< intercept, log10 of the prefactor
    double r_squared = 0.0;     ///< 1 when the ordinates are constant
    std::vector<double> residuals; ///< log10 y - fitted, per input point
    std::size_t n = 0;
};

/// Ordinary least squares of log10 y on log10 x.
inline ScalingFit powerlaw_fit(std::span<const double> xs, std::span<const double> ys)
{
    if (xs.size() != ys.size())
        throw domain_error("powerlaw_fit: length mismatch");
    if (xs.size() < 2)
        throw domain_error("powerlaw_fit: at least 2 points are needed");
    const std::size_t n = xs.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(xs[i]) || !(xs[i] > 0.0) || !std::isfinite(ys[i]) || !(ys[i] > 0.0))
            throw domain_error("powerlaw_fit: values must be finite and > 0");
        lx[i] = std::log10(xs[i]);
        ly[i] = std::log10(ys[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = lx[i] - mx, dy = ly[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0))
        throw domain_error("powerlaw_fit: degenerate abscissa (all x equal)");

    ScalingFit fit;
    fit.n = n;
    fit.exponent = sxy / sxx;
    fit.log_prefactor = my - fit.exponent * mx;
    fit.residuals.resize(n);
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        fit.residuals[i] = ly[i] - (fit.log_prefactor + fit.exponent * lx[i]);
        ss_res += fit.residuals[i] * fit.residuals[i];
    }
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    return fit;
}

struct PopulationLambda {
    double population;
    double lambda;
};

struct BetaEstimate {
    double beta;
    ScalingFit fit; ///< regression of lambda on population; exponent = -beta
};

/// beta from lambda ~ P^(-beta).
inline BetaEstimate beta_from_lambdas(std::span<const PopulationLambda> records)
{
    if (records.size() < 3)
        throw domain_error("beta_from_lambdas: at least 3 records are needed");
    std::vector<double> ps, ls;
    for (const auto& r : records) {
        ps.push_back(r.population);
        ls.push_back(r.lambda);
    }
    auto fit = powerlaw_fit(ps, ls);
    return {-fit.exponent, std::move(fit)};
}

/// Allometric exponent implied by beta: GDP ~ P^(1+beta).
constexpr double predict_allometry(double beta) noexcept { return 1.0 + beta; }

struct AllometryReport {
    double beta = 0.0;
    double predicted_exponent = 0.0;
    double empirical_exponent = 0.0;
    double relative_error = 0.0; ///< |predicted - empirical| / |empirical|
    ScalingFit gdp_fit;          ///< regression of GDP on population
};

inline double relative_error(double predicted, double empirical)
{
    if (empirical == 0.0)
        throw domain_error("relative_error: empirical exponent is zero");
    return std::abs(predicted - empirical) / std::abs(empirical);
}

inline AllometryReport allometry_report(double beta, std::span<const YearRecord> records)
{
    if (records.size() < 3)
        throw domain_error("allometry_report: at least 3 records are needed");
    std::vector<double> ps, gs;
    for (const auto& r : records) {
        ps.push_back(r.population);
        gs.push_back(r.gdp);
    }
    AllometryReport rep;
    rep.beta = beta;
    rep.predicted_exponent = predict_allometry(beta);
    rep.gdp_fit = powerlaw_fit(ps, gs);
    rep.empirical_exponent = rep.gdp_fit.exponent;
    rep.relative_error = relative_error(rep.predicted_exponent, rep.empirical_exponent);
    return rep;
}

// ---------------------------------------------------------------------------
// Data collapse
// ---------------------------------------------------------------------------

struct RescaledPoint {
    double log10_rescaled; ///< log10(P^(-beta) x)
    double tail_fraction;
};

struct RescaledCurve {
    int year;
    double population;
    std::vector<RescaledPoint> points;
};

struct CollapseResult {
    std::vector<RescaledCurve> curves;
    double score = 0.0; ///< mean across-year variance of log10 tail fraction on the common grid
    double grid_lo = 0.0; ///< log10 bounds of the common grid
    double grid_hi = 0.0;
};

namespace detail {

inline double interpolate_log_tail(const RescaledCurve& c, double ly)
{
    const auto& pts = c.points;
    auto it = std::lower_bound(pts.begin(), pts.end(), ly,
                               [](const RescaledPoint& p, double v) { return p.log10_rescaled < v; });
    if (it == pts.begin())
        return std::log10(it->tail_fraction);
    if (it == pts.end())
        return std::log10(pts.back().tail_fraction);
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double t = (ly - lo.log10_rescaled) / (hi.log10_rescaled - lo.log10_rescaled);
    const double a = std::log10(lo.tail_fraction), b = std::log10(hi.tail_fraction);
    return a + t * (b - a);
}

} // namespace detail

/// Maps each curve's thresholds x -> P^(-beta) x (tail fractions unchanged)
/// and scores how well the curves coincide on a shared log-spaced grid.
inline CollapseResult collapse(std::span<const BinnedDistribution> ds,
                               std::span<const double> populations, double beta,
                               std::size_t grid_points = 64)
{
    if (ds.size() != populations.size())
        throw domain_error("collapse: one population per distribution is required");
    if (ds.empty())
        throw domain_error("collapse: no distributions");
    if (!std::isfinite(beta))
        throw domain_error("collapse: beta must be finite");
    if (grid_points < 2)
        throw domain_error("collapse: grid needs at least 2 points");

    CollapseResult out;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (!(populations[i] > 0.0) || !std::isfinite(populations[i]))
            throw domain_error("collapse: population must be > 0");
        if (ds[i].points.empty())
            throw invariant_error("collapse: year " + std::to_string(ds[i].year) + " has no points");
        const double shift = -beta * std::log10(populations[i]);
        RescaledCurve curve{ds[i].year, populations[i], {}};
        for (const auto& p : ds[i].points)
            curve.points.push_back({std::log10(p.threshold) + shift, p.tail_fraction});
        out.curves.push_back(std::move(curve));
    }
    if (out.curves.size() == 1) {
        out.grid_lo = out.curves[0].points.front().log10_rescaled;
        out.grid_hi = out.curves[0].points.back().log10_rescaled;
        return out;
    }

    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (const auto& c : out.curves) {
        lo = std::max(lo, c.points.front().log10_rescaled);
        hi = std::min(hi, c.points.back().log10_rescaled);
    }
    if (!(hi > lo))
        throw domain_error("collapse: rescaled curves share no common interval (beta = " +
                           format_number(beta) + ")");
    out.grid_lo = lo;
    out.grid_hi = hi;

    const double m = static_cast<double>(out.curves.size());
    double total = 0.0;
    for (std::size_t g = 0; g < grid_points; ++g) {
        const double ly = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid_points - 1);
        double mean = 0.0;
        std::vector<double> vals;
        vals.reserve(out.curves.size());
        for (const auto& c : out.curves) {
            vals.push_back(detail::interpolate_log_tail(c, ly));
            mean += vals.back();
        }
        mean /= m;
        double var = 0.0;
        for (double v : vals)
            var += (v - mean) * (v - mean);
        total += var / m;
    }
    out.score = total / static_cast<double>(grid_points);
    return out;
}

/// Joins distributions to macro records by year, then collapses.
inline CollapseResult collapse(std::span<const BinnedDistribution> ds,
                               std::span<const YearRecord> records, double beta,
                               std::size_t grid_points = 64)
{
    std::map<int, double> pop;
    for (const auto& r : records)
        pop[r.year] = r.population;
    std::vector<double> populations;
    for (const auto& d : ds) {
        auto it = pop.find(d.year);
        if (it == pop.end())
            throw invariant_error("collapse: no population for year " + std::to_string(d.year));
        populations.push_back(it->second);
    }
    return collapse(ds, populations, beta, grid_points);
}

struct BetaScan {
    std::vector<double> betas;
    std::vector<double> scores;
    double best_beta;
    double best_score;
};

/// Collapse score over a grid of beta values.
inline BetaScan scan_collapse(std::span<const BinnedDistribution> ds,
                              std::span<const double> populations, std::span<const double> betas)
{
    if (betas.empty())
        throw domain_error("scan_collapse: empty beta grid");
    BetaScan s{{betas.begin(), betas.end()}, {}, betas[0], std::numeric_limits<double>::infinity()};
    for (double b : betas) {
        double score = std::numeric_limits<double>::infinity();
        try {
            score = collapse(ds, populations, b).score;
        } catch (const domain_error&) {
            // no overlap at this beta
        }
        s.scores.push_back(score);
        if (score < s.best_score) {
            s.best_score = score;
            s.best_beta = b;
        }
    }
    return s;
}

} // namespace sizedep
