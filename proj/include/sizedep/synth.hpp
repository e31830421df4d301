#pragma once

///
/// \file synth.hpp
///
/// Synthetic size-dependent economies with known ground truth.
///
/// Year t has population P_t, lambda_t = prefactor * P_t^(-beta) and
/// GDP_t = P_t / lambda_t. In exact mode tail fractions come from the model
/// tail (optionally with multiplicative log-normal noise) at thresholds
/// log-spaced over [1e-2 / lambda_t, 1e3 / lambda_t]. In sampled mode they are
/// empirical tail fractions of a sample, at thresholds log-spaced from
/// 1e-1 / lambda_t up to the income exceeded by 1% of the sample, so that
/// every bin keeps a usable count.
///
/// Tail fractions and thresholds are rounded to the 12 significant digits
/// the CSV writers emit, so a generated set and its file round trip are
/// identical. Any point that would then break strict monotonicity (a tie or
/// a zero count) is dropped.
///

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sizedep/errors.hpp"
#include "sizedep/ingest.hpp"
#include "sizedep/model.hpp"

namespace sizedep {

enum class SynthMode { exact, sampled };

struct SynthSpec {
    double alpha = 1.74076;
    double beta = 4.365;
    double prefactor = 1.0;            ///< c in lambda = c * P^(-beta)
    int first_year = 1996;
    std::vector<double> populations;   ///< one per year, consecutive from first_year
    std::size_t samples_per_year = 100000;
    std::size_t thresholds_per_year = 12;
    double noise_level = 0.0;          ///< sigma of the log-normal factor on tail fractions
    std::uint64_t seed = 0;
};

struct SynthData {
    std::vector<BinnedDistribution> distributions;
    std::vector<YearRecord> records;
    std::vector<double> lambdas; ///< ground-truth lambda per year
};

inline void validate(const SynthSpec& s, SynthMode mode)
{
    (void)GlvParams(s.alpha, 1.0);
    (void)SizeScaling(s.beta, s.prefactor);
    if (s.populations.empty())
        throw domain_error("SynthSpec: at least one population is required");
    for (double p : s.populations)
        if (!std::isfinite(p) || !(p > 0.0))
            throw domain_error("SynthSpec: populations must be > 0");
    if (s.thresholds_per_year < 4)
        throw domain_error("SynthSpec: thresholds_per_year must be >= 4");
    if (mode == SynthMode::sampled && s.samples_per_year < 1000)
        throw domain_error("SynthSpec: samples_per_year must be >= 1000 in sampled mode");
    if (!std::isfinite(s.noise_level) || s.noise_level < 0.0)
        throw domain_error("SynthSpec: noise_level must be >= 0");
}

/// Geometric population path P_t = p0 (1 + growth)^t.
inline std::vector<double> geometric_populations(double p0, double growth, std::size_t years)
{
    std::vector<double> out;
    for (std::size_t t = 0; t < years; ++t)
        out.push_back(p0 * std::pow(1.0 + growth, static_cast<double>(t)));
    return out;
}

namespace detail {

// Strictly decreasing, inside (0, 1], rounded to writer precision. The
// lowest threshold of a tie is kept.
inline std::vector<TailPoint> monotone_points(std::vector<TailPoint> pts)
{
    std::vector<TailPoint> out;
    double running = 1.0;
    for (auto p : pts) {
        p.threshold = canonical(p.threshold);
        p.tail_fraction = canonical(std::min(p.tail_fraction, running));
        running = std::min(running, p.tail_fraction);
        if (!(p.tail_fraction > 0.0))
            continue;
        if (!out.empty() && !(p.tail_fraction < out.back().tail_fraction))
            continue;
        if (!out.empty() && !(p.threshold > out.back().threshold))
            continue;
        out.push_back(p);
    }
    return out;
}

inline std::mt19937_64 synth_stream(std::uint64_t seed, int year)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(year), 0x5eedu};
    return std::mt19937_64(seq);
}

} // namespace detail

/// Thresholds log-spaced over [1e-2 / lambda, 1e3 / lambda].
inline std::vector<double> synth_thresholds(double lambda, std::size_t n)
{
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = -2.0 + 5.0 * static_cast<double>(i) / static_cast<double>(n - 1);
        out.push_back(std::pow(10.0, e) / lambda);
    }
    return out;
}

/// Thresholds for a sorted sample: log-spaced over [1e-1 / lambda, x_top]
/// where x_top is exceeded by 1% of the draws (capped at 1e3 / lambda).
inline std::vector<double> sampled_thresholds(double lambda, std::span<const double> sorted,
                                              std::size_t n)
{
    const double lo = 1e-1 / lambda;
    double hi = 1e3 / lambda;
    if (!sorted.empty())
        hi = std::min(hi, sorted[sorted.size() - 1 - sorted.size() / 100]);
    if (!(hi > 2.0 * lo))
        hi = 1e3 / lambda;
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1)));
    return out;
}

inline SynthData generate(const SynthSpec& spec, SynthMode mode)
{
    validate(spec, mode);
    const SizeScaling scaling(spec.beta, spec.prefactor);

    SynthData out;
    for (std::size_t t = 0; t < spec.populations.size(); ++t) {
        const int year = spec.first_year + static_cast<int>(t);
        const double pop = spec.populations[t];
        const double lambda = scaling.lambda_at(pop);
        const GlvParams params(spec.alpha, lambda);
        auto rng = detail::synth_stream(spec.seed, year);

        std::vector<TailPoint> pts;
        if (mode == SynthMode::exact) {
            std::normal_distribution<double> noise(0.0, 1.0);
            for (double x : synth_thresholds(lambda, spec.thresholds_per_year)) {
                double c = ccdf(params, x);
                if (spec.noise_level > 0.0)
                    c *= std::exp(spec.noise_level * noise(rng));
                pts.push_back({x, c});
            }
        } else {
            auto draws = sample(params, rng, spec.samples_per_year);
            std::sort(draws.begin(), draws.end());
            const double n = static_cast<double>(draws.size());
            for (double x : sampled_thresholds(lambda, draws, spec.thresholds_per_year)) {
                const auto above = draws.end() - std::upper_bound(draws.begin(), draws.end(), x);
                pts.push_back({x, static_cast<double>(above) / n});
            }
        }

        BinnedDistribution d{year, detail::monotone_points(std::move(pts))};
        validate(d);
        out.distributions.push_back(std::move(d));
        out.records.push_back({year, pop, pop / lambda});
        out.lambdas.push_back(lambda);
    }
    return out;
}

} // namespace sizedep
