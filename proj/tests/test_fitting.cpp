#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "sizedep/fitting.hpp"
#include "sizedep/synth.hpp"

using namespace sizedep;

namespace {

BinnedDistribution exact_curve(const GlvParams& p, std::size_t n, int year = 2000)
{
    BinnedDistribution d{year, {}};
    for (double x : synth_thresholds(p.lambda(), n)) {
        const double c = ccdf(p, x);
        if (c < 1.0)
            d.points.push_back({x, c});
    }
    return d;
}

// One year of synthetic data at the given truth, with optional noise.
BinnedDistribution synthetic_year(double alpha, double lambda, std::size_t thresholds,
                                  double noise, std::uint64_t seed)
{
    SynthSpec s;
    s.alpha = alpha;
    s.beta = 0.0;
    s.prefactor = lambda;
    s.populations = {1.0};
    s.thresholds_per_year = thresholds;
    s.noise_level = noise;
    s.seed = seed;
    return generate(s, SynthMode::exact).distributions.front();
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

TEST(LoglogObjective, ZeroAtTruth)
{
    const GlvParams truth(2.0, 1.0);
    BinnedDistribution d{2000, {}};
    for (int i = 0; i < 10; ++i) {
        const double x = std::pow(10.0, -1.0 + 0.3 * i);
        d.points.push_back({x, ccdf(truth, x)});
    }
    EXPECT_LT(loglog_objective(truth, d), 1e-20);
    EXPECT_GT(loglog_objective(GlvParams(2.0, 2.0), d), 0.0);
}

TEST(LoglogObjective, TruthBeatsRandomProbes)
{
    const GlvParams truth(1.74076, 3e-5);
    const auto d = exact_curve(truth, 12);
    const double at_truth = loglog_objective(truth, d);
    std::mt19937_64 rng(17);
    std::normal_distribution<double> jitter(0.0, 0.2);
    for (int i = 0; i < 100; ++i) {
        const GlvParams probe(1.0 + 0.74076 * std::exp(jitter(rng)), 3e-5 * std::exp(jitter(rng)));
        EXPECT_LE(at_truth, loglog_objective(probe, d));
    }
}

TEST(LoglogObjective, IgnoresPointsAtOne)
{
    const GlvParams truth(2.0, 1.0);
    BinnedDistribution d = exact_curve(truth, 8);
    BinnedDistribution with_one = d;
    with_one.points.insert(with_one.points.begin(), TailPoint{1e-6, 1.0});
    EXPECT_EQ(loglog_objective(GlvParams(2.5, 0.7), d),
              loglog_objective(GlvParams(2.5, 0.7), with_one));
}

TEST(FitBoth, RecoversNoiseFreeTruth)
{
    const GlvParams truth(1.74076, 3e-5);
    const auto d = exact_curve(truth, 12);
    const auto r = fit_both(d, FitOptions{});
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.params.alpha() / truth.alpha(), 1.0, 1e-3);
    EXPECT_NEAR(r.params.lambda() / truth.lambda(), 1.0, 1e-3);
    EXPECT_EQ(r.n_points, d.points.size());
    EXPECT_GE(r.n_points, 10u);
    EXPECT_LT(r.objective, 1e-12);
}

TEST(FitBoth, OnePercentNoiseMedianError)
{
    std::vector<double> alpha_err, lambda_err;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto d = synthetic_year(1.74076, 3e-5, 12, 0.01, seed);
        FitOptions o;
        o.seed = seed;
        o.restarts = 4;
        const auto r = fit_both(d, o);
        alpha_err.push_back(std::abs(r.params.alpha() - 1.74076));
        lambda_err.push_back(std::abs(r.params.lambda() / 3e-5 - 1.0));
    }
    EXPECT_LT(median(alpha_err), 0.05);
    EXPECT_LT(median(lambda_err), 0.05);
}

TEST(FitBoth, MinimalFourPoints)
{
    const GlvParams truth(2.2, 1e-3);
    BinnedDistribution d{2000, {}};
    for (double y : {0.5, 1.0, 3.0, 10.0})
        d.points.push_back({y / truth.lambda(), ccdf(truth, y / truth.lambda())});
    const auto r = fit_both(d, FitOptions{});
    EXPECT_TRUE(std::isfinite(r.objective));
    EXPECT_EQ(r.n_points, 4u);
}

TEST(FitBoth, TooFewPoints)
{
    BinnedDistribution d{2000, {{1.0, 1.0}, {2.0, 0.5}, {3.0, 0.3}, {4.0, 0.2}}};
    EXPECT_THROW(fit_both(d, FitOptions{}), invariant_error);
}

TEST(FitBoth, InvalidOptions)
{
    const auto d = exact_curve(GlvParams(2.0, 1.0), 8);
    FitOptions o;
    o.alpha_max = 1.0;
    EXPECT_THROW(fit_both(d, o), domain_error);
    o = {};
    o.restarts = 0;
    EXPECT_THROW(fit_both(d, o), domain_error);
}

TEST(FitBoth, NeverEvaluatesOutsideParameterSpace)
{
    const auto d = synthetic_year(1.3, 2e-4, 12, 0.02, 4);
    double min_alpha = std::numeric_limits<double>::infinity();
    double max_alpha = 0.0;
    double min_lambda = std::numeric_limits<double>::infinity();
    std::size_t calls = 0;
    FitOptions o;
    o.alpha_max = 4.0;
    fit_both(d, o, [&](const GlvParams& p) {
        ++calls;
        min_alpha = std::min(min_alpha, p.alpha());
        max_alpha = std::max(max_alpha, p.alpha());
        min_lambda = std::min(min_lambda, p.lambda());
    });
    EXPECT_GT(calls, 100u);
    EXPECT_GT(min_alpha, 1.0);
    EXPECT_LE(max_alpha, 4.0);
    EXPECT_GT(min_lambda, 0.0);
}

TEST(FitBoth, DeterministicGivenSeed)
{
    const auto d = synthetic_year(1.74076, 3e-5, 12, 0.01, 8);
    FitOptions o;
    o.seed = 123;
    const auto a = fit_both(d, o);
    const auto b = fit_both(d, o);
    EXPECT_EQ(a.params, b.params);
    EXPECT_EQ(a.objective, b.objective);
    EXPECT_EQ(a.n_evals, b.n_evals);
}

TEST(FitBoth, BestObjectiveNonIncreasingInRestarts)
{
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto d = synthetic_year(2.4, 1e-2, 10, 0.05, seed);
        double prev = std::numeric_limits<double>::infinity();
        for (int k = 1; k <= 8; ++k) {
            FitOptions o;
            o.seed = seed;
            o.restarts = k;
            const double f = fit_both(d, o).objective;
            EXPECT_LE(f, prev) << "restarts=" << k;
            prev = f;
        }
    }
}

TEST(FitBoth, ErrorShrinksWithMorePoints)
{
    auto median_error = [](std::size_t points) {
        std::vector<double> errs;
        for (std::uint64_t seed = 0; seed < 15; ++seed) {
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> a(1.3, 3.0), l(-12.0, 0.0);
            const GlvParams truth(a(rng), std::exp(l(rng)));
            FitOptions o;
            o.seed = seed;
            o.restarts = 4;
            const auto r = fit_both(
                synthetic_year(truth.alpha(), truth.lambda(), points, 0.02, seed), o);
            errs.push_back(std::max(std::abs(r.params.alpha() / truth.alpha() - 1.0),
                                    std::abs(r.params.lambda() / truth.lambda() - 1.0)));
        }
        return median(errs);
    };
    const double e8 = median_error(8);
    const double e32 = median_error(32);
    EXPECT_LE(e32, e8);
}

TEST(FitLambda, MatchesStepOneAtSameAlpha)
{
    const auto d = synthetic_year(1.9, 4e-5, 12, 0.01, 21);
    const auto joint = fit_both(d, FitOptions{});
    const auto lam = fit_lambda(d, joint.params.alpha(), FitOptions{});
    EXPECT_TRUE(lam.converged);
    EXPECT_NEAR(lam.params.lambda() / joint.params.lambda(), 1.0, 1e-5);
    EXPECT_LE(lam.objective, joint.objective * (1.0 + 1e-6) + 1e-15);
}

TEST(FitLambda, FindsMinimumFarFromGuess)
{
    const GlvParams truth(1.74076, 3e-5);
    const auto d = exact_curve(truth, 12);
    const auto r = fit_lambda(d, truth.alpha(), FitOptions{}, 3e-5 * 1e5);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.params.lambda() / truth.lambda(), 1.0, 1e-8);
}

TEST(PooledAlpha, PublishedPerYearValues)
{
    const std::vector<double> alphas{1.59043, 1.60112, 1.61717, 1.67562, 1.75147, 1.76187,
                                     1.71051, 1.61152, 1.80999, 1.95683, 1.87374, 1.92885};
    EXPECT_NEAR(pooled_alpha(alphas), 1.74076, 5e-6);
    EXPECT_THROW(pooled_alpha(std::vector<double>{}), domain_error);
}

TEST(TwoStepFit, TwelveYearsAtCommonAlpha)
{
    SynthSpec s;
    s.alpha = 1.8;
    s.beta = 4.365;
    s.populations = geometric_populations(2.65e8, 0.011, 12);
    s.prefactor = SizeScaling::anchored(s.beta, 3e-5, s.populations.front()).prefactor();
    s.noise_level = 0.01;
    s.seed = 5;
    const auto data = generate(s, SynthMode::exact);
    FitOptions o;
    o.seed = 5;
    const auto r = two_step_fit(data.distributions, o);
    ASSERT_EQ(r.step1.size(), 12u);
    ASSERT_EQ(r.step2.size(), 12u);
    EXPECT_NEAR(r.alpha_bar, 1.8, 0.02);
    for (std::size_t i = 0; i < 12; ++i) {
        EXPECT_EQ(r.step2[i].params.alpha(), r.alpha_bar);
        EXPECT_EQ(r.step2[i].year, r.step1[i].year);
        EXPECT_NEAR(r.step2[i].params.lambda() / data.lambdas[i], 1.0, 0.02);
    }
}

TEST(TwoStepFit, DuplicatedYearsGiveIdenticalLambdas)
{
    auto d = synthetic_year(1.74076, 3e-5, 12, 0.01, 2);
    std::vector<BinnedDistribution> ds;
    for (int y = 2000; y < 2004; ++y) {
        d.year = y;
        ds.push_back(d);
    }
    const auto r = two_step_fit(ds, FitOptions{});
    for (const auto& f : r.step2)
        EXPECT_EQ(f.params.lambda(), r.step2.front().params.lambda());
}

TEST(TwoStepFit, Preconditions)
{
    std::vector<BinnedDistribution> one{exact_curve(GlvParams(2.0, 1.0), 8)};
    EXPECT_THROW(two_step_fit(one, FitOptions{}), invariant_error);
}

TEST(TwoStepFit, NoYearConverges)
{
    std::vector<BinnedDistribution> ds{exact_curve(GlvParams(2.0, 1.0), 8, 2000),
                                       exact_curve(GlvParams(2.0, 1.5), 8, 2001)};
    FitOptions o;
    o.max_evals = 10;
    o.restarts = 1;
    EXPECT_THROW(two_step_fit(ds, o), fit_failure);
}

TEST(FixedAlphaFit, SkipsStepOne)
{
    std::vector<BinnedDistribution> ds{exact_curve(GlvParams(1.74076, 3e-5), 12, 2000),
                                       exact_curve(GlvParams(1.74076, 2e-5), 12, 2001)};
    const auto r = fixed_alpha_fit(ds, 1.74076, FitOptions{});
    EXPECT_TRUE(r.step1.empty());
    EXPECT_EQ(r.alpha_bar, 1.74076);
    EXPECT_NEAR(r.step2[0].params.lambda() / 3e-5, 1.0, 1e-8);
    EXPECT_NEAR(r.step2[1].params.lambda() / 2e-5, 1.0, 1e-8);
}
