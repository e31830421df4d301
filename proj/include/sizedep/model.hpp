#pragma once

///
/// \file model.hpp
///
/// Generalized Lotka-Volterra income distribution with a scale factor:
///
///   f(x) = lambda (alpha-1)^alpha / Gamma(alpha) * exp(-(alpha-1)/(lambda x)) / (lambda x)^(1+alpha)
///
/// It is a scale family: f(x; alpha, lambda) = lambda g(lambda x; alpha) where
/// g is the unit-scale density with mean one, so the mean income is 1/lambda.
/// The tail probability P(X > x) is the regularized lower incomplete gamma
/// P(alpha, (alpha-1)/(lambda x)) = 1 - Q(alpha, (alpha-1)/(lambda x)).
///

#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sizedep/errors.hpp"
#include "sizedep/quadrature.hpp"
#include "sizedep/specfun.hpp"

namespace sizedep {

/// Shape (Pareto exponent) and scale factor of the income density.
class GlvParams {
public:
    GlvParams(double alpha, double lambda) : alpha_(alpha), lambda_(lambda)
    {
        if (!std::isfinite(alpha) || !(alpha > 1.0))
            throw domain_error("GlvParams: alpha must be finite and > 1, got " +
                               std::to_string(alpha));
        if (!std::isfinite(lambda) || !(lambda > 0.0))
            throw domain_error("GlvParams: lambda must be finite and > 0, got " +
                               std::to_string(lambda));
    }

    double alpha() const noexcept { return alpha_; }
    double lambda() const noexcept { return lambda_; }

    friend bool operator==(const GlvParams&, const GlvParams&) = default;

private:
    double alpha_;
    double lambda_;
};

/// lambda = prefactor * P^(-beta).
class SizeScaling {
public:
    SizeScaling(double beta, double prefactor) : beta_(beta), prefactor_(prefactor)
    {
        if (!std::isfinite(beta))
            throw domain_error("SizeScaling: beta must be finite");
        if (!std::isfinite(prefactor) || !(prefactor > 0.0))
            throw domain_error("SizeScaling: prefactor must be finite and > 0");
    }

    /// Prefactor that puts lambda at `lambda_ref` when the population is `population_ref`.
    static SizeScaling anchored(double beta, double lambda_ref, double population_ref)
    {
        if (!(lambda_ref > 0.0) || !(population_ref > 0.0))
            throw domain_error("SizeScaling::anchored: reference values must be > 0");
        return {beta, std::exp(std::log(lambda_ref) + beta * std::log(population_ref))};
    }

    double beta() const noexcept { return beta_; }
    double prefactor() const noexcept { return prefactor_; }

    double lambda_at(double population) const
    {
        if (!std::isfinite(population) || !(population > 0.0))
            throw domain_error("SizeScaling::lambda_at: population must be > 0");
        return std::exp(std::log(prefactor_) - beta_ * std::log(population));
    }

private:
    double beta_;
    double prefactor_;
};

namespace detail {

inline void require_income(double x, const char* fn)
{
    if (!std::isfinite(x) || !(x > 0.0))
        throw domain_error(std::string(fn) + ": income must be finite and > 0, got " +
                           std::to_string(x));
}

// log of (alpha-1)^alpha / Gamma(alpha)
inline double log_glv_norm(double alpha)
{
    return alpha * std::log(alpha - 1.0) - specfun::ln_gamma(alpha);
}

} // namespace detail

inline double log_pdf(const GlvParams& p, double x)
{
    detail::require_income(x, "log_pdf");
    const double a = p.alpha();
    const double y = p.lambda() * x;
    return std::log(p.lambda()) + detail::log_glv_norm(a) - (a - 1.0) / y -
           (1.0 + a) * std::log(y);
}

inline double pdf(const GlvParams& p, double x) { return std::exp(log_pdf(p, x)); }

/// ln P(income > x). Stays finite deep in the tail where the probability underflows.
inline double log_ccdf(const GlvParams& p, double x)
{
    detail::require_income(x, "log_ccdf");
    const double z = (p.alpha() - 1.0) / (p.lambda() * x);
    if (!std::isfinite(z))
        return 0.0;
    return specfun::log_regularized_p(p.alpha(), z);
}

/// P(income > x).
inline double ccdf(const GlvParams& p, double x)
{
    detail::require_income(x, "ccdf");
    const double z = (p.alpha() - 1.0) / (p.lambda() * x);
    if (!std::isfinite(z))
        return 1.0;
    return specfun::regularized_p(p.alpha(), z);
}

inline double mean_income(const GlvParams& p) { return 1.0 / p.lambda(); }

/// Draws n incomes. A Gamma(alpha, 1) variate G gives y = (alpha-1)/G, an
/// inverse-gamma variate with unit mean, and x = y / lambda.
template <std::uniform_random_bit_generator Rng>
std::vector<double> sample(const GlvParams& p, Rng& rng, std::size_t n)
{
    std::gamma_distribution<double> gamma(p.alpha(), 1.0);
    std::vector<double> out;
    out.reserve(n);
    const double shift = p.alpha() - 1.0;
    while (out.size() < n) {
        const double g = gamma(rng);
        if (!(g > 0.0))
            continue;
        out.push_back(shift / g / p.lambda());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Size-rescaled family f(x) = s g(s x), s = P^(-beta)
// ---------------------------------------------------------------------------

/// A size-independent density g on (0, inf).
template <class K>
concept DensityKernel = requires(const K& k, double y) {
    { k.density(y) } -> std::convertible_to<double>;
    { k.scale() } -> std::convertible_to<double>;
};

/// Kernels that also know their mean analytically.
template <class K>
concept KernelWithMean = DensityKernel<K> && requires(const K& k) {
    { k.mean() } -> std::convertible_to<double>;
};

/// Unit-scale income density with shape alpha (mean 1).
class GlvKernel {
public:
    explicit GlvKernel(double alpha) : params_(alpha, 1.0) {}
    double density(double y) const { return pdf(params_, y); }
    double scale() const noexcept { return 1.0; }
    double mean() const noexcept { return 1.0; }
    double alpha() const noexcept { return params_.alpha(); }

private:
    GlvParams params_;
};

/// g(y) = e^{-y}.
struct ExponentialKernel {
    double density(double y) const { return std::exp(-y); }
    double scale() const noexcept { return 1.0; }
    double mean() const noexcept { return 1.0; }
};

/// Type-erased kernel for densities supplied at run time.
class FunctionKernel {
public:
    explicit FunctionKernel(std::function<double(double)> density, double scale = 1.0)
        : density_(std::move(density)), scale_(scale)
    {
        if (!density_)
            throw domain_error("FunctionKernel: empty density");
        if (!(scale > 0.0))
            throw domain_error("FunctionKernel: scale must be > 0");
    }
    double density(double y) const { return density_(y); }
    double scale() const noexcept { return scale_; }

private:
    std::function<double(double)> density_;
    double scale_;
};

namespace detail {

inline double size_factor(double beta, double population)
{
    if (!std::isfinite(population) || !(population > 0.0))
        throw domain_error("population must be finite and > 0");
    if (!std::isfinite(beta))
        throw domain_error("beta must be finite");
    return std::exp(-beta * std::log(population));
}

} // namespace detail

/// P^(-beta) g(P^(-beta) x).
template <DensityKernel K>
double rescaled_pdf(double beta, double population, const K& kernel, double x)
{
    detail::require_income(x, "rescaled_pdf");
    const double s = detail::size_factor(beta, population);
    return s * kernel.density(s * x);
}

/// Mean of the rescaled density, by quadrature over (0, inf).
template <DensityKernel K>
double mean_of_rescaled(double beta, double population, const K& kernel,
                        const quadrature::Options& opts = {})
{
    const double s = detail::size_factor(beta, population);
    auto integrand = [&](double x) { return x * s * kernel.density(s * x); };
    return quadrature::integrate_positive(integrand, kernel.scale() / s, opts).value;
}

/// P^beta m_g, for kernels with a known mean.
template <KernelWithMean K>
double analytic_mean_of_rescaled(double beta, double population, const K& kernel)
{
    return kernel.mean() / detail::size_factor(beta, population);
}

} // namespace sizedep
