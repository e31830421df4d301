#pragma once

///
/// \file report.hpp
///
/// JSON serialization of fit, scaling and collapse results. Keys keep
/// insertion order and every real is rounded to 12 significant digits, so
/// identical inputs give byte-identical reports.
///

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "sizedep/fitting.hpp"
#include "sizedep/ingest.hpp"
#include "sizedep/scaling.hpp"

namespace sizedep::report {

using json = nlohmann::ordered_json;

#ifdef SIZEDEP_VERSION
inline constexpr std::string_view tool_version = SIZEDEP_VERSION;
#else
inline constexpr std::string_view tool_version = "0.1.0";
#endif

/// 12-significant-digit number; non-finite values become null.
inline json real(double v)
{
    if (!std::isfinite(v))
        return nullptr;
    return canonical(v);
}

/// FNV-1a 64-bit digest, as 16 hex digits.
inline std::string fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline json to_json(const FitOptions& o)
{
    return json{{"alpha_max", real(o.alpha_max)},
                {"restarts", o.restarts},
                {"tol", real(o.tol)},
                {"max_evals", o.max_evals},
                {"seed", o.seed}};
}

inline json to_json(const FitResult& r)
{
    return json{{"year", r.year},
                {"alpha", real(r.params.alpha())},
                {"lambda", real(r.params.lambda())},
                {"objective", real(r.objective)},
                {"n_points", r.n_points},
                {"converged", r.converged},
                {"n_evals", r.n_evals}};
}

inline json to_json(std::span<const FitResult> rs)
{
    json arr = json::array();
    for (const auto& r : rs)
        arr.push_back(to_json(r));
    return arr;
}

inline json to_json(const TwoStepResult& r, std::optional<double> alpha_fixed)
{
    json j;
    j["alpha_fixed"] = alpha_fixed ? real(*alpha_fixed) : json(nullptr);
    j["step1"] = to_json(std::span<const FitResult>(r.step1));
    j["alpha_bar"] = real(r.alpha_bar);
    j["step2"] = to_json(std::span<const FitResult>(r.step2));
    return j;
}

inline json to_json(const ScalingFit& f)
{
    json res = json::array();
    for (double v : f.residuals)
        res.push_back(real(v));
    return json{{"exponent", real(f.exponent)},
                {"log10_prefactor", real(f.log_prefactor)},
                {"r_squared", real(f.r_squared)},
                {"n", f.n},
                {"residuals", std::move(res)}};
}

inline json to_json(const AllometryReport& a)
{
    return json{{"beta", real(a.beta)},
                {"predicted_exponent", real(a.predicted_exponent)},
                {"empirical_exponent", real(a.empirical_exponent)},
                {"relative_error", real(a.relative_error)},
                {"gdp_fit", to_json(a.gdp_fit)}};
}

/// Reads the step-two (or, failing that, step-one) per-year fits back from a
/// fit report.
inline std::vector<FitResult> fitted_lambdas(const json& fit_report)
{
    const json* arr = nullptr;
    if (fit_report.contains("step2") && !fit_report["step2"].empty())
        arr = &fit_report["step2"];
    else if (fit_report.contains("step1"))
        arr = &fit_report["step1"];
    if (arr == nullptr || !arr->is_array())
        throw data_error("fit report has no per-year fits");
    std::vector<FitResult> out;
    for (const auto& e : *arr) {
        if (!e.contains("year") || !e.contains("alpha") || !e.contains("lambda") ||
            !e["alpha"].is_number() || !e["lambda"].is_number())
            throw data_error("fit report entry lacks year/alpha/lambda");
        FitResult r;
        r.year = e["year"].get<int>();
        try {
            r.params = GlvParams(e["alpha"].get<double>(), e["lambda"].get<double>());
        } catch (const domain_error& err) {
            throw data_error(std::string("fit report: ") + err.what());
        }
        r.objective = e.value("objective", 0.0);
        r.n_points = e.value("n_points", std::size_t{0});
        r.converged = e.value("converged", false);
        r.n_evals = e.value("n_evals", std::size_t{0});
        out.push_back(r);
    }
    return out;
}

} // namespace sizedep::report
