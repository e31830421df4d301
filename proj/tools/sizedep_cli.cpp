// Command-line driver: synth -> fit -> scaling, plus collapse and a one-shot run.
//
// Exit codes: 0 success, 2 bad input data, 3 no year converged, 1 anything else.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sizedep/report.hpp"
#include "sizedep/sizedep.hpp"

namespace fs = std::filesystem;
using sizedep::report::json;

namespace {

struct InputFile {
    std::string path;
    std::string contents;

    std::string name() const { return fs::path(path).filename().string(); }
    json digest() const
    {
        return json{{"name", name()}, {"fnv1a64", sizedep::report::fnv1a64(contents)}};
    }
};

InputFile read_input(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw sizedep::data_error(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return {path, ss.str()};
}

std::vector<sizedep::BinnedDistribution> load_distributions(const InputFile& f, bool intervals)
{
    std::istringstream in(f.contents);
    return intervals ? sizedep::parse_intervals_csv(in, f.path)
                     : sizedep::parse_distribution_csv(in, f.path);
}

std::vector<sizedep::YearRecord> load_macro(const InputFile& f)
{
    std::istringstream in(f.contents);
    return sizedep::parse_macro_csv(in, f.path);
}

void write_text(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error(path + ": cannot write file");
    out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json header(std::string_view command)
{
    return json{{"tool", "sizedep"},
                {"version", std::string(sizedep::report::tool_version)},
                {"command", std::string(command)}};
}

std::map<int, sizedep::YearRecord> by_year(const std::vector<sizedep::YearRecord>& records)
{
    std::map<int, sizedep::YearRecord> m;
    for (const auto& r : records)
        m[r.year] = r;
    return m;
}

struct FitArgs {
    std::string distributions;
    bool intervals = false;
    std::optional<double> alpha_fixed;
    sizedep::FitOptions opts;
};

void add_fit_options(CLI::App* cmd, FitArgs& a)
{
    cmd->add_option("--seed", a.opts.seed, "Random seed for optimizer restarts")->capture_default_str();
    cmd->add_option("--alpha-fixed", a.alpha_fixed, "Skip step one and fit lambda at this alpha");
    cmd->add_option("--alpha-max", a.opts.alpha_max, "Upper bound on alpha")->capture_default_str();
    cmd->add_option("--restarts", a.opts.restarts, "Simplex restarts per year")->capture_default_str();
    cmd->add_option("--tol", a.opts.tol, "Objective tolerance")->capture_default_str();
    cmd->add_option("--max-evals", a.opts.max_evals, "Evaluation budget per simplex run")
        ->capture_default_str();
    cmd->add_flag("--intervals", a.intervals,
                  "Input is year,lower_bound,share interval data rather than tail fractions");
}

sizedep::TwoStepResult run_fit(const std::vector<sizedep::BinnedDistribution>& ds,
                               const FitArgs& a)
{
    if (a.alpha_fixed)
        return sizedep::fixed_alpha_fit(ds, *a.alpha_fixed, a.opts);
    return sizedep::two_step_fit(ds, a.opts);
}

std::string fitted_curves_csv(const std::vector<sizedep::BinnedDistribution>& ds,
                              const sizedep::TwoStepResult& fit)
{
    std::ostringstream out;
    out << "year,threshold,tail_fraction,fitted_tail_fraction\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& p = fit.step2[i].params;
        for (const auto& pt : ds[i].points)
            out << ds[i].year << ',' << sizedep::format_number(pt.threshold) << ','
                << sizedep::format_number(pt.tail_fraction) << ','
                << sizedep::format_number(sizedep::ccdf(p, pt.threshold)) << '\n';
    }
    return out.str();
}

struct ScalingOutcome {
    sizedep::BetaEstimate beta;
    sizedep::AllometryReport allometry;
    std::vector<sizedep::YearRecord> joined;
    std::vector<double> lambdas;
};

ScalingOutcome run_scaling(const std::vector<sizedep::FitResult>& fits,
                           const std::vector<sizedep::YearRecord>& macro)
{
    const auto years = by_year(macro);
    ScalingOutcome out;
    std::vector<sizedep::PopulationLambda> pl;
    for (const auto& f : fits) {
        auto it = years.find(f.year);
        if (it == years.end())
            throw sizedep::data_error("macro data has no row for fitted year " +
                                      std::to_string(f.year));
        pl.push_back({it->second.population, f.params.lambda()});
        out.joined.push_back(it->second);
        out.lambdas.push_back(f.params.lambda());
    }
    try {
        out.beta = sizedep::beta_from_lambdas(pl);
        out.allometry = sizedep::allometry_report(out.beta.beta, out.joined);
    } catch (const sizedep::domain_error& e) {
        throw sizedep::data_error(e.what());
    }
    return out;
}

std::string scaling_points_csv(const ScalingOutcome& s)
{
    std::ostringstream out;
    out << "year,population,lambda,gdp\n";
    for (std::size_t i = 0; i < s.joined.size(); ++i)
        out << s.joined[i].year << ',' << sizedep::format_number(s.joined[i].population) << ','
            << sizedep::format_number(s.lambdas[i]) << ','
            << sizedep::format_number(s.joined[i].gdp) << '\n';
    return out.str();
}

std::string collapse_csv(const sizedep::CollapseResult& c)
{
    std::ostringstream out;
    out << "year,population,rescaled_threshold,tail_fraction\n";
    for (const auto& curve : c.curves)
        for (const auto& p : curve.points)
            out << curve.year << ',' << sizedep::format_number(curve.population) << ','
                << sizedep::format_number(std::pow(10.0, p.log10_rescaled)) << ','
                << sizedep::format_number(p.tail_fraction) << '\n';
    return out.str();
}

json collapse_json(const sizedep::CollapseResult& c, double beta)
{
    using sizedep::report::real;
    return json{{"beta", real(beta)},
                {"score", real(c.score)},
                {"grid_log10_lo", real(c.grid_lo)},
                {"grid_log10_hi", real(c.grid_hi)},
                {"years", c.curves.size()}};
}

sizedep::CollapseResult run_collapse(const std::vector<sizedep::BinnedDistribution>& ds,
                                     const std::vector<sizedep::YearRecord>& macro, double beta)
{
    try {
        return sizedep::collapse(ds, macro, beta);
    } catch (const sizedep::domain_error& e) {
        throw sizedep::data_error(e.what());
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Size-dependent income distribution toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(sizedep::report::tool_version));

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic size-dependent economy");
    sizedep::SynthSpec spec;
    std::string mode_name = "exact";
    std::string out_dir = ".";
    double lambda0 = 3e-5;
    std::optional<double> prefactor;
    double population0 = 2.65e8;
    double growth = 0.011;
    std::size_t years = 12;
    std::vector<double> populations;
    synth->add_option("--alpha", spec.alpha, "Pareto exponent")->capture_default_str();
    synth->add_option("--beta", spec.beta, "Size-dependency exponent")->capture_default_str();
    synth->add_option("--lambda0", lambda0, "lambda in the first year (sets the prefactor)")
        ->capture_default_str();
    synth->add_option("--prefactor", prefactor, "c in lambda = c P^-beta (overrides --lambda0)");
    synth->add_option("--first-year", spec.first_year)->capture_default_str();
    synth->add_option("--years", years, "Number of years")->capture_default_str();
    synth->add_option("--population0", population0, "First-year population")->capture_default_str();
    synth->add_option("--growth", growth, "Yearly population growth rate")->capture_default_str();
    synth->add_option("--populations", populations, "Explicit per-year populations")
        ->delimiter(',');
    synth->add_option("--mode", mode_name, "exact or sampled")
        ->check(CLI::IsMember({"exact", "sampled"}))
        ->capture_default_str();
    synth->add_option("--samples", spec.samples_per_year, "Samples per year (sampled mode)")
        ->capture_default_str();
    synth->add_option("--thresholds", spec.thresholds_per_year, "Thresholds per year")
        ->capture_default_str();
    synth->add_option("--noise", spec.noise_level, "Log-normal sigma on tail fractions")
        ->capture_default_str();
    synth->add_option("--seed", spec.seed)->capture_default_str();
    synth->add_option("--out-dir", out_dir, "Directory for distributions.csv and macro.csv")
        ->capture_default_str();

    // fit
    auto* fit = app.add_subcommand("fit", "Two-step fit of per-year tail curves");
    FitArgs fit_args;
    std::string fit_out = "-";
    std::string fit_curves;
    fit->add_option("distributions", fit_args.distributions, "distributions.csv")->required();
    add_fit_options(fit, fit_args);
    fit->add_option("--out", fit_out, "Report path ('-' for stdout)")->capture_default_str();
    fit->add_option("--curves", fit_curves, "Write observed and fitted tail curves here");

    // scaling
    auto* scaling = app.add_subcommand("scaling", "beta from lambda vs population, and allometry");
    std::string scaling_report, scaling_macro, scaling_out = "-", scaling_points;
    scaling->add_option("fit_report", scaling_report, "JSON report from 'fit'")->required();
    scaling->add_option("macro", scaling_macro, "macro.csv")->required();
    scaling->add_option("--out", scaling_out)->capture_default_str();
    scaling->add_option("--points", scaling_points, "Write year,population,lambda,gdp here");

    // collapse
    auto* coll = app.add_subcommand("collapse", "Rescale tail curves by P^-beta");
    std::string coll_dist, coll_macro, coll_out = "-", coll_curves;
    double coll_beta = 0.0;
    coll->add_option("distributions", coll_dist)->required();
    coll->add_option("macro", coll_macro)->required();
    coll->add_option("--beta", coll_beta, "Size-dependency exponent")->required();
    coll->add_option("--out", coll_out, "Score report path")->capture_default_str();
    coll->add_option("--curves", coll_curves, "Write rescaled curves here");

    // run
    auto* run = app.add_subcommand("run", "fit + scaling + collapse in one report");
    FitArgs run_args;
    std::string run_macro, run_out = "-", run_curves;
    run->add_option("distributions", run_args.distributions)->required();
    run->add_option("macro", run_macro)->required();
    add_fit_options(run, run_args);
    run->add_option("--out", run_out)->capture_default_str();
    run->add_option("--curves", run_curves, "Write observed and fitted tail curves here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*synth) {
            if (populations.empty())
                populations = sizedep::geometric_populations(population0, growth, years);
            spec.populations = populations;
            spec.prefactor = prefactor ? *prefactor
                                       : sizedep::SizeScaling::anchored(spec.beta, lambda0,
                                                                        populations.front())
                                             .prefactor();
            const auto mode =
                mode_name == "exact" ? sizedep::SynthMode::exact : sizedep::SynthMode::sampled;
            const auto data = sizedep::generate(spec, mode);
            fs::create_directories(out_dir);
            std::ostringstream dist, macro;
            sizedep::write_distribution_csv(dist, data.distributions);
            sizedep::write_macro_csv(macro, data.records);
            write_text((fs::path(out_dir) / "distributions.csv").string(), dist.str());
            write_text((fs::path(out_dir) / "macro.csv").string(), macro.str());

            using sizedep::report::real;
            json truth = header("synth");
            truth["mode"] = mode_name;
            truth["seed"] = spec.seed;
            truth["alpha"] = real(spec.alpha);
            truth["beta"] = real(spec.beta);
            truth["prefactor"] = real(spec.prefactor);
            truth["noise"] = real(spec.noise_level);
            json lambdas = json::array();
            for (std::size_t i = 0; i < data.lambdas.size(); ++i)
                lambdas.push_back(json{{"year", data.records[i].year},
                                       {"lambda", real(data.lambdas[i])}});
            truth["lambdas"] = std::move(lambdas);
            write_text((fs::path(out_dir) / "truth.json").string(), dump(truth));
            return 0;
        }

        if (*fit) {
            const auto input = read_input(fit_args.distributions);
            const auto ds = load_distributions(input, fit_args.intervals);
            const auto result = run_fit(ds, fit_args);
            json j = header("fit");
            j["seed"] = fit_args.opts.seed;
            j["options"] = sizedep::report::to_json(fit_args.opts);
            j["inputs"] = json{{"distributions", input.digest()}};
            const auto body = sizedep::report::to_json(result, fit_args.alpha_fixed);
            for (const auto& [k, v] : body.items())
                j[k] = v;
            write_text(fit_out, dump(j));
            if (!fit_curves.empty())
                write_text(fit_curves, fitted_curves_csv(ds, result));
            return 0;
        }

        if (*scaling) {
            const auto rep_in = read_input(scaling_report);
            const auto macro_in = read_input(scaling_macro);
            json fit_report;
            try {
                fit_report = json::parse(rep_in.contents);
            } catch (const json::parse_error& e) {
                throw sizedep::data_error(scaling_report + ": " + e.what());
            }
            const auto fits = sizedep::report::fitted_lambdas(fit_report);
            const auto s = run_scaling(fits, load_macro(macro_in));
            json j = header("scaling");
            j["inputs"] = json{{"fit_report", rep_in.digest()}, {"macro", macro_in.digest()}};
            j["beta"] = sizedep::report::real(s.beta.beta);
            j["lambda_fit"] = sizedep::report::to_json(s.beta.fit);
            j["allometry"] = sizedep::report::to_json(s.allometry);
            write_text(scaling_out, dump(j));
            if (!scaling_points.empty())
                write_text(scaling_points, scaling_points_csv(s));
            return 0;
        }

        if (*coll) {
            const auto dist_in = read_input(coll_dist);
            const auto macro_in = read_input(coll_macro);
            const auto c = run_collapse(load_distributions(dist_in, false), load_macro(macro_in),
                                        coll_beta);
            json j = header("collapse");
            j["inputs"] = json{{"distributions", dist_in.digest()}, {"macro", macro_in.digest()}};
            j["collapse"] = collapse_json(c, coll_beta);
            write_text(coll_out, dump(j));
            if (!coll_curves.empty())
                write_text(coll_curves, collapse_csv(c));
            return 0;
        }

        if (*run) {
            const auto dist_in = read_input(run_args.distributions);
            const auto macro_in = read_input(run_macro);
            const auto ds = load_distributions(dist_in, run_args.intervals);
            const auto macro = load_macro(macro_in);
            const auto result = run_fit(ds, run_args);
            const auto s = run_scaling(result.step2, macro);
            const auto c = run_collapse(ds, macro, s.beta.beta);

            json j = header("run");
            j["seed"] = run_args.opts.seed;
            j["options"] = sizedep::report::to_json(run_args.opts);
            j["inputs"] = json{{"distributions", dist_in.digest()}, {"macro", macro_in.digest()}};
            j["fit"] = sizedep::report::to_json(result, run_args.alpha_fixed);
            j["beta"] = sizedep::report::real(s.beta.beta);
            j["lambda_fit"] = sizedep::report::to_json(s.beta.fit);
            j["allometry"] = sizedep::report::to_json(s.allometry);
            j["collapse"] = collapse_json(c, s.beta.beta);
            write_text(run_out, dump(j));
            if (!run_curves.empty())
                write_text(run_curves, fitted_curves_csv(ds, result));
            return 0;
        }
    } catch (const sizedep::data_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const sizedep::fit_failure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
