#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() /
               ("sizedep_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    // Exit status of the CLI; stderr goes to err.txt.
    int run(const std::string& args) const
    {
        const std::string cmd = std::string("\"") + SIZEDEP_CLI + "\" " + args + " 2> \"" +
                                path("err.txt") + "\"";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string read(const std::string& name) const
    {
        std::ifstream in(path(name), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    void write(const std::string& name, const std::string& text) const
    {
        std::ofstream(path(name), std::ios::binary) << text;
    }

    void synth(const std::string& extra = "") const
    {
        ASSERT_EQ(run("synth --out-dir \"" + dir_.string() + "\" " + extra), 0) << read("err.txt");
    }

    fs::path dir_;
};

} // namespace

TEST_F(Cli, SynthFitScalingComposition)
{
    synth();
    ASSERT_EQ(run("fit \"" + path("distributions.csv") + "\" --out \"" + path("fit.json") +
                  "\" --curves \"" + path("curves.csv") + "\""),
              0)
        << read("err.txt");
    ASSERT_EQ(run("scaling \"" + path("fit.json") + "\" \"" + path("macro.csv") + "\" --out \"" +
                  path("scaling.json") + "\""),
              0)
        << read("err.txt");

    const auto fit = json::parse(read("fit.json"));
    EXPECT_EQ(fit["step2"].size(), 12u);
    EXPECT_NEAR(fit["alpha_bar"].get<double>(), 1.74076, 1e-3);
    const auto sc = json::parse(read("scaling.json"));
    EXPECT_NEAR(sc["beta"].get<double>(), 4.365, 1e-3);
    EXPECT_LT(sc["allometry"]["relative_error"].get<double>(), 1e-6);
    EXPECT_EQ(read("curves.csv").rfind("year,threshold,tail_fraction,fitted_tail_fraction\n", 0), 0u);
}

TEST_F(Cli, MalformedCsvExitsWithDataError)
{
    write("bad.csv", "year,threshold,tail_fraction\n2000,1e4,0.5\n2000,xyz,0.2\n");
    EXPECT_EQ(run("fit \"" + path("bad.csv") + "\""), 2);
    EXPECT_NE(read("err.txt").find("bad.csv:3"), std::string::npos) << read("err.txt");
    EXPECT_EQ(run("fit \"" + path("missing.csv") + "\""), 2);
}

TEST_F(Cli, TooFewPointsIsDataError)
{
    write("short.csv", "year,threshold,tail_fraction\n2000,1,0.5\n2000,2,0.3\n2000,3,0.1\n"
                       "2001,1,0.5\n2001,2,0.3\n2001,3,0.1\n");
    EXPECT_EQ(run("fit \"" + path("short.csv") + "\""), 2);
}

TEST_F(Cli, NoConvergenceExitsThree)
{
    synth("--years 3");
    EXPECT_EQ(run("fit \"" + path("distributions.csv") + "\" --max-evals 10 --out \"" +
                  path("fit.json") + "\""),
              3);
}

TEST_F(Cli, AlphaFixedSkipsStepOne)
{
    synth("--years 4");
    ASSERT_EQ(run("fit \"" + path("distributions.csv") + "\" --alpha-fixed 1.74076 --out \"" +
                  path("fit.json") + "\""),
              0)
        << read("err.txt");
    const auto fit = json::parse(read("fit.json"));
    EXPECT_EQ(fit["alpha_fixed"].get<double>(), 1.74076);
    EXPECT_TRUE(fit["step1"].empty());
    for (const auto& e : fit["step2"])
        EXPECT_EQ(e["alpha"].get<double>(), 1.74076);
}

TEST_F(Cli, CollapseReportAndCurves)
{
    synth();
    ASSERT_EQ(run("collapse \"" + path("distributions.csv") + "\" \"" + path("macro.csv") +
                  "\" --beta 4.365 --out \"" + path("c.json") + "\" --curves \"" +
                  path("c.csv") + "\""),
              0)
        << read("err.txt");
    ASSERT_EQ(run("collapse \"" + path("distributions.csv") + "\" \"" + path("macro.csv") +
                  "\" --beta 0 --out \"" + path("c0.json") + "\""),
              0);
    const double truth = json::parse(read("c.json"))["collapse"]["score"].get<double>();
    const double zero = json::parse(read("c0.json"))["collapse"]["score"].get<double>();
    EXPECT_LT(truth, 1e-4);
    EXPECT_LT(truth, zero);
    EXPECT_EQ(read("c.csv").rfind("year,population,rescaled_threshold,tail_fraction\n", 0), 0u);
}

TEST_F(Cli, RunReportIsByteIdentical)
{
    synth("--mode sampled --samples 20000 --seed 9");
    const std::string args = "run \"" + path("distributions.csv") + "\" \"" + path("macro.csv") +
                             "\" --seed 3 --restarts 4 --out ";
    ASSERT_EQ(run(args + "\"" + path("a.json") + "\""), 0) << read("err.txt");
    ASSERT_EQ(run(args + "\"" + path("b.json") + "\""), 0) << read("err.txt");
    const auto a = read("a.json");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, read("b.json"));
    const auto j = json::parse(a);
    for (const char* key : {"tool", "version", "command", "seed", "options", "inputs", "fit",
                            "beta", "lambda_fit", "allometry", "collapse"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j["inputs"]["distributions"]["name"], "distributions.csv");
}

TEST_F(Cli, UsageErrors)
{
    EXPECT_NE(run(""), 0);
    EXPECT_NE(run("fit"), 0);
    EXPECT_NE(run("synth --mode bogus"), 0);
}
