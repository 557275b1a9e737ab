#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "degres/io/format.hpp"

namespace fs = std::filesystem;
using degres::io::parse_csv;
using degres::io::read_file;
using degres::io::write_file_atomic;

namespace {

class Cli : public ::testing::Test {
protected:
    fs::path dir;

    void SetUp() override
    {
        dir = fs::temp_directory_path() / (std::string("degres_test_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir);
        fs::create_directories(dir);
    }

    fs::path config(const std::string& text)
    {
        const auto p = dir / "run.cfg";
        write_file_atomic(p, text);
        return p;
    }

    int run(const std::string& args)
    {
        const std::string cmd = std::string("\"") + DEGRES_CLI_PATH + "\" " + args + " > \"" + (dir / "stdout.txt").string() + "\" 2> \"" +
                                (dir / "stderr.txt").string() + "\"";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string stderr_text() { return read_file(dir / "stderr.txt"); }
    std::string stdout_text() { return read_file(dir / "stdout.txt"); }
    std::string out() { return "--out \"" + (dir / "out").string() + "\""; }
};

} // namespace

TEST_F(Cli, EquilibriaExampleGivesTwoRows)
{
    const auto cfg = config("[equilibria]\na = 2\nb = 1\np = 1\nmu1 = 1\nmu2 = 0\n");
    ASSERT_EQ(run("equilibria --config \"" + cfg.string() + "\" " + out()), 0) << stderr_text();
    const auto t = parse_csv(read_file(dir / "out" / "equilibria.csv"));
    ASSERT_EQ(t.rows.size(), 2u);
    std::set<std::string> labels{t.rows[0][t.column("label")], t.rows[1][t.column("label")]};
    EXPECT_EQ(labels, (std::set<std::string>{"O2+", "O2-"}));
    EXPECT_NE(stdout_text().find("equilibria.csv"), std::string::npos);
}

TEST_F(Cli, ConfigErrorsExitTwo)
{
    EXPECT_EQ(run("equilibria --config \"" + config("p = 0\n").string() + "\" " + out()), 2);
    EXPECT_NE(stderr_text().find("p ≥ 1"), std::string::npos) << stderr_text();

    EXPECT_EQ(run("equilibria --config \"" + config("mu1 = 1\nmu1 = 2\n").string() + "\" " + out()), 2);
    EXPECT_NE(stderr_text().find("line 2"), std::string::npos) << stderr_text();

    EXPECT_EQ(run("equilibria --config \"" + (dir / "missing.cfg").string() + "\" " + out()), 2);
    EXPECT_EQ(run("nosuchcommand --config \"" + config("").string() + "\""), 2);
    EXPECT_EQ(run("equilibria"), 2);
    EXPECT_EQ(run("equilibria --config \"" + config("").string() + "\" --jobs 0"), 2);
    EXPECT_FALSE(fs::exists(dir / "out" / "equilibria.csv"));
}

TEST_F(Cli, ComputationErrorExitsOne)
{
    const auto cfg = config("[map-orbits]\nmap = euler\nalpha = 1\nmu1 = 1\nstarts = 0, 1.5707963267948966\n");
    EXPECT_EQ(run("map-orbits --config \"" + cfg.string() + "\" " + out()), 1);
    EXPECT_NE(stderr_text().find("SINGULAR_DENOMINATOR"), std::string::npos) << stderr_text();
}

TEST_F(Cli, BifdiagJsonAndSvg)
{
    const auto cfg = config("[bifdiag]\nn_mu1 = 80\nn_mu2 = 80\ncurve_samples = 300\n");
    ASSERT_EQ(run("bifdiag --config \"" + cfg.string() + "\" --jobs 3 --svg " + out()), 0) << stderr_text();
    const auto j = nlohmann::json::parse(read_file(dir / "out" / "diagram.json"));
    std::set<std::string> analytic;
    int reconnection = 0;
    for (const auto& c : j["curves"]) {
        if (c["kind"] == "analytic") analytic.insert(c["tag"].get<std::string>());
        else ++reconnection;
    }
    EXPECT_EQ(analytic, (std::set<std::string>{"m3", "m4", "m5+", "m5-"}));
    EXPECT_GT(reconnection, 0);
    EXPECT_GE(j["regions"].size(), 10u);

    const auto svg = read_file(dir / "out" / "diagram.svg");
    EXPECT_NE(svg.find("data-tag=\"m6\""), std::string::npos);
    EXPECT_NE(svg.find("degres "), std::string::npos);

    // Same input, different thread count: byte-identical outputs.
    const auto first = read_file(dir / "out" / "diagram.json");
    const auto first_svg = svg;
    ASSERT_EQ(run("bifdiag --config \"" + cfg.string() + "\" --jobs 1 --svg " + out()), 0);
    EXPECT_EQ(read_file(dir / "out" / "diagram.json"), first);
    EXPECT_EQ(read_file(dir / "out" / "diagram.svg"), first_svg);
}

TEST_F(Cli, PortraitAndReconnectRun)
{
    ASSERT_EQ(run("portrait --config \"" + config("mu1 = 0.5\nmu2 = 2\nn_grid = 160\n").string() + "\" --svg " + out()), 0) << stderr_text();
    EXPECT_TRUE(fs::exists(dir / "out" / "portrait.svg"));
    EXPECT_TRUE(fs::exists(dir / "out" / "contours.csv"));

    ASSERT_EQ(run("reconnect --config \"" + config("mu1_values = 0.3\n").string() + "\" " + out()), 0) << stderr_text();
    const auto t = parse_csv(read_file(dir / "out" / "reconnection.csv"));
    EXPECT_EQ(t.header, (std::vector<std::string>{"curve_id", "mu1", "mu2"}));
    EXPECT_FALSE(t.rows.empty());
}

TEST_F(Cli, VerifyPasses)
{
    ASSERT_EQ(run("verify --config \"" + config("").string() + "\" --jobs 2 " + out()), 0) << stdout_text() << stderr_text();
    const auto table = stdout_text();
    EXPECT_EQ(table.find("FAIL"), std::string::npos) << table;
    EXPECT_NE(table.find("PASS"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "out" / "verify.csv"));
}
