// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "shortpkt/io.hpp"

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() /
               ("shortpkt_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    int run(const std::string& args) const
    {
        const std::string cmd = std::string(SHORTPKT_CLI_PATH) + " " + args + " > " + path("log.txt") + " 2>&1";
        const int rc = std::system(cmd.c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    }

    static std::string slurp(const std::string& p)
    {
        std::ifstream f(p);
        std::stringstream s;
        s << f.rdbuf();
        return s.str();
    }

    std::string log() const { return slurp(path("log.txt")); }

    fs::path dir_;
};

const char* kFast = "--set calibration_trials=2000 --set target_far=0.01 ";

}  // namespace

TEST_F(Cli, SweepBlerIsReproducible)
{
    const std::string args = std::string("sweep-bler ") + kFast + "--snr 10 --trials 40 --seed 9 --csi both ";
    ASSERT_EQ(run(args + "--out " + path("a.csv")), 0) << log();
    const std::string first = slurp(path("a.csv"));
    ASSERT_EQ(run(args + "--out " + path("a.csv")), 0) << log();
    EXPECT_EQ(slurp(path("a.csv")), first);
    ASSERT_EQ(run(args + "--workers 2 --out " + path("a.csv")), 0) << log();
    EXPECT_EQ(slurp(path("a.csv")), first);
    EXPECT_NE(first.find("# config_hash="), std::string::npos);
    EXPECT_NE(first.find(",genie,"), std::string::npos);
    EXPECT_NE(first.find(",estimated,"), std::string::npos);
}

TEST_F(Cli, CalibrateWritesSidecar)
{
    ASSERT_EQ(run("calibrate --far 0.01 --trials 2000 --seed 4 --out " + path("cal.json")), 0) << log();
    const auto j = nlohmann::json::parse(slurp(path("cal.json")));
    EXPECT_GT(j.at("eta").get<double>(), 0.0);
    EXPECT_LT(j.at("eta").get<double>(), 1.0);
    EXPECT_EQ(j.at("trials").get<int>(), 2000);
    EXPECT_EQ(j.at("seed").get<int>(), 4);
    EXPECT_EQ(j.at("config_hash").get<std::string>().size(), 16u);

    ASSERT_EQ(run("sweep-der --calibration " + path("cal.json") + " --snr 10,20 --trials 50 --none-trials 50 " +
                  "--format jsonl --out " + path("der.jsonl")),
              0)
        << log();
    std::ifstream f(path("der.jsonl"));
    std::string line;
    int lines = 0;
    while (std::getline(f, line)) {
        const auto r = nlohmann::json::parse(line);
        EXPECT_EQ(r.at("trials").get<int>(), 50);
        EXPECT_EQ(r.at("none_trials").get<int>(), 50);
        ++lines;
    }
    EXPECT_EQ(lines, 2);
}

TEST_F(Cli, PaprOfImportedFrames)
{
    const shortpkt::LdpcCode code = shortpkt::build_code();
    const shortpkt::BaselineTransmitter tx(code, shortpkt::PreambleSpec{});
    shortpkt::Rng rng(1);
    std::vector<shortpkt::Frame> frames;
    for (int i = 0; i < 1000; ++i)
        frames.push_back(tx.build(rng.bits(64)));
    shortpkt::export_messages(path("msgs.jsonl"), frames);
    ASSERT_EQ(run("papr --import " + path("msgs.jsonl") + " --oversample 4 --out " + path("papr.csv")), 0) << log();
    const std::string csv = slurp(path("papr.csv"));
    EXPECT_NE(csv.find("papr_db"), std::string::npos);

    ASSERT_EQ(run(std::string("sweep-der ") + kFast + "--system phyae-import --import " + path("msgs.jsonl") +
                  " --snr 20 --trials 30 --out " + path("der.csv")),
              0)
        << log();
    EXPECT_NE(slurp(path("der.csv")).find("phyae-import"), std::string::npos);
}

TEST_F(Cli, GoldenExport)
{
    ASSERT_EQ(run("golden --count 3 --seed 2 --out " + path("g.jsonl")), 0) << log();
    const auto recs = shortpkt::read_golden(path("g.jsonl"));
    EXPECT_EQ(recs.size(), 3u);
}

TEST_F(Cli, RejectsBadInput)
{
    EXPECT_NE(run("sweep-bler --no-such-flag"), 0);
    EXPECT_EQ(run("sweep-bler --set no_such_key=1 --out " + path("x.csv")), 2);
    EXPECT_EQ(run("sweep-bler --set n=abc --out " + path("x.csv")), 2);
    EXPECT_NE(run("frobnicate"), 0);
    EXPECT_NE(run("papr --frames 10 --out " + path("p.csv")), 0);
    std::ofstream(path("bad.jsonl")) << "{\"bits\":[0,1],\"symbols\":[[1,0]]}\n{\"bits\":[5],\"symbols\":[[1,0]]}\n";
    EXPECT_NE(run("papr --import " + path("bad.jsonl") + " --out " + path("p.csv")), 0);
    EXPECT_NE(log().find("bad.jsonl:2"), std::string::npos) << log();
}
