#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "oracles.hpp"

namespace {

const std::string kFixtures = ASAG_FIXTURES;

int cli(const std::string& args) {
    const std::string cmd = std::string("\"") + ASAG_CLI + "\" " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Cli, ExitCodes) {
    EXPECT_EQ(cli(""), 2);
    EXPECT_EQ(cli("--help"), 0);
    EXPECT_EQ(cli("--version"), 0);
    EXPECT_EQ(cli("frobnicate"), 2);
    EXPECT_EQ(cli("experiment advt9 --corpus " + kFixtures + "/llm/corpus.jsonl"), 2);
    EXPECT_EQ(cli("experiment"), 2);
    EXPECT_EQ(cli("--set nokey experiment baseline"), 2);
}

TEST(Cli, LlmOfflineReplay) {
    oracle::TempDir tmp("cli_llm");
    const std::string base = "llm --offline --corpus " + kFixtures + "/llm/corpus.jsonl";
    ASSERT_EQ(cli(base + " --cache-dir " + kFixtures + "/llm/cache -o " + (tmp.path() / "a").string()), 0);
    const auto metrics = nlohmann::json::parse(slurp(tmp.path() / "a" / "metrics.json"));
    EXPECT_EQ(metrics["responses"], 400);

    // A cold cache cannot be filled offline.
    EXPECT_EQ(cli(base + " --cache-dir " + (tmp.path() / "empty").string() + " -o " + (tmp.path() / "b").string()), 1);

    // --set given after the subcommand still reaches the config.
    EXPECT_EQ(cli(base + " --cache-dir " + kFixtures + "/llm/cache -o " + (tmp.path() / "c").string() +
                  " --set strategy=p9"),
              2);
    ASSERT_EQ(cli(base + " -o " + (tmp.path() / "d").string() + " --set cache_dir=" + kFixtures + "/llm/cache"), 0);
    EXPECT_EQ(slurp(tmp.path() / "a" / "metrics.json"), slurp(tmp.path() / "d" / "metrics.json"));
}

TEST(Cli, ConfigFileSections) {
    oracle::TempDir tmp("cli_cfg");
    const auto cfg = tmp.path() / "asag.toml";
    std::ofstream(cfg) << "corpus = \"" << kFixtures << "/llm/corpus.jsonl\"\n"
                       << "[llm]\noffline = true\ncache_dir = \"" << kFixtures << "/llm/cache\"\n";
    EXPECT_EQ(cli("-c " + cfg.string() + " llm -o " + (tmp.path() / "out").string()), 0);
    EXPECT_TRUE(std::filesystem::exists(tmp.path() / "out" / "verdicts.jsonl"));
}
