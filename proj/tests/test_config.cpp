#include "corrtext/config.hpp"
#include "corrtext/errors.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace corrtext;

namespace {

EnvLookup fake_env(std::map<std::string, std::string> vars) {
    return [vars = std::move(vars)](const std::string& name) -> std::optional<std::string> {
        const auto it = vars.find(name);
        if (it == vars.end()) return std::nullopt;
        return it->second;
    };
}

const EnvLookup kNoEnv = fake_env({});

std::string config_error(const std::string& text, const EnvLookup& env = kNoEnv) {
    try {
        parse_config(text, "/base", env);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Config, DefaultsCarryStatedConstants) {
    const auto cfg = parse_config("", "/base", kNoEnv);
    EXPECT_EQ(cfg.threshold, 0.8);
    EXPECT_EQ(cfg.horizon, 125u);
    EXPECT_EQ(cfg.features.window_weeks, 12u);
    EXPECT_EQ(cfg.features.diff_weeks, 13u);
    EXPECT_EQ(cfg.features.max_ffill_weeks, 8u);
    EXPECT_EQ(cfg.classifier, "stub");
    EXPECT_EQ(cfg.gbt.n_trees, 200u);
}

TEST(Config, ParsesKeysCommentsAndPaths) {
    const auto cfg = parse_config(
        "# sample\n"
        "region = UK\n"
        "news = data/news.csv   # trailing comment\n"
        "stock_prices = /abs/stock.csv\n"
        "threshold = 0.75\n"
        "required_codes = US, ECON\n"
        "excluded_codes = MKTMOVE|EU\n"
        "include_minutes = false\n"
        "eval_start = 2019-04-01\n"
        "n_trees = 50\n"
        "synth_kappa = 0.3\n",
        "/base", kNoEnv);
    EXPECT_EQ(cfg.region, "UK");
    EXPECT_EQ(cfg.news, std::filesystem::path("/base/data/news.csv"));
    EXPECT_EQ(cfg.stock_prices, std::filesystem::path("/abs/stock.csv"));
    EXPECT_EQ(cfg.threshold, 0.75);
    EXPECT_EQ(cfg.required_codes, (std::set<std::string>{"ECON", "US"}));
    EXPECT_EQ(cfg.excluded_codes, (std::set<std::string>{"EU", "MKTMOVE"}));
    EXPECT_FALSE(cfg.features.include_minutes);
    EXPECT_EQ(cfg.eval_start, parse_date("2019-04-01"));
    EXPECT_EQ(cfg.gbt.n_trees, 50u);
    EXPECT_EQ(cfg.synth.kappa, 0.3);
}

TEST(Config, EnvironmentOverridesFile) {
    const auto env = fake_env({{"CORRTEXT_THRESHOLD", "0.9"}, {"CORRTEXT_REGION", "EU"}, {"CORRTEXT_OUT_DIR", "/tmp/x"}});
    const auto cfg = parse_config("threshold = 0.7\nregion = US\n", "/base", env);
    EXPECT_EQ(cfg.threshold, 0.9);
    EXPECT_EQ(cfg.region, "EU");
    EXPECT_EQ(cfg.out_dir, std::filesystem::path("/tmp/x"));
}

TEST(Config, RelativeEnvPathsResolveAgainstWorkingDirectory) {
    const auto cfg = parse_config("", "/base", fake_env({{"CORRTEXT_NEWS", "n.csv"}}));
    EXPECT_EQ(cfg.news, std::filesystem::current_path() / "n.csv");
}

TEST(Config, InvalidThresholdNamesKey) {
    const auto msg = config_error("threshold = 1.5\n");
    EXPECT_NE(msg.find("threshold"), std::string::npos);
}

TEST(Config, EveryOffendingKeyListed) {
    const auto msg = config_error(
        "threshold = 1.5\n"
        "n_trees = 0\n"
        "learning_rate = abc\n"
        "bogus_key = 1\n"
        "eval_start = 2019-13-01\n"
        "classifier = remote\n"
        "not a pair\n",
        fake_env({{"CORRTEXT_BATCH_SIZE", "999"}}));
    for (const char* key : {"threshold", "n_trees", "learning_rate", "bogus_key", "eval_start", "classifier_url",
                            "batch_size", "line 7"}) {
        EXPECT_NE(msg.find(key), std::string::npos) << key << "\n" << msg;
    }
}

TEST(Config, SynthErrorsSurface) {
    const auto msg = config_error("synth_rho0 = 0.5\nsynth_kappa = 0.6\n");
    EXPECT_NE(msg.find("synth_rho0/synth_kappa"), std::string::npos);
}

TEST(Config, LoadFileResolvesAgainstItsDirectory) {
    testutil::TempDir dir;
    std::filesystem::create_directories(dir / "conf");
    testutil::write_file(dir / "conf" / "run.conf", "news = ../news.csv\nout_dir = out\n");
    const auto cfg = load_config(dir / "conf" / "run.conf", kNoEnv);
    EXPECT_EQ(cfg.news, dir / "conf" / ".." / "news.csv");
    EXPECT_EQ(cfg.out_dir, dir / "conf" / "out");
    EXPECT_THROW(load_config(dir / "missing.conf", kNoEnv), ConfigError);
}

TEST(Config, SetValueReportsUnknownKey) {
    RunConfig cfg;
    const auto err = set_config_value(cfg, "nope", "1", "/");
    ASSERT_TRUE(err);
    EXPECT_NE(err->find("unknown key"), std::string::npos);
    EXPECT_FALSE(set_config_value(cfg, "horizon", "60", "/"));
    EXPECT_EQ(cfg.horizon, 60u);
}

TEST(Config, EveryListedKeyIsAccepted) {
    for (const auto& key : RunConfig::keys()) {
        RunConfig cfg;
        const auto err = set_config_value(cfg, key, "", "/");
        if (err) EXPECT_EQ(err->find("unknown key"), std::string::npos) << key;
    }
}
