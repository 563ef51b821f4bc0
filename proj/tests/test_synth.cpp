#include "corrtext/errors.hpp"
#include "corrtext/ingest.hpp"
#include "corrtext/market.hpp"
#include "corrtext/synth.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace corrtext;

namespace {

SynthConfig short_config(std::uint64_t seed) {
    SynthConfig c;
    c.seed = seed;
    c.start = *parse_date("2016-01-04");
    c.end = *parse_date("2017-12-31");
    c.news_per_week = 10;
    c.neutral_per_week = 3;
    c.filtered_per_week = 1;
    c.duplicate_probability = 0.1;
    return c;
}

}  // namespace

TEST(Synth, SameSeedGivesByteIdenticalFiles) {
    testutil::TempDir a, b;
    generate(short_config(5), a.path());
    generate(short_config(5), b.path());
    for (const char* f : {"news.csv", "stock.csv", "bond.csv", "rates.csv", "ledger.csv", "lexicon_inflation.csv",
                          "lexicon_growth.csv", "pipeline.conf"}) {
        ASSERT_TRUE(std::filesystem::exists(a / f)) << f;
        EXPECT_EQ(testutil::read_file(a / f), testutil::read_file(b / f)) << f;
    }
    testutil::TempDir c;
    generate(short_config(6), c.path());
    EXPECT_NE(testutil::read_file(a / "news.csv"), testutil::read_file(c / "news.csv"));
}

TEST(Synth, EmittedFilesLoadThroughIngest) {
    testutil::TempDir dir;
    const auto corpus = generate(short_config(7), dir.path());
    const auto news = load_news(dir / "news.csv");
    EXPECT_TRUE(news.errors.empty());
    EXPECT_EQ(news.items, corpus.news);
    EXPECT_EQ(load_price_series(dir / "stock.csv").levels, corpus.stock.levels);
    EXPECT_EQ(load_ledger(dir / "ledger.csv"), corpus.ledger.weeks);
}

TEST(Synth, LedgerCountsMatchEmittedDirectionalHeadlines) {
    const auto corpus = generate(short_config(8));
    const auto kept = filter_topics(dedupe_first_instance(corpus.news), {"US"}, {"MKTMOVE"});
    LexiconClassifier stub;
    std::map<Date, std::array<long long, 4>> counts;
    for (const auto& item : kept) {
        auto& c = counts[week_end(item.published_at)];
        const auto i = stub.judge(item.headline, Topic::Inflation);
        const auto g = stub.judge(item.headline, Topic::EconomicGrowth);
        c[0] += i.up_score - i.down_score > 0.8;
        c[1] += i.up_score - i.down_score < -0.8;
        c[2] += g.up_score - g.down_score > 0.8;
        c[3] += g.up_score - g.down_score < -0.8;
    }
    for (const auto& w : corpus.ledger.weeks) {
        const auto c = counts[w.week_end];
        EXPECT_EQ(c[0], w.infl_c_up) << format_date(w.week_end);
        EXPECT_EQ(c[1], w.infl_c_down);
        EXPECT_EQ(c[2], w.eg_c_up);
        EXPECT_EQ(c[3], w.eg_c_down);
    }
}

TEST(Synth, RegimeCorrelationFollowsLaggedDriver) {
    auto cfg = short_config(9);
    cfg.rho0 = -0.1;
    cfg.kappa = 0.5;
    const auto corpus = generate(cfg);
    const auto& w = corpus.ledger.weeks;
    for (std::size_t k = cfg.lead_weeks; k < w.size(); ++k) {
        EXPECT_NEAR(w[k].regime_corr, cfg.rho0 + cfg.kappa * w[k - cfg.lead_weeks].infl_state, 1e-12);
    }
    for (const auto& row : w) {
        EXPECT_GT(row.infl_state, -1.0);
        EXPECT_LT(row.infl_state, 1.0);
    }
}

TEST(Synth, ZeroSensitivityGivesCenteredTargets) {
    SynthConfig cfg;
    cfg.seed = 42;
    cfg.start = *parse_date("2010-01-04");
    cfg.end = *parse_date("2016-12-31");
    cfg.news_per_week = 5;
    cfg.neutral_per_week = 0;
    cfg.filtered_per_week = 0;
    cfg.kappa = 0.0;
    const auto corpus = generate(cfg);
    const auto t = correlation_change_target(daily_returns(corpus.stock), daily_returns(corpus.bond));
    ASSERT_GE(t.entries.size(), 200u);
    EXPECT_EQ(t.entries.size(), corpus.ledger.expected_anchors);
    double sum = 0;
    for (const auto& e : t.entries) sum += e.delta_corr;
    EXPECT_LT(std::abs(sum / static_cast<double>(t.entries.size())), 0.05);
}

TEST(Synth, ValidationNamesEveryBadField) {
    SynthConfig cfg;
    cfg.rho0 = 0.5;
    cfg.kappa = 0.6;
    cfg.stock_vol = 0.0;
    cfg.news_per_week = -1;
    try {
        cfg.validate();
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("synth_rho0/synth_kappa"), std::string::npos);
        EXPECT_NE(msg.find("synth_stock_vol"), std::string::npos);
        EXPECT_NE(msg.find("synth_news_per_week"), std::string::npos);
        EXPECT_EQ(msg.find("synth_bond_vol"), std::string::npos);
    }
    SynthConfig no_down;
    no_down.lexicon[Topic::Inflation] = {{"prices surge", 1.0, 0.0}};
    EXPECT_THROW(no_down.validate(), ConfigError);
    EXPECT_NO_THROW(SynthConfig{}.validate());
}

TEST(Synth, PricesArePositiveOnBusinessDays) {
    const auto corpus = generate(short_config(10));
    ASSERT_EQ(corpus.stock.dates, corpus.bond.dates);
    for (std::size_t i = 0; i < corpus.stock.size(); ++i) {
        EXPECT_TRUE(is_business_day(corpus.stock.dates[i]));
        EXPECT_GT(corpus.stock.levels[static_cast<Eigen::Index>(i)], 0.0);
        EXPECT_GT(corpus.bond.levels[static_cast<Eigen::Index>(i)], 0.0);
    }
    for (const auto& d : corpus.rates.dates) EXPECT_EQ(iso_weekday(d), 5u);
}

TEST(Synth, LedgerRoundTrip) {
    const auto corpus = generate(short_config(11));
    testutil::TempDir dir;
    save_ledger(corpus.ledger, dir / "ledger.csv");
    EXPECT_EQ(load_ledger(dir / "ledger.csv"), corpus.ledger.weeks);
}
