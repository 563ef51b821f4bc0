#pragma once

#include "corrtext/classifier.hpp"
#include "corrtext/dates.hpp"
#include "corrtext/ingest.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace corrtext {

struct SynthConfig {
    std::uint64_t seed = 42;
    Date start = std::chrono::sys_days{std::chrono::year{1994} / 1 / 3};
    Date end = std::chrono::sys_days{std::chrono::year{2024} / 6 / 30};
    Date eval_start = std::chrono::sys_days{std::chrono::year{2019} / 1 / 1};
    Date eval_end = std::chrono::sys_days{std::chrono::year{2023} / 12 / 31};

    // Mean directional headlines per topic per week.
    double news_per_week = 100.0;
    // Mean headlines per week that must not move any score: weak or no lexicon
    // terms, market-move or non-US items, and re-transmissions.
    double neutral_per_week = 20.0;
    double filtered_per_week = 4.0;
    double duplicate_probability = 0.05;
    double threshold = 0.8;
    std::map<Topic, LexiconTable> lexicon = {{Topic::Inflation, default_lexicon(Topic::Inflation)},
                                             {Topic::EconomicGrowth, default_lexicon(Topic::EconomicGrowth)}};

    // Daily correlation in week w is rho0 + kappa * state_driver(w - lead_weeks).
    double rho0 = 0.0;
    double kappa = 0.6;
    Topic driver = Topic::Inflation;
    std::size_t lead_weeks = 13;
    double stock_vol = 0.01;
    double bond_vol = 0.004;

    // Latent states: tanh of a unit-variance AR(2) cycle.
    double state_radius = 0.98;
    double state_period_weeks = 52.0;

    double rate_mean = 2.0;
    double rate_persistence = 0.3;
    double rate_vol = 0.05;

    // Throws ConfigError naming every invalid field.
    void validate() const;
};

struct SynthWeek {
    Date week_end;
    double infl_state = 0.0;
    double eg_state = 0.0;
    long long infl_c_up = 0;
    long long infl_c_down = 0;
    long long eg_c_up = 0;
    long long eg_c_down = 0;
    double regime_corr = 0.0;

    bool operator==(const SynthWeek&) const = default;
};

struct SynthLedger {
    std::vector<SynthWeek> weeks;
    // Weekly anchors with a full past and future return window.
    std::size_t expected_anchors = 0;
};

struct SynthCorpus {
    std::vector<NewsItem> news;  // sorted by published_at
    PriceSeries stock;
    PriceSeries bond;
    RateSeries rates;
    SynthLedger ledger;
};

SynthCorpus generate(const SynthConfig& config);

// Writes news.csv, stock.csv, bond.csv, rates.csv, ledger.csv, both lexicon files
// and a pipeline.conf pointing at them.
SynthCorpus generate(const SynthConfig& config, const std::filesystem::path& out_dir);

void save_ledger(const SynthLedger& ledger, const std::filesystem::path& path);
std::vector<SynthWeek> load_ledger(const std::filesystem::path& path);

}  // namespace corrtext
