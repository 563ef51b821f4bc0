#include "corrtext/errors.hpp"
#include "corrtext/features.hpp"
#include "corrtext/ingest.hpp"
#include "corrtext/synth.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace corrtext;
using namespace std::chrono;

namespace {

const Date kFirst = *parse_date("2020-01-05");

TopicScoreSeries series(Topic topic, const std::vector<std::optional<double>>& scores, Date first = kFirst) {
    TopicScoreSeries s;
    s.topic = topic;
    for (std::size_t k = 0; k < scores.size(); ++k) {
        s.entries.push_back({first + days{7 * static_cast<int>(k)}, scores[k], 0, 0});
    }
    return s;
}

RateSeries weekly_rates(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0, 0.1);
    RateSeries r;
    std::vector<double> v;
    double level = 2.0;
    // Fridays, starting a few weeks before the score grid
    for (Date d = kFirst - days{30}; d < kFirst + days{7 * static_cast<int>(n)}; d += days{7}) {
        r.dates.push_back(d);
        level += z(rng);
        v.push_back(level);
    }
    r.rates = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    return r;
}

// Straight loops over optionals; shares nothing with the library code.
struct Oracle {
    std::vector<std::optional<double>> si, se;
    const RateSeries* rates;

    static std::vector<std::optional<double>> ffill(const std::vector<std::optional<double>>& v, std::size_t cap) {
        std::vector<std::optional<double>> out(v.size());
        std::optional<double> last;
        std::size_t since = 0;
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (v[k]) {
                last = v[k];
                since = 0;
                out[k] = v[k];
            } else {
                ++since;
                if (last && since <= cap) out[k] = last;
            }
        }
        return out;
    }

    static std::optional<double> dev(const std::vector<std::optional<double>>& s, std::size_t k) {
        if (k < 11) return std::nullopt;
        double sum = 0;
        for (std::size_t j = k - 11; j <= k; ++j) {
            if (!s[j]) return std::nullopt;
            sum += *s[j];
        }
        return *s[k] - sum / 12.0;
    }

    static std::optional<std::vector<double>> deltas(const std::vector<std::optional<double>>& s, std::size_t k) {
        if (k < 12) return std::nullopt;
        std::vector<double> d;
        for (std::size_t j = k - 11; j <= k; ++j) {
            if (!s[j] || !s[j - 1]) return std::nullopt;
            d.push_back(*s[j] - *s[j - 1]);
        }
        return d;
    }

    static double mean(const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    }

    static double pstd(const std::vector<double>& v) {
        const double m = mean(v);
        double s = 0;
        for (double x : v) s += (x - m) * (x - m);
        return std::sqrt(s / static_cast<double>(v.size()));
    }

    std::optional<double> rate_at(Date d) const {
        std::optional<double> out;
        for (std::size_t i = 0; i < rates->dates.size(); ++i) {
            if (rates->dates[i] <= d) out = rates->rates[static_cast<Eigen::Index>(i)];
        }
        return out;
    }

    std::map<std::string, std::optional<double>> at(std::size_t k) const {
        std::map<std::string, std::optional<double>> f;
        f["infl_score"] = si[k];
        f["eg_score"] = se[k];
        f["infl_dev12"] = dev(si, k);
        f["eg_dev12"] = dev(se, k);
        const auto di = deltas(si, k), de = deltas(se, k);
        if (di && de) {
            const double mi = mean(*di), me = mean(*de);
            double sxy = 0, sxx = 0, syy = 0;
            for (std::size_t j = 0; j < di->size(); ++j) {
                sxy += ((*di)[j] - mi) * ((*de)[j] - me);
                sxx += ((*di)[j] - mi) * ((*di)[j] - mi);
                syy += ((*de)[j] - me) * ((*de)[j] - me);
            }
            if (sxx > 0 && syy > 0) f["corr_infl_eg_12"] = sxy / std::sqrt(sxx * syy);
            f["vol_ratio_infl_eg_12"] = pstd(*di) / (pstd(*de) + 1e-9);
        }
        const Date w = kFirst + days{7 * static_cast<int>(k)};
        const auto now = rate_at(w), then = rate_at(w - days{91});
        f["ff_rate"] = now;
        if (now && then) f["ff_rate_diff_3m"] = *now - *then;
        return f;
    }
};

std::vector<std::optional<double>> random_scores(std::mt19937_64& rng, std::size_t n, double missing_rate) {
    std::uniform_real_distribution<double> u(-1, 1), coin(0, 1);
    std::vector<std::optional<double>> out;
    for (std::size_t k = 0; k < n; ++k) {
        if (coin(rng) < missing_rate) {
            out.emplace_back();
        } else {
            out.emplace_back(u(rng));
        }
    }
    return out;
}

FeatureMatrix toy_matrix() {
    FeatureMatrix m;
    m.names = {"a", "b"};
    m.x.resize(4, 2);
    m.x << 1, kMissing, 2, 5, kMissing, 7, 4, 1;
    m.y = Eigen::Vector4d(0.1, -0.2, 0.3, 0.0);
    for (int i = 0; i < 4; ++i) {
        m.weeks.push_back(kFirst + days{7 * i});
        m.label_window_end.push_back(kFirst + days{7 * i + 180});
    }
    return m;
}

}  // namespace

TEST(BuildFeatures, MatchesIndependentOracle) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        std::mt19937_64 rng(seed);
        const std::size_t n = 160;
        const auto raw_i = random_scores(rng, n, 0.1);
        const auto raw_e = random_scores(rng, n, 0.1);
        const auto rates = weekly_rates(n, seed);
        const auto table = build_features(series(Topic::Inflation, raw_i), series(Topic::EconomicGrowth, raw_e), &rates,
                                          nullptr);
        const Oracle oracle{Oracle::ffill(raw_i, 8), Oracle::ffill(raw_e, 8), &rates};
        ASSERT_EQ(table.rows(), n);
        for (std::size_t k = 0; k < n; ++k) {
            const auto expect = oracle.at(k);
            const auto got = table.row(k);
            EXPECT_EQ(got.week_end, kFirst + days{7 * static_cast<int>(k)});
            for (const auto& name : table.names) {
                const double g = got.values.at(name);
                const auto it = expect.find(name);
                const std::optional<double> e = it == expect.end() ? std::nullopt : it->second;
                if (!e) {
                    EXPECT_TRUE(std::isnan(g)) << name << " week " << k;
                } else {
                    ASSERT_FALSE(std::isnan(g)) << name << " week " << k;
                    EXPECT_NEAR(g, *e, 1e-12) << name << " week " << k;
                }
            }
        }
    }
}

TEST(BuildFeatures, ConstantScoresGiveZeroDeviation) {
    const std::vector<std::optional<double>> flat(40, 0.3);
    FeatureOptions opt;
    opt.include_rates = false;
    const auto t = build_features(series(Topic::Inflation, flat), series(Topic::EconomicGrowth, flat), nullptr, nullptr, opt);
    for (std::size_t k = 11; k < t.rows(); ++k) {
        EXPECT_NEAR(t.row(k).values.at("infl_dev12"), 0.0, 1e-15);
        EXPECT_NEAR(t.row(k).values.at("eg_dev12"), 0.0, 1e-15);
    }
    EXPECT_TRUE(std::isnan(t.row(10).values.at("infl_dev12")));
}

TEST(BuildFeatures, IdenticalChangesGiveUnitCorrelationAndRatio) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    std::vector<std::optional<double>> a, b;
    for (int k = 0; k < 60; ++k) {
        const double v = u(rng);
        a.emplace_back(v);
        b.emplace_back(v + 0.5);
    }
    FeatureOptions opt;
    opt.include_rates = false;
    const auto t = build_features(series(Topic::Inflation, a), series(Topic::EconomicGrowth, b), nullptr, nullptr, opt);
    for (std::size_t k = 12; k < t.rows(); ++k) {
        EXPECT_NEAR(t.row(k).values.at("corr_infl_eg_12"), 1.0, 1e-12);
        EXPECT_NEAR(t.row(k).values.at("vol_ratio_infl_eg_12"), 1.0, 1e-7);
    }
}

TEST(BuildFeatures, VolRatioInvariantToShift) {
    std::mt19937_64 rng(4);
    const auto a = random_scores(rng, 80, 0.0);
    const auto b = random_scores(rng, 80, 0.0);
    std::vector<std::optional<double>> a2;
    for (const auto& v : a) a2.emplace_back(*v - 0.25);
    FeatureOptions opt;
    opt.include_rates = false;
    const auto t1 = build_features(series(Topic::Inflation, a), series(Topic::EconomicGrowth, b), nullptr, nullptr, opt);
    const auto t2 = build_features(series(Topic::Inflation, a2), series(Topic::EconomicGrowth, b), nullptr, nullptr, opt);
    for (std::size_t k = 12; k < t1.rows(); ++k) {
        EXPECT_NEAR(t1.row(k).values.at("vol_ratio_infl_eg_12"), t2.row(k).values.at("vol_ratio_infl_eg_12"), 1e-12);
        EXPECT_GE(t1.row(k).values.at("vol_ratio_infl_eg_12"), 0.0);
    }
}

TEST(BuildFeatures, ForwardFillStopsAfterCap) {
    Eigen::VectorXd v(14);
    v << 1, kMissing, kMissing, kMissing, kMissing, kMissing, kMissing, kMissing, kMissing, kMissing, 2, kMissing,
        kMissing, kMissing;
    const auto f = forward_fill(v, 8);
    for (int k = 1; k <= 8; ++k) EXPECT_EQ(f[k], 1.0);
    EXPECT_TRUE(std::isnan(f[9]));
    EXPECT_EQ(f[13], 2.0);
    Eigen::VectorXd leading(3);
    leading << kMissing, 0.5, kMissing;
    const auto g = forward_fill(leading, 8);
    EXPECT_TRUE(std::isnan(g[0]));
    EXPECT_EQ(g[2], 0.5);
}

TEST(BuildFeatures, Causal) {
    std::mt19937_64 rng(5);
    const std::size_t n = 120;
    const auto a = random_scores(rng, n, 0.15);
    const auto b = random_scores(rng, n, 0.15);
    const auto rates = weekly_rates(n, 5);
    const auto full = build_features(series(Topic::Inflation, a), series(Topic::EconomicGrowth, b), &rates, nullptr);
    for (std::size_t cut : {20u, 57u, 119u}) {
        const std::vector<std::optional<double>> pa(a.begin(), a.begin() + cut + 1), pb(b.begin(), b.begin() + cut + 1);
        RateSeries pr;
        std::vector<double> v;
        for (std::size_t i = 0; i < rates.dates.size(); ++i) {
            if (rates.dates[i] > full.weeks[cut]) break;
            pr.dates.push_back(rates.dates[i]);
            v.push_back(rates.rates[static_cast<Eigen::Index>(i)]);
        }
        pr.rates = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        const auto part = build_features(series(Topic::Inflation, pa), series(Topic::EconomicGrowth, pb), &pr, nullptr);
        ASSERT_EQ(part.rows(), cut + 1);
        for (Eigen::Index c = 0; c < full.values.cols(); ++c) {
            const double x = full.values(static_cast<Eigen::Index>(cut), c);
            const double y = part.values(static_cast<Eigen::Index>(cut), c);
            EXPECT_TRUE((std::isnan(x) && std::isnan(y)) || x == y) << full.names[c];
        }
    }
}

TEST(BuildFeatures, MinutesFeatures) {
    const std::vector<std::optional<double>> flat(30, 0.1);
    testutil::TempDir dir;
    testutil::write_file(dir / "minutes.csv", "date,infl_score,eg_score\n2020-01-01,0.2,-0.1\n2020-03-01,0.5,0.3\n");
    const auto minutes = load_minutes(dir / "minutes.csv");
    FeatureOptions opt;
    opt.include_rates = false;
    opt.include_minutes = true;
    const auto t = build_features(series(Topic::Inflation, flat), series(Topic::EconomicGrowth, flat), nullptr, &minutes, opt);
    const auto first = t.row(0);
    EXPECT_EQ(first.values.at("minutes_infl"), 0.2);
    EXPECT_TRUE(std::isnan(first.values.at("minutes_infl_diff_3m")));
    // 2020-04-05: now 0.5 (March), 13 weeks earlier 2020-01-05 -> 0.2
    const auto later = t.row(13);
    EXPECT_EQ(later.week_end, *parse_date("2020-04-05"));
    EXPECT_NEAR(later.values.at("minutes_infl_diff_3m"), 0.3, 1e-15);
    EXPECT_NEAR(later.values.at("minutes_eg_diff_3m"), 0.4, 1e-15);
    EXPECT_THROW(build_features(series(Topic::Inflation, flat), series(Topic::EconomicGrowth, flat), nullptr, nullptr, opt),
                 DataError);
}

TEST(Assemble, InnerJoinOnWeek) {
    std::vector<std::optional<double>> s(10, 0.2);
    FeatureOptions opt;
    opt.include_rates = false;
    const auto t = build_features(series(Topic::Inflation, s), series(Topic::EconomicGrowth, s), nullptr, nullptr, opt);
    TargetSeries targets;
    // Fridays of weeks 3..10 of the grid
    for (int k = 2; k < 10; ++k) {
        const Date friday = kFirst + days{7 * k - 2};
        targets.entries.push_back({friday, 0.01 * k, friday + days{180}});
    }
    const auto m = assemble_dataset(t, targets);
    ASSERT_EQ(m.rows(), 8u);
    EXPECT_EQ(m.weeks.front(), kFirst + days{14});
    EXPECT_EQ(m.y[0], 0.02);
    EXPECT_EQ(m.label_window_end[0], targets.entries[0].label_window_end);
}

TEST(Assemble, DisjointRangesAreFatal) {
    std::vector<std::optional<double>> s(10, 0.2);
    FeatureOptions opt;
    opt.include_rates = false;
    const auto t = build_features(series(Topic::Inflation, s), series(Topic::EconomicGrowth, s), nullptr, nullptr, opt);
    TargetSeries targets;
    targets.entries.push_back({*parse_date("2024-05-03"), 0.1, *parse_date("2024-11-01")});
    try {
        assemble_dataset(t, targets);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("2024-05-03"), std::string::npos);
    }
}

TEST(Assemble, SynthRowsEqualExpectedAnchors) {
    SynthConfig cfg;
    cfg.seed = 21;
    cfg.start = *parse_date("2015-01-05");
    cfg.end = *parse_date("2018-12-30");
    cfg.news_per_week = 20;
    const auto corpus = generate(cfg);
    const auto kept = filter_topics(dedupe_first_instance(corpus.news), {"US"}, {"MKTMOVE"});
    LexiconClassifier stub;
    ScoreOptions so;
    so.range = DateRange{cfg.start, cfg.end};
    const auto infl = score_series(kept, stub, HypothesisPair::defaults(Topic::Inflation), so);
    const auto eg = score_series(kept, stub, HypothesisPair::defaults(Topic::EconomicGrowth), so);
    const auto table = build_features(infl, eg, &corpus.rates, nullptr);
    const auto targets = correlation_change_target(daily_returns(corpus.stock), daily_returns(corpus.bond));
    const auto m = assemble_dataset(table, targets);
    EXPECT_EQ(m.rows(), corpus.ledger.expected_anchors);
    EXPECT_GT(m.rows(), 50u);
}

TEST(LeakageGuard, StrictInequality) {
    const auto m = toy_matrix();
    const Date cutoff = m.label_window_end[2];
    const auto g = leakage_guard(m, cutoff);
    ASSERT_EQ(g.rows(), 2u);
    for (const auto& d : g.label_window_end) EXPECT_LT(d, cutoff);
    EXPECT_EQ(leakage_guard(m, m.label_window_end[1] + days{1}).rows(), 2u);
    EXPECT_EQ(leakage_guard(m, m.label_window_end[1]).rows(), 1u);
}

TEST(LeakageGuard, Idempotent) {
    const auto m = toy_matrix();
    for (int k = 0; k < 6; ++k) {
        const Date c = m.label_window_end[0] + days{5 * k};
        const auto once = leakage_guard(m, c);
        const auto twice = leakage_guard(once, c);
        EXPECT_EQ(once.weeks, twice.weeks);
    }
}

TEST(Medians, ImputeUsesColumnMedian) {
    const auto m = toy_matrix();
    const auto med = column_medians(m);
    EXPECT_EQ(med[0], 2.0);
    EXPECT_EQ(med[1], 5.0);
    const auto x = impute(m.x, med);
    EXPECT_EQ(x(2, 0), 2.0);
    EXPECT_EQ(x(0, 1), 5.0);
    EXPECT_EQ(x(3, 0), 4.0);
    EXPECT_EQ(m.complete_rows().rows(), 2u);
}

TEST(FeatureFile, RoundTripKeepsMissing) {
    const auto m = toy_matrix();
    testutil::TempDir dir;
    save_feature_matrix(m, dir / "f.csv");
    const auto back = load_feature_matrix(dir / "f.csv");
    EXPECT_EQ(back.names, m.names);
    EXPECT_EQ(back.weeks, m.weeks);
    EXPECT_EQ(back.label_window_end, m.label_window_end);
    EXPECT_EQ(back.y, m.y);
    for (Eigen::Index r = 0; r < m.x.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.x.cols(); ++c) {
            if (std::isnan(m.x(r, c))) {
                EXPECT_TRUE(std::isnan(back.x(r, c)));
            } else {
                EXPECT_EQ(back.x(r, c), m.x(r, c));
            }
        }
    }
}
