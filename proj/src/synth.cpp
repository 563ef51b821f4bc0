#include "corrtext/synth.hpp"

#include "corrtext/csv.hpp"
#include "corrtext/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

namespace corrtext {

namespace {

constexpr std::size_t kBurnInWeeks = 300;

constexpr std::array<const char*, 12> kMonths = {"January", "February", "March",     "April",
                                                 "May",     "June",     "July",      "August",
                                                 "September", "October", "November", "December"};
constexpr std::array<const char*, 5> kSources = {"survey shows", "report says", "officials say",
                                                 "analysts note", "data show"};
constexpr std::array<const char*, 8> kFiller = {
    "Treasury auction draws steady demand", "Lawmakers debate spending bill",
    "Central bank officials meet in Washington", "Retail earnings season begins",
    "Trade delegation arrives for talks", "Housing starts data due next week",
    "Commodity traders eye weather forecasts", "Bond dealers prepare for quarter end"};

struct TermSets {
    std::vector<std::string> up;
    std::vector<std::string> down;
    std::vector<std::string> weak;
};

TermSets split_terms(const LexiconTable& table, double threshold) {
    TermSets s;
    for (const auto& e : table) {
        const double d = e.up_score - e.down_score;
        if (d > threshold) {
            s.up.push_back(e.term);
        } else if (d < -threshold) {
            s.down.push_back(e.term);
        } else {
            s.weak.push_back(e.term);
        }
    }
    return s;
}

std::string capitalize(std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

// Unit-variance AR(2) with complex roots of modulus r and the given period.
std::vector<double> cyclical_state(std::mt19937_64& rng, std::size_t n, double r, double period) {
    const double w = 2.0 * std::numbers::pi / period;
    const double a1 = 2.0 * r * std::cos(w);
    const double a2 = -r * r;
    const double var = (1.0 - a2) / ((1.0 + a2) * ((1.0 - a2) * (1.0 - a2) - a1 * a1));
    const double sd = std::sqrt(var);
    std::normal_distribution<double> norm(0.0, 1.0);
    std::vector<double> x(n, 0.0);
    for (std::size_t t = 2; t < n; ++t) x[t] = a1 * x[t - 1] + a2 * x[t - 2] + norm(rng);
    for (auto& v : x) v = std::tanh(v / sd);
    return x;
}

template <typename Seq>
const auto& pick(std::mt19937_64& rng, const Seq& seq) {
    std::uniform_int_distribution<std::size_t> u(0, seq.size() - 1);
    return seq[u(rng)];
}

class NewsWriter {
public:
    NewsWriter(std::mt19937_64& rng, std::vector<NewsItem>& out) : rng_(rng), out_(out) {}

    void set_week(Timestamp lo, Timestamp hi) {
        lo_ = lo;
        hi_ = hi;
    }

    Timestamp random_time() {
        std::uniform_int_distribution<long long> u(0, (hi_ - lo_).count());
        return lo_ + std::chrono::seconds{u(rng_)};
    }

    void add(std::string headline, std::set<std::string> codes, double duplicate_probability) {
        NewsItem item;
        item.id = "n" + std::to_string(++seq_);
        item.dedup_key = "s" + std::to_string(seq_);
        item.published_at = random_time();
        item.headline = std::move(headline);
        item.topic_codes = std::move(codes);
        std::bernoulli_distribution dup(duplicate_probability);
        const bool duplicate = dup(rng_);
        out_.push_back(item);
        if (duplicate) {
            NewsItem copy = std::move(item);
            copy.id += "r";
            std::uniform_int_distribution<long long> delay(60, 6 * 3600);
            copy.published_at = std::min(hi_, copy.published_at + std::chrono::seconds{delay(rng_)});
            out_.push_back(std::move(copy));
        }
    }

private:
    std::mt19937_64& rng_;
    std::vector<NewsItem>& out_;
    Timestamp lo_{};
    Timestamp hi_{};
    long long seq_ = 0;
};

std::string headline_for(std::mt19937_64& rng, const std::string& term, Date week) {
    const unsigned month = static_cast<unsigned>(std::chrono::year_month_day{week}.month());
    return capitalize(term) + " in " + kMonths[month - 1] + ", " + pick(rng, kSources);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw IoError("cannot write '" + path.string() + "'");
}

}  // namespace

void SynthConfig::validate() const {
    std::vector<std::string> bad;
    if (!(start < end)) bad.push_back("synth_start/synth_end");
    if (!(news_per_week > 0.0) || !std::isfinite(news_per_week)) bad.push_back("synth_news_per_week");
    if (!(neutral_per_week >= 0.0) || !std::isfinite(neutral_per_week)) bad.push_back("synth_neutral_per_week");
    if (!(filtered_per_week >= 0.0) || !std::isfinite(filtered_per_week)) bad.push_back("synth_filtered_per_week");
    if (!(duplicate_probability >= 0.0 && duplicate_probability <= 1.0)) bad.push_back("synth_duplicate_probability");
    if (!(threshold > 0.0 && threshold <= 1.0)) bad.push_back("threshold");
    if (!(std::abs(rho0) + std::abs(kappa) <= 0.99)) bad.push_back("synth_rho0/synth_kappa");
    if (!(stock_vol > 0.0) || !std::isfinite(stock_vol)) bad.push_back("synth_stock_vol");
    if (!(bond_vol > 0.0) || !std::isfinite(bond_vol)) bad.push_back("synth_bond_vol");
    if (!(state_radius > 0.0 && state_radius < 1.0)) bad.push_back("synth_state_radius");
    if (!(state_period_weeks > 2.0) || !std::isfinite(state_period_weeks)) bad.push_back("synth_state_period_weeks");
    if (lead_weeks >= kBurnInWeeks) bad.push_back("synth_lead_weeks");
    if (!(std::abs(rate_persistence) < 1.0)) bad.push_back("synth_rate_persistence");
    if (!(rate_vol >= 0.0) || !std::isfinite(rate_vol)) bad.push_back("synth_rate_vol");
    for (Topic t : {Topic::Inflation, Topic::EconomicGrowth}) {
        const auto it = lexicon.find(t);
        if (it == lexicon.end()) {
            bad.push_back("lexicon_" + topic_name(t));
            continue;
        }
        const TermSets s = split_terms(it->second, threshold);
        if (s.up.empty() || s.down.empty()) bad.push_back("lexicon_" + topic_name(t));
    }
    if (bad.empty()) return;
    std::string msg = "invalid synth configuration:";
    for (const auto& b : bad) msg += " " + b;
    throw ConfigError(msg);
}

SynthCorpus generate(const SynthConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    SynthCorpus corpus;

    const Date first_week = week_end(config.start);
    const Date last_week = week_end(config.end);
    const auto n_weeks = static_cast<std::size_t>((last_week - first_week).count() / 7 + 1);
    const std::size_t n_states = n_weeks + kBurnInWeeks;

    const auto infl = cyclical_state(rng, n_states, config.state_radius, config.state_period_weeks);
    const auto eg = cyclical_state(rng, n_states, config.state_radius, config.state_period_weeks);
    const auto& driver = config.driver == Topic::Inflation ? infl : eg;

    const TermSets infl_terms = split_terms(config.lexicon.at(Topic::Inflation), config.threshold);
    const TermSets eg_terms = split_terms(config.lexicon.at(Topic::EconomicGrowth), config.threshold);

    std::poisson_distribution<long long> directional(config.news_per_week);
    std::poisson_distribution<long long> neutral(std::max(config.neutral_per_week, 1e-12));
    std::poisson_distribution<long long> filtered(std::max(config.filtered_per_week, 1e-12));
    NewsWriter news(rng, corpus.news);

    const Timestamp corpus_lo{std::chrono::sys_days{config.start}};
    const Timestamp corpus_hi = Timestamp{std::chrono::sys_days{config.end}} + std::chrono::seconds{86399};

    std::vector<double> week_rho(n_weeks);
    for (std::size_t w = 0; w < n_weeks; ++w) {
        const Date sunday = first_week + std::chrono::days{7 * static_cast<long>(w)};
        const std::size_t k = w + kBurnInWeeks;
        const Timestamp lo = std::max(corpus_lo, Timestamp{std::chrono::sys_days{sunday - std::chrono::days{6}}});
        const Timestamp hi = std::min(corpus_hi, Timestamp{std::chrono::sys_days{sunday}} + std::chrono::seconds{86399});
        news.set_week(lo, hi);

        SynthWeek row;
        row.week_end = sunday;
        row.infl_state = infl[k];
        row.eg_state = eg[k];
        row.regime_corr = config.rho0 + config.kappa * driver[k - config.lead_weeks];
        week_rho[w] = row.regime_corr;

        for (Topic topic : {Topic::Inflation, Topic::EconomicGrowth}) {
            const double s = topic == Topic::Inflation ? infl[k] : eg[k];
            const TermSets& terms = topic == Topic::Inflation ? infl_terms : eg_terms;
            const long long n = directional(rng);
            std::binomial_distribution<long long> ups(n, (1.0 + s) / 2.0);
            const long long c_up = ups(rng);
            const long long c_down = n - c_up;
            for (long long i = 0; i < c_up; ++i) {
                news.add(headline_for(rng, pick(rng, terms.up), sunday), {"US", "ECON"},
                         config.duplicate_probability);
            }
            for (long long i = 0; i < c_down; ++i) {
                news.add(headline_for(rng, pick(rng, terms.down), sunday), {"US", "ECON"},
                         config.duplicate_probability);
            }
            if (topic == Topic::Inflation) {
                row.infl_c_up = c_up;
                row.infl_c_down = c_down;
            } else {
                row.eg_c_up = c_up;
                row.eg_c_down = c_down;
            }
        }

        const long long n_neutral = config.neutral_per_week > 0.0 ? neutral(rng) : 0;
        for (long long i = 0; i < n_neutral; ++i) {
            std::bernoulli_distribution weak(0.5);
            if (weak(rng)) {
                const TermSets& terms = (i % 2 == 0) ? infl_terms : eg_terms;
                if (!terms.weak.empty()) {
                    news.add(headline_for(rng, pick(rng, terms.weak), sunday), {"US", "ECON"},
                             config.duplicate_probability);
                    continue;
                }
            }
            news.add(pick(rng, kFiller), {"US"}, config.duplicate_probability);
        }

        const long long n_filtered = config.filtered_per_week > 0.0 ? filtered(rng) : 0;
        for (long long i = 0; i < n_filtered; ++i) {
            const TermSets& terms = (i % 2 == 0) ? infl_terms : eg_terms;
            std::bernoulli_distribution up(0.5);
            const std::string& term = up(rng) ? pick(rng, terms.up) : pick(rng, terms.down);
            std::bernoulli_distribution market(0.5);
            if (market(rng)) {
                news.add("Stocks move as " + term + ", " + pick(rng, kSources), {"US", "MKTMOVE"},
                         config.duplicate_probability);
            } else {
                news.add("Euro area " + term + ", " + pick(rng, kSources), {"EU", "ECON"},
                         config.duplicate_probability);
            }
        }
        corpus.ledger.weeks.push_back(row);
    }
    std::stable_sort(corpus.news.begin(), corpus.news.end(),
                     [](const NewsItem& a, const NewsItem& b) { return a.published_at < b.published_at; });

    // Prices on Monday..Friday with the week's correlation.
    corpus.stock.asset_id = "stock";
    corpus.bond.asset_id = "bond";
    std::vector<Date> days;
    for (Date d = config.start; d <= config.end; d += std::chrono::days{1}) {
        if (is_business_day(d)) days.push_back(d);
    }
    std::normal_distribution<double> norm(0.0, 1.0);
    std::vector<double> stock(days.size()), bond(days.size());
    double ls = 100.0, lb = 100.0;
    for (std::size_t i = 0; i < days.size(); ++i) {
        if (i > 0) {
            const auto w = static_cast<std::size_t>((week_end(days[i]) - first_week).count() / 7);
            const double rho = week_rho[w];
            const double e1 = norm(rng);
            const double e2 = norm(rng);
            ls *= 1.0 + config.stock_vol * e1;
            lb *= 1.0 + config.bond_vol * (rho * e1 + std::sqrt(1.0 - rho * rho) * e2);
        }
        stock[i] = ls;
        bond[i] = lb;
    }
    corpus.stock.dates = days;
    corpus.stock.levels = Eigen::Map<Eigen::VectorXd>(stock.data(), static_cast<Eigen::Index>(stock.size()));
    corpus.bond.dates = days;
    corpus.bond.levels = Eigen::Map<Eigen::VectorXd>(bond.data(), static_cast<Eigen::Index>(bond.size()));

    // Weekly (Friday) policy rate, quickly mean-reverting around rate_mean.
    double rate = config.rate_mean;
    std::vector<double> rates;
    for (const Date d : days) {
        if (iso_weekday(d) != 5) continue;
        rate = config.rate_mean + config.rate_persistence * (rate - config.rate_mean) + config.rate_vol * norm(rng);
        corpus.rates.dates.push_back(d);
        rates.push_back(rate);
    }
    corpus.rates.rates = Eigen::Map<Eigen::VectorXd>(rates.data(), static_cast<Eigen::Index>(rates.size()));

    // Returns start on the second business day; anchors are the last return day
    // of each week with `horizon` days on both sides.
    const std::size_t horizon = 125;
    const std::size_t n_ret = days.size() > 0 ? days.size() - 1 : 0;
    for (std::size_t i = 0; i < n_ret; ++i) {
        const bool last_of_week = i + 1 == n_ret || week_end(days[i + 1]) != week_end(days[i + 2]);
        if (last_of_week && i + 1 >= horizon && i + horizon < n_ret) ++corpus.ledger.expected_anchors;
    }
    return corpus;
}

SynthCorpus generate(const SynthConfig& config, const std::filesystem::path& out_dir) {
    SynthCorpus corpus = generate(config);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

    save_news(corpus.news, out_dir / "news.csv");
    save_price_series(corpus.stock, out_dir / "stock.csv");
    save_price_series(corpus.bond, out_dir / "bond.csv");
    save_rate_series(corpus.rates, out_dir / "rates.csv");
    save_ledger(corpus.ledger, out_dir / "ledger.csv");
    save_lexicon(config.lexicon.at(Topic::Inflation), out_dir / "lexicon_inflation.csv");
    save_lexicon(config.lexicon.at(Topic::EconomicGrowth), out_dir / "lexicon_growth.csv");

    std::string conf;
    conf += "# generated by corrtext synth (seed " + std::to_string(config.seed) + ")\n";
    conf += "region = US\n";
    conf += "news = news.csv\n";
    conf += "stock_prices = stock.csv\n";
    conf += "bond_prices = bond.csv\n";
    conf += "rates = rates.csv\n";
    conf += "lexicon_inflation = lexicon_inflation.csv\n";
    conf += "lexicon_growth = lexicon_growth.csv\n";
    conf += "cache = out/classifier_cache.tsv\n";
    conf += "out_dir = out\n";
    conf += "required_codes = US\n";
    conf += "excluded_codes = MKTMOVE\n";
    conf += "threshold = " + format_double(config.threshold) + "\n";
    conf += "corpus_start = " + format_date(config.start) + "\n";
    conf += "corpus_end = " + format_date(config.end) + "\n";
    conf += "train_start = " + format_date(config.start) + "\n";
    conf += "eval_start = " + format_date(config.eval_start) + "\n";
    conf += "eval_end = " + format_date(config.eval_end) + "\n";
    write_text(out_dir / "pipeline.conf", conf);
    return corpus;
}

void save_ledger(const SynthLedger& ledger, const std::filesystem::path& path) {
    CsvWriter w(path);
    w.header({"week_end", "infl_state", "eg_state", "infl_c_up", "infl_c_down", "eg_c_up", "eg_c_down",
              "regime_corr"});
    for (const auto& r : ledger.weeks) {
        w.field(format_date(r.week_end));
        w.field(r.infl_state);
        w.field(r.eg_state);
        w.field(r.infl_c_up);
        w.field(r.infl_c_down);
        w.field(r.eg_c_up);
        w.field(r.eg_c_down);
        w.field(r.regime_corr);
        w.end_row();
    }
}

std::vector<SynthWeek> load_ledger(const std::filesystem::path& path) {
    CsvReader reader(path);
    std::vector<std::string> f;
    if (!reader.next(f)) throw DataError("'" + path.string() + "' is empty");
    const CsvHeader h(f);
    const std::array<std::size_t, 8> c = {
        h.require("week_end", path),  h.require("infl_state", path), h.require("eg_state", path),
        h.require("infl_c_up", path), h.require("infl_c_down", path), h.require("eg_c_up", path),
        h.require("eg_c_down", path), h.require("regime_corr", path)};
    std::vector<SynthWeek> out;
    while (reader.next(f)) {
        const auto bad = [&] { return DataError(path.string() + ":" + std::to_string(reader.line()) + ": malformed row"); };
        if (f.size() < h.size()) throw bad();
        SynthWeek r;
        const auto d = parse_date(f[c[0]]);
        const auto is = parse_double(f[c[1]]);
        const auto es = parse_double(f[c[2]]);
        const auto iu = parse_integer(f[c[3]]);
        const auto id = parse_integer(f[c[4]]);
        const auto eu = parse_integer(f[c[5]]);
        const auto ed = parse_integer(f[c[6]]);
        const auto rc = parse_double(f[c[7]]);
        if (!d || !is || !es || !iu || !id || !eu || !ed || !rc) throw bad();
        out.push_back({*d, *is, *es, *iu, *id, *eu, *ed, *rc});
    }
    return out;
}

}  // namespace corrtext
