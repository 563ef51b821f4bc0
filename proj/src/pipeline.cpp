#include "corrtext/pipeline.hpp"

#include "corrtext/errors.hpp"
#include "corrtext/svg.hpp"
#include "corrtext/textscore.hpp"

#include <algorithm>
#include <cmath>

namespace corrtext {

namespace {

const std::filesystem::path& require_path(const std::filesystem::path& p, const char* key) {
    if (p.empty()) throw ConfigError(std::string("missing required key '") + key + "'");
    return p;
}

Artifacts artifacts(const RunConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create '" + cfg.out_dir.string() + "': " + ec.message());
    return {cfg.out_dir};
}

std::optional<DateRange> corpus_range(const RunConfig& cfg) {
    if (!cfg.corpus_start && !cfg.corpus_end) return std::nullopt;
    return DateRange{cfg.corpus_start.value_or(Date{std::chrono::days{-100000}}),
                     cfg.corpus_end.value_or(Date{std::chrono::days{100000}})};
}

LexiconTable lexicon_or_default(const std::filesystem::path& path, Topic topic) {
    return path.empty() ? default_lexicon(topic) : load_lexicon(path);
}

double days_since_epoch(Date d) { return static_cast<double>(d.time_since_epoch().count()); }

void plot_scores(const std::vector<TopicScoreSeries>& series, const std::filesystem::path& path) {
    std::vector<svg::Series> lines;
    for (const auto& s : series) {
        svg::Series line{topic_name(s.topic), {}, {}};
        for (const auto& e : s.entries) {
            line.x.push_back(days_since_epoch(e.week_end));
            line.y.push_back(e.score.value_or(std::nan("")));
        }
        lines.push_back(std::move(line));
    }
    svg::ChartOptions o;
    o.title = "Weekly topic scores";
    o.x_label = "week";
    o.y_label = "score";
    o.x_is_date = true;
    svg::line_chart(lines, o, path);
}

void plot_corr(const CorrSeries& corr, const std::string& title, const std::filesystem::path& path) {
    svg::Series line{"correlation", {}, {}};
    for (const auto& e : corr.entries) {
        line.x.push_back(days_since_epoch(e.date));
        line.y.push_back(e.corr);
    }
    svg::ChartOptions o;
    o.title = title;
    o.x_label = "date";
    o.y_label = "correlation";
    o.x_is_date = true;
    svg::line_chart({line}, o, path);
}

void plot_ranking(const ShapReport& report, const std::filesystem::path& path) {
    svg::ChartOptions o;
    o.title = "Mean |SHAP| by feature";
    o.x_label = "mean |SHAP|";
    svg::bar_chart(report.ranking, o, path);
}

CorrSeries rolling_from_prices(const RunConfig& cfg) {
    const auto stock = load_price_series(require_path(cfg.stock_prices, "stock_prices"));
    const auto bond = load_price_series(require_path(cfg.bond_prices, "bond_prices"));
    return rolling_correlation(daily_returns(stock), daily_returns(bond), cfg.horizon);
}

}  // namespace

std::unique_ptr<EntailmentClassifier> make_classifier(const RunConfig& cfg) {
    if (cfg.classifier == "remote") {
        RemoteClassifier::Options o;
        o.base_url = cfg.classifier_url;
        o.model_id = cfg.classifier_model;
        o.batch_size = cfg.batch_size;
        o.timeout_seconds = cfg.classifier_timeout;
        return std::make_unique<RemoteClassifier>(o);
    }
    return std::make_unique<LexiconClassifier>(std::map<Topic, LexiconTable>{
        {Topic::Inflation, lexicon_or_default(cfg.lexicon_inflation, Topic::Inflation)},
        {Topic::EconomicGrowth, lexicon_or_default(cfg.lexicon_growth, Topic::EconomicGrowth)}});
}

ScoreStats run_score(const RunConfig& cfg) {
    auto classifier = make_classifier(cfg);
    return run_score(cfg, *classifier);
}

ScoreStats run_score(const RunConfig& cfg, EntailmentClassifier& classifier) {
    const Artifacts art = artifacts(cfg);
    const auto loaded = load_news(require_path(cfg.news, "news"), corpus_range(cfg));
    ScoreStats stats;
    stats.loaded = loaded.items.size() + loaded.errors.size();
    stats.rejected = loaded.errors.size();
    const auto items =
        filter_topics(dedupe_first_instance(loaded.items), cfg.required_codes, cfg.excluded_codes);
    stats.kept = items.size();

    ScoreOptions opts;
    opts.threshold = cfg.threshold;
    opts.batch_size = cfg.batch_size;
    opts.range = corpus_range(cfg);
    if (opts.range && !items.empty()) {
        // open-ended bounds fall back to the corpus span
        if (!cfg.corpus_start) opts.range->start = date_of(items.front().published_at);
        if (!cfg.corpus_end) opts.range->end = date_of(items.back().published_at);
    }

    CachedClassifier cached(classifier, cfg.cache);
    std::vector<TopicScoreSeries> series;
    for (Topic t : {Topic::Inflation, Topic::EconomicGrowth}) {
        series.push_back(score_series(items, cached, HypothesisPair::defaults(t), opts));
    }
    cached.flush();
    stats.cache_hits = cached.hits();
    stats.cache_misses = cached.misses();
    stats.classifier_calls = cached.inner_calls();
    save_scores(series, art.scores());
    return stats;
}

void run_targets(const RunConfig& cfg) {
    const Artifacts art = artifacts(cfg);
    const auto stock = load_price_series(require_path(cfg.stock_prices, "stock_prices"));
    const auto bond = load_price_series(require_path(cfg.bond_prices, "bond_prices"));
    const auto ra = daily_returns(stock);
    const auto rb = daily_returns(bond);
    save_targets(correlation_change_target(ra, rb, cfg.horizon), art.targets());
    save_corr(rolling_correlation(ra, rb, cfg.horizon), art.corr());
}

FeatureMatrix run_features(const RunConfig& cfg) {
    const Artifacts art = artifacts(cfg);
    if (!std::filesystem::exists(art.scores())) run_score(cfg);
    if (!std::filesystem::exists(art.targets())) run_targets(cfg);
    const auto scores = load_scores(art.scores());
    const auto targets = load_targets(art.targets());

    std::optional<RateSeries> rates;
    if (cfg.features.include_rates) rates = load_rate_series(require_path(cfg.rates, "rates"));
    std::optional<MinutesSeries> minutes;
    if (cfg.features.include_minutes) minutes = load_minutes(require_path(cfg.minutes, "minutes"));

    const FeatureTable table =
        build_features(find_topic(scores, Topic::Inflation), find_topic(scores, Topic::EconomicGrowth),
                       rates ? &*rates : nullptr, minutes ? &*minutes : nullptr, cfg.features);
    FeatureMatrix m = assemble_dataset(table, targets);
    save_feature_matrix(m, art.features());
    return m;
}

FeatureMatrix training_rows(const FeatureMatrix& m, const RunConfig& cfg) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (cfg.train_start && m.weeks[i] < *cfg.train_start) continue;
        if (cfg.eval_start && !(m.label_window_end[i] < *cfg.eval_start)) continue;
        keep.push_back(i);
    }
    return m.select_rows(keep);
}

GBTModel run_train(const RunConfig& cfg) {
    const Artifacts art = artifacts(cfg);
    const FeatureMatrix m =
        std::filesystem::exists(art.features()) ? load_feature_matrix(art.features()) : run_features(cfg);
    GBTModel model = train(training_rows(m, cfg), cfg.gbt);
    save_model(model, art.model());
    return model;
}

EvaluateResult run_evaluate(const RunConfig& cfg) {
    if (!cfg.eval_start || !cfg.eval_end) throw ConfigError("evaluate requires eval_start and eval_end");
    const Artifacts art = artifacts(cfg);
    const FeatureMatrix m =
        std::filesystem::exists(art.features()) ? load_feature_matrix(art.features()) : run_features(cfg);
    const auto targets = load_targets(art.targets());

    const Date train_start = cfg.train_start.value_or(m.weeks.empty() ? *cfg.eval_start : m.weeks.front());
    const auto sched = annual_schedule(train_start, *cfg.eval_start, *cfg.eval_end);

    EvaluateResult result;
    result.walk_forward = walk_forward(m, sched, cfg.gbt);

    PredictionLog all = result.walk_forward.log;
    const CorrSeries corr = rolling_from_prices(cfg);
    const auto in_eval = [&](const PredictionRow& r) {
        return !(r.week_end < *cfg.eval_start) && !(*cfg.eval_end < r.week_end);
    };
    for (const auto& r : bm1_predict(targets, corr)) {
        if (in_eval(r)) all.rows.push_back(r);
    }
    for (const auto& r : bm2_predict(targets)) {
        if (in_eval(r)) all.rows.push_back(r);
    }
    result.log = restrict_to_common_weeks(all);
    if (result.log.rows.empty()) throw DataError("no evaluation week has predictions from all models");

    emit_report(result.log, cfg.region, art.dir);
    result.rmse_bm1 = rmse(result.log, kBm1Id);
    result.rmse_bm2 = rmse(result.log, kBm2Id);
    result.rmse_proposed = rmse(result.log, kProposedId);
    result.weeks = result.log.for_model(kProposedId).size();

    plot_scores(load_scores(art.scores()), art.dir / "scores.svg");
    plot_corr(corr, "Rolling " + std::to_string(cfg.horizon) + "-day stock-bond correlation",
              art.dir / "correlation.svg");
    if (!result.walk_forward.retrains.empty()) {
        const auto& last = result.walk_forward.retrains.back();
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (std::find(last.train_weeks.begin(), last.train_weeks.end(), m.weeks[i]) != last.train_weeks.end()) {
                rows.push_back(i);
            }
        }
        const ShapReport report = shap_report(last.model, m.select_rows(rows));
        save_shap_report(report, art.shap_dir());
        plot_ranking(report, art.dir / "shap_ranking.svg");
    }
    return result;
}

ShapReport run_shap(const RunConfig& cfg) {
    const Artifacts art = artifacts(cfg);
    const GBTModel model = std::filesystem::exists(art.model()) ? load_model(art.model()) : run_train(cfg);
    const FeatureMatrix all =
        std::filesystem::exists(art.features()) ? load_feature_matrix(art.features()) : run_features(cfg);
    const FeatureMatrix m = training_rows(all, cfg).complete_rows();
    const ShapReport report = shap_report(model, m);
    save_shap_report(report, art.shap_dir());
    plot_ranking(report, art.shap_dir() / "shap_ranking.svg");
    for (const auto& name : report.names) {
        svg::Series pts{name, {}, {}};
        for (const auto& [v, phi] : report.dependence(name)) {
            pts.x.push_back(v);
            pts.y.push_back(phi);
        }
        svg::ChartOptions o;
        o.title = "SHAP dependence: " + name;
        o.x_label = name;
        o.y_label = "SHAP value";
        svg::scatter_chart(pts, o, art.shap_dir() / ("shap_dependence_" + name + ".svg"));
    }
    return report;
}

CorrSeries run_fig1(const RunConfig& cfg) {
    const Artifacts art = artifacts(cfg);
    const auto stock = load_price_series(require_path(cfg.stock_prices, "stock_prices"));
    const auto bond = load_price_series(require_path(cfg.bond_prices, "bond_prices"));
    CorrSeries corr = replicate_fig1(stock, bond);
    save_corr(corr, art.dir / "fig1.csv");
    plot_corr(corr, "Rolling 24-month stock-bond correlation", art.dir / "fig1.svg");
    return corr;
}

SynthCorpus run_synth(const RunConfig& cfg) {
    return generate(cfg.synth, cfg.out_dir);
}

}  // namespace corrtext
