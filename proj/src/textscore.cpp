#include "corrtext/textscore.hpp"

#include "corrtext/csv.hpp"
#include "corrtext/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace corrtext {

namespace {

double clamp_score(double v) {
    if (!std::isfinite(v)) throw ClassifierUnavailable("classifier returned a non-finite score");
    return std::clamp(v, 0.0, 1.0);
}

EntailmentJudgment clamp_judgment(EntailmentJudgment j) {
    return {clamp_score(j.up_score), clamp_score(j.down_score)};
}

}  // namespace

EntailmentJudgment classify(const std::string& headline, const HypothesisPair& pair,
                            EntailmentClassifier& classifier) {
    const auto result = classifier.classify_batch(std::span(&headline, 1), pair);
    if (result.size() != 1) throw ClassifierUnavailable("classifier returned wrong batch size");
    return clamp_judgment(result.front());
}

DirectionLabel label_direction(const EntailmentJudgment& judgment, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw std::invalid_argument("threshold must be in (0,1]");
    }
    const double d = judgment.up_score - judgment.down_score;
    if (d > threshold) return DirectionLabel::Up;
    if (d < -threshold) return DirectionLabel::Down;
    return DirectionLabel::Neutral;
}

std::optional<double> topic_score(long long c_up, long long c_down) {
    const long long total = c_up + c_down;
    if (total == 0) return std::nullopt;
    return static_cast<double>(c_up - c_down) / static_cast<double>(total);
}

WeeklyScore weekly_score(std::span<const std::pair<Timestamp, DirectionLabel>> labels,
                         Date week_end_date) {
    WeeklyScore out;
    for (const auto& [ts, label] : labels) {
        if (week_end(ts) != week_end_date) {
            throw std::invalid_argument("label at " + format_timestamp(ts) +
                                        " outside week ending " + format_date(week_end_date));
        }
        if (label == DirectionLabel::Up) ++out.c_up;
        if (label == DirectionLabel::Down) ++out.c_down;
    }
    out.score = topic_score(out.c_up, out.c_down);
    return out;
}

TopicScoreSeries score_series(const std::vector<NewsItem>& items, EntailmentClassifier& classifier,
                              const HypothesisPair& pair, const ScoreOptions& options) {
    if (options.batch_size == 0) throw std::invalid_argument("batch_size must be positive");
    // validates the threshold even for empty corpora
    label_direction({}, options.threshold);

    TopicScoreSeries series;
    series.topic = pair.topic;

    std::optional<Date> first, last;
    if (options.range) {
        first = week_end(options.range->start);
        last = week_end(options.range->end);
    } else if (!items.empty()) {
        const auto [lo, hi] = std::minmax_element(
            items.begin(), items.end(),
            [](const NewsItem& a, const NewsItem& b) { return a.published_at < b.published_at; });
        first = week_end(lo->published_at);
        last = week_end(hi->published_at);
    }
    if (!first) return series;

    std::map<Date, std::vector<const NewsItem*>> by_week;
    for (const auto& item : items) {
        const Date w = week_end(item.published_at);
        if (w < *first || w > *last) continue;
        by_week[w].push_back(&item);
    }

    for (Date w = *first; w <= *last; w += std::chrono::days{7}) {
        WeeklyEntry entry{w, std::nullopt, 0, 0};
        const auto it = by_week.find(w);
        if (it != by_week.end()) {
            std::vector<std::string> headlines;
            headlines.reserve(it->second.size());
            for (const auto* item : it->second) headlines.push_back(item->headline);
            try {
                for (std::size_t start = 0; start < headlines.size(); start += options.batch_size) {
                    const std::size_t n = std::min(options.batch_size, headlines.size() - start);
                    const auto judgments =
                        classifier.classify_batch(std::span(headlines).subspan(start, n), pair);
                    if (judgments.size() != n) {
                        throw ClassifierUnavailable("classifier returned wrong batch size");
                    }
                    for (const auto& j : judgments) {
                        const auto label = label_direction(clamp_judgment(j), options.threshold);
                        if (label == DirectionLabel::Up) ++entry.c_up;
                        if (label == DirectionLabel::Down) ++entry.c_down;
                    }
                }
            } catch (const ClassifierUnavailable& e) {
                throw ClassifierUnavailable("week ending " + format_date(w) + ": " + e.what());
            }
        }
        entry.score = topic_score(entry.c_up, entry.c_down);
        series.entries.push_back(entry);
    }
    return series;
}

void save_scores(std::span<const TopicScoreSeries> series, const std::filesystem::path& path) {
    CsvWriter out(path);
    out.header({"week_end", "topic", "score", "c_up", "c_down"});
    for (const auto& s : series) {
        for (const auto& e : s.entries) {
            out.field(format_date(e.week_end)).field(topic_name(s.topic));
            if (e.score) {
                out.field(*e.score);
            } else {
                out.empty();
            }
            out.field(e.c_up).field(e.c_down);
            out.end_row();
        }
    }
}

std::vector<TopicScoreSeries> load_scores(const std::filesystem::path& path) {
    CsvReader reader(path);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw DataError("'" + path.string() + "': empty file");
    const CsvHeader header(fields);
    const auto week_col = header.require("week_end", path);
    const auto topic_col = header.require("topic", path);
    const auto up_col = header.require("c_up", path);
    const auto down_col = header.require("c_down", path);

    std::vector<TopicScoreSeries> out;
    while (reader.next(fields)) {
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;
        const auto where = "'" + path.string() + "' line " + std::to_string(reader.line());
        if (fields.size() != header.size()) throw DataError(where + ": wrong field count");
        const auto week = parse_date(trim(fields[week_col]));
        const auto up = parse_integer(fields[up_col]);
        const auto down = parse_integer(fields[down_col]);
        if (!week || !up || !down || *up < 0 || *down < 0) throw DataError(where + ": malformed row");
        const Topic topic = parse_topic(trim(fields[topic_col]));
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const TopicScoreSeries& s) { return s.topic == topic; });
        if (it == out.end()) {
            out.push_back({topic, {}});
            it = std::prev(out.end());
        }
        if (!it->entries.empty() && *week <= it->entries.back().week_end) {
            throw DataError(where + ": weeks not increasing");
        }
        it->entries.push_back({*week, topic_score(*up, *down), *up, *down});
    }
    return out;
}

const TopicScoreSeries& find_topic(std::span<const TopicScoreSeries> series, Topic topic) {
    for (const auto& s : series) {
        if (s.topic == topic) return s;
    }
    throw DataError("no scores for topic '" + topic_name(topic) + "'");
}

}  // namespace corrtext
