#pragma once

#include "corrtext/classifier.hpp"
#include "corrtext/dates.hpp"
#include "corrtext/ingest.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace corrtext {

inline constexpr double kDefaultThreshold = 0.8;

enum class DirectionLabel { Up, Down, Neutral };

// Scores are clamped into [0,1]; non-finite scores raise ClassifierUnavailable.
EntailmentJudgment classify(const std::string& headline, const HypothesisPair& pair,
                            EntailmentClassifier& classifier);

// Up when up - down exceeds threshold, Down when it falls below -threshold.
DirectionLabel label_direction(const EntailmentJudgment& judgment,
                               double threshold = kDefaultThreshold);

struct WeeklyScore {
    std::optional<double> score;  // missing when no directional items
    long long c_up = 0;
    long long c_down = 0;

    bool operator==(const WeeklyScore&) const = default;
};

// (c_up - c_down) / (c_up + c_down), missing when both counts are zero.
std::optional<double> topic_score(long long c_up, long long c_down);

// All labels must fall in the Monday..Sunday week closing on week_end.
WeeklyScore weekly_score(std::span<const std::pair<Timestamp, DirectionLabel>> labels,
                         Date week_end);

struct WeeklyEntry {
    Date week_end;
    std::optional<double> score;
    long long c_up = 0;
    long long c_down = 0;

    bool operator==(const WeeklyEntry&) const = default;
};

struct TopicScoreSeries {
    Topic topic = Topic::Inflation;
    std::vector<WeeklyEntry> entries;  // consecutive Sundays

    bool operator==(const TopicScoreSeries&) const = default;
};

struct ScoreOptions {
    double threshold = kDefaultThreshold;
    // Weeks to emit; defaults to the weeks spanned by the items.
    std::optional<DateRange> range;
    std::size_t batch_size = 64;
};

TopicScoreSeries score_series(const std::vector<NewsItem>& items, EntailmentClassifier& classifier,
                              const HypothesisPair& pair, const ScoreOptions& options = {});

// CSV: week_end,topic,score,c_up,c_down (empty score when missing).
void save_scores(std::span<const TopicScoreSeries> series, const std::filesystem::path& path);
std::vector<TopicScoreSeries> load_scores(const std::filesystem::path& path);
const TopicScoreSeries& find_topic(std::span<const TopicScoreSeries> series, Topic topic);

}  // namespace corrtext
