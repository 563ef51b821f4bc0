#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace corrtext {

enum class Topic { Inflation, EconomicGrowth };

std::string topic_name(Topic topic);
Topic parse_topic(std::string_view name);

struct HypothesisPair {
    Topic topic = Topic::Inflation;
    std::string ascending;
    std::string descending;

    // The canonical rising/falling statements for a topic.
    static HypothesisPair defaults(Topic topic);
};

struct EntailmentJudgment {
    double up_score = 0.5;
    double down_score = 0.5;

    bool operator==(const EntailmentJudgment&) const = default;
};

class EntailmentClassifier {
public:
    virtual ~EntailmentClassifier() = default;

    virtual std::string model_id() const = 0;

    // One judgment per headline, in input order. May throw ClassifierUnavailable.
    virtual std::vector<EntailmentJudgment> classify_batch(std::span<const std::string> headlines,
                                                           const HypothesisPair& pair) = 0;
};

struct LexiconEntry {
    std::string term;
    double up_score = 0.5;
    double down_score = 0.5;
};

using LexiconTable = std::vector<LexiconEntry>;

// CSV: term,up_score,down_score
LexiconTable load_lexicon(const std::filesystem::path& path);
void save_lexicon(const LexiconTable& table, const std::filesystem::path& path);
LexiconTable default_lexicon(Topic topic);

// Deterministic stand-in for an NLI model. A term matches when its words appear
// as a contiguous whole-word run in the headline, case-insensitively. Among
// matching terms the one with the largest |up - down| wins (earlier table rows
// win ties). No match yields (0.5, 0.5).
class LexiconClassifier final : public EntailmentClassifier {
public:
    LexiconClassifier();
    explicit LexiconClassifier(std::map<Topic, LexiconTable> tables);

    std::string model_id() const override { return "lexicon-stub-v1"; }
    std::vector<EntailmentJudgment> classify_batch(std::span<const std::string> headlines,
                                                   const HypothesisPair& pair) override;

    EntailmentJudgment judge(const std::string& headline, Topic topic) const;

private:
    struct CompiledTerm {
        std::vector<std::string> words;
        EntailmentJudgment judgment;
        double strength = 0.0;
    };
    std::map<Topic, std::vector<CompiledTerm>> tables_;
};

// Client for the entailment service's POST /v1/classify endpoint.
class RemoteClassifier final : public EntailmentClassifier {
public:
    struct Options {
        std::string base_url;  // e.g. http://localhost:8000
        std::string model_id = "facebook/bart-large-mnli";
        std::size_t batch_size = 64;
        int timeout_seconds = 60;
    };

    explicit RemoteClassifier(Options options);

    std::string model_id() const override { return options_.model_id; }
    std::vector<EntailmentJudgment> classify_batch(std::span<const std::string> headlines,
                                                   const HypothesisPair& pair) override;

private:
    Options options_;
};

// Persistent memo in front of another classifier, keyed by
// (headline hash, hypothesis text, model id). One score per hypothesis, so both
// the ascending and descending entries must be present for a hit.
class CachedClassifier final : public EntailmentClassifier {
public:
    // An empty path keeps the cache in memory only.
    CachedClassifier(EntailmentClassifier& inner, std::filesystem::path cache_file);
    ~CachedClassifier() override;

    CachedClassifier(const CachedClassifier&) = delete;
    CachedClassifier& operator=(const CachedClassifier&) = delete;

    std::string model_id() const override { return inner_.model_id(); }
    std::vector<EntailmentJudgment> classify_batch(std::span<const std::string> headlines,
                                                   const HypothesisPair& pair) override;

    // Appends entries computed since the last flush to the cache file.
    void flush();

    std::size_t hits() const;
    std::size_t misses() const;
    // Headlines forwarded to the wrapped classifier.
    std::size_t inner_calls() const;

private:
    std::string key(const std::string& headline, const std::string& hypothesis) const;

    EntailmentClassifier& inner_;
    std::filesystem::path path_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, double> entries_;
    std::vector<std::pair<std::string, double>> pending_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
    std::size_t inner_calls_ = 0;
};

std::uint64_t fnv1a64(std::string_view text);

}  // namespace corrtext
