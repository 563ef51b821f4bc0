#include "corrtext/classifier.hpp"

#include "corrtext/csv.hpp"
#include "corrtext/errors.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace corrtext {

namespace {

std::vector<std::string> words_of(std::string_view text) {
    std::vector<std::string> words;
    std::string current;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c == '\'' || c >= 0x80) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            words.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) words.push_back(std::move(current));
    return words;
}

bool contains_run(const std::vector<std::string>& haystack, const std::vector<std::string>& needle) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) !=
           haystack.end();
}

}  // namespace

std::string topic_name(Topic topic) {
    return topic == Topic::Inflation ? "inflation" : "economic_growth";
}

Topic parse_topic(std::string_view name) {
    if (name == "inflation") return Topic::Inflation;
    if (name == "economic_growth") return Topic::EconomicGrowth;
    throw DataError("unknown topic '" + std::string(name) + "'");
}

HypothesisPair HypothesisPair::defaults(Topic topic) {
    if (topic == Topic::Inflation) {
        return {topic, "Inflation rate will increase.", "Inflation rate will decline."};
    }
    return {topic, "Economic growth will increase.", "Economic growth will decline."};
}

LexiconTable load_lexicon(const std::filesystem::path& path) {
    CsvReader reader(path);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw DataError("'" + path.string() + "': empty lexicon");
    const CsvHeader header(fields);
    const auto term_col = header.require("term", path);
    const auto up_col = header.require("up_score", path);
    const auto down_col = header.require("down_score", path);

    LexiconTable table;
    while (reader.next(fields)) {
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;
        const auto where = "'" + path.string() + "' line " + std::to_string(reader.line());
        if (fields.size() != header.size()) throw DataError(where + ": wrong field count");
        auto up = parse_double(fields[up_col]);
        auto down = parse_double(fields[down_col]);
        if (!up || !down || *up < 0.0 || *up > 1.0 || *down < 0.0 || *down > 1.0) {
            throw DataError(where + ": scores must be numbers in [0,1]");
        }
        std::string term = trim(fields[term_col]);
        if (term.empty()) throw DataError(where + ": empty term");
        table.push_back({std::move(term), *up, *down});
    }
    return table;
}

void save_lexicon(const LexiconTable& table, const std::filesystem::path& path) {
    CsvWriter out(path);
    out.header({"term", "up_score", "down_score"});
    for (const auto& e : table) {
        out.field(e.term).field(e.up_score).field(e.down_score);
        out.end_row();
    }
}

LexiconTable default_lexicon(Topic topic) {
    if (topic == Topic::Inflation) {
        return {
            {"prices surge", 1.0, 0.0},
            {"inflation accelerates", 0.97, 0.02},
            {"inflation jumps", 0.95, 0.03},
            {"price pressures build", 0.93, 0.04},
            {"prices edge higher", 0.7, 0.25},
            {"prices tumble", 0.0, 1.0},
            {"inflation slows", 0.02, 0.97},
            {"inflation cools", 0.03, 0.95},
            {"price pressures ease", 0.04, 0.93},
            {"prices edge lower", 0.25, 0.7},
        };
    }
    return {
        {"economy expands", 1.0, 0.0},
        {"growth accelerates", 0.97, 0.02},
        {"hiring booms", 0.95, 0.03},
        {"output strengthens", 0.93, 0.04},
        {"activity edges up", 0.7, 0.25},
        {"economy contracts", 0.0, 1.0},
        {"growth slows", 0.02, 0.97},
        {"layoffs mount", 0.03, 0.95},
        {"output weakens", 0.04, 0.93},
        {"activity edges down", 0.25, 0.7},
    };
}

LexiconClassifier::LexiconClassifier()
    : LexiconClassifier({{Topic::Inflation, default_lexicon(Topic::Inflation)},
                         {Topic::EconomicGrowth, default_lexicon(Topic::EconomicGrowth)}}) {}

LexiconClassifier::LexiconClassifier(std::map<Topic, LexiconTable> tables) {
    for (auto& [topic, table] : tables) {
        auto& compiled = tables_[topic];
        for (const auto& entry : table) {
            CompiledTerm term;
            term.words = words_of(entry.term);
            term.judgment = {entry.up_score, entry.down_score};
            term.strength = std::abs(entry.up_score - entry.down_score);
            if (!term.words.empty()) compiled.push_back(std::move(term));
        }
    }
}

EntailmentJudgment LexiconClassifier::judge(const std::string& headline, Topic topic) const {
    const auto it = tables_.find(topic);
    if (it == tables_.end()) return {};
    const auto words = words_of(headline);
    const CompiledTerm* best = nullptr;
    for (const auto& term : it->second) {
        if ((best == nullptr || term.strength > best->strength) && contains_run(words, term.words)) {
            best = &term;
        }
    }
    return best ? best->judgment : EntailmentJudgment{};
}

std::vector<EntailmentJudgment> LexiconClassifier::classify_batch(
    std::span<const std::string> headlines, const HypothesisPair& pair) {
    std::vector<EntailmentJudgment> out;
    out.reserve(headlines.size());
    for (const auto& h : headlines) out.push_back(judge(h, pair.topic));
    return out;
}

RemoteClassifier::RemoteClassifier(Options options) : options_(std::move(options)) {
    if (options_.batch_size == 0 || options_.batch_size > 256) {
        throw ConfigError("batch_size must be in [1,256]");
    }
}

std::vector<EntailmentJudgment> RemoteClassifier::classify_batch(
    std::span<const std::string> headlines, const HypothesisPair& pair) {
    httplib::Client client(options_.base_url);
    client.set_connection_timeout(options_.timeout_seconds, 0);
    client.set_read_timeout(options_.timeout_seconds, 0);

    std::vector<EntailmentJudgment> out(headlines.size());
    for (std::size_t start = 0; start < headlines.size(); start += options_.batch_size) {
        const std::size_t stop = std::min(headlines.size(), start + options_.batch_size);
        nlohmann::json request;
        request["model_id"] = options_.model_id;
        request["hypotheses"] = {{"ascending", pair.ascending}, {"descending", pair.descending}};
        auto& items = request["items"] = nlohmann::json::array();
        for (std::size_t i = start; i < stop; ++i) {
            items.push_back({{"id", std::to_string(i)}, {"headline", headlines[i]}});
        }

        auto res = client.Post("/v1/classify", request.dump(), "application/json");
        if (!res) {
            throw ClassifierUnavailable("classifier service at " + options_.base_url +
                                        " unreachable: " + httplib::to_string(res.error()));
        }
        if (res->status != 200) {
            throw ClassifierUnavailable("classifier service returned HTTP " +
                                        std::to_string(res->status) + ": " + res->body);
        }

        std::vector<bool> filled(stop - start, false);
        try {
            const auto body = nlohmann::json::parse(res->body);
            for (const auto& item : body.at("items")) {
                const auto id = std::stoull(item.at("id").get<std::string>());
                if (id < start || id >= stop || filled[id - start]) {
                    throw ClassifierUnavailable("unexpected item id in classifier response");
                }
                filled[id - start] = true;
                out[id] = {item.at("up_score").get<double>(), item.at("down_score").get<double>()};
            }
        } catch (const nlohmann::json::exception& e) {
            throw ClassifierUnavailable(std::string("malformed classifier response: ") + e.what());
        } catch (const std::logic_error& e) {
            throw ClassifierUnavailable(std::string("malformed classifier response: ") + e.what());
        }
        if (std::find(filled.begin(), filled.end(), false) != filled.end()) {
            throw ClassifierUnavailable("classifier response is missing items");
        }
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

CachedClassifier::CachedClassifier(EntailmentClassifier& inner, std::filesystem::path cache_file)
    : inner_(inner), path_(std::move(cache_file)) {
    if (path_.empty() || !std::filesystem::exists(path_)) return;
    std::ifstream in(path_);
    std::string line;
    // key fields are tab-separated; the score is the last field. Later lines win.
    while (std::getline(in, line)) {
        const auto tab = line.rfind('\t');
        if (tab == std::string::npos) continue;
        if (auto v = parse_double(std::string_view(line).substr(tab + 1))) {
            entries_[line.substr(0, tab)] = *v;
        }
    }
}

CachedClassifier::~CachedClassifier() {
    try {
        flush();
    } catch (...) {
    }
}

std::string CachedClassifier::key(const std::string& headline, const std::string& hypothesis) const {
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(headline)));
    std::string k = hash;
    k += '\t';
    for (char c : hypothesis) k.push_back(c == '\t' || c == '\n' ? ' ' : c);
    k += '\t';
    k += inner_.model_id();
    return k;
}

std::vector<EntailmentJudgment> CachedClassifier::classify_batch(
    std::span<const std::string> headlines, const HypothesisPair& pair) {
    std::vector<EntailmentJudgment> out(headlines.size());
    std::vector<std::size_t> missing;
    std::vector<std::string> missing_text;
    {
        std::lock_guard lock(mutex_);
        for (std::size_t i = 0; i < headlines.size(); ++i) {
            const auto up = entries_.find(key(headlines[i], pair.ascending));
            const auto down = entries_.find(key(headlines[i], pair.descending));
            if (up != entries_.end() && down != entries_.end()) {
                out[i] = {up->second, down->second};
                ++hits_;
            } else {
                missing.push_back(i);
                missing_text.push_back(headlines[i]);
                ++misses_;
            }
        }
    }
    if (missing.empty()) return out;

    const auto fresh = inner_.classify_batch(missing_text, pair);
    std::lock_guard lock(mutex_);
    inner_calls_ += missing.size();
    for (std::size_t j = 0; j < missing.size(); ++j) {
        out[missing[j]] = fresh[j];
        auto up_key = key(missing_text[j], pair.ascending);
        auto down_key = key(missing_text[j], pair.descending);
        entries_[up_key] = fresh[j].up_score;
        entries_[down_key] = fresh[j].down_score;
        pending_.emplace_back(std::move(up_key), fresh[j].up_score);
        pending_.emplace_back(std::move(down_key), fresh[j].down_score);
    }
    return out;
}

void CachedClassifier::flush() {
    std::lock_guard lock(mutex_);
    if (path_.empty() || pending_.empty()) return;
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::string buffer;
    for (const auto& [k, v] : pending_) {
        buffer += k;
        buffer += '\t';
        buffer += format_double(v);
        buffer += '\n';
    }
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) throw IoError("cannot append to cache '" + path_.string() + "'");
    out << buffer;
    out.flush();
    if (!out) throw IoError("cannot append to cache '" + path_.string() + "'");
    pending_.clear();
}

std::size_t CachedClassifier::hits() const {
    std::lock_guard lock(mutex_);
    return hits_;
}

std::size_t CachedClassifier::misses() const {
    std::lock_guard lock(mutex_);
    return misses_;
}

std::size_t CachedClassifier::inner_calls() const {
    std::lock_guard lock(mutex_);
    return inner_calls_;
}

}  // namespace corrtext
