#include "corrtext/classifier.hpp"
#include "corrtext/errors.hpp"
#include "corrtext/textscore.hpp"
#include "support.hpp"

#include <httplib.h>
#include <json.hpp>
#include <gtest/gtest.h>

#include <atomic>
#include <thread>

using namespace corrtext;

namespace {

void expect_same_table(const LexiconTable& a, const LexiconTable& b) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].term, b[i].term);
        EXPECT_EQ(a[i].up_score, b[i].up_score);
        EXPECT_EQ(a[i].down_score, b[i].down_score);
    }
}

// Counts calls and answers with a fixed judgment per headline length parity.
class CountingClassifier final : public EntailmentClassifier {
public:
    std::string model_id() const override { return "counting"; }
    std::vector<EntailmentJudgment> classify_batch(std::span<const std::string> headlines,
                                                   const HypothesisPair&) override {
        calls += headlines.size();
        std::vector<EntailmentJudgment> out;
        for (const auto& h : headlines) out.push_back(h.size() % 2 ? EntailmentJudgment{0.9, 0.05} : EntailmentJudgment{0.1, 0.95});
        return out;
    }
    std::size_t calls = 0;
};

// In-process stand-in for the entailment service.
class MockService {
public:
    explicit MockService(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
        server_.Post("/v1/classify", [this, handler](const httplib::Request& req, httplib::Response& res) {
            ++requests;
            handler(req, res);
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockService() {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

    std::atomic<int> requests{0};

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

// Scores "up" headlines high on the ascending hypothesis, echoing ids.
void echo_handler(const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json out;
    out["model_id"] = body.at("model_id");
    out["latency_ms"] = 1;
    out["items"] = nlohmann::json::array();
    for (const auto& item : body.at("items")) {
        const bool up = item.at("headline").get<std::string>().find("up") != std::string::npos;
        out["items"].push_back({{"id", item.at("id")}, {"up_score", up ? 0.97 : 0.1}, {"down_score", up ? 0.02 : 0.2}});
    }
    res.set_content(out.dump(), "application/json");
}

}  // namespace

TEST(Hypotheses, CanonicalSentences) {
    const auto infl = HypothesisPair::defaults(Topic::Inflation);
    EXPECT_EQ(infl.ascending, "Inflation rate will increase.");
    EXPECT_EQ(infl.descending, "Inflation rate will decline.");
    const auto eg = HypothesisPair::defaults(Topic::EconomicGrowth);
    EXPECT_EQ(eg.ascending, "Economic growth will increase.");
    EXPECT_EQ(eg.descending, "Economic growth will decline.");
    EXPECT_EQ(parse_topic(topic_name(Topic::EconomicGrowth)), Topic::EconomicGrowth);
    EXPECT_THROW(parse_topic("rates"), DataError);
}

TEST(Lexicon, UpTermGivesFullUpScore) {
    LexiconClassifier stub;
    const auto j = stub.judge("US consumer prices surge most since 1981", Topic::Inflation);
    EXPECT_EQ(j.up_score, 1.0);
    EXPECT_EQ(j.down_score, 0.0);
}

TEST(Lexicon, NoTermIsNeutral) {
    LexiconClassifier stub;
    EXPECT_EQ(stub.judge("Lawmakers debate spending bill", Topic::Inflation), (EntailmentJudgment{0.5, 0.5}));
    EXPECT_EQ(stub.judge("", Topic::EconomicGrowth), (EntailmentJudgment{0.5, 0.5}));
}

TEST(Lexicon, MatchIsCaseInsensitiveWholeWordContiguous) {
    LexiconClassifier stub;
    EXPECT_EQ(stub.judge("PRICES SURGE!", Topic::Inflation).up_score, 1.0);
    EXPECT_EQ(stub.judge("Supplies surge as prices stabilise", Topic::Inflation), (EntailmentJudgment{0.5, 0.5}));
    EXPECT_EQ(stub.judge("Pricesurge reported", Topic::Inflation), (EntailmentJudgment{0.5, 0.5}));
    EXPECT_EQ(stub.judge("Prices surged", Topic::Inflation), (EntailmentJudgment{0.5, 0.5}));
    // a growth term does not move the inflation table
    EXPECT_EQ(stub.judge("Economy expands", Topic::Inflation), (EntailmentJudgment{0.5, 0.5}));
}

TEST(Lexicon, StrongestTermWinsAndEarlierRowBreaksTies) {
    LexiconClassifier stub;
    const auto j = stub.judge("Prices edge higher even as inflation cools", Topic::Inflation);
    EXPECT_EQ(j, (EntailmentJudgment{0.03, 0.95}));
    LexiconClassifier tied({{Topic::Inflation, {{"alpha", 0.9, 0.1}, {"beta", 0.1, 0.9}}}});
    EXPECT_EQ(tied.judge("beta then alpha", Topic::Inflation), (EntailmentJudgment{0.9, 0.1}));
}

TEST(Lexicon, ShippedFilesMatchBuiltInTables) {
    const std::filesystem::path data = CORRTEXT_DATA_DIR;
    expect_same_table(load_lexicon(data / "lexicon_inflation.csv"), default_lexicon(Topic::Inflation));
    expect_same_table(load_lexicon(data / "lexicon_growth.csv"), default_lexicon(Topic::EconomicGrowth));
}

TEST(Lexicon, SaveLoadRoundTrip) {
    testutil::TempDir dir;
    save_lexicon(default_lexicon(Topic::Inflation), dir / "lex.csv");
    expect_same_table(load_lexicon(dir / "lex.csv"), default_lexicon(Topic::Inflation));
}

TEST(Lexicon, RejectsScoresOutsideUnitInterval) {
    testutil::TempDir dir;
    testutil::write_file(dir / "bad.csv", "term,up_score,down_score\nprices surge,1.2,0\n");
    EXPECT_THROW(load_lexicon(dir / "bad.csv"), DataError);
}

TEST(Remote, PostsProtocolAndMapsScoresById) {
    std::string seen_body;
    MockService svc([&](const httplib::Request& req, httplib::Response& res) {
        seen_body = req.body;
        echo_handler(req, res);
    });
    RemoteClassifier remote({svc.url(), "facebook/bart-large-mnli", 64, 5});
    const std::vector<std::string> headlines = {"prices up", "quiet day", "growth up"};
    const auto out = remote.classify_batch(headlines, HypothesisPair::defaults(Topic::Inflation));
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(out[0], (EntailmentJudgment{0.97, 0.02}));
    EXPECT_EQ(out[1], (EntailmentJudgment{0.1, 0.2}));
    EXPECT_EQ(out[2], (EntailmentJudgment{0.97, 0.02}));

    const auto req = nlohmann::json::parse(seen_body);
    EXPECT_EQ(req.at("model_id"), "facebook/bart-large-mnli");
    EXPECT_EQ(req.at("hypotheses").at("ascending"), "Inflation rate will increase.");
    EXPECT_EQ(req.at("hypotheses").at("descending"), "Inflation rate will decline.");
    ASSERT_EQ(req.at("items").size(), 3u);
    EXPECT_EQ(req.at("items")[1].at("headline"), "quiet day");
}

TEST(Remote, SplitsIntoBatches) {
    MockService svc(echo_handler);
    RemoteClassifier remote({svc.url(), "m", 2, 5});
    const std::vector<std::string> headlines = {"a up", "b", "c up", "d", "e"};
    const auto out = remote.classify_batch(headlines, HypothesisPair::defaults(Topic::EconomicGrowth));
    EXPECT_EQ(svc.requests.load(), 3);
    ASSERT_EQ(out.size(), 5u);
    EXPECT_EQ(out[2].up_score, 0.97);
    EXPECT_EQ(out[4].up_score, 0.1);
}

TEST(Remote, OutOfOrderResponseIsMatchedById) {
    MockService svc([](const httplib::Request& req, httplib::Response& res) {
        const auto body = nlohmann::json::parse(req.body);
        nlohmann::json out;
        out["items"] = nlohmann::json::array();
        const auto& items = body.at("items");
        for (auto it = items.rbegin(); it != items.rend(); ++it) {
            const double v = std::stod(it->at("id").get<std::string>()) / 10.0;
            out["items"].push_back({{"id", it->at("id")}, {"up_score", v}, {"down_score", 0.0}});
        }
        res.set_content(out.dump(), "application/json");
    });
    RemoteClassifier remote({svc.url(), "m", 64, 5});
    const std::vector<std::string> headlines = {"x", "y", "z"};
    const auto out = remote.classify_batch(headlines, HypothesisPair::defaults(Topic::Inflation));
    EXPECT_EQ(out[0].up_score, 0.0);
    EXPECT_EQ(out[1].up_score, 0.1);
    EXPECT_EQ(out[2].up_score, 0.2);
}

TEST(Remote, ErrorStatusIsClassifierUnavailable) {
    MockService svc([](const httplib::Request&, httplib::Response& res) {
        res.status = 503;
        res.set_content("{\"detail\":\"model loading\"}", "application/json");
    });
    RemoteClassifier remote({svc.url(), "m", 64, 5});
    const std::vector<std::string> headlines = {"x"};
    EXPECT_THROW(remote.classify_batch(headlines, HypothesisPair::defaults(Topic::Inflation)), ClassifierUnavailable);
}

TEST(Remote, MissingIdIsClassifierUnavailable) {
    MockService svc([](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"items":[{"id":"0","up_score":0.5,"down_score":0.5}]})", "application/json");
    });
    RemoteClassifier remote({svc.url(), "m", 64, 5});
    const std::vector<std::string> headlines = {"x", "y"};
    EXPECT_THROW(remote.classify_batch(headlines, HypothesisPair::defaults(Topic::Inflation)), ClassifierUnavailable);
}

TEST(Remote, MalformedJsonIsClassifierUnavailable) {
    MockService svc([](const httplib::Request&, httplib::Response& res) { res.set_content("not json", "text/plain"); });
    RemoteClassifier remote({svc.url(), "m", 64, 5});
    const std::vector<std::string> headlines = {"x"};
    EXPECT_THROW(remote.classify_batch(headlines, HypothesisPair::defaults(Topic::Inflation)), ClassifierUnavailable);
}

TEST(Remote, UnreachableServiceIsClassifierUnavailable) {
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    RemoteClassifier remote({"http://127.0.0.1:" + std::to_string(port), "m", 64, 1});
    const std::vector<std::string> headlines = {"x"};
    EXPECT_THROW(remote.classify_batch(headlines, HypothesisPair::defaults(Topic::Inflation)), ClassifierUnavailable);
}

TEST(Remote, BatchSizeMustBeInRange) {
    EXPECT_THROW(RemoteClassifier({"http://localhost:1", "m", 0, 5}), ConfigError);
    EXPECT_THROW(RemoteClassifier({"http://localhost:1", "m", 257, 5}), ConfigError);
}

TEST(Remote, NonFiniteScoreIsRejectedByClassify) {
    class NanClassifier final : public EntailmentClassifier {
    public:
        std::string model_id() const override { return "nan"; }
        std::vector<EntailmentJudgment> classify_batch(std::span<const std::string> h, const HypothesisPair&) override {
            return std::vector<EntailmentJudgment>(h.size(), {std::nan(""), 0.0});
        }
    } nan_classifier;
    EXPECT_THROW(classify("x", HypothesisPair::defaults(Topic::Inflation), nan_classifier), ClassifierUnavailable);
}

TEST(Cache, SecondLookupHitsWithoutInnerCalls) {
    CountingClassifier inner;
    CachedClassifier cache(inner, {});
    const std::vector<std::string> headlines = {"one", "three", "one"};
    const auto pair = HypothesisPair::defaults(Topic::Inflation);
    const auto first = cache.classify_batch(headlines, pair);
    const std::size_t calls_after_first = inner.calls;
    const auto second = cache.classify_batch(headlines, pair);
    EXPECT_EQ(first, second);
    EXPECT_EQ(inner.calls, calls_after_first);
    EXPECT_EQ(cache.hits(), 3u);
    EXPECT_EQ(cache.inner_calls(), calls_after_first);
}

TEST(Cache, KeyIncludesHypothesisText) {
    CountingClassifier inner;
    CachedClassifier cache(inner, {});
    const std::vector<std::string> headlines = {"one"};
    cache.classify_batch(headlines, HypothesisPair::defaults(Topic::Inflation));
    cache.classify_batch(headlines, HypothesisPair::defaults(Topic::EconomicGrowth));
    EXPECT_EQ(inner.calls, 2u);
    EXPECT_EQ(cache.hits(), 0u);
}

TEST(Cache, PersistsAcrossInstances) {
    testutil::TempDir dir;
    const auto pair = HypothesisPair::defaults(Topic::Inflation);
    const std::vector<std::string> headlines = {"alpha", "beta"};
    CountingClassifier inner;
    std::vector<EntailmentJudgment> first;
    {
        CachedClassifier cache(inner, dir / "sub" / "cache.tsv");
        first = cache.classify_batch(headlines, pair);
    }
    CountingClassifier fresh;
    CachedClassifier warm(fresh, dir / "sub" / "cache.tsv");
    EXPECT_EQ(warm.classify_batch(headlines, pair), first);
    EXPECT_EQ(fresh.calls, 0u);
    EXPECT_EQ(warm.hits(), 2u);
}

TEST(Cache, ConcurrentCallersAgree) {
    LexiconClassifier stub;
    CachedClassifier cache(stub, {});
    const auto pair = HypothesisPair::defaults(Topic::Inflation);
    const std::vector<std::string> headlines = {"prices surge", "inflation cools", "nothing", "prices edge lower"};
    std::vector<std::thread> threads;
    std::atomic<int> mismatches{0};
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&] {
            for (int k = 0; k < 200; ++k) {
                const auto out = cache.classify_batch(headlines, pair);
                for (std::size_t i = 0; i < headlines.size(); ++i) {
                    if (!(out[i] == stub.judge(headlines[i], Topic::Inflation))) ++mismatches;
                }
            }
        });
    }
    for (auto& th : threads) th.join();
    EXPECT_EQ(mismatches.load(), 0);
    EXPECT_EQ(cache.hits() + cache.misses(), 4u * 200u * headlines.size());
}

TEST(Cache, Fnv1aReferenceValues) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}
