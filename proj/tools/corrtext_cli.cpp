#include "corrtext/errors.hpp"
#include "corrtext/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace corrtext;

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kData = 2, kClassifier = 3 };

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string classifier;
};

RunConfig resolve_config(const Options& o) {
    RunConfig cfg = o.config.empty() ? parse_config("", std::filesystem::current_path())
                                     : load_config(o.config);
    std::vector<std::string> errors;
    const auto cwd = std::filesystem::current_path();
    if (!o.out.empty()) {
        if (auto e = set_config_value(cfg, "out_dir", o.out, cwd)) errors.push_back("--out: " + *e);
    }
    if (o.seed) cfg.synth.seed = *o.seed;
    if (!o.classifier.empty()) cfg.classifier = o.classifier;
    if (!errors.empty()) throw ConfigError(errors.front());
    cfg.validate();
    return cfg;
}

void print_rmse(const EvaluateResult& r, const std::string& region) {
    std::cout << "region " << region << ": " << r.weeks << " weeks\n"
              << "  bm1      " << r.rmse_bm1 << "\n"
              << "  bm2      " << r.rmse_bm2 << "\n"
              << "  proposed " << r.rmse_proposed << "\n";
}

int run(const std::string& name, const Options& o) {
    const RunConfig cfg = resolve_config(o);
    if (name == "score") {
        const auto s = run_score(cfg);
        std::cout << "scored " << s.kept << " of " << s.loaded << " headlines (" << s.rejected
                  << " rejected); cache hits " << s.cache_hits << ", classifier calls " << s.classifier_calls
                  << "\n";
    } else if (name == "targets") {
        run_targets(cfg);
        std::cout << "wrote " << Artifacts{cfg.out_dir}.targets().string() << "\n";
    } else if (name == "features") {
        const auto m = run_features(cfg);
        std::cout << "wrote " << m.rows() << " rows x " << m.cols() << " features\n";
    } else if (name == "train") {
        const auto model = run_train(cfg);
        std::cout << "trained " << model.trees.size() << " trees\n";
    } else if (name == "evaluate") {
        print_rmse(run_evaluate(cfg), cfg.region);
    } else if (name == "shap") {
        const auto report = run_shap(cfg);
        for (const auto& [f, v] : report.ranking) std::cout << f << "\t" << v << "\n";
    } else if (name == "fig1") {
        const auto corr = run_fig1(cfg);
        std::cout << "wrote " << corr.entries.size() << " monthly correlations\n";
    } else if (name == "synth") {
        const auto corpus = run_synth(cfg);
        std::cout << "wrote " << corpus.news.size() << " headlines, " << corpus.stock.size() << " trading days to "
                  << cfg.out_dir.string() << "\n";
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Text-based stock-bond correlation forecasting"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--config", o.config, "key = value configuration file");
    app.add_option("--out", o.out, "output directory (overrides out_dir)");
    app.add_option("--seed", o.seed, "synthetic corpus seed");
    app.add_option("--classifier", o.classifier, "entailment backend")->check(CLI::IsMember({"stub", "remote"}));

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"score", "score news headlines into weekly topic scores"},
        {"targets", "build correlation-change targets from prices"},
        {"features", "assemble the weekly feature matrix"},
        {"train", "fit the tree ensemble on pre-evaluation rows"},
        {"evaluate", "walk-forward evaluation against both benchmarks"},
        {"shap", "SHAP attribution report for the trained model"},
        {"fig1", "rolling 24-month correlation of monthly returns"},
        {"synth", "generate a synthetic corpus and pipeline.conf"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kValidation;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        return run(name, o);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const ClassifierUnavailable& e) {
        std::cerr << "classifier unavailable: " << e.what() << "\n";
        return kClassifier;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    }
}
