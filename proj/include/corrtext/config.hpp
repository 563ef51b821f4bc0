#pragma once

#include "corrtext/dates.hpp"
#include "corrtext/features.hpp"
#include "corrtext/gbt.hpp"
#include "corrtext/synth.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace corrtext {

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// Reads the process environment.
std::optional<std::string> process_env(const std::string& name);

struct RunConfig {
    std::filesystem::path news;
    std::filesystem::path stock_prices;
    std::filesystem::path bond_prices;
    std::filesystem::path rates;
    std::filesystem::path minutes;
    std::filesystem::path lexicon_inflation;
    std::filesystem::path lexicon_growth;
    std::filesystem::path cache;
    std::filesystem::path out_dir = "out";

    std::string region = "US";
    std::string classifier = "stub";  // stub | remote
    std::string classifier_url;
    std::string classifier_model = "facebook/bart-large-mnli";
    std::size_t batch_size = 64;
    int classifier_timeout = 60;

    double threshold = 0.8;
    std::size_t horizon = 125;
    std::set<std::string> required_codes;
    std::set<std::string> excluded_codes;
    std::optional<Date> corpus_start;
    std::optional<Date> corpus_end;

    FeatureOptions features;
    GBTParams gbt;
    std::optional<Date> train_start;
    std::optional<Date> eval_start;
    std::optional<Date> eval_end;

    SynthConfig synth;

    // Every recognized key, in documentation order.
    static const std::vector<std::string>& keys();

    // Throws ConfigError listing every offending key.
    void validate() const;
};

// Flat `key = value` lines; '#' starts a comment. Relative paths resolve against
// base_dir. Environment variables CORRTEXT_<KEY> (upper case) override file
// values. Unknown keys and unparsable values are collected and reported together
// in one ConfigError, as are the failures of validate().
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                       const EnvLookup& env = process_env);
RunConfig load_config(const std::filesystem::path& path, const EnvLookup& env = process_env);

// Applies a single key; returns an error message on failure.
std::optional<std::string> set_config_value(RunConfig& cfg, const std::string& key, const std::string& value,
                                            const std::filesystem::path& base_dir);

}  // namespace corrtext
