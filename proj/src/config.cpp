#include "corrtext/config.hpp"

#include "corrtext/csv.hpp"
#include "corrtext/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace corrtext {

namespace {

using Setter = std::function<std::optional<std::string>(RunConfig&, const std::string&,
                                                        const std::filesystem::path&)>;

std::filesystem::path resolve(const std::string& value, const std::filesystem::path& base) {
    if (value.empty()) return {};
    std::filesystem::path p(value);
    return p.is_absolute() || base.empty() ? p : base / p;
}

std::optional<bool> parse_bool(std::string v) {
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    return std::nullopt;
}

std::set<std::string> parse_set(const std::string& v) {
    std::set<std::string> out;
    std::string token;
    for (char c : v + ",") {
        if (c == ',' || c == '|') {
            const std::string t = trim(token);
            if (!t.empty()) out.insert(t);
            token.clear();
        } else {
            token += c;
        }
    }
    return out;
}

Setter path_field(std::filesystem::path RunConfig::*field) {
    return [field](RunConfig& c, const std::string& v, const std::filesystem::path& base)
               -> std::optional<std::string> {
        c.*field = resolve(v, base);
        return std::nullopt;
    };
}

template <typename T>
std::optional<std::string> assign_number(T& out, const std::string& v) {
    if constexpr (std::is_floating_point_v<T>) {
        const auto d = parse_double(v);
        if (!d || !std::isfinite(*d)) return "expected a number, got '" + v + "'";
        out = *d;
    } else {
        const auto i = parse_integer(v);
        if (!i) return "expected an integer, got '" + v + "'";
        if constexpr (std::is_unsigned_v<T>) {
            if (*i < 0) return "expected a non-negative integer, got '" + v + "'";
        }
        out = static_cast<T>(*i);
    }
    return std::nullopt;
}

std::optional<std::string> assign_date(std::optional<Date>& out, const std::string& v) {
    if (v.empty()) {
        out.reset();
        return std::nullopt;
    }
    const auto d = parse_date(v);
    if (!d) return "expected a YYYY-MM-DD date, got '" + v + "'";
    out = *d;
    return std::nullopt;
}

std::optional<std::string> assign_bool(bool& out, const std::string& v) {
    const auto b = parse_bool(v);
    if (!b) return "expected true or false, got '" + v + "'";
    out = *b;
    return std::nullopt;
}

#define NUMBER(expr) [](RunConfig& c, const std::string& v, const std::filesystem::path&) { return assign_number(expr, v); }
#define BOOLEAN(expr) [](RunConfig& c, const std::string& v, const std::filesystem::path&) { return assign_bool(expr, v); }
#define DATE(expr) [](RunConfig& c, const std::string& v, const std::filesystem::path&) { return assign_date(expr, v); }

const std::vector<std::pair<std::string, Setter>>& setters() {
    static const std::vector<std::pair<std::string, Setter>> table = {
        {"news", path_field(&RunConfig::news)},
        {"stock_prices", path_field(&RunConfig::stock_prices)},
        {"bond_prices", path_field(&RunConfig::bond_prices)},
        {"rates", path_field(&RunConfig::rates)},
        {"minutes", path_field(&RunConfig::minutes)},
        {"lexicon_inflation", path_field(&RunConfig::lexicon_inflation)},
        {"lexicon_growth", path_field(&RunConfig::lexicon_growth)},
        {"cache", path_field(&RunConfig::cache)},
        {"out_dir", path_field(&RunConfig::out_dir)},
        {"region", [](RunConfig& c, const std::string& v, const std::filesystem::path&) -> std::optional<std::string> {
             c.region = v;
             return std::nullopt;
         }},
        {"classifier", [](RunConfig& c, const std::string& v, const std::filesystem::path&) -> std::optional<std::string> {
             c.classifier = v;
             return std::nullopt;
         }},
        {"classifier_url", [](RunConfig& c, const std::string& v, const std::filesystem::path&) -> std::optional<std::string> {
             c.classifier_url = v;
             return std::nullopt;
         }},
        {"classifier_model", [](RunConfig& c, const std::string& v, const std::filesystem::path&) -> std::optional<std::string> {
             c.classifier_model = v;
             return std::nullopt;
         }},
        {"batch_size", NUMBER(c.batch_size)},
        {"classifier_timeout", NUMBER(c.classifier_timeout)},
        {"threshold", NUMBER(c.threshold)},
        {"horizon", NUMBER(c.horizon)},
        {"required_codes", [](RunConfig& c, const std::string& v, const std::filesystem::path&) -> std::optional<std::string> {
             c.required_codes = parse_set(v);
             return std::nullopt;
         }},
        {"excluded_codes", [](RunConfig& c, const std::string& v, const std::filesystem::path&) -> std::optional<std::string> {
             c.excluded_codes = parse_set(v);
             return std::nullopt;
         }},
        {"corpus_start", DATE(c.corpus_start)},
        {"corpus_end", DATE(c.corpus_end)},
        {"window_weeks", NUMBER(c.features.window_weeks)},
        {"diff_weeks", NUMBER(c.features.diff_weeks)},
        {"max_ffill_weeks", NUMBER(c.features.max_ffill_weeks)},
        {"include_rates", BOOLEAN(c.features.include_rates)},
        {"include_minutes", BOOLEAN(c.features.include_minutes)},
        {"n_trees", NUMBER(c.gbt.n_trees)},
        {"max_depth", NUMBER(c.gbt.max_depth)},
        {"learning_rate", NUMBER(c.gbt.learning_rate)},
        {"min_samples_leaf", NUMBER(c.gbt.min_samples_leaf)},
        {"min_gain", NUMBER(c.gbt.min_gain)},
        {"train_start", DATE(c.train_start)},
        {"eval_start", DATE(c.eval_start)},
        {"eval_end", DATE(c.eval_end)},
        {"synth_seed", NUMBER(c.synth.seed)},
        {"synth_start", [](RunConfig& c, const std::string& v, const std::filesystem::path&) -> std::optional<std::string> {
             std::optional<Date> d;
             if (auto e = assign_date(d, v)) return e;
             if (d) c.synth.start = *d;
             return std::nullopt;
         }},
        {"synth_end", [](RunConfig& c, const std::string& v, const std::filesystem::path&) -> std::optional<std::string> {
             std::optional<Date> d;
             if (auto e = assign_date(d, v)) return e;
             if (d) c.synth.end = *d;
             return std::nullopt;
         }},
        {"synth_eval_start", [](RunConfig& c, const std::string& v, const std::filesystem::path&) -> std::optional<std::string> {
             std::optional<Date> d;
             if (auto e = assign_date(d, v)) return e;
             if (d) c.synth.eval_start = *d;
             return std::nullopt;
         }},
        {"synth_eval_end", [](RunConfig& c, const std::string& v, const std::filesystem::path&) -> std::optional<std::string> {
             std::optional<Date> d;
             if (auto e = assign_date(d, v)) return e;
             if (d) c.synth.eval_end = *d;
             return std::nullopt;
         }},
        {"synth_news_per_week", NUMBER(c.synth.news_per_week)},
        {"synth_neutral_per_week", NUMBER(c.synth.neutral_per_week)},
        {"synth_filtered_per_week", NUMBER(c.synth.filtered_per_week)},
        {"synth_duplicate_probability", NUMBER(c.synth.duplicate_probability)},
        {"synth_rho0", NUMBER(c.synth.rho0)},
        {"synth_kappa", NUMBER(c.synth.kappa)},
        {"synth_driver", [](RunConfig& c, const std::string& v, const std::filesystem::path&) -> std::optional<std::string> {
             try {
                 c.synth.driver = parse_topic(v);
             } catch (const std::exception&) {
                 return "expected inflation or economic_growth, got '" + v + "'";
             }
             return std::nullopt;
         }},
        {"synth_lead_weeks", NUMBER(c.synth.lead_weeks)},
        {"synth_stock_vol", NUMBER(c.synth.stock_vol)},
        {"synth_bond_vol", NUMBER(c.synth.bond_vol)},
        {"synth_state_radius", NUMBER(c.synth.state_radius)},
        {"synth_state_period_weeks", NUMBER(c.synth.state_period_weeks)},
    };
    return table;
}

#undef NUMBER
#undef BOOLEAN
#undef DATE

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    return s;
}

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr) return std::nullopt;
    return std::string(v);
}

const std::vector<std::string>& RunConfig::keys() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [k, s] : setters()) out.push_back(k);
        return out;
    }();
    return names;
}

std::optional<std::string> set_config_value(RunConfig& cfg, const std::string& key, const std::string& value,
                                            const std::filesystem::path& base_dir) {
    for (const auto& [k, setter] : setters()) {
        if (k == key) return setter(cfg, value, base_dir);
    }
    return std::string("unknown key");
}

void RunConfig::validate() const {
    std::vector<std::string> bad;
    if (!(threshold > 0.0 && threshold <= 1.0)) bad.push_back("threshold (must be in (0, 1])");
    if (horizon < 3) bad.push_back("horizon (must be at least 3)");
    if (classifier != "stub" && classifier != "remote") bad.push_back("classifier (must be stub or remote)");
    if (classifier == "remote" && classifier_url.empty()) bad.push_back("classifier_url (required for remote)");
    if (batch_size < 1 || batch_size > 256) bad.push_back("batch_size (must be in 1..256)");
    if (classifier_timeout <= 0) bad.push_back("classifier_timeout (must be positive)");
    if (region.empty()) bad.push_back("region (must not be empty)");
    if (out_dir.empty()) bad.push_back("out_dir (must not be empty)");
    if (features.window_weeks < 2) bad.push_back("window_weeks (must be at least 2)");
    if (features.diff_weeks < 1) bad.push_back("diff_weeks (must be positive)");
    if (features.include_minutes && minutes.empty()) bad.push_back("minutes (required when include_minutes)");
    if (gbt.n_trees == 0) bad.push_back("n_trees (must be positive)");
    if (gbt.max_depth == 0) bad.push_back("max_depth (must be positive)");
    if (!(gbt.learning_rate > 0.0 && gbt.learning_rate <= 1.0)) bad.push_back("learning_rate (must be in (0, 1])");
    if (gbt.min_samples_leaf == 0) bad.push_back("min_samples_leaf (must be positive)");
    if (!(gbt.min_gain >= 0.0)) bad.push_back("min_gain (must be non-negative)");
    if (corpus_start && corpus_end && *corpus_end < *corpus_start) bad.push_back("corpus_end (before corpus_start)");
    if (eval_start && eval_end && *eval_end < *eval_start) bad.push_back("eval_end (before eval_start)");
    if (train_start && eval_start && *eval_start < *train_start) bad.push_back("eval_start (before train_start)");
    try {
        synth.validate();
    } catch (const ConfigError& e) {
        bad.push_back(e.what());
    }
    if (bad.empty()) return;
    std::string msg = "invalid configuration:";
    for (const auto& b : bad) msg += "\n  " + b;
    throw ConfigError(msg);
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir, const EnvLookup& env) {
    RunConfig cfg;
    std::vector<std::string> errors;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (auto err = set_config_value(cfg, key, value, base_dir)) errors.push_back(key + " (" + *err + ")");
    }
    if (env) {
        for (const auto& key : RunConfig::keys()) {
            const std::string var = "CORRTEXT_" + upper(key);
            if (const auto v = env(var)) {
                if (auto err = set_config_value(cfg, key, trim(*v), std::filesystem::current_path())) {
                    errors.push_back(key + " (" + var + ": " + *err + ")");
                }
            }
        }
    }
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        const auto nl = what.find('\n');
        std::istringstream rest(nl == std::string::npos ? "" : what.substr(nl + 1));
        std::string item;
        while (std::getline(rest, item)) {
            const std::string t = trim(item);
            if (!t.empty()) errors.push_back(t);
        }
    }
    if (!errors.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const EnvLookup& env) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const auto base = std::filesystem::absolute(path).parent_path();
    return parse_config(buf.str(), base, env);
}

}  // namespace corrtext
