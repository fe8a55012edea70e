#include "config/app_config.hpp"

#include <cstdlib>
#include <filesystem>
#include <set>
#include <stdexcept>

#include "analytics/tokenize.hpp"
#include "util/errors.hpp"
#include "util/ini.hpp"
#include "util/strings.hpp"

namespace fs = std::filesystem;

namespace iothp::config {

namespace {

[[noreturn]] void bad(const std::string& section, const std::string& key, const std::string& why) {
    throw ValidationError("config [" + section + "] " + key + ": " + why);
}

long long to_int(const std::string& section, const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        bad(section, key, "not an integer: '" + value + "'");
    }
}

uint64_t to_u64(const std::string& section, const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        if (!value.empty() && value[0] == '-') throw std::invalid_argument("");
        uint64_t v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        bad(section, key, "not an unsigned integer: '" + value + "'");
    }
}

double to_double(const std::string& section, const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        bad(section, key, "not a number: '" + value + "'");
    }
}

// The documented vocabulary; anything else in the file is a typo we would
// rather reject than ignore.
const std::map<std::string, std::set<std::string>> kSchema = {
    {"shell", {"config"}},
    {"camera", {"profile"}},
    {"analytics",
     {"tokenizer", "k", "k_range", "seed", "tol", "max_iter", "variance_floor", "n_init"}},
    {"grouping", {"min_actors", "min_clusters"}},
    {"paths",
     {"rules", "goals", "enrichment", "url_categories", "logs_dir", "artifacts_dir",
      "reports_dir"}},
};

void check_schema(const util::IniFile& ini) {
    for (const auto& [section, keys] : ini.sections) {
        auto known = kSchema.find(section);
        if (known == kSchema.end()) {
            throw ValidationError("config: unknown section [" + section + "]");
        }
        for (const auto& [key, value] : keys) {
            if (!known->second.count(key)) bad(section, key, "unknown key");
        }
    }
}

void apply_env_overrides(AppConfig& config) {
    auto over = [](const char* name, std::string& target) {
        if (const char* v = std::getenv(name); v && *v) target = v;
    };
    over("IOTHP_SHELL_CONFIG", config.shell_config);
    over("IOTHP_CAMERA_PROFILE", config.camera_profile);
    over("IOTHP_RULES", config.rules);
    over("IOTHP_GOALS", config.goals);
    over("IOTHP_ENRICHMENT", config.enrichment);
    over("IOTHP_URL_CATEGORIES", config.url_categories);
    over("IOTHP_LOGS_DIR", config.logs_dir);
    over("IOTHP_ARTIFACTS_DIR", config.artifacts_dir);
    over("IOTHP_REPORTS_DIR", config.reports_dir);
}

void require_file(const std::string& section, const std::string& key, const std::string& path) {
    if (path.empty()) bad(section, key, "missing required path");
    if (!fs::exists(path)) bad(section, key, "file not found: " + path);
    if (fs::is_directory(path)) bad(section, key, "is a directory, expected a file: " + path);
}

void check_dir_slot(const std::string& section, const std::string& key, const std::string& path) {
    if (path.empty()) bad(section, key, "missing required path");
    if (fs::exists(path) && !fs::is_directory(path)) {
        bad(section, key, "exists but is not a directory: " + path);
    }
}

}  // namespace

analytics::GmmOptions AppConfig::gmm_options() const {
    analytics::GmmOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    opts.variance_floor = variance_floor;
    opts.n_init = n_init;
    return opts;
}

AppConfig load_app_config(const std::string& path) {
    util::IniFile ini = parse_ini_file(path);
    check_schema(ini);
    fs::path base = fs::path(path).parent_path();
    auto resolve = [&base](const std::string& p) {
        if (p.empty() || fs::path(p).is_absolute()) return p;
        return (base / p).lexically_normal().string();
    };

    AppConfig config;
    config.tokenizer = analytics::kTokenizerVersion;
    config.logs_dir = resolve("logs");
    config.artifacts_dir = resolve("artifacts");
    config.reports_dir = resolve("reports");

    if (auto v = ini.get("shell", "config")) config.shell_config = resolve(*v);
    if (auto v = ini.get("camera", "profile")) config.camera_profile = resolve(*v);

    if (auto v = ini.get("analytics", "tokenizer")) config.tokenizer = *v;
    if (auto v = ini.get("analytics", "k")) {
        if (*v == "auto") {
            config.k.auto_select = true;
        } else {
            config.k.auto_select = false;
            long long k = to_int("analytics", "k", *v);
            if (k < 1) bad("analytics", "k", "must be >= 1 or 'auto'");
            config.k.fixed_k = static_cast<int>(k);
        }
    }
    if (auto v = ini.get("analytics", "k_range")) {
        auto dots = v->find("..");
        if (dots == std::string::npos) bad("analytics", "k_range", "expected <lo>..<hi>");
        long long lo = to_int("analytics", "k_range", util::trim(v->substr(0, dots)));
        long long hi = to_int("analytics", "k_range", util::trim(v->substr(dots + 2)));
        if (lo < 1 || hi < lo) bad("analytics", "k_range", "need 1 <= lo <= hi");
        config.k.k_min = static_cast<int>(lo);
        config.k.k_max = static_cast<int>(hi);
    }
    if (auto v = ini.get("analytics", "seed")) {
        config.seed = to_u64("analytics", "seed", *v);
    } else {
        bad("analytics", "seed", "required; runs are never seeded from the clock");
    }
    if (auto v = ini.get("analytics", "tol")) config.tol = to_double("analytics", "tol", *v);
    if (auto v = ini.get("analytics", "max_iter")) {
        config.max_iter = static_cast<int>(to_int("analytics", "max_iter", *v));
    }
    if (auto v = ini.get("analytics", "variance_floor")) {
        config.variance_floor = to_double("analytics", "variance_floor", *v);
    }
    if (auto v = ini.get("analytics", "n_init")) {
        config.n_init = static_cast<int>(to_int("analytics", "n_init", *v));
    }

    if (auto v = ini.get("grouping", "min_actors")) {
        long long n = to_int("grouping", "min_actors", *v);
        if (n < 1) bad("grouping", "min_actors", "must be >= 1");
        config.min_actors = static_cast<size_t>(n);
    }
    if (auto v = ini.get("grouping", "min_clusters")) {
        long long n = to_int("grouping", "min_clusters", *v);
        if (n < 1) bad("grouping", "min_clusters", "must be >= 1");
        config.min_clusters = static_cast<size_t>(n);
    }

    if (auto v = ini.get("paths", "rules")) config.rules = resolve(*v);
    if (auto v = ini.get("paths", "goals")) config.goals = resolve(*v);
    if (auto v = ini.get("paths", "enrichment")) config.enrichment = resolve(*v);
    if (auto v = ini.get("paths", "url_categories")) config.url_categories = resolve(*v);
    if (auto v = ini.get("paths", "logs_dir")) config.logs_dir = resolve(*v);
    if (auto v = ini.get("paths", "artifacts_dir")) config.artifacts_dir = resolve(*v);
    if (auto v = ini.get("paths", "reports_dir")) config.reports_dir = resolve(*v);

    apply_env_overrides(config);

    if (config.tokenizer != analytics::kTokenizerVersion) {
        bad("analytics", "tokenizer",
            "'" + config.tokenizer + "' does not match this build (" +
                analytics::kTokenizerVersion + ")");
    }
    if (config.tol <= 0) bad("analytics", "tol", "must be > 0");
    if (config.max_iter < 1) bad("analytics", "max_iter", "must be >= 1");
    if (config.variance_floor <= 0) bad("analytics", "variance_floor", "must be > 0");
    if (config.n_init < 1) bad("analytics", "n_init", "must be >= 1");

    require_file("shell", "config", config.shell_config);
    require_file("camera", "profile", config.camera_profile);
    require_file("paths", "rules", config.rules);
    require_file("paths", "goals", config.goals);
    if (!config.enrichment.empty()) require_file("paths", "enrichment", config.enrichment);
    if (!config.url_categories.empty()) {
        require_file("paths", "url_categories", config.url_categories);
    }
    check_dir_slot("paths", "logs_dir", config.logs_dir);
    check_dir_slot("paths", "artifacts_dir", config.artifacts_dir);
    check_dir_slot("paths", "reports_dir", config.reports_dir);
    return config;
}

}  // namespace iothp::config
