#pragma once

#include <cstdint>
#include <string>

#include "analytics/gmm.hpp"

namespace iothp::config {

// Cluster-count choice: either a BIC search over [k_min, k_max] or a pinned
// component count.
struct KChoice {
    bool auto_select = true;
    int fixed_k = 0;  // meaningful only when !auto_select
    int k_min = 1;
    int k_max = 10;
};

// Application-wide configuration shared by the pipeline subcommands. Loaded
// from an INI file; relative paths resolve against the file's directory so
// the shipped tree works from any working directory.
//
// Schema (sections and keys, with defaults where a key may be omitted):
//   [shell]      config = <path to shell json>                 (required)
//   [camera]     profile = <path to camera profile json>       (required)
//   [analytics]  tokenizer = ws-v1        (must match this build's tokenizer)
//                k = auto | <int >= 1>                         (default auto)
//                k_range = <lo>..<hi>                          (default 1..10)
//                seed = <uint64>            (required; never seeded from the clock)
//                tol = <double > 0>                            (default 1e-6)
//                max_iter = <int >= 1>                         (default 500)
//                variance_floor = <double > 0>                 (default 1e-2)
//                n_init = <int >= 1>                           (default 10)
//   [grouping]   min_actors = <int >= 1>                       (default 3)
//                min_clusters = <int >= 1>                     (default 10)
//   [paths]      rules = <objective rules json>                (required)
//                goals = <goal rules json>                     (required)
//                enrichment = <ip enrichment json>             (optional)
//                url_categories = <url category json>          (optional)
//                logs_dir / artifacts_dir / reports_dir        (default logs,
//                                                   artifacts, reports)
//
// Environment overrides apply to paths only, after parsing and before
// validation: IOTHP_SHELL_CONFIG, IOTHP_CAMERA_PROFILE, IOTHP_RULES,
// IOTHP_GOALS, IOTHP_ENRICHMENT, IOTHP_URL_CATEGORIES, IOTHP_LOGS_DIR,
// IOTHP_ARTIFACTS_DIR, IOTHP_REPORTS_DIR. Override values are taken verbatim
// (absolute or relative to the working directory).
struct AppConfig {
    std::string shell_config;
    std::string camera_profile;

    std::string tokenizer;
    KChoice k;
    uint64_t seed = 0;
    double tol = 1e-6;
    int max_iter = 500;
    double variance_floor = 1e-2;
    int n_init = 10;

    size_t min_actors = 3;
    size_t min_clusters = 10;

    std::string rules;
    std::string goals;
    std::string enrichment;      // empty: no enrichment table
    std::string url_categories;  // empty: no URL categorization
    std::string logs_dir;
    std::string artifacts_dir;
    std::string reports_dir;

    analytics::GmmOptions gmm_options() const;
};

// Parse + env overrides + validation. Unknown sections or keys, a missing
// seed, a tokenizer from a different build, out-of-range numbers, and
// referenced files that do not exist all raise ValidationError; unreadable
// file raises IoError; malformed INI raises ParseError. Output directories
// need not exist yet, but an existing non-directory at one of those paths is
// rejected.
AppConfig load_app_config(const std::string& path);

}  // namespace iothp::config
