#pragma once

#include <map>
#include <string>
#include <vector>

#include "events/event.hpp"
#include "grouping/goals.hpp"
#include "grouping/patterns.hpp"

namespace iothp::grouping {

// A mined pattern with its stable id and goal sequence.
struct GroupRecord {
    int id = 0;
    Pattern pattern;
    std::vector<std::string> goals;
};

// File-backed reputation stub, ip -> label. Stands in for the online IP
// reputation services; no network calls.
std::map<std::string, std::string> load_enrichment(const std::string& path);

struct UrlCategoryRule {
    std::string pattern;  // substring match against the URL
    std::string category;
};

std::vector<UrlCategoryRule> load_url_categories(const std::string& path);

struct ReportOptions {
    std::string out_dir;
    std::map<std::string, std::string> enrichment;
    std::vector<UrlCategoryRule> url_categories;
    size_t top_n = 10;
};

// Writes report.json, groups.csv and statemachine.dot into out_dir. The
// report carries the group table, the state-machine edge list, and the
// top-credential / top-command / download / HTTP-method tables computed from
// the events. Output is deterministic; no wall-clock content.
void write_report(const std::vector<GroupRecord>& groups, const GoalStateMachine& machine,
                  const std::vector<events::Event>& all_events, const ReportOptions& options);

}  // namespace iothp::grouping
