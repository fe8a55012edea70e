#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "events/actors.hpp"
#include "grouping/goals.hpp"
#include "grouping/patterns.hpp"
#include "grouping/report.hpp"
#include "support/temp_dir.hpp"
#include "util/errors.hpp"
#include "util/rng.hpp"

using namespace iothp;
using namespace iothp::grouping;
using iothp::testsupport::TempDir;

namespace {

// Naive mining oracle: same definition, different mechanics. Everything is
// done with plain loops over vectors so a bug in the production set logic
// cannot hide here too.
std::vector<Pattern> naive_mine(const std::vector<ActorProfile>& profiles, size_t min_actors,
                                size_t min_clusters) {
    auto is_subset = [](const std::set<int>& small, const std::set<int>& big) {
        for (int c : small) {
            if (big.find(c) == big.end()) return false;
        }
        return true;
    };
    std::vector<Pattern> kept;
    for (size_t i = 0; i < profiles.size(); ++i) {
        for (size_t j = i + 1; j < profiles.size(); ++j) {
            std::set<int> inter;
            for (int c : profiles[i].clusters) {
                if (profiles[j].clusters.count(c)) inter.insert(c);
            }
            if (inter.size() < min_clusters) continue;
            bool duplicate = false;
            for (const auto& p : kept) {
                if (p.clusters == inter) {
                    duplicate = true;
                    break;
                }
            }
            if (duplicate) continue;
            Pattern p;
            p.clusters = inter;
            for (const auto& prof : profiles) {
                if (is_subset(inter, prof.clusters)) p.supporters.insert(prof.ip);
            }
            if (p.supporters.size() >= min_actors) kept.push_back(std::move(p));
        }
    }
    std::vector<Pattern> maximal;
    for (const auto& p : kept) {
        bool dominated = false;
        for (const auto& q : kept) {
            if (p.clusters.size() < q.clusters.size() && p.supporters == q.supporters &&
                is_subset(p.clusters, q.clusters)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) maximal.push_back(p);
    }
    std::sort(maximal.begin(), maximal.end(), [](const Pattern& a, const Pattern& b) {
        if (a.clusters.size() != b.clusters.size()) return a.clusters.size() > b.clusters.size();
        return std::lexicographical_compare(a.clusters.begin(), a.clusters.end(),
                                            b.clusters.begin(), b.clusters.end());
    });
    return maximal;
}

ActorProfile profile(const std::string& ip, std::set<int> clusters) {
    ActorProfile p;
    p.ip = ip;
    p.clusters = std::move(clusters);
    return p;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

TEST_CASE("build_profiles maps commands through the assignment") {
    analytics::ClusterAssignment assignment;
    assignment.k = 3;
    assignment.commands = {"uname -a", "free -m", "wget http://x/a"};
    assignment.cluster_of = {0, 0, 2};

    events::ActorIndex actors;
    actors["1.1.1.1"].ip = "1.1.1.1";
    actors["1.1.1.1"].commands = {"uname -a", "wget http://x/a", "uname -a"};
    actors["2.2.2.2"].ip = "2.2.2.2";
    actors["2.2.2.2"].commands = {"free -m"};
    actors["3.3.3.3"].ip = "3.3.3.3";  // no commands, must be omitted

    auto profiles = build_profiles(assignment, actors);
    REQUIRE(profiles.size() == 2);
    CHECK(profiles[0].ip == "1.1.1.1");
    CHECK(profiles[0].clusters == std::set<int>{0, 2});
    CHECK(profiles[1].clusters == std::set<int>{0});

    actors["2.2.2.2"].commands.push_back("never clustered");
    CHECK_THROWS_WITH_AS(build_profiles(assignment, actors),
                         "actor 2.2.2.2 command not present in assignment: never clustered",
                         ValidationError);
}

TEST_CASE("mine_patterns finds the planted shared pattern") {
    // Three planted actors share clusters 0..9; noise actors carry scattered
    // small overlaps that cannot reach the thresholds.
    std::vector<ActorProfile> profiles;
    for (int a = 0; a < 3; ++a) {
        std::set<int> cs;
        for (int c = 0; c < 10; ++c) cs.insert(c);
        cs.insert(20 + a);  // private extras
        profiles.push_back(profile("10.0.0." + std::to_string(a), cs));
    }
    profiles.push_back(profile("10.0.1.1", {0, 1, 30}));
    profiles.push_back(profile("10.0.1.2", {2, 3, 31}));

    auto got = mine_patterns(profiles, 3, 10);
    REQUIRE(got.size() == 1);
    CHECK(got[0].clusters == std::set<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    CHECK(got[0].supporters == std::set<std::string>{"10.0.0.0", "10.0.0.1", "10.0.0.2"});
    CHECK(got == naive_mine(profiles, 3, 10));
}

TEST_CASE("mine_patterns drops dominated subsets but keeps distinct supporter sets") {
    // a,b,c share {0..10}; d covers only {0..9} so the 10-cluster subset has
    // a strictly larger supporter set and must be kept.
    std::vector<ActorProfile> profiles;
    std::set<int> big;
    for (int c = 0; c <= 10; ++c) big.insert(c);
    profiles.push_back(profile("a", big));
    profiles.push_back(profile("b", big));
    profiles.push_back(profile("c", big));
    std::set<int> small(big);
    small.erase(10);
    profiles.push_back(profile("d", small));

    auto got = mine_patterns(profiles, 3, 10);
    REQUIRE(got.size() == 2);
    CHECK(got[0].clusters == big);
    CHECK(got[0].supporters == std::set<std::string>{"a", "b", "c"});
    CHECK(got[1].clusters == small);
    CHECK(got[1].supporters == std::set<std::string>{"a", "b", "c", "d"});
    CHECK(got == naive_mine(profiles, 3, 10));
}

TEST_CASE("mine_patterns rejects zero thresholds") {
    CHECK_THROWS_AS(mine_patterns({}, 0, 10), ValidationError);
    CHECK_THROWS_AS(mine_patterns({}, 3, 0), ValidationError);
    CHECK(mine_patterns({}, 3, 10).empty());
}

TEST_CASE("mine_patterns equals the naive oracle on random instances") {
    util::Rng rng(1234);
    for (int trial = 0; trial < 120; ++trial) {
        size_t n_actors = 2 + rng.index(11);    // 2..12
        size_t n_clusters = 4 + rng.index(17);  // 4..20
        std::vector<ActorProfile> profiles;
        for (size_t a = 0; a < n_actors; ++a) {
            std::set<int> cs;
            for (size_t c = 0; c < n_clusters; ++c) {
                if (rng.index(2) == 0) cs.insert(static_cast<int>(c));
            }
            profiles.push_back(profile("192.0.2." + std::to_string(a), cs));
        }
        // Plant a shared core in a third of the trials so the paper-default
        // thresholds also see non-empty instances.
        if (trial % 3 == 0) {
            for (size_t a = 0; a < std::min<size_t>(4, n_actors); ++a) {
                for (int c = 0; c < static_cast<int>(std::min<size_t>(12, n_clusters)); ++c) {
                    profiles[a].clusters.insert(c);
                }
            }
        }
        size_t min_actors = (trial % 2 == 0) ? 3 : 2;
        size_t min_clusters = (trial % 3 == 0) ? 10 : 1 + rng.index(4);
        auto got = mine_patterns(profiles, min_actors, min_clusters);
        auto want = naive_mine(profiles, min_actors, min_clusters);
        CHECK(got == want);
    }
}

// ---------------------------------------------------------------------------
// Goal mapping and the state machine
// ---------------------------------------------------------------------------

namespace {

GoalRules test_rules() {
    GoalRules rules;
    rules.by_objective["Honeypot Fingerprinting"] = {"Fingerprinting", 0};
    rules.by_objective["System Intelligence"] = {"System Intelligence", 10};
    rules.by_objective["CPU Intelligence"] = {"System Intelligence", 10};
    rules.by_objective["Malicious Installation"] = {"Malicious Installation", 20};
    rules.by_objective["Stop Services"] = {"Stop Services", 30};
    return rules;
}

analytics::ClusterAssignment goal_assignment() {
    analytics::ClusterAssignment assignment;
    assignment.k = 5;
    assignment.cluster_objectives[0] = {"Malicious Installation"};
    assignment.cluster_objectives[1] = {"System Intelligence"};
    assignment.cluster_objectives[2] = {analytics::kUnlabeled};
    assignment.cluster_objectives[3] = {"CPU Intelligence"};
    assignment.cluster_objectives[4] = {"Objective Nobody Mapped"};
    return assignment;
}

}  // namespace

TEST_CASE("map_goals dedupes and orders by static rank") {
    auto rules = test_rules();
    auto assignment = goal_assignment();
    Pattern p;
    p.clusters = {0, 1, 3};  // install + two intelligence sources
    auto goals = map_goals(p, assignment, rules);
    CHECK(goals == std::vector<std::string>{"System Intelligence", "Malicious Installation"});
}

TEST_CASE("map_goals sends unlabeled and unmapped clusters to the default") {
    auto rules = test_rules();
    auto assignment = goal_assignment();
    Pattern p;
    p.clusters = {2, 4};
    auto goals = map_goals(p, assignment, rules);
    CHECK(goals == std::vector<std::string>{"Miscellaneous"});
}

TEST_CASE("map_goals temporal hints are all-or-nothing") {
    auto rules = test_rules();
    auto assignment = goal_assignment();
    Pattern p;
    p.clusters = {0, 1};

    TemporalHints full = {{"System Intelligence", 7.0}, {"Malicious Installation", 2.0}};
    CHECK(map_goals(p, assignment, rules, &full) ==
          std::vector<std::string>{"Malicious Installation", "System Intelligence"});

    // A hint that misses one goal must not override the static ranks.
    TemporalHints partial = {{"Malicious Installation", 2.0}};
    CHECK(map_goals(p, assignment, rules, &partial) ==
          std::vector<std::string>{"System Intelligence", "Malicious Installation"});
}

TEST_CASE("map_goals breaks rank ties by goal name") {
    GoalRules rules;
    rules.by_objective["B objective"] = {"Beta", 10};
    rules.by_objective["A objective"] = {"Alpha", 10};
    analytics::ClusterAssignment assignment;
    assignment.k = 2;
    assignment.cluster_objectives[0] = {"B objective"};
    assignment.cluster_objectives[1] = {"A objective"};
    Pattern p;
    p.clusters = {0, 1};
    CHECK(map_goals(p, assignment, rules) == std::vector<std::string>{"Alpha", "Beta"});
}

TEST_CASE("state machine counts each group's transition once") {
    std::vector<std::vector<std::string>> sequences = {
        {"A", "B", "C"},
        {"A", "B"},
        {"A", "B", "A", "B"},  // repeats within one group still count once
        {"C"},
    };
    auto machine = build_state_machine(sequences);
    CHECK(machine.states == std::vector<std::string>{"A", "B", "C"});
    CHECK(machine.edges.at({"A", "B"}) == 3);
    CHECK(machine.edges.at({"B", "C"}) == 1);
    CHECK(machine.edges.at({"B", "A"}) == 1);
    CHECK(machine.edges.size() == 3);

    std::string dot = state_machine_dot(machine);
    CHECK(dot.find("digraph attacker_goals {") != std::string::npos);
    CHECK(dot.find("\"A\" -> \"B\" [label=\"3\"];") != std::string::npos);
    CHECK(dot.find("\"B\" -> \"C\" [label=\"1\"];") != std::string::npos);
}

// ---------------------------------------------------------------------------
// Report artifacts
// ---------------------------------------------------------------------------

namespace {

events::Event report_event(events::EventKind kind, const std::string& session,
                           const std::string& ip, util::Millis ts) {
    events::Event e;
    e.ts = ts;
    e.src_ip = ip;
    e.src_port = 5555;
    e.honeypot_id = "shell-1";
    e.session = session;
    e.kind = kind;
    return e;
}

std::vector<events::Event> report_events() {
    std::vector<events::Event> out;
    auto login = [&out](const std::string& u, const std::string& p, int i) {
        auto e = report_event(events::EventKind::LoginFailure, "s" + std::to_string(i),
                              "1.1.1." + std::to_string(i), 1000 + i);
        e.payload["username"] = u;
        e.payload["password"] = p;
        out.push_back(e);
    };
    login("admin", "1234", 0);
    login("admin", "1234", 1);
    login("admin", "1234", 2);
    login("root", "root", 3);
    auto cmd = [&out](const std::string& input, int i) {
        auto e = report_event(events::EventKind::Command, "s" + std::to_string(i),
                              "1.1.1." + std::to_string(i), 2000 + i);
        e.payload["input"] = input;
        out.push_back(e);
    };
    cmd("uname -a", 0);
    cmd("uname -a", 1);
    cmd("free -m", 2);
    auto dl = report_event(events::EventKind::DownloadAttempt, "s0", "1.1.1.0", 3000);
    dl.payload["url"] = "http://198.51.100.7/mirai.arm";
    out.push_back(dl);
    auto dl2 = report_event(events::EventKind::DownloadAttempt, "s1", "1.1.1.1", 3001);
    dl2.payload["url"] = "http://example.org/whatever";
    out.push_back(dl2);
    auto http = report_event(events::EventKind::HttpRequest, "s4", "2.2.2.2", 4000);
    http.payload["method"] = "GET";
    http.payload["path"] = "/";
    out.push_back(http);
    return out;
}

}  // namespace

TEST_CASE("write_report emits the three artifacts with stable content") {
    TempDir tmp;
    std::vector<GroupRecord> groups;
    GroupRecord g;
    g.id = 0;
    g.pattern.clusters = {1, 2, 3};
    g.pattern.supporters = {"1.1.1.0", "1.1.1.1", "1.1.1.2"};
    g.goals = {"System Intelligence", "Malicious Installation"};
    groups.push_back(g);

    auto machine = build_state_machine({g.goals});
    ReportOptions options;
    options.enrichment = {{"1.1.1.0", "known scanner"}};
    options.url_categories = {{"mirai", "Malware distribution"}};

    options.out_dir = tmp.file("a");
    write_report(groups, machine, report_events(), options);
    options.out_dir = tmp.file("b");
    write_report(groups, machine, report_events(), options);

    std::string report_a = slurp(tmp.file("a") + "/report.json");
    CHECK(report_a == slurp(tmp.file("b") + "/report.json"));
    CHECK(slurp(tmp.file("a") + "/groups.csv") == slurp(tmp.file("b") + "/groups.csv"));
    CHECK(slurp(tmp.file("a") + "/statemachine.dot") ==
          slurp(tmp.file("b") + "/statemachine.dot"));

    auto j = nlohmann::json::parse(report_a);
    CHECK(j["totals"]["events"] == 10);
    CHECK(j["totals"]["sessions"] == 5);
    CHECK(j["totals"]["actors"] == 5);
    CHECK(j["totals"]["unique_commands"] == 2);
    REQUIRE(j["groups"].size() == 1);
    CHECK(j["groups"][0]["supporter_count"] == 3);
    CHECK(j["groups"][0]["reputation"]["1.1.1.0"] == "known scanner");
    REQUIRE(j["top_credentials"].size() == 2);
    CHECK(j["top_credentials"][0]["username"] == "admin");
    CHECK(j["top_credentials"][0]["password"] == "1234");
    CHECK(j["top_credentials"][0]["count"] == 3);
    CHECK(j["top_commands"][0]["command"] == "uname -a");
    bool found_malware = false, found_others = false;
    for (const auto& row : j["downloads"]) {
        if (row["url"] == "http://198.51.100.7/mirai.arm") {
            CHECK(row["category"] == "Malware distribution");
            found_malware = true;
        }
        if (row["url"] == "http://example.org/whatever") {
            CHECK(row["category"] == "Others");
            found_others = true;
        }
    }
    CHECK(found_malware);
    CHECK(found_others);
    CHECK(j["http_methods"]["GET"] == 1);

    std::string csv = slurp(tmp.file("a") + "/groups.csv");
    CHECK(csv.rfind("id,clusters,supporter_count,supporters,goals\n", 0) == 0);
    CHECK(csv.find("0,1;2;3,3,1.1.1.0;1.1.1.1;1.1.1.2,"
                   "System Intelligence;Malicious Installation\n") != std::string::npos);
}

TEST_CASE("goal rules file loads objectives and defaults") {
    TempDir tmp;
    std::string path = tmp.write("goals.json", R"({
        "goals": [
            {"objective": "System Intelligence", "goal": "System Intelligence", "rank": 10},
            {"objective": "Malicious Installation", "goal": "Malicious Installation", "rank": 20}
        ],
        "default_goal": "Misc",
        "default_rank": 77
    })");
    GoalRules rules = load_goal_rules(path);
    CHECK(rules.by_objective.size() == 2);
    CHECK(rules.by_objective.at("System Intelligence").rank == 10);
    CHECK(rules.default_goal == "Misc");
    CHECK(rules.default_rank == 77);
    CHECK_THROWS_AS(load_goal_rules(tmp.file("missing.json")), IoError);
}

TEST_CASE("enrichment file accepts strings and label objects") {
    TempDir tmp;
    std::string path = tmp.write("enrichment.json", R"({
        "1.2.3.4": "botnet node",
        "5.6.7.8": {"reputation_label": "tor exit"}
    })");
    auto labels = load_enrichment(path);
    CHECK(labels.at("1.2.3.4") == "botnet node");
    CHECK(labels.at("5.6.7.8") == "tor exit");
}
