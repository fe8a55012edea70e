#include "grouping/report.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "events/session.hpp"
#include "util/errors.hpp"
#include "util/strings.hpp"

namespace iothp::grouping {

namespace {

// count table -> rows sorted by count desc, then key asc.
template <typename Key>
std::vector<std::pair<Key, size_t>> ranked(const std::map<Key, size_t>& counts, size_t top_n) {
    std::vector<std::pair<Key, size_t>> rows(counts.begin(), counts.end());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (rows.size() > top_n) rows.resize(top_n);
    return rows;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace

std::map<std::string, std::string> load_enrichment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open enrichment file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError("enrichment file '" + path + "': " + ex.what());
    }
    if (!j.is_object()) throw ParseError("enrichment file '" + path + "' must be a JSON object");
    std::map<std::string, std::string> out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.value().is_string()) {
            out[it.key()] = it.value().get<std::string>();
        } else if (it.value().is_object() && it.value().contains("reputation_label")) {
            out[it.key()] = it.value()["reputation_label"].get<std::string>();
        } else {
            throw ParseError("enrichment entry for '" + it.key() + "' must be a label string");
        }
    }
    return out;
}

std::vector<UrlCategoryRule> load_url_categories(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open url category file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError("url category file '" + path + "': " + ex.what());
    }
    std::vector<UrlCategoryRule> rules;
    for (const auto& item : j) {
        UrlCategoryRule r;
        r.pattern = item.at("pattern").get<std::string>();
        r.category = item.at("category").get<std::string>();
        rules.push_back(std::move(r));
    }
    return rules;
}

void write_report(const std::vector<GroupRecord>& groups, const GoalStateMachine& machine,
                  const std::vector<events::Event>& all_events, const ReportOptions& options) {
    namespace fs = std::filesystem;
    fs::path dir(options.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create report directory '" + options.out_dir + "': " + ec.message());

    std::map<std::string, size_t> credential_counts;
    std::map<std::string, size_t> command_counts;
    std::map<std::string, size_t> method_counts;
    std::map<std::string, size_t> download_counts;
    std::set<std::string> session_ids;
    std::set<std::string> actor_ips;
    for (const auto& e : all_events) {
        session_ids.insert(e.session);
        actor_ips.insert(e.src_ip);
        switch (e.kind) {
            case events::EventKind::LoginAttempt:
            case events::EventKind::LoginSuccess:
            case events::EventKind::LoginFailure:
                ++credential_counts[e.payload.at("username") + " / " + e.payload.at("password")];
                break;
            case events::EventKind::Command:
                ++command_counts[e.payload.at("input")];
                break;
            case events::EventKind::HttpRequest: {
                auto it = e.payload.find("method");
                if (it != e.payload.end()) ++method_counts[it->second];
                break;
            }
            case events::EventKind::DownloadAttempt: {
                auto it = e.payload.find("url");
                if (it != e.payload.end()) ++download_counts[it->second];
                break;
            }
            default:
                break;
        }
    }

    auto categorize = [&options](const std::string& url) -> std::string {
        for (const auto& r : options.url_categories) {
            if (util::contains(url, r.pattern)) return r.category;
        }
        return "Others";
    };

    nlohmann::ordered_json report;
    nlohmann::ordered_json jgroups = nlohmann::ordered_json::array();
    for (const auto& g : groups) {
        nlohmann::ordered_json jg;
        jg["id"] = g.id;
        jg["clusters"] = std::vector<int>(g.pattern.clusters.begin(), g.pattern.clusters.end());
        jg["supporter_count"] = g.pattern.supporters.size();
        jg["supporters"] = std::vector<std::string>(g.pattern.supporters.begin(),
                                                    g.pattern.supporters.end());
        jg["goals"] = g.goals;
        nlohmann::ordered_json reputation = nlohmann::ordered_json::object();
        for (const auto& ip : g.pattern.supporters) {
            auto it = options.enrichment.find(ip);
            if (it != options.enrichment.end()) reputation[ip] = it->second;
        }
        jg["reputation"] = std::move(reputation);
        jgroups.push_back(std::move(jg));
    }
    report["groups"] = std::move(jgroups);

    nlohmann::ordered_json jmachine;
    jmachine["states"] = machine.states;
    nlohmann::ordered_json jedges = nlohmann::ordered_json::array();
    for (const auto& [edge, support] : machine.edges) {
        nlohmann::ordered_json je;
        je["from"] = edge.first;
        je["to"] = edge.second;
        je["support"] = support;
        jedges.push_back(std::move(je));
    }
    jmachine["edges"] = std::move(jedges);
    report["state_machine"] = std::move(jmachine);

    nlohmann::ordered_json jcreds = nlohmann::ordered_json::array();
    for (const auto& [pair, count] : ranked(credential_counts, options.top_n)) {
        auto sep = pair.find(" / ");
        nlohmann::ordered_json row;
        row["username"] = pair.substr(0, sep);
        row["password"] = pair.substr(sep + 3);
        row["count"] = count;
        jcreds.push_back(std::move(row));
    }
    report["top_credentials"] = std::move(jcreds);

    nlohmann::ordered_json jcmds = nlohmann::ordered_json::array();
    for (const auto& [cmd, count] : ranked(command_counts, options.top_n)) {
        nlohmann::ordered_json row;
        row["command"] = cmd;
        row["count"] = count;
        jcmds.push_back(std::move(row));
    }
    report["top_commands"] = std::move(jcmds);

    nlohmann::ordered_json jdl = nlohmann::ordered_json::array();
    for (const auto& [url, count] : ranked(download_counts, options.top_n)) {
        nlohmann::ordered_json row;
        row["url"] = url;
        row["count"] = count;
        row["category"] = categorize(url);
        jdl.push_back(std::move(row));
    }
    report["downloads"] = std::move(jdl);

    nlohmann::ordered_json jmethods = nlohmann::ordered_json::object();
    for (const auto& [method, count] : method_counts) jmethods[method] = count;
    report["http_methods"] = std::move(jmethods);

    nlohmann::ordered_json totals;
    totals["events"] = all_events.size();
    totals["sessions"] = session_ids.size();
    totals["actors"] = actor_ips.size();
    totals["unique_commands"] = command_counts.size();
    report["totals"] = std::move(totals);

    write_file(dir / "report.json", report.dump(2) + "\n");

    std::string csv = "id,clusters,supporter_count,supporters,goals\n";
    for (const auto& g : groups) {
        std::vector<std::string> cluster_strs;
        for (int c : g.pattern.clusters) cluster_strs.push_back(std::to_string(c));
        csv += std::to_string(g.id) + ",";
        csv += csv_field(util::join(cluster_strs, ";")) + ",";
        csv += std::to_string(g.pattern.supporters.size()) + ",";
        csv += csv_field(util::join({g.pattern.supporters.begin(), g.pattern.supporters.end()}, ";")) + ",";
        csv += csv_field(util::join(g.goals, ";")) + "\n";
    }
    write_file(dir / "groups.csv", csv);

    write_file(dir / "statemachine.dot", state_machine_dot(machine));
}

}  // namespace iothp::grouping
