#include "sim/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "camera/http.hpp"
#include "camera/signatures.hpp"
#include "grouping/patterns.hpp"
#include "util/errors.hpp"
#include "util/rng.hpp"
#include "util/strings.hpp"

namespace iothp::sim {

namespace {

constexpr const char* kJitterToken = "${jit}";

Target parse_target(const std::string& s) {
    if (s == "shell") return Target::Shell;
    if (s == "camera") return Target::Camera;
    throw ParseError("unknown scenario target '" + s + "'");
}

ScriptStep parse_step(const nlohmann::json& j, Target target) {
    if (!j.is_object()) throw ParseError("scenario step is not an object");
    ScriptStep step;
    const char* key = target == Target::Shell ? "input" : "request";
    auto it = j.find(key);
    if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) {
        throw ParseError(std::string("scenario step missing '") + key + "'");
    }
    step.command = it->get<std::string>();
    if (auto in = j.find("intent"); in != j.end()) step.intent = in->get<std::string>();
    if (auto hs = j.find("headers"); hs != j.end()) {
        for (const auto& [name, value] : hs->items()) {
            step.headers[name] = value.get<std::string>();
        }
    }
    if (auto b = j.find("body"); b != j.end()) step.body = b->get<std::string>();
    return step;
}

// Eight hex digits from one engine draw.
std::string jitter_token(util::Rng& rng) {
    static const char* hex = "0123456789abcdef";
    uint64_t v = rng.next_u64();
    std::string out(8, '0');
    for (int i = 0; i < 8; ++i) out[static_cast<size_t>(i)] = hex[(v >> (4 * i)) & 0xf];
    return out;
}

std::string expand_jitter(const std::string& command, util::Rng& rng) {
    std::string out = command;
    size_t pos = 0;
    while ((pos = out.find(kJitterToken, pos)) != std::string::npos) {
        std::string tok = jitter_token(rng);
        out.replace(pos, std::char_traits<char>::length(kJitterToken), tok);
        pos += tok.size();
    }
    return out;
}

camera::HttpRequest step_to_request(const ScriptStep& step) {
    camera::HttpRequest r;
    auto parts = util::split(step.command, " ");
    if (parts.size() != 2) throw ParseError("camera step must be 'METHOD target': " + step.command);
    r.method = parts[0];
    r.target = parts[1];
    auto q = r.target.find('?');
    r.path = r.target.substr(0, q);
    if (q != std::string::npos) r.query = r.target.substr(q + 1);
    r.version = "HTTP/1.1";
    for (const auto& [name, value] : step.headers) r.headers[util::to_lower(name)] = value;
    return r;
}

}  // namespace

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scenario file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(path + ": " + ex.what());
    }
    ScenarioConfig config;
    config.name = j.value("name", std::string());
    if (config.name.empty()) throw ValidationError("scenario has no name");
    config.min_actors = j.value("min_actors", size_t{3});
    config.min_clusters = j.value("min_clusters", size_t{10});
    if (config.min_actors < 1 || config.min_clusters < 1) {
        throw ValidationError("scenario thresholds must be >= 1");
    }
    auto fams = j.find("families");
    if (fams == j.end() || !fams->is_array() || fams->empty()) {
        throw ValidationError("scenario has no families");
    }
    std::set<std::string> seen;
    for (const auto& fj : *fams) {
        BotScript fam;
        fam.family = fj.value("name", std::string());
        if (fam.family.empty()) throw ValidationError("family has no name");
        if (!seen.insert(fam.family).second) {
            throw ValidationError("duplicate family name '" + fam.family + "'");
        }
        fam.target = parse_target(fj.value("target", std::string("shell")));
        fam.actors = fj.value("actors", 0);
        if (fam.actors < 1 || fam.actors > 200) {
            throw ValidationError("family '" + fam.family + "' needs 1..200 actors");
        }
        if (auto creds = fj.find("credentials"); creds != fj.end()) {
            for (const auto& c : *creds) {
                if (!c.is_array() || c.size() != 2) {
                    throw ParseError("credential entries are [user, pass] pairs");
                }
                fam.credentials.push_back({c[0].get<std::string>(), c[1].get<std::string>()});
            }
        }
        if (fam.target == Target::Shell && fam.credentials.empty()) {
            throw ValidationError("shell family '" + fam.family + "' has no credentials");
        }
        if (auto d = fj.find("delay_ms"); d != fj.end()) {
            if (!d->is_array() || d->size() != 2) throw ParseError("delay_ms is [min, max]");
            fam.delay_min_ms = (*d)[0].get<int>();
            fam.delay_max_ms = (*d)[1].get<int>();
            if (fam.delay_min_ms < 0 || fam.delay_max_ms < fam.delay_min_ms) {
                throw ValidationError("delay_ms range is invalid");
            }
        }
        auto steps = fj.find("steps");
        if (steps == fj.end() || !steps->is_array() || steps->empty()) {
            throw ValidationError("family '" + fam.family + "' has no steps");
        }
        for (const auto& sj : *steps) fam.steps.push_back(parse_step(sj, fam.target));
        // Fail now, not mid-run, on camera steps that cannot become requests.
        if (fam.target == Target::Camera) {
            for (const auto& s : fam.steps) step_to_request(s);
        }
        config.families.push_back(std::move(fam));
    }
    return config;
}

std::string actor_ip(size_t family_index, size_t actor_index) {
    return "198.18." + std::to_string(family_index) + "." + std::to_string(actor_index + 1);
}

ActorPlan expand_actor(const ScenarioConfig& config, size_t family_index, size_t actor_index,
                       uint64_t seed) {
    if (family_index >= config.families.size()) throw ValidationError("family index out of range");
    const BotScript& fam = config.families[family_index];
    if (actor_index >= static_cast<size_t>(fam.actors)) {
        throw ValidationError("actor index out of range");
    }
    ActorPlan plan;
    plan.ip = actor_ip(family_index, actor_index);
    plan.family = fam.family;
    plan.target = fam.target;
    util::Rng rng(util::derive_seed(seed, fam.family + "/" + plan.ip));
    for (const auto& step : fam.steps) {
        ScriptStep expanded = step;
        expanded.command = expand_jitter(step.command, rng);
        plan.steps.push_back(std::move(expanded));
        int delay = fam.delay_min_ms;
        if (fam.delay_max_ms > fam.delay_min_ms) {
            delay = static_cast<int>(rng.range(fam.delay_min_ms, fam.delay_max_ms));
        }
        plan.delays_ms.push_back(delay);
    }
    return plan;
}

ScenarioManifest build_manifest(const ScenarioConfig& config, uint64_t seed) {
    ScenarioManifest m;
    m.scenario = config.name;
    m.seed = seed;
    m.min_actors = config.min_actors;
    m.min_clusters = config.min_clusters;

    // Exact-match clustering: every distinct shell command is its own
    // cluster, ids in first-emitted order.
    std::map<std::string, int> cluster_of;
    std::vector<std::string> corpus;
    std::vector<grouping::ActorProfile> profiles;

    for (size_t f = 0; f < config.families.size(); ++f) {
        const BotScript& fam = config.families[f];
        std::set<std::string> fam_commands;
        for (size_t a = 0; a < static_cast<size_t>(fam.actors); ++a) {
            ActorPlan plan = expand_actor(config, f, a, seed);
            m.actors.emplace_back(plan.ip, plan.family);
            if (fam.target != Target::Shell) continue;
            grouping::ActorProfile profile;
            profile.ip = plan.ip;
            for (const auto& step : plan.steps) {
                auto [it, inserted] = cluster_of.try_emplace(
                    step.command, static_cast<int>(corpus.size()));
                if (inserted) corpus.push_back(step.command);
                profile.clusters.insert(it->second);
                fam_commands.insert(step.command);
            }
            profiles.push_back(std::move(profile));
        }
        std::vector<std::string> goals;
        for (const auto& step : fam.steps) {
            if (step.intent.empty()) continue;
            if (std::find(goals.begin(), goals.end(), step.intent) == goals.end()) {
                goals.push_back(step.intent);
            }
        }
        m.family_goals[fam.family] = std::move(goals);
        if (fam.target == Target::Shell) {
            m.family_commands[fam.family].assign(fam_commands.begin(), fam_commands.end());
        } else {
            std::set<std::string> labels;
            for (const auto& step : fam.steps) {
                m.family_requests[fam.family].push_back(step.command);
                if (auto label = camera::classify_request(step_to_request(step))) {
                    labels.insert(*label);
                }
            }
            m.family_attack_types[fam.family].assign(labels.begin(), labels.end());
        }
    }

    auto mined = grouping::mine_patterns(profiles, config.min_actors, config.min_clusters);
    for (const auto& p : mined) {
        ExpectedPattern ep;
        for (int c : p.clusters) ep.commands.push_back(corpus[static_cast<size_t>(c)]);
        std::sort(ep.commands.begin(), ep.commands.end());
        ep.supporters.assign(p.supporters.begin(), p.supporters.end());
        m.expected_patterns.push_back(std::move(ep));
    }
    return m;
}

void write_manifest(const std::string& path, const ScenarioManifest& m) {
    nlohmann::ordered_json j;
    j["scenario"] = m.scenario;
    j["seed"] = m.seed;
    j["complete"] = m.complete;
    j["errors"] = m.errors;
    j["thresholds"] = {{"min_actors", m.min_actors}, {"min_clusters", m.min_clusters}};
    j["actors"] = nlohmann::ordered_json::array();
    for (const auto& [ip, family] : m.actors) {
        j["actors"].push_back({{"ip", ip}, {"family", family}});
    }
    j["family_commands"] = m.family_commands;
    j["family_requests"] = m.family_requests;
    j["family_attack_types"] = m.family_attack_types;
    j["family_goals"] = m.family_goals;
    j["expected_patterns"] = nlohmann::ordered_json::array();
    for (const auto& p : m.expected_patterns) {
        j["expected_patterns"].push_back({{"commands", p.commands}, {"supporters", p.supporters}});
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write manifest '" + path + "'");
    out << j.dump(2) << "\n";
}

ScenarioManifest read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(path + ": " + ex.what());
    }
    ScenarioManifest m;
    try {
        m.scenario = j.at("scenario").get<std::string>();
        m.seed = j.at("seed").get<uint64_t>();
        m.complete = j.at("complete").get<bool>();
        m.errors = j.at("errors").get<std::vector<std::string>>();
        m.min_actors = j.at("thresholds").at("min_actors").get<size_t>();
        m.min_clusters = j.at("thresholds").at("min_clusters").get<size_t>();
        for (const auto& a : j.at("actors")) {
            m.actors.emplace_back(a.at("ip").get<std::string>(), a.at("family").get<std::string>());
        }
        using StringListMap = std::map<std::string, std::vector<std::string>>;
        m.family_commands = j.at("family_commands").get<StringListMap>();
        m.family_requests = j.at("family_requests").get<StringListMap>();
        m.family_attack_types = j.at("family_attack_types").get<StringListMap>();
        m.family_goals = j.at("family_goals").get<StringListMap>();
        for (const auto& p : j.at("expected_patterns")) {
            ExpectedPattern ep;
            ep.commands = p.at("commands").get<std::vector<std::string>>();
            ep.supporters = p.at("supporters").get<std::vector<std::string>>();
            m.expected_patterns.push_back(std::move(ep));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(path + ": " + ex.what());
    }
    return m;
}

}  // namespace iothp::sim
