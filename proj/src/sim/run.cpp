#include "sim/run.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "events/session.hpp"
#include "netio/net.hpp"
#include "util/errors.hpp"
#include "util/strings.hpp"
#include "util/timeutil.hpp"

namespace iothp::sim {

namespace {

using netio::TcpConn;

struct ReadResult {
    bool found = false;
    bool eof = false;
    int matched = -1;  // index into the marker list
    std::string data;
};

// Accumulates bytes until the buffer ends with one of the markers. The shell
// prompt is always the last thing the server sends, so suffix matching
// cannot trip over marker bytes inside command output.
ReadResult read_until_any(TcpConn& conn, const std::vector<std::string>& markers, int timeout_ms) {
    ReadResult r;
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    for (;;) {
        for (size_t i = 0; i < markers.size(); ++i) {
            const std::string& m = markers[i];
            if (r.data.size() >= m.size() && r.data.compare(r.data.size() - m.size(), m.size(), m) == 0) {
                r.found = true;
                r.matched = static_cast<int>(i);
                return r;
            }
        }
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                        deadline - std::chrono::steady_clock::now())
                        .count();
        if (left <= 0) return r;
        auto chunk = conn.read_some(512, static_cast<int>(left));
        if (chunk.status == TcpConn::ReadStatus::Eof) {
            r.eof = true;
            return r;
        }
        if (chunk.status == TcpConn::ReadStatus::Timeout) return r;
        r.data += chunk.data;
    }
}

ReadResult read_until(TcpConn& conn, const std::string& marker, int timeout_ms) {
    return read_until_any(conn, {marker}, timeout_ms);
}

// First-occurrence variant for HTTP: the status line is followed by headers
// and a body in the same stream, so suffix matching would never fire.
ReadResult read_until_seen(TcpConn& conn, const std::string& marker, int timeout_ms) {
    ReadResult r;
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    for (;;) {
        if (r.data.find(marker) != std::string::npos) {
            r.found = true;
            return r;
        }
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                        deadline - std::chrono::steady_clock::now())
                        .count();
        if (left <= 0) return r;
        auto chunk = conn.read_some(512, static_cast<int>(left));
        if (chunk.status == TcpConn::ReadStatus::Eof) {
            r.eof = true;
            return r;
        }
        if (chunk.status == TcpConn::ReadStatus::Timeout) return r;
        r.data += chunk.data;
    }
}

void drain_to_eof(TcpConn& conn, int timeout_ms) {
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    for (;;) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                        deadline - std::chrono::steady_clock::now())
                        .count();
        if (left <= 0) return;
        auto chunk = conn.read_some(4096, static_cast<int>(left));
        if (chunk.status != TcpConn::ReadStatus::Ok) return;
    }
}

struct ActorJob {
    ActorPlan plan;
    std::vector<Credential> credentials;
};

// Connect failures name the synthetic actor, not just errno, so a partial
// manifest tells the operator which plans went unserved.
TcpConn connect_as(const std::string& ip, const Endpoint& ep, const RunOptions& opts) {
    try {
        return netio::tcp_connect(ep.host, ep.port, opts.io_timeout_ms);
    } catch (const IoError& ex) {
        throw IoError("actor " + ip + ": " + ex.what());
    }
}

// One scripted telnet-style intrusion. Reconnects while credentials remain
// when the server drops the connection after too many failures; throws once
// the list is exhausted or the server stops making sense.
void run_shell_actor(const ActorJob& job, const Endpoint& ep, const RunOptions& opts) {
    const auto& plan = job.plan;
    size_t cred = 0;
    size_t connections = 0;
    for (;;) {
        if (++connections > job.credentials.size() + 1) {
            throw IoError("actor " + plan.ip + ": too many reconnects");
        }
        TcpConn conn = connect_as(plan.ip, ep, opts);
        conn.send_all("%SRC " + plan.ip + "\n");
        auto at_login = read_until(conn, "login: ", opts.io_timeout_ms);
        if (!at_login.found) throw IoError("actor " + plan.ip + ": no login prompt");

        bool logged_in = false;
        while (cred < job.credentials.size()) {
            conn.send_all(job.credentials[cred].username + "\r\n");
            auto at_pass = read_until(conn, "Password: ", opts.io_timeout_ms);
            if (at_pass.eof) break;
            if (!at_pass.found) throw IoError("actor " + plan.ip + ": no password prompt");
            conn.send_all(job.credentials[cred].password + "\r\n");
            ++cred;
            auto outcome = read_until_any(conn, {"# ", "login: "}, opts.io_timeout_ms);
            if (outcome.matched == 0) {
                logged_in = true;
                break;
            }
            if (outcome.eof) break;  // attempt limit reached, reconnect
            if (!outcome.found) throw IoError("actor " + plan.ip + ": no login verdict");
        }
        if (!logged_in) {
            if (cred >= job.credentials.size()) {
                throw IoError("actor " + plan.ip + ": credential list exhausted");
            }
            continue;
        }

        for (size_t i = 0; i < plan.steps.size(); ++i) {
            if (plan.delays_ms[i] > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(plan.delays_ms[i]));
            }
            conn.send_all(plan.steps[i].command + "\r\n");
            auto at_prompt = read_until(conn, "# ", opts.io_timeout_ms);
            if (!at_prompt.found) {
                throw IoError("actor " + plan.ip + ": no prompt after '" + plan.steps[i].command +
                              "'");
            }
        }
        // Real bots drop the link rather than type exit; closing here also
        // keeps the logged command list identical to the scripted one.
        return;
    }
}

std::string build_http_request(const ScriptStep& step, const std::string& actor_ip,
                               const Endpoint& ep) {
    std::string req = step.command + " HTTP/1.1\r\n";
    req += "Host: " + ep.host + ":" + std::to_string(ep.port) + "\r\n";
    req += "X-Forwarded-For: " + actor_ip + "\r\n";
    req += "Connection: close\r\n";
    bool has_ua = false;
    for (const auto& [name, value] : step.headers) {
        if (util::to_lower(name) == "user-agent") has_ua = true;
        req += name + ": " + value + "\r\n";
    }
    if (!has_ua) req += "User-Agent: Mozilla/5.0 (compatible; scanbot/1.1)\r\n";
    if (!step.body.empty()) {
        req += "Content-Length: " + std::to_string(step.body.size()) + "\r\n";
    }
    req += "\r\n";
    req += step.body;
    return req;
}

// One connection per probe; scanners rarely bother with keep-alive.
void run_camera_actor(const ActorJob& job, const Endpoint& ep, const RunOptions& opts) {
    const auto& plan = job.plan;
    for (size_t i = 0; i < plan.steps.size(); ++i) {
        if (plan.delays_ms[i] > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(plan.delays_ms[i]));
        }
        TcpConn conn = connect_as(plan.ip, ep, opts);
        conn.send_all(build_http_request(plan.steps[i], plan.ip, ep));
        auto status = read_until_seen(conn, "\r\n", opts.io_timeout_ms);
        if (!status.found || status.data.rfind("HTTP/1.", 0) != 0) {
            throw IoError("actor " + plan.ip + ": no HTTP response for '" + plan.steps[i].command +
                          "'");
        }
        drain_to_eof(conn, opts.io_timeout_ms);
    }
}

}  // namespace

ScenarioManifest run_scenario(const ScenarioConfig& config, const std::optional<Endpoint>& shell,
                              const std::optional<Endpoint>& camera, uint64_t seed,
                              const RunOptions& opts) {
    for (const auto& fam : config.families) {
        if (fam.target == Target::Shell && !shell) {
            throw ValidationError("scenario '" + config.name + "' needs a shell target");
        }
        if (fam.target == Target::Camera && !camera) {
            throw ValidationError("scenario '" + config.name + "' needs a camera target");
        }
    }
    ScenarioManifest manifest = build_manifest(config, seed);

    std::vector<ActorJob> jobs;
    for (size_t f = 0; f < config.families.size(); ++f) {
        for (size_t a = 0; a < static_cast<size_t>(config.families[f].actors); ++a) {
            jobs.push_back({expand_actor(config, f, a, seed), config.families[f].credentials});
        }
    }

    std::mutex err_mu;
    std::vector<std::thread> threads;
    threads.reserve(jobs.size());
    for (const auto& job : jobs) {
        threads.emplace_back([&job, &shell, &camera, &opts, &err_mu, &manifest] {
            try {
                if (job.plan.target == Target::Shell) {
                    run_shell_actor(job, *shell, opts);
                } else {
                    run_camera_actor(job, *camera, opts);
                }
            } catch (const Error& ex) {
                std::lock_guard<std::mutex> lock(err_mu);
                manifest.errors.push_back(std::string(ex.what()) + " [" + job.plan.family + "]");
            }
        });
    }
    for (auto& t : threads) t.join();
    std::sort(manifest.errors.begin(), manifest.errors.end());  // thread order is not meaningful
    manifest.complete = manifest.errors.empty();
    return manifest;
}

std::string canonical_transcript(const std::vector<events::Event>& events) {
    auto sessions = events::sessionize(events);
    // sessionize returns sessions in first-appearance order, and an actor's
    // connections are strictly sequential, so per-ip appearance order is the
    // actor's connection order regardless of cross-actor interleaving.
    std::map<std::string, int> next_ordinal;
    struct Keyed {
        std::string ip;
        int ordinal;
        const events::Session* session;
    };
    std::vector<Keyed> keyed;
    keyed.reserve(sessions.size());
    for (const auto& s : sessions) {
        keyed.push_back({s.actor_ip, next_ordinal[s.actor_ip]++, &s});
    }
    std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
        return std::tie(a.ip, a.ordinal) < std::tie(b.ip, b.ordinal);
    });
    std::string out;
    for (const auto& k : keyed) {
        for (const auto& e : k.session->events) {
            nlohmann::ordered_json j;
            j["ip"] = k.ip;
            j["conn"] = k.ordinal;
            j["honeypot"] = e.honeypot_id;
            j["kind"] = events::kind_name(e.kind);
            j["payload"] = e.payload;
            out += j.dump();
            out += "\n";
        }
    }
    return out;
}

}  // namespace iothp::sim
