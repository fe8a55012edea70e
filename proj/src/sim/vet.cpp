#include "sim/vet.hpp"

#include <algorithm>
#include <chrono>

#include "netio/net.hpp"
#include "util/errors.hpp"
#include "util/strings.hpp"

namespace iothp::sim {

namespace {

using netio::TcpConn;

// Suffix-matching reader, same contract as the scenario runner's.
struct ReadResult {
    bool found = false;
    std::string data;
};

ReadResult read_until(TcpConn& conn, const std::string& marker, int timeout_ms) {
    ReadResult r;
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    for (;;) {
        if (r.data.size() >= marker.size() &&
            r.data.compare(r.data.size() - marker.size(), marker.size(), marker) == 0) {
            r.found = true;
            return r;
        }
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                        deadline - std::chrono::steady_clock::now())
                        .count();
        if (left <= 0) return r;
        auto chunk = conn.read_some(512, static_cast<int>(left));
        if (chunk.status != TcpConn::ReadStatus::Ok) return r;
        r.data += chunk.data;
    }
}

// Everything before the prompt line, CRLF-trimmed.
std::string strip_prompt(const std::string& data) {
    auto nl = data.find_last_of('\n');
    std::string out = nl == std::string::npos ? std::string() : data.substr(0, nl);
    while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
    return out;
}

std::string first_line(const std::string& s) {
    auto nl = s.find_first_of("\r\n");
    return nl == std::string::npos ? s : s.substr(0, nl);
}

}  // namespace

bool VetReport::all_passed() const {
    return complete && !checks.empty() &&
           std::all_of(checks.begin(), checks.end(), [](const VetCheck& c) { return c.passed; });
}

VetReport fingerprint_probe(const std::string& host, uint16_t port, const VetOptions& opts) {
    VetReport report;
    std::optional<TcpConn> maybe;
    try {
        maybe.emplace(netio::tcp_connect(host, port, opts.io_timeout_ms));
    } catch (const IoError&) {
        return report;  // unreachable: incomplete, no verdicts
    }
    TcpConn& conn = *maybe;
    report.complete = true;

    auto fail_rest = [&report](const std::string& why) {
        for (const char* name : {"file_response", "uname_consistency", "unknown_command_shape",
                                 "timing_sanity"}) {
            bool present = std::any_of(report.checks.begin(), report.checks.end(),
                                       [&](const VetCheck& c) { return c.name == name; });
            if (!present) report.checks.push_back({name, false, why});
        }
    };

    auto banner = read_until(conn, "login: ", opts.io_timeout_ms);
    {
        VetCheck check{"banner_plausibility", false, ""};
        if (!banner.found) {
            check.detail = "no login prompt";
        } else {
            std::string before = strip_prompt(banner.data);
            std::string lowered = util::to_lower(banner.data);
            if (util::trim(before).empty()) {
                check.detail = "no banner before the login prompt";
            } else if (util::contains(lowered, "honeypot") || util::contains(lowered, "cowrie")) {
                check.detail = "banner names the trap: " + first_line(before);
            } else {
                check.passed = true;
                check.detail = first_line(util::trim(before));
            }
        }
        report.checks.push_back(check);
    }
    if (!banner.found) {
        fail_rest("no login prompt");
        return report;
    }

    conn.send_all(opts.username + "\r\n");
    auto at_pass = read_until(conn, "Password: ", opts.io_timeout_ms);
    if (!at_pass.found) {
        fail_rest("no password prompt");
        return report;
    }
    conn.send_all(opts.password + "\r\n");
    auto outcome = read_until(conn, "# ", opts.io_timeout_ms);
    if (!outcome.found) {
        fail_rest("login with the supplied credentials failed");
        return report;
    }
    // The prompt just printed carries the advertised hostname: user@host:cwd#
    std::string prompt = outcome.data.substr(outcome.data.find_last_of('\n') + 1);
    std::string hostname;
    auto at = prompt.find('@');
    auto colon = prompt.find(':', at == std::string::npos ? 0 : at);
    if (at != std::string::npos && colon != std::string::npos && colon > at + 1) {
        hostname = prompt.substr(at + 1, colon - at - 1);
    }

    auto run = [&](const std::string& command) -> std::optional<std::string> {
        conn.send_all(command + "\r\n");
        auto r = read_until(conn, "# ", opts.io_timeout_ms);
        if (!r.found) return std::nullopt;
        return strip_prompt(r.data);
    };

    {
        VetCheck check{"file_response", false, ""};
        auto out = run("file /bin/busybox");
        if (!out) {
            check.detail = "no response";
        } else if (util::trim(*out).empty() || util::contains(*out, "not found")) {
            check.detail = "`file` is not emulated: " + first_line(*out);
        } else {
            check.passed = true;
            check.detail = first_line(*out);
        }
        report.checks.push_back(check);
    }

    {
        VetCheck check{"uname_consistency", false, ""};
        auto uname = run("uname -a");
        auto usage = run("busybox");
        if (!uname || !usage) {
            check.detail = "no response";
        } else if (uname->rfind("Linux ", 0) != 0) {
            check.detail = "uname does not report Linux: " + first_line(*uname);
        } else if (hostname.empty() || !util::contains(*uname, hostname)) {
            check.detail = "uname omits the advertised hostname '" + hostname + "'";
        } else if (!util::contains(*usage, "BusyBox v")) {
            check.detail = "busybox banner missing";
        } else {
            check.passed = true;
            check.detail = first_line(*uname);
        }
        report.checks.push_back(check);
    }

    {
        // A believable shell complains in shell voice about gibberish.
        VetCheck check{"unknown_command_shape", false, ""};
        const std::string probe = "qpzfv8213x";
        auto out = run(probe);
        if (!out) {
            check.detail = "no response";
        } else if (util::contains(*out, probe) && util::contains(*out, "not found")) {
            check.passed = true;
            check.detail = first_line(*out);
        } else {
            check.detail = "unexpected error shape: " + first_line(*out);
        }
        report.checks.push_back(check);
    }

    {
        VetCheck check{"timing_sanity", false, ""};
        long worst_ms = 0;
        bool answered = true;
        for (int i = 0; i < 3 && answered; ++i) {
            auto begin = std::chrono::steady_clock::now();
            auto out = run("echo vetping");
            auto rtt = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - begin)
                           .count();
            worst_ms = std::max(worst_ms, static_cast<long>(rtt));
            answered = out && util::contains(*out, "vetping");
        }
        if (!answered) {
            check.detail = "echo did not come back";
        } else if (worst_ms > opts.max_rtt_ms) {
            check.detail = "round trip " + std::to_string(worst_ms) + " ms exceeds " +
                           std::to_string(opts.max_rtt_ms) + " ms";
        } else {
            check.passed = true;
            check.detail = "worst round trip " + std::to_string(worst_ms) + " ms";
        }
        report.checks.push_back(check);
    }

    conn.send_all("exit\r\n");
    return report;
}

}  // namespace iothp::sim
