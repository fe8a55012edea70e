#include "shell/server.hpp"

#include <sys/socket.h>

#include <cstdio>

#include "util/errors.hpp"
#include "util/rng.hpp"
#include "util/strings.hpp"
#include "util/timeutil.hpp"

namespace iothp::shell {

using netio::TcpConn;

ShellServer::ShellServer(ShellConfig config, std::shared_ptr<events::EventSink> sink,
                         ShellServerOptions options)
    : config_(std::move(config)), sink_(std::move(sink)), options_(std::move(options)) {
    validate(config_);
}

ShellServer::~ShellServer() { stop(); }

void ShellServer::start() {
    listener_.emplace(options_.host, options_.port);
    stop_.store(false);
    accept_thread_ = std::thread([this] { accept_loop(); });
}

uint16_t ShellServer::port() const { return listener_ ? listener_->port() : 0; }

void ShellServer::stop() {
    if (stop_.exchange(true)) {
        if (accept_thread_.joinable()) accept_thread_.join();
        return;
    }
    if (listener_) listener_->close();
    {
        std::lock_guard<std::mutex> lock(mu_);
        for (int fd : live_fds_) ::shutdown(fd, SHUT_RDWR);
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    std::vector<std::thread> handlers;
    {
        std::lock_guard<std::mutex> lock(mu_);
        handlers.swap(handlers_);
    }
    for (auto& t : handlers) {
        if (t.joinable()) t.join();
    }
}

std::string ShellServer::next_session_id() {
    uint64_t n;
    {
        std::lock_guard<std::mutex> lock(mu_);
        n = session_counter_++;
    }
    uint64_t hi = util::derive_seed(options_.seed, "shell-session-hi-" + std::to_string(n));
    uint64_t lo = util::derive_seed(options_.seed, "shell-session-lo-" + std::to_string(n));
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(hi),
                  static_cast<unsigned long long>(lo));
    return buf;
}

void ShellServer::log_event(events::EventKind kind, const std::string& session_id,
                            const std::string& src_ip, uint16_t src_port,
                            std::map<std::string, std::string> payload) {
    events::Event e;
    e.ts = util::now_ms();
    e.src_ip = src_ip;
    e.src_port = src_port;
    e.honeypot_id = options_.honeypot_id;
    e.session = session_id;
    e.kind = kind;
    e.payload = std::move(payload);
    sink_->append(e);
}

void ShellServer::accept_loop() {
    while (!stop_.load()) {
        auto conn = listener_->accept(stop_);
        if (!conn) break;
        int fd = conn->fd();
        std::lock_guard<std::mutex> lock(mu_);
        if (stop_.load()) break;
        live_fds_.insert(fd);
        handlers_.emplace_back(
            [this, c = std::make_shared<TcpConn>(std::move(*conn))]() mutable {
                int cfd = c->fd();
                try {
                    handle_connection(std::move(*c));
                } catch (...) {
                    // A broken connection only ends that session.
                }
                std::lock_guard<std::mutex> lock2(mu_);
                live_fds_.erase(cfd);
            });
    }
}

void ShellServer::handle_connection(TcpConn conn) {
    const int timeout = options_.idle_timeout_ms;
    std::string src_ip = conn.peer_ip();
    uint16_t src_port = conn.peer_port();

    // The simulator cannot vary real loopback source addresses, so in test
    // mode the very first line may carry the synthetic one.
    if (options_.test_source_tags) {
        auto first = conn.read_line(timeout);
        if (first.status != TcpConn::ReadStatus::Ok) return;
        if (first.line.rfind("%SRC ", 0) == 0) {
            std::string tagged = util::trim(first.line.substr(5));
            if (!tagged.empty()) src_ip = tagged;
        }
    }

    ShellSession session;
    session.session_id = next_session_id();
    std::string disconnect_reason = "eof";

    log_event(events::EventKind::Connect, session.session_id, src_ip, src_port,
              {{"protocol", "telnet"}});

    try {
        if (!config_.banner.empty()) conn.send_all(config_.banner + "\r\n");
        conn.send_all(config_.hostname + " login: ");

        for (int attempt = 1; attempt <= options_.max_login_attempts; ++attempt) {
            auto user = conn.read_line(timeout);
            if (user.status != TcpConn::ReadStatus::Ok) {
                disconnect_reason = user.status == TcpConn::ReadStatus::Timeout ? "timeout" : "eof";
                log_event(events::EventKind::Disconnect, session.session_id, src_ip, src_port,
                          {{"reason", disconnect_reason}});
                return;
            }
            conn.send_all("Password: ");
            auto pass = conn.read_line(timeout);
            if (pass.status != TcpConn::ReadStatus::Ok) {
                disconnect_reason = pass.status == TcpConn::ReadStatus::Timeout ? "timeout" : "eof";
                log_event(events::EventKind::Disconnect, session.session_id, src_ip, src_port,
                          {{"reason", disconnect_reason}});
                return;
            }
            std::pair<std::string, std::string> cred{util::trim(user.line),
                                                     util::trim(pass.line)};
            if (authenticate(cred, config_) == AuthResult::Success) {
                session.authenticated = true;
                session.username = cred.first;
                log_event(events::EventKind::LoginSuccess, session.session_id, src_ip, src_port,
                          {{"username", cred.first}, {"password", cred.second}});
                break;
            }
            log_event(events::EventKind::LoginFailure, session.session_id, src_ip, src_port,
                      {{"username", cred.first}, {"password", cred.second}});
            if (attempt < options_.max_login_attempts) {
                conn.send_all("\r\nLogin incorrect\r\n" + config_.hostname + " login: ");
            } else {
                conn.send_all("\r\nLogin incorrect\r\n");
            }
        }

        if (!session.authenticated) {
            log_event(events::EventKind::Disconnect, session.session_id, src_ip, src_port,
                      {{"reason", "auth_failed"}});
            return;
        }

        if (!config_.motd.empty()) {
            conn.send_all("\r\n" + util::join(util::split(config_.motd, "\n"), "\r\n"));
        }
        conn.send_all("\r\n" + prompt(session, config_));

        for (;;) {
            auto line = conn.read_line(timeout);
            if (line.status != TcpConn::ReadStatus::Ok) {
                disconnect_reason = line.status == TcpConn::ReadStatus::Timeout ? "timeout" : "eof";
                break;
            }
            std::string input = util::trim(line.line);
            if (input.empty()) {
                conn.send_all(prompt(session, config_));
                continue;
            }
            log_event(events::EventKind::Command, session.session_id, src_ip, src_port,
                      {{"input", input}});
            if (input == "exit" || input == "logout" || input == "quit") {
                conn.send_all("logout\r\n");
                disconnect_reason = "logout";
                break;
            }
            ExecResult result = execute(input, session, config_);
            for (const auto& dl : result.downloads) {
                std::map<std::string, std::string> payload{{"command", dl.command}};
                if (dl.parse_failed) {
                    payload["url_parse_failed"] = "true";
                } else {
                    payload["url"] = dl.url;
                    payload["placeholder_sha256"] = dl.placeholder_sha256;
                }
                log_event(events::EventKind::DownloadAttempt, session.session_id, src_ip,
                          src_port, std::move(payload));
            }
            std::string out = result.output;
            if (!out.empty()) {
                conn.send_all(util::join(util::split(out, "\n"), "\r\n") + "\r\n");
            }
            conn.send_all(prompt(session, config_));
        }
    } catch (const IoError&) {
        disconnect_reason = "io_error";
    }

    log_event(events::EventKind::Disconnect, session.session_id, src_ip, src_port,
              {{"reason", disconnect_reason}});
}

}  // namespace iothp::shell
