#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <thread>
#include <vector>

#include "events/sink.hpp"
#include "netio/net.hpp"
#include "shell/config.hpp"
#include "shell/engine.hpp"

namespace iothp::shell {

struct ShellServerOptions {
    std::string host = "127.0.0.1";
    uint16_t port = 2323;  // 0 binds an ephemeral port
    int idle_timeout_ms = 120000;
    int max_login_attempts = 3;
    std::string honeypot_id = "honeyshell";
    uint64_t seed = 1;  // session-id generator seed
    // Test mode: the first line of a connection may be "%SRC <ip>", giving
    // the synthetic source address the simulator wants logged. Production
    // deployments leave this off and the real peer address is used.
    bool test_source_tags = false;
};

// Telnet-style accept loop. One handler thread per connection; handlers
// share only the sink and the immutable config.
class ShellServer {
  public:
    ShellServer(ShellConfig config, std::shared_ptr<events::EventSink> sink,
                ShellServerOptions options);
    ~ShellServer();
    ShellServer(const ShellServer&) = delete;
    ShellServer& operator=(const ShellServer&) = delete;

    void start();  // throws IoError when the port cannot be bound
    void stop();   // idempotent; joins every handler
    uint16_t port() const;

  private:
    void accept_loop();
    void handle_connection(netio::TcpConn conn);
    std::string next_session_id();
    void log_event(events::EventKind kind, const std::string& session_id,
                   const std::string& src_ip, uint16_t src_port,
                   std::map<std::string, std::string> payload);

    ShellConfig config_;
    std::shared_ptr<events::EventSink> sink_;
    ShellServerOptions options_;

    std::atomic<bool> stop_{false};
    std::optional<netio::TcpListener> listener_;
    std::thread accept_thread_;
    std::mutex mu_;  // guards handlers_, live_fds_, session_counter_
    std::vector<std::thread> handlers_;
    std::set<int> live_fds_;
    uint64_t session_counter_ = 0;
};

}  // namespace iothp::shell
