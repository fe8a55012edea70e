#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <thread>
#include <vector>

#include "camera/http.hpp"
#include "camera/profile.hpp"
#include "events/sink.hpp"
#include "netio/net.hpp"

namespace iothp::camera {

struct CameraServerOptions {
    std::string host = "127.0.0.1";
    uint16_t port = 8080;  // 0 binds an ephemeral port
    int idle_timeout_ms = 15000;
    std::string honeypot_id = "honeycamera";
    uint64_t seed = 1;
    // Test mode: X-Forwarded-For supplies the logged source address and the
    // connect event is deferred until the first request arrives.
    bool trust_forwarded_for = false;
};

// HTTP/1.1 honeypot. One handler thread per connection; a TCP connection is
// one session, keep-alive requests included.
class CameraServer {
  public:
    CameraServer(CameraProfile profile, std::shared_ptr<events::EventSink> sink,
                 CameraServerOptions options);
    ~CameraServer();
    CameraServer(const CameraServer&) = delete;
    CameraServer& operator=(const CameraServer&) = delete;

    void start();
    void stop();
    uint16_t port() const;

  private:
    void accept_loop();
    void handle_connection(netio::TcpConn conn);
    std::string next_session_id();
    void log_event(events::EventKind kind, const std::string& session_id,
                   const std::string& src_ip, uint16_t src_port,
                   std::map<std::string, std::string> payload);
    void send_stream(netio::TcpConn& conn);
    std::string store_firmware(const HttpRequest& request, const std::string& src_ip,
                               const std::string& session_id);

    CameraProfile profile_;
    std::shared_ptr<events::EventSink> sink_;
    CameraServerOptions options_;
    std::vector<std::string> frames_;
    std::string leak_page_;

    std::atomic<bool> stop_{false};
    std::optional<netio::TcpListener> listener_;
    std::thread accept_thread_;
    std::mutex mu_;  // guards handlers_, live_fds_, session_counter_, leak_ips_
    std::vector<std::thread> handlers_;
    std::set<int> live_fds_;
    std::set<std::string> leak_ips_;  // sources that saw the leak page
    uint64_t session_counter_ = 0;
};

}  // namespace iothp::camera
