#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>

namespace iothp::netio {

// Connected TCP socket. Owns the fd; move-only.
class TcpConn {
  public:
    explicit TcpConn(int fd, std::string peer_ip = "", uint16_t peer_port = 0);
    ~TcpConn();
    TcpConn(TcpConn&& other) noexcept;
    TcpConn& operator=(TcpConn&& other) noexcept;
    TcpConn(const TcpConn&) = delete;
    TcpConn& operator=(const TcpConn&) = delete;

    int fd() const { return fd_; }
    const std::string& peer_ip() const { return peer_ip_; }
    uint16_t peer_port() const { return peer_port_; }

    // Writes the whole buffer; IoError on failure. SIGPIPE is suppressed.
    void send_all(const std::string& data);

    enum class ReadStatus { Ok, Eof, Timeout };
    struct LineResult {
        ReadStatus status = ReadStatus::Eof;
        std::string line;  // without the trailing newline / CR
    };

    // Reads one line. Telnet IAC option negotiation bytes are stripped so a
    // real telnet client's preamble does not pollute the input. A negative
    // timeout blocks forever.
    LineResult read_line(int timeout_ms);

    // Reads up to max_len raw bytes (at least 1 unless EOF/timeout).
    struct ChunkResult {
        ReadStatus status = ReadStatus::Eof;
        std::string data;
    };
    ChunkResult read_some(size_t max_len, int timeout_ms);

    // Reads exactly n bytes or reports why it could not.
    ChunkResult read_exact(size_t n, int timeout_ms);

    // Unblocks any reader/writer from another thread.
    void shutdown_both();

  private:
    int fd_ = -1;
    std::string peer_ip_;
    uint16_t peer_port_ = 0;
    std::string pending_;  // bytes read past the last returned line
};

// Listening socket bound to 127.0.0.1 or the given host. Port 0 binds an
// ephemeral port, readable via port().
class TcpListener {
  public:
    TcpListener(const std::string& host, uint16_t port);
    ~TcpListener();
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    uint16_t port() const { return port_; }

    // Waits for a connection, polling the stop flag. Returns nullopt once
    // stop becomes true (or the listener was closed).
    std::optional<TcpConn> accept(const std::atomic<bool>& stop);

    void close();

  private:
    int fd_ = -1;
    uint16_t port_ = 0;
};

// Client-side connect with a timeout; IoError on failure.
TcpConn tcp_connect(const std::string& host, uint16_t port, int timeout_ms = 5000);

}  // namespace iothp::netio
