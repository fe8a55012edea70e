#include "netio/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "util/errors.hpp"

namespace iothp::netio {

namespace {

std::string errno_text(const char* what) {
    return std::string(what) + ": " + std::strerror(errno);
}

// Removes telnet IAC command sequences in place. IAC IAC is a literal 0xFF.
std::string strip_iac(const std::string& in) {
    std::string out;
    out.reserve(in.size());
    for (size_t i = 0; i < in.size();) {
        unsigned char c = static_cast<unsigned char>(in[i]);
        if (c != 255) {
            out.push_back(in[i]);
            ++i;
            continue;
        }
        if (i + 1 >= in.size()) break;  // dangling IAC, drop
        unsigned char cmd = static_cast<unsigned char>(in[i + 1]);
        if (cmd == 255) {
            out.push_back(static_cast<char>(255));
            i += 2;
        } else if (cmd >= 251 && cmd <= 254) {
            i += 3;  // WILL/WONT/DO/DONT <option>
        } else {
            i += 2;
        }
    }
    return out;
}

int wait_readable(int fd, int timeout_ms) {
    struct pollfd p;
    p.fd = fd;
    p.events = POLLIN;
    for (;;) {
        int rc = ::poll(&p, 1, timeout_ms);
        if (rc >= 0) return rc;
        if (errno != EINTR) throw iothp::IoError(errno_text("poll"));
    }
}

}  // namespace

TcpConn::TcpConn(int fd, std::string peer_ip, uint16_t peer_port)
    : fd_(fd), peer_ip_(std::move(peer_ip)), peer_port_(peer_port) {}

TcpConn::~TcpConn() {
    if (fd_ >= 0) ::close(fd_);
}

TcpConn::TcpConn(TcpConn&& other) noexcept
    : fd_(other.fd_),
      peer_ip_(std::move(other.peer_ip_)),
      peer_port_(other.peer_port_),
      pending_(std::move(other.pending_)) {
    other.fd_ = -1;
}

TcpConn& TcpConn::operator=(TcpConn&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = other.fd_;
        peer_ip_ = std::move(other.peer_ip_);
        peer_port_ = other.peer_port_;
        pending_ = std::move(other.pending_);
        other.fd_ = -1;
    }
    return *this;
}

void TcpConn::send_all(const std::string& data) {
    size_t sent = 0;
    while (sent < data.size()) {
        ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw IoError(errno_text("send"));
        }
        sent += static_cast<size_t>(n);
    }
}

TcpConn::LineResult TcpConn::read_line(int timeout_ms) {
    for (;;) {
        auto nl = pending_.find('\n');
        if (nl != std::string::npos) {
            std::string line = pending_.substr(0, nl);
            pending_.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return {ReadStatus::Ok, strip_iac(line)};
        }
        int rc = wait_readable(fd_, timeout_ms);
        if (rc == 0) return {ReadStatus::Timeout, {}};
        char buf[4096];
        ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            return {ReadStatus::Eof, {}};
        }
        if (n == 0) return {ReadStatus::Eof, {}};
        pending_.append(buf, static_cast<size_t>(n));
    }
}

TcpConn::ChunkResult TcpConn::read_some(size_t max_len, int timeout_ms) {
    if (!pending_.empty()) {
        size_t take = std::min(max_len, pending_.size());
        std::string data = pending_.substr(0, take);
        pending_.erase(0, take);
        return {ReadStatus::Ok, std::move(data)};
    }
    for (;;) {
        int rc = wait_readable(fd_, timeout_ms);
        if (rc == 0) return {ReadStatus::Timeout, {}};
        std::string buf(std::min<size_t>(max_len, 65536), '\0');
        ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            return {ReadStatus::Eof, {}};
        }
        if (n == 0) return {ReadStatus::Eof, {}};
        buf.resize(static_cast<size_t>(n));
        return {ReadStatus::Ok, std::move(buf)};
    }
}

TcpConn::ChunkResult TcpConn::read_exact(size_t n, int timeout_ms) {
    std::string out;
    out.reserve(n);
    while (out.size() < n) {
        auto chunk = read_some(n - out.size(), timeout_ms);
        if (chunk.status != ReadStatus::Ok) return {chunk.status, std::move(out)};
        out += chunk.data;
    }
    return {ReadStatus::Ok, std::move(out)};
}

void TcpConn::shutdown_both() {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

TcpListener::TcpListener(const std::string& host, uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw IoError(errno_text("socket"));
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd_);
        fd_ = -1;
        throw IoError("bad listen address '" + host + "'");
    }
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
        std::string err = errno_text("bind");
        ::close(fd_);
        fd_ = -1;
        throw IoError(err + " (" + host + ":" + std::to_string(port) + ")");
    }
    if (::listen(fd_, 64) < 0) {
        std::string err = errno_text("listen");
        ::close(fd_);
        fd_ = -1;
        throw IoError(err);
    }
    socklen_t len = sizeof addr;
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) == 0) {
        port_ = ntohs(addr.sin_port);
    }
}

TcpListener::~TcpListener() { close(); }

void TcpListener::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

std::optional<TcpConn> TcpListener::accept(const std::atomic<bool>& stop) {
    while (!stop.load()) {
        if (fd_ < 0) return std::nullopt;
        struct pollfd p;
        p.fd = fd_;
        p.events = POLLIN;
        int rc = ::poll(&p, 1, 100);
        if (rc < 0) {
            if (errno == EINTR) continue;
            return std::nullopt;
        }
        if (rc == 0) continue;
        sockaddr_in peer{};
        socklen_t len = sizeof peer;
        int cfd = ::accept(fd_, reinterpret_cast<sockaddr*>(&peer), &len);
        if (cfd < 0) {
            if (errno == EINTR || errno == ECONNABORTED) continue;
            return std::nullopt;
        }
        char ip[INET_ADDRSTRLEN] = {0};
        ::inet_ntop(AF_INET, &peer.sin_addr, ip, sizeof ip);
        return TcpConn(cfd, ip, ntohs(peer.sin_port));
    }
    return std::nullopt;
}

TcpConn tcp_connect(const std::string& host, uint16_t port, int timeout_ms) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw IoError(errno_text("socket"));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw IoError("bad connect address '" + host + "'");
    }

    int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
    if (rc < 0 && errno != EINPROGRESS) {
        std::string err = errno_text("connect");
        ::close(fd);
        throw IoError(err + " (" + host + ":" + std::to_string(port) + ")");
    }
    if (rc < 0) {
        struct pollfd p;
        p.fd = fd;
        p.events = POLLOUT;
        rc = ::poll(&p, 1, timeout_ms);
        if (rc <= 0) {
            ::close(fd);
            throw IoError("connect timeout (" + host + ":" + std::to_string(port) + ")");
        }
        int soerr = 0;
        socklen_t len = sizeof soerr;
        ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &soerr, &len);
        if (soerr != 0) {
            ::close(fd);
            throw IoError("connect: " + std::string(std::strerror(soerr)) + " (" + host + ":" +
                          std::to_string(port) + ")");
        }
    }
    ::fcntl(fd, F_SETFL, flags);
    return TcpConn(fd, host, port);
}

}  // namespace iothp::netio
