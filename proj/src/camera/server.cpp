#include "camera/server.hpp"

#include <sys/socket.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "camera/signatures.hpp"
#include "util/base64.hpp"
#include "util/errors.hpp"
#include "util/hashing.hpp"
#include "util/rng.hpp"
#include "util/strings.hpp"

namespace iothp::camera {

namespace {

constexpr size_t kMaxHeaderLines = 100;
constexpr size_t kMaxBodyBytes = 8 * 1024 * 1024;

std::string status_reason(int code) {
    switch (code) {
        case 200: return "OK";
        case 400: return "Bad Request";
        case 401: return "Unauthorized";
        case 404: return "Not Found";
        default: return "OK";
    }
}

struct ResponseExtras {
    bool keep_alive = true;
    std::vector<std::pair<std::string, std::string>> headers;
};

std::string build_response(const CameraProfile& profile, int code,
                           const std::string& content_type, const std::string& body,
                           const ResponseExtras& extras) {
    std::ostringstream out;
    out << "HTTP/1.1 " << code << " " << status_reason(code) << "\r\n";
    out << "Server: " << profile.server_header << "\r\n";
    out << "Content-Type: " << content_type << "\r\n";
    out << "Content-Length: " << body.size() << "\r\n";
    for (const auto& [key, value] : extras.headers) {
        out << key << ": " << value << "\r\n";
    }
    out << "Connection: " << (extras.keep_alive ? "keep-alive" : "close") << "\r\n";
    out << "\r\n";
    out << body;
    return out.str();
}

std::string error_body(int code) {
    std::ostringstream out;
    out << "<html><head><title>" << code << " " << status_reason(code)
        << "</title></head><body><h1>" << code << " " << status_reason(code)
        << "</h1></body></html>\n";
    return out.str();
}

// Returns the user:pass pair from a Basic Authorization header, if decodable.
std::optional<std::pair<std::string, std::string>> parse_basic_auth(const HttpRequest& request) {
    auto it = request.headers.find("authorization");
    if (it == request.headers.end()) return std::nullopt;
    std::string value = util::trim(it->second);
    const std::string scheme = "Basic ";
    if (value.size() <= scheme.size()) return std::nullopt;
    for (size_t i = 0; i < scheme.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(value[i])) !=
            std::tolower(static_cast<unsigned char>(scheme[i]))) {
            return std::nullopt;
        }
    }
    auto decoded_bytes = util::base64_decode(util::trim(value.substr(scheme.size())));
    if (!decoded_bytes) return std::nullopt;
    std::string decoded(decoded_bytes->begin(), decoded_bytes->end());
    size_t colon = decoded.find(':');
    if (colon == std::string::npos) return std::nullopt;
    return std::make_pair(decoded.substr(0, colon), decoded.substr(colon + 1));
}

bool wants_keep_alive(const HttpRequest& request) {
    std::string connection;
    auto it = request.headers.find("connection");
    if (it != request.headers.end()) connection = util::to_lower(util::trim(it->second));
    if (request.version == "HTTP/1.0") return connection == "keep-alive";
    return connection != "close";
}

// Fake DVR user table. The listed credentials are decoys and do not
// authenticate anywhere on this device.
std::string device_rsp_body() {
    return "{\"result\":0,\"list\":[{\"uid\":\"admin\",\"pwd\":\"admin\",\"role\":2},"
           "{\"uid\":\"guest\",\"pwd\":\"guest123\",\"role\":0}]}\n";
}

}  // namespace

CameraServer::CameraServer(CameraProfile profile, std::shared_ptr<events::EventSink> sink,
                           CameraServerOptions options)
    : profile_(std::move(profile)), sink_(std::move(sink)), options_(std::move(options)) {
    validate(profile_);
    if (!sink_) throw ValidationError("camera server requires an event sink");
    frames_ = make_frames(profile_);
    leak_page_ = leak_page_html(profile_);
}

CameraServer::~CameraServer() { stop(); }

void CameraServer::start() {
    if (listener_) throw IoError("camera server already started");
    stop_.store(false);
    listener_.emplace(options_.host, options_.port);
    accept_thread_ = std::thread([this] { accept_loop(); });
}

void CameraServer::stop() {
    if (!listener_) return;
    if (stop_.exchange(true)) return;
    listener_->close();
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
    for (auto& handler : handlers) {
        if (handler.joinable()) handler.join();
    }
    listener_.reset();
}

uint16_t CameraServer::port() const {
    if (!listener_) throw IoError("camera server not started");
    return listener_->port();
}

std::string CameraServer::next_session_id() {
    uint64_t counter;
    {
        std::lock_guard<std::mutex> lock(mu_);
        counter = ++session_counter_;
    }
    uint64_t a = util::derive_seed(options_.seed, "camera-session-a-" + std::to_string(counter));
    uint64_t b = util::derive_seed(options_.seed, "camera-session-b-" + std::to_string(counter));
    char buf[33];
    std::snprintf(buf, sizeof(buf), "%016llx%016llx", static_cast<unsigned long long>(a),
                  static_cast<unsigned long long>(b));
    return std::string(buf);
}

void CameraServer::log_event(events::EventKind kind, const std::string& session_id,
                             const std::string& src_ip, uint16_t src_port,
                             std::map<std::string, std::string> payload) {
    events::Event event;
    event.ts = util::now_ms();
    event.src_ip = src_ip;
    event.src_port = src_port;
    event.honeypot_id = options_.honeypot_id;
    event.session = session_id;
    event.kind = kind;
    event.payload = std::move(payload);
    sink_->append(event);
}

void CameraServer::accept_loop() {
    while (!stop_.load()) {
        std::optional<netio::TcpConn> conn = listener_->accept(stop_);
        if (!conn) break;
        {
            std::lock_guard<std::mutex> lock(mu_);
            if (stop_.load()) break;
            live_fds_.insert(conn->fd());
            handlers_.emplace_back([this, c = std::move(*conn)]() mutable {
                int cfd = c.fd();
                try {
                    handle_connection(std::move(c));
                } catch (const Error&) {
                    // A broken connection only ends that session.
                }
                std::lock_guard<std::mutex> lock2(mu_);
                live_fds_.erase(cfd);
            });
        }
    }
}

void CameraServer::send_stream(netio::TcpConn& conn) {
    const std::string boundary = "ipcamera";
    std::ostringstream head;
    head << "HTTP/1.1 200 OK\r\n";
    head << "Server: " << profile_.server_header << "\r\n";
    head << "Content-Type: multipart/x-mixed-replace; boundary=" << boundary << "\r\n";
    head << "Connection: close\r\n";
    head << "\r\n";
    conn.send_all(head.str());
    for (int i = 0; i < profile_.frame_count && !stop_.load(); ++i) {
        const std::string& frame = frames_[static_cast<size_t>(i) % frames_.size()];
        std::ostringstream part;
        part << "--" << boundary << "\r\n";
        part << "Content-Type: image/jpeg\r\n";
        part << "Content-Length: " << frame.size() << "\r\n";
        part << "\r\n";
        part << frame << "\r\n";
        conn.send_all(part.str());
        if (i + 1 >= profile_.frame_count) break;
        int waited = 0;
        while (waited < profile_.frame_interval_ms && !stop_.load()) {
            int slice = std::min(50, profile_.frame_interval_ms - waited);
            std::this_thread::sleep_for(std::chrono::milliseconds(slice));
            waited += slice;
        }
    }
    conn.send_all("--" + boundary + "--\r\n");
}

std::string CameraServer::store_firmware(const HttpRequest& request, const std::string& src_ip,
                                         const std::string& session_id) {
    namespace fs = std::filesystem;
    fs::create_directories(profile_.artifacts_dir);
    std::string digest = util::sha256_hex(request.body);
    fs::path bin_path = fs::path(profile_.artifacts_dir) / (digest + ".bin");
    {
        std::ofstream out(bin_path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write artifact: " + bin_path.string());
        out.write(request.body.data(), static_cast<std::streamsize>(request.body.size()));
    }
    nlohmann::ordered_json meta;
    meta["sha256"] = digest;
    meta["size"] = request.body.size();
    meta["src_ip"] = src_ip;
    meta["session"] = session_id;
    meta["path"] = request.path;
    fs::path meta_path = fs::path(profile_.artifacts_dir) / (digest + ".json");
    std::ofstream meta_out(meta_path, std::ios::trunc);
    if (!meta_out) throw IoError("cannot write artifact metadata: " + meta_path.string());
    meta_out << meta.dump(2) << "\n";
    return digest;
}

void CameraServer::handle_connection(netio::TcpConn conn) {
    using ReadStatus = netio::TcpConn::ReadStatus;
    const int timeout = options_.idle_timeout_ms;
    std::string session_id = next_session_id();
    std::string src_ip = conn.peer_ip();
    uint16_t src_port = conn.peer_port();
    bool connect_logged = false;
    // With a forwarding proxy in front the real source is only known once the
    // first request arrives, so the connect event waits for it.
    if (!options_.trust_forwarded_for) {
        log_event(events::EventKind::Connect, session_id, src_ip, src_port,
                  {{"protocol", "http"}});
        connect_logged = true;
    }

    std::string disconnect_reason = "eof";
    // Last credential pair written to the log for this session; repeats are
    // not logged again.
    std::optional<std::pair<std::string, std::string>> last_logged_creds;

    try {
        for (;;) {
            if (stop_.load()) break;
            auto first = conn.read_line(timeout);
            if (first.status == ReadStatus::Eof) {
                disconnect_reason = "eof";
                break;
            }
            if (first.status == ReadStatus::Timeout) {
                disconnect_reason = "timeout";
                break;
            }
            if (util::trim(first.line).empty()) continue;  // stray CRLF between requests

            HttpRequest request = parse_request_line(first.line);
            bool truncated = false;
            if (!request.malformed) {
                for (size_t i = 0; i < kMaxHeaderLines; ++i) {
                    auto header = conn.read_line(timeout);
                    if (header.status != ReadStatus::Ok) {
                        disconnect_reason =
                            header.status == ReadStatus::Timeout ? "timeout" : "eof";
                        truncated = true;
                        break;
                    }
                    if (header.line.empty()) break;
                    if (auto parsed = parse_header_line(header.line)) {
                        request.headers[parsed->first] = parsed->second;
                    }
                }
            }
            if (truncated) break;
            if (!request.malformed) {
                size_t content_length = 0;
                auto it = request.headers.find("content-length");
                if (it != request.headers.end()) {
                    try {
                        content_length =
                            static_cast<size_t>(std::stoull(util::trim(it->second)));
                    } catch (const std::exception&) {
                        request.malformed = true;
                    }
                }
                if (!request.malformed && content_length > 0) {
                    if (content_length > kMaxBodyBytes) {
                        request.malformed = true;
                    } else {
                        auto body = conn.read_exact(content_length, timeout);
                        if (body.status != ReadStatus::Ok) {
                            disconnect_reason =
                                body.status == ReadStatus::Timeout ? "timeout" : "eof";
                            break;
                        }
                        request.body = std::move(body.data);
                    }
                }
            }

            if (options_.trust_forwarded_for) {
                auto fwd = request.headers.find("x-forwarded-for");
                if (fwd != request.headers.end()) {
                    std::string head_ip = util::trim(util::split(fwd->second, ",")[0]);
                    if (!head_ip.empty()) src_ip = head_ip;
                }
            }
            if (!connect_logged) {
                log_event(events::EventKind::Connect, session_id, src_ip, src_port,
                          {{"protocol", "http"}});
                connect_logged = true;
            }

            std::optional<std::string> attack = classify_request(request);

            std::map<std::string, std::string> payload;
            if (request.malformed) {
                payload["malformed"] = "true";
                payload["raw_line"] = request.raw_first_line;
            } else {
                payload["method"] = request.method;
                payload["path"] = request.path;
                if (!request.query.empty()) payload["query"] = request.query;
                auto ua = request.headers.find("user-agent");
                if (ua != request.headers.end()) payload["user_agent"] = ua->second;
                auto ref = request.headers.find("referer");
                if (ref != request.headers.end()) payload["referer"] = ref->second;
            }
            if (attack) payload["attack_type"] = *attack;
            log_event(events::EventKind::HttpRequest, session_id, src_ip, src_port,
                      std::move(payload));

            if (request.malformed) {
                ResponseExtras extras;
                extras.keep_alive = false;
                conn.send_all(build_response(profile_, 400, "text/html", error_body(400), extras));
                disconnect_reason = "bad_request";
                break;
            }

            bool keep_alive = wants_keep_alive(request);
            ResponseExtras extras;
            extras.keep_alive = keep_alive;

            // Unauthenticated surface: the credential leak and the DVR bypass.
            if (request.path == "/config/getuser") {
                {
                    std::lock_guard<std::mutex> lock(mu_);
                    leak_ips_.insert(src_ip);
                }
                conn.send_all(build_response(profile_, 200, "text/html", leak_page_, extras));
                if (!keep_alive) {
                    disconnect_reason = "closed";
                    break;
                }
                continue;
            }
            if (util::contains(request.path, "/device.rsp")) {
                auto cookie = request.headers.find("cookie");
                bool bypass = cookie != request.headers.end() &&
                              util::contains(cookie->second, "uid=admin");
                if (bypass) {
                    conn.send_all(build_response(profile_, 200, "application/json",
                                                 device_rsp_body(), extras));
                } else {
                    ResponseExtras denied = extras;
                    denied.headers.emplace_back("WWW-Authenticate",
                                                "Basic realm=\"" + profile_.model + "\"");
                    conn.send_all(
                        build_response(profile_, 401, "text/html", error_body(401), denied));
                }
                if (!keep_alive) {
                    disconnect_reason = "closed";
                    break;
                }
                continue;
            }

            // Everything else sits behind basic auth against the device account.
            auto creds = parse_basic_auth(request);
            bool authed = creds && creds->first == profile_.username &&
                          creds->second == profile_.password;
            if (creds && creds != last_logged_creds) {
                std::map<std::string, std::string> login;
                login["username"] = creds->first;
                login["password"] = creds->second;
                if (authed) {
                    bool leaked_here;
                    {
                        std::lock_guard<std::mutex> lock(mu_);
                        leaked_here = leak_ips_.count(src_ip) > 0;
                    }
                    // The only written copy of this credential is an image, so
                    // a valid login either followed the leak page (someone read
                    // the picture) or arrived with no visible source.
                    login[leaked_here ? "human_suspect" : "credential_mystery"] = "true";
                }
                log_event(authed ? events::EventKind::LoginSuccess
                                 : events::EventKind::LoginFailure,
                          session_id, src_ip, src_port, std::move(login));
                last_logged_creds = creds;
            }
            if (!authed) {
                extras.headers.emplace_back("WWW-Authenticate",
                                            "Basic realm=\"" + profile_.model + "\"");
                conn.send_all(build_response(profile_, 401, "text/html", error_body(401), extras));
                if (!keep_alive) {
                    disconnect_reason = "closed";
                    break;
                }
                continue;
            }

            if (request.path == "/video/mjpg.cgi") {
                send_stream(conn);
                disconnect_reason = "stream_end";
                break;
            }
            if (request.path == "/upgrade.cgi" && request.method == "POST") {
                std::string digest = store_firmware(request, src_ip, session_id);
                std::map<std::string, std::string> download;
                download["url"] = "upload:/upgrade.cgi";
                download["sha256"] = digest;
                download["size"] = std::to_string(request.body.size());
                log_event(events::EventKind::DownloadAttempt, session_id, src_ip, src_port,
                          std::move(download));
                std::string body =
                    "<html><body><h2>Firmware upload accepted.</h2>"
                    "<p>The device will verify the image and reboot.</p></body></html>\n";
                conn.send_all(build_response(profile_, 200, "text/html", body, extras));
            } else {
                const auto& routes = page_routes();
                auto route = routes.find(request.path);
                if (route != routes.end()) {
                    conn.send_all(build_response(profile_, 200, "text/html",
                                                 render_page(route->second, profile_), extras));
                } else {
                    conn.send_all(
                        build_response(profile_, 404, "text/html", error_body(404), extras));
                }
            }
            if (!keep_alive) {
                disconnect_reason = "closed";
                break;
            }
        }
    } catch (const IoError&) {
        disconnect_reason = "io_error";
    }

    if (connect_logged) {
        log_event(events::EventKind::Disconnect, session_id, src_ip, src_port,
                  {{"reason", disconnect_reason}});
    }
    conn.shutdown_both();
}

}  // namespace iothp::camera
