#pragma once

#include <cstdio>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "events/event.hpp"

namespace iothp::events {

// Append target shared by all connection handlers of a honeypot process.
// Implementations must serialize appends.
class EventSink {
public:
    virtual ~EventSink() = default;

    // Validates, enforces per-session timestamp monotonicity, then stores the
    // event. Throws ValidationError / IoError; never drops silently.
    virtual void append(Event event) = 0;
};

// JSON-lines file sink; one event per line, flushed per append so a crash
// loses at most the line being written.
class JsonlEventSink : public EventSink {
public:
    explicit JsonlEventSink(const std::string& path);
    ~JsonlEventSink() override;

    JsonlEventSink(const JsonlEventSink&) = delete;
    JsonlEventSink& operator=(const JsonlEventSink&) = delete;

    void append(Event event) override;

    size_t appended() const;
    const std::string& path() const { return path_; }

private:
    std::string path_;
    FILE* file_ = nullptr;
    mutable std::mutex mu_;
    size_t appended_ = 0;
    std::map<std::string, util::Millis> last_ts_;
};

// In-memory sink for tests and the vetting prober.
class MemoryEventSink : public EventSink {
public:
    void append(Event event) override;
    std::vector<Event> snapshot() const;
    size_t size() const;

private:
    mutable std::mutex mu_;
    std::vector<Event> events_;
    std::map<std::string, util::Millis> last_ts_;
};

}  // namespace iothp::events
