#include "events/sink.hpp"

#include <cerrno>
#include <cstring>

#include "util/errors.hpp"

namespace iothp::events {

namespace {
// System clocks can step backwards; the log invariant (non-decreasing ts per
// session) is enforced here rather than trusted.
void clamp_ts(std::map<std::string, util::Millis>& last, Event& e) {
    auto it = last.find(e.session);
    if (it != last.end() && e.ts < it->second) e.ts = it->second;
    last[e.session] = e.ts;
}
}  // namespace

JsonlEventSink::JsonlEventSink(const std::string& path) : path_(path) {
    file_ = std::fopen(path.c_str(), "ab");
    if (!file_) {
        throw IoError("cannot open event log '" + path + "': " + std::strerror(errno));
    }
}

JsonlEventSink::~JsonlEventSink() {
    if (file_) std::fclose(file_);
}

void JsonlEventSink::append(Event event) {
    validate_event(event);
    std::lock_guard<std::mutex> lock(mu_);
    clamp_ts(last_ts_, event);
    std::string line = event_to_line(event);
    line.push_back('\n');
    if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() ||
        std::fflush(file_) != 0) {
        throw IoError("write to event log '" + path_ + "' failed: " + std::strerror(errno));
    }
    ++appended_;
}

size_t JsonlEventSink::appended() const {
    std::lock_guard<std::mutex> lock(mu_);
    return appended_;
}

void MemoryEventSink::append(Event event) {
    validate_event(event);
    std::lock_guard<std::mutex> lock(mu_);
    clamp_ts(last_ts_, event);
    events_.push_back(std::move(event));
}

std::vector<Event> MemoryEventSink::snapshot() const {
    std::lock_guard<std::mutex> lock(mu_);
    return events_;
}

size_t MemoryEventSink::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return events_.size();
}

}  // namespace iothp::events
