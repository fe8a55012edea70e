#include "util/timeutil.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

namespace iothp::util {

Millis now_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string format_iso8601_ms(Millis ms) {
    time_t secs = static_cast<time_t>(ms / 1000);
    int frac = static_cast<int>(ms % 1000);
    if (frac < 0) {
        frac += 1000;
        secs -= 1;
    }
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                  tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                  tm.tm_hour, tm.tm_min, tm.tm_sec, frac);
    return buf;
}

std::optional<Millis> parse_iso8601_ms(const std::string& s) {
    int year = 0, mon = 0, day = 0, hour = 0, min = 0, sec = 0;
    int consumed = 0;
    if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n",
                    &year, &mon, &day, &hour, &min, &sec, &consumed) != 6) {
        return std::nullopt;
    }
    size_t pos = static_cast<size_t>(consumed);
    int frac_ms = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        int digits = 0;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            if (digits < 3) frac_ms = frac_ms * 10 + (s[pos] - '0');
            ++digits;
            ++pos;
        }
        if (digits == 0) return std::nullopt;
        while (digits < 3) {
            frac_ms *= 10;
            ++digits;
        }
    }
    long offset_s = 0;
    if (pos < s.size()) {
        if (s[pos] == 'Z') {
            ++pos;
        } else if (s[pos] == '+' || s[pos] == '-') {
            int oh = 0, om = 0;
            char sign = s[pos];
            ++pos;
            if (std::sscanf(s.c_str() + pos, "%2d:%2d", &oh, &om) == 2) {
                pos += 5;
            } else if (std::sscanf(s.c_str() + pos, "%2d%2d", &oh, &om) == 2) {
                pos += 4;
            } else {
                return std::nullopt;
            }
            offset_s = (oh * 3600L + om * 60L) * (sign == '+' ? 1 : -1);
        } else {
            return std::nullopt;
        }
    }
    if (pos != s.size()) return std::nullopt;
    if (mon < 1 || mon > 12 || day < 1 || day > 31 || hour > 23 || min > 59 || sec > 60) {
        return std::nullopt;
    }
    std::tm tm{};
    tm.tm_year = year - 1900;
    tm.tm_mon = mon - 1;
    tm.tm_mday = day;
    tm.tm_hour = hour;
    tm.tm_min = min;
    tm.tm_sec = sec;
    time_t utc = timegm(&tm);
    if (utc == static_cast<time_t>(-1) && year != 1969) return std::nullopt;
    return static_cast<Millis>(utc - offset_s) * 1000 + frac_ms;
}

}  // namespace iothp::util
