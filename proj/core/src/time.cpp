#include "tdm/time.hpp"

#include <charconv>
#include <cstdio>

namespace tdm {

// Howard Hinnant's civil calendar algorithms.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& year, unsigned& month, unsigned& day) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = doy - (153 * mp + 2) / 5 + 1;
    month = mp + (mp < 10 ? 3 : -9);
    year = y + (month <= 2);
}

namespace {

bool parse_uint(std::string_view text, std::size_t pos, std::size_t len, unsigned& out) {
    if (pos + len > text.size()) return false;
    unsigned v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        const char c = text[i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + static_cast<unsigned>(c - '0');
    }
    out = v;
    return true;
}

}  // namespace

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
    // Plain integer: epoch seconds.
    {
        std::int64_t epoch = 0;
        const char* first = text.data();
        const char* last = text.data() + text.size();
        auto [ptr, ec] = std::from_chars(first, last, epoch);
        if (ec == std::errc() && ptr == last) return epoch;
    }

    unsigned y2 = 0, y4 = 0, mo = 0, da = 0, hh = 0, mi = 0, ss = 0;
    std::int64_t year = 0;
    std::size_t rest = 0;

    if (text.size() >= 10 && text[4] == '-' && text[7] == '-' &&
        parse_uint(text, 0, 4, y4) && parse_uint(text, 5, 2, mo) && parse_uint(text, 8, 2, da)) {
        year = y4;
        rest = 10;
    } else if (text.size() >= 8 && text[2] == '-' && text[5] == '-' &&
               parse_uint(text, 0, 2, y2) && parse_uint(text, 3, 2, mo) && parse_uint(text, 6, 2, da)) {
        year = 2000 + y2;  // two-digit years read as 20YY
        rest = 8;
    } else {
        return std::nullopt;
    }
    if (mo < 1 || mo > 12 || da < 1 || da > 31) return std::nullopt;

    std::int64_t seconds = days_from_civil(year, mo, da) * 86400;
    if (rest == text.size()) return seconds;

    // Optional " HH:MM:SS" tail.
    if (text.size() != rest + 9 || text[rest] != ' ') return std::nullopt;
    if (!parse_uint(text, rest + 1, 2, hh) || text[rest + 3] != ':' ||
        !parse_uint(text, rest + 4, 2, mi) || text[rest + 6] != ':' ||
        !parse_uint(text, rest + 7, 2, ss))
        return std::nullopt;
    if (hh > 23 || mi > 59 || ss > 60) return std::nullopt;
    return seconds + hh * 3600 + mi * 60 + ss;
}

std::string format_timestamp(std::int64_t epoch_seconds) {
    std::int64_t days = epoch_seconds / 86400;
    std::int64_t rem = epoch_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    std::int64_t year = 0;
    unsigned month = 0, day = 0;
    civil_from_days(days, year, month, day);

    char buf[32];
    if (rem == 0) {
        std::snprintf(buf, sizeof buf, "%04lld-%02u-%02u",
                      static_cast<long long>(year), month, day);
    } else {
        const unsigned hh = static_cast<unsigned>(rem / 3600);
        const unsigned mi = static_cast<unsigned>((rem % 3600) / 60);
        const unsigned ss = static_cast<unsigned>(rem % 60);
        std::snprintf(buf, sizeof buf, "%04lld-%02u-%02u %02u:%02u:%02u",
                      static_cast<long long>(year), month, day, hh, mi, ss);
    }
    return buf;
}

std::int64_t bucket_epoch(std::int64_t epoch_seconds, std::int64_t granularity) {
    if (granularity <= 1) return epoch_seconds;
    std::int64_t q = epoch_seconds / granularity;
    if (epoch_seconds % granularity < 0) --q;
    return q * granularity;
}

}  // namespace tdm
