#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace tdm {

/// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(std::int64_t year, unsigned month, unsigned day);

/// Inverse of days_from_civil.
void civil_from_days(std::int64_t days, std::int64_t& year, unsigned& month, unsigned& day);

/// Accepts: epoch seconds as a plain integer, "YYYY-MM-DD", "YY-MM-DD"
/// (meaning 20YY), and "YYYY-MM-DD HH:MM:SS". All UTC.
std::optional<std::int64_t> parse_timestamp(std::string_view text);

/// "YYYY-MM-DD" when the instant is midnight-aligned, else
/// "YYYY-MM-DD HH:MM:SS".
std::string format_timestamp(std::int64_t epoch_seconds);

/// Floor epoch_seconds to a multiple of granularity (exact for negatives).
std::int64_t bucket_epoch(std::int64_t epoch_seconds, std::int64_t granularity);

}  // namespace tdm
