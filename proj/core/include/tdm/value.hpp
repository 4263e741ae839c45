#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace tdm {

/// Distinguished out-of-band null key (rendered "⊥", serialized "\N").
/// It is not expressible as a string/integer/real key, so it can never
/// collide with user data.
struct NullKey {
    friend bool operator==(NullKey, NullKey) { return true; }
    friend bool operator<(NullKey, NullKey) { return false; }
};

/// One dimension key. Timestamp keys are carried as bucketed epoch seconds
/// in the integer alternative; the owning Dimension knows the distinction.
using Key = std::variant<NullKey, std::int64_t, double, std::string>;

enum class KeyType { String, Integer, Real, Timestamp };

/// One tensor cell value.
using Value = std::variant<std::int64_t, double, bool>;

enum class ValueType { Integer, Real, Boolean };

bool key_matches(const Key& key, KeyType type);
bool is_null(const Key& key);

/// Natural order within one key type. Comparing keys of different variant
/// alternatives orders by alternative index (null first); callers that need
/// typed semantics guard the types themselves.
bool key_less(const Key& a, const Key& b);

struct KeyHash {
    std::size_t operator()(const Key& key) const;
};

/// Human-readable rendering; timestamps as UTC dates, null as "⊥".
std::string format_key(const Key& key, KeyType type);

/// CSV cell rendering: identical to format_key except null becomes "\N".
std::string csv_key(const Key& key, KeyType type);

/// Inverse of csv_key/format_key. Accepts "\N" for null; timestamps accept
/// epoch integers, YYYY-MM-DD, YY-MM-DD and YYYY-MM-DD HH:MM:SS.
Key parse_key(std::string_view text, KeyType type);

bool value_matches(const Value& v, ValueType type);
double value_as_real(const Value& v);

/// Narrowing real -> typed value; integers round to nearest, booleans
/// become v != 0.
Value value_from_real(double v, ValueType type);

std::string format_value(const Value& v);
Value parse_value(std::string_view text, ValueType type);

std::string_view key_type_name(KeyType type);
std::string_view value_type_name(ValueType type);
std::optional<KeyType> key_type_from_name(std::string_view name);
std::optional<ValueType> value_type_from_name(std::string_view name);

/// Shortest round-trip decimal rendering of a double ("5" stays "5").
std::string format_real(double v);

}  // namespace tdm
