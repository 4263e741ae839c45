#include "tdm/value.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <system_error>

#include "tdm/error.hpp"
#include "tdm/time.hpp"

namespace tdm {

namespace {

std::optional<std::int64_t> parse_int(std::string_view text) {
    std::int64_t out = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return out;
}

std::optional<double> parse_real(std::string_view text) {
    double out = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return out;
}

}  // namespace

bool key_matches(const Key& key, KeyType type) {
    if (std::holds_alternative<NullKey>(key)) return true;
    switch (type) {
        case KeyType::String: return std::holds_alternative<std::string>(key);
        case KeyType::Integer: return std::holds_alternative<std::int64_t>(key);
        case KeyType::Timestamp: return std::holds_alternative<std::int64_t>(key);
        case KeyType::Real: return std::holds_alternative<double>(key);
    }
    return false;
}

bool is_null(const Key& key) { return std::holds_alternative<NullKey>(key); }

bool key_less(const Key& a, const Key& b) {
    if (a.index() != b.index()) return a.index() < b.index();
    return std::visit(
        [&](const auto& lhs) {
            using T = std::decay_t<decltype(lhs)>;
            return lhs < std::get<T>(b);
        },
        a);
}

std::size_t KeyHash::operator()(const Key& key) const {
    const std::size_t tag = key.index() * 0x9e3779b97f4a7c15ULL;
    return std::visit(
        [&](const auto& v) -> std::size_t {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, NullKey>) {
                return tag;
            } else {
                return tag ^ std::hash<T>{}(v);
            }
        },
        key);
}

std::string format_key(const Key& key, KeyType type) {
    if (is_null(key)) return "⊥";  // ⊥
    // Render by the actual alternative; the declared type only decides
    // whether an integer prints as a timestamp.
    return std::visit(
        [&](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) {
                return v;
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                return type == KeyType::Timestamp ? format_timestamp(v) : std::to_string(v);
            } else if constexpr (std::is_same_v<T, double>) {
                return format_real(v);
            } else {
                return {};
            }
        },
        key);
}

std::string csv_key(const Key& key, KeyType type) {
    if (is_null(key)) return "\\N";
    return format_key(key, type);
}

Key parse_key(std::string_view text, KeyType type) {
    if (text == "\\N" || text == "⊥") return NullKey{};
    switch (type) {
        case KeyType::String:
            return std::string(text);
        case KeyType::Integer: {
            auto v = parse_int(text);
            if (!v) throw TypeMismatchError("not an integer key: '" + std::string(text) + "'");
            return *v;
        }
        case KeyType::Real: {
            auto v = parse_real(text);
            if (!v) throw TypeMismatchError("not a real key: '" + std::string(text) + "'");
            return *v;
        }
        case KeyType::Timestamp: {
            auto v = parse_timestamp(text);
            if (!v) throw TypeMismatchError("not a timestamp key: '" + std::string(text) + "'");
            return *v;
        }
    }
    throw TypeMismatchError("unknown key type");
}

bool value_matches(const Value& v, ValueType type) {
    switch (type) {
        case ValueType::Integer: return std::holds_alternative<std::int64_t>(v);
        case ValueType::Real: return std::holds_alternative<double>(v);
        case ValueType::Boolean: return std::holds_alternative<bool>(v);
    }
    return false;
}

double value_as_real(const Value& v) {
    return std::visit([](const auto& x) { return static_cast<double>(x); }, v);
}

Value value_from_real(double v, ValueType type) {
    switch (type) {
        case ValueType::Integer: return static_cast<std::int64_t>(std::llround(v));
        case ValueType::Real: return v;
        case ValueType::Boolean: return v != 0.0;
    }
    return v;
}

std::string format_value(const Value& v) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, bool>) {
                return x ? "1" : "0";
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                return std::to_string(x);
            } else {
                return format_real(x);
            }
        },
        v);
}

Value parse_value(std::string_view text, ValueType type) {
    switch (type) {
        case ValueType::Integer: {
            auto v = parse_int(text);
            if (!v) throw TypeMismatchError("not an integer value: '" + std::string(text) + "'");
            return *v;
        }
        case ValueType::Real: {
            auto v = parse_real(text);
            if (!v) throw TypeMismatchError("not a real value: '" + std::string(text) + "'");
            return *v;
        }
        case ValueType::Boolean: {
            if (text == "1" || text == "true") return true;
            if (text == "0" || text == "false") return false;
            throw TypeMismatchError("not a boolean value: '" + std::string(text) + "'");
        }
    }
    throw TypeMismatchError("unknown value type");
}

std::string_view key_type_name(KeyType type) {
    switch (type) {
        case KeyType::String: return "string";
        case KeyType::Integer: return "integer";
        case KeyType::Real: return "real";
        case KeyType::Timestamp: return "timestamp";
    }
    return "?";
}

std::string_view value_type_name(ValueType type) {
    switch (type) {
        case ValueType::Integer: return "integer";
        case ValueType::Real: return "real";
        case ValueType::Boolean: return "boolean";
    }
    return "?";
}

std::optional<KeyType> key_type_from_name(std::string_view name) {
    if (name == "string") return KeyType::String;
    if (name == "integer") return KeyType::Integer;
    if (name == "real") return KeyType::Real;
    if (name == "timestamp") return KeyType::Timestamp;
    return std::nullopt;
}

std::optional<ValueType> value_type_from_name(std::string_view name) {
    if (name == "integer") return ValueType::Integer;
    if (name == "real") return ValueType::Real;
    if (name == "boolean") return ValueType::Boolean;
    return std::nullopt;
}

std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

}  // namespace tdm
