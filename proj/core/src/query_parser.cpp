#include "tdm/query_parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "tdm/error.hpp"

namespace tdm {

namespace {

struct Cursor {
    std::string_view text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    bool at_end() {
        skip_ws();
        return pos >= text.size();
    }
    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }
    bool consume(std::string_view token) {
        skip_ws();
        if (text.substr(pos, token.size()) == token) {
            pos += token.size();
            return true;
        }
        return false;
    }
    void expect(std::string_view token) {
        if (!consume(token)) {
            throw ParseError("expected '" + std::string(token) + "'", pos);
        }
    }
};

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

std::string read_ident(Cursor& cur) {
    cur.skip_ws();
    const std::size_t start = cur.pos;
    while (cur.pos < cur.text.size() && ident_char(cur.text[cur.pos])) ++cur.pos;
    if (cur.pos == start) throw ParseError("expected identifier", start);
    return std::string(cur.text.substr(start, cur.pos - start));
}

std::string read_op(Cursor& cur) {
    cur.skip_ws();
    static constexpr std::string_view ops[] = {">=", "<=", "!=", "=", ">", "<"};
    for (auto op : ops) {
        if (cur.text.substr(cur.pos, op.size()) == op) {
            cur.pos += op.size();
            return std::string(op);
        }
    }
    throw ParseError("expected a comparison operator", cur.pos);
}

std::pair<std::string, bool> read_literal(Cursor& cur) {
    cur.skip_ws();
    if (cur.pos >= cur.text.size()) throw ParseError("expected a literal", cur.pos);
    if (cur.text[cur.pos] == '\'') {
        const std::size_t start = ++cur.pos;
        while (cur.pos < cur.text.size() && cur.text[cur.pos] != '\'') ++cur.pos;
        if (cur.pos >= cur.text.size()) throw ParseError("unterminated string literal", start - 1);
        std::string out(cur.text.substr(start, cur.pos - start));
        ++cur.pos;
        return {std::move(out), true};
    }
    const std::size_t start = cur.pos;
    while (cur.pos < cur.text.size() &&
           (ident_char(cur.text[cur.pos]) || cur.text[cur.pos] == '-' ||
            cur.text[cur.pos] == '+' || cur.text[cur.pos] == ':')) {
        ++cur.pos;
    }
    if (cur.pos == start) throw ParseError("expected a literal", start);
    return {std::string(cur.text.substr(start, cur.pos - start)), false};
}

}  // namespace

RawQuery parse_query(std::string_view text) {
    Cursor cur{text};
    RawQuery out;

    if (!cur.consume("select")) throw ParseError("query must start with 'select'", cur.pos);

    cur.expect("[");
    while (cur.peek() != ']') {
        RawComparison cmp;
        cur.skip_ws();
        cmp.position = cur.pos;
        cmp.dimension = read_ident(cur);
        cur.skip_ws();
        if (cur.text.substr(cur.pos, 2) == "in" &&
            (cur.pos + 2 >= cur.text.size() || !ident_char(cur.text[cur.pos + 2]))) {
            cur.pos += 2;
            cmp.op = "in";
            cur.expect("(");
            do {
                auto [lit, quoted] = read_literal(cur);
                cmp.literals.push_back(std::move(lit));
                cmp.quoted = quoted;
            } while (cur.consume(","));
            cur.expect(")");
        } else {
            cmp.op = read_op(cur);
            auto [lit, quoted] = read_literal(cur);
            cmp.literals.push_back(std::move(lit));
            cmp.quoted = quoted;
        }
        out.dim_comparisons.push_back(std::move(cmp));
        if (!cur.consume("&&")) break;
    }
    cur.expect("]");

    cur.expect("[");
    while (cur.peek() != ']') {
        RawValueComparison cmp;
        cur.skip_ws();
        cmp.position = cur.pos;
        cmp.op = read_op(cur);
        auto [lit, quoted] = read_literal(cur);
        (void)quoted;
        cmp.literal = std::move(lit);
        out.value_comparisons.push_back(std::move(cmp));
        if (!cur.consume("&&")) break;
    }
    cur.expect("]");

    cur.skip_ws();
    if (!cur.at_end()) out.tensor_name = read_ident(cur);
    if (!cur.at_end()) throw ParseError("trailing input after tensor name", cur.pos);
    return out;
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

/// Exact name match wins; otherwise a case-insensitive prefix must identify
/// exactly one dimension (so `U` finds `user` when nothing else starts
/// with u).
std::size_t resolve_dimension(const TypedTensor& t, const std::string& name, std::size_t pos) {
    for (std::size_t n = 1; n <= t.order(); ++n) {
        if (t.dim(n).name() == name) return n;
    }
    const std::string needle = lower(name);
    std::vector<std::size_t> matches;
    for (std::size_t n = 1; n <= t.order(); ++n) {
        if (lower(t.dim(n).name()).rfind(needle, 0) == 0) matches.push_back(n);
    }
    if (matches.size() == 1) return matches[0];
    if (matches.empty()) {
        throw UnknownDimensionError("no dimension matches '" + name + "' (position " +
                                    std::to_string(pos) + ")");
    }
    std::string candidates;
    for (auto n : matches) {
        if (!candidates.empty()) candidates += ", ";
        candidates += t.dim(n).name();
    }
    throw UnknownDimensionError("'" + name + "' is ambiguous between: " + candidates);
}

Key parse_typed_key(const std::string& literal, const Dimension& dim) {
    return parse_key(literal, dim.key_type());
}

struct RangeDraft {
    std::optional<Key> low, high;
    bool low_inclusive = true, high_inclusive = true;
};

}  // namespace

BoundQuery bind_query(const RawQuery& raw, const TypedTensor& t) {
    BoundQuery out;

    // Group comparisons per resolved mode; >=/<=/>/< merge into one range.
    std::map<std::size_t, std::vector<const RawComparison*>> per_mode;
    for (const auto& cmp : raw.dim_comparisons) {
        per_mode[resolve_dimension(t, cmp.dimension, cmp.position)].push_back(&cmp);
    }

    for (const auto& [mode, comparisons] : per_mode) {
        const Dimension& dim = t.dim(mode);
        bool has_range = false, has_point = false;
        RangeDraft draft;
        DimCondition cond = DimCondition::any(dim.name());
        for (const auto* cmp : comparisons) {
            if (cmp->op == "=" ) {
                if (has_point || has_range || comparisons.size() > 1) {
                    throw UnknownDimensionError("dimension '" + dim.name() +
                                                "' combines '=' with other comparisons");
                }
                cond = DimCondition::equals(dim.name(), parse_typed_key(cmp->literals[0], dim));
                has_point = true;
            } else if (cmp->op == "in") {
                if (comparisons.size() > 1) {
                    throw UnknownDimensionError("dimension '" + dim.name() +
                                                "' combines 'in' with other comparisons");
                }
                std::vector<Key> keys;
                keys.reserve(cmp->literals.size());
                for (const auto& lit : cmp->literals) keys.push_back(parse_typed_key(lit, dim));
                cond = DimCondition::in(dim.name(), std::move(keys));
                has_point = true;
            } else if (cmp->op == ">=" || cmp->op == ">") {
                if (draft.low) {
                    throw UnknownDimensionError("dimension '" + dim.name() +
                                                "' has two lower bounds");
                }
                draft.low = parse_typed_key(cmp->literals[0], dim);
                draft.low_inclusive = cmp->op == ">=";
                has_range = true;
            } else if (cmp->op == "<=" || cmp->op == "<") {
                if (draft.high) {
                    throw UnknownDimensionError("dimension '" + dim.name() +
                                                "' has two upper bounds");
                }
                draft.high = parse_typed_key(cmp->literals[0], dim);
                draft.high_inclusive = cmp->op == "<=";
                has_range = true;
            } else {
                throw UnknownDimensionError("operator '" + cmp->op +
                                            "' is not valid on dimension '" + dim.name() + "'");
            }
        }
        if (has_range) {
            cond = DimCondition::range(dim.name(), std::move(draft.low), std::move(draft.high),
                                       draft.low_inclusive, draft.high_inclusive);
        }
        out.dim_conditions.push_back(std::move(cond));
    }

    // Value block: `=v` / `!=v` alone, or bound comparisons merging to a range.
    out.value_condition = ValueCondition::any();
    std::optional<Value> low, high;
    for (const auto& cmp : raw.value_comparisons) {
        const Value v = parse_value(cmp.literal, t.value_type());
        if (cmp.op == "=") {
            if (raw.value_comparisons.size() > 1) {
                throw TypeMismatchError("value '=' cannot combine with other value comparisons");
            }
            out.value_condition = ValueCondition::equals(v);
        } else if (cmp.op == "!=") {
            if (raw.value_comparisons.size() > 1) {
                throw TypeMismatchError("value '!=' cannot combine with other value comparisons");
            }
            out.value_condition = ValueCondition::not_equals(v);
        } else if (cmp.op == ">=") {
            low = v;
        } else if (cmp.op == "<=") {
            high = v;
        } else {
            throw TypeMismatchError("value operator '" + cmp.op + "' is not supported (use =, !=, >=, <=)");
        }
    }
    if (low || high) {
        out.value_condition = ValueCondition::range(std::move(low), std::move(high));
    }
    return out;
}

TypedTensor run_query(const TypedTensor& t, std::string_view text) {
    const RawQuery raw = parse_query(text);
    if (!raw.tensor_name.empty() && raw.tensor_name != t.name()) {
        throw UnknownDimensionError("query names tensor '" + raw.tensor_name +
                                    "' but the input tensor is '" + t.name() + "'");
    }
    const BoundQuery bound = bind_query(raw, t);
    return select(t, bound.dim_conditions, bound.value_condition);
}

}  // namespace tdm
