#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tdm/query.hpp"
#include "tdm/tensor.hpp"

namespace tdm {

/// One comparison as written, before dimension names and literal types are
/// known: `user >= 'u1'`, `time <= '18-03-08'`, `hashtag in ('a','b')`.
struct RawComparison {
    std::string dimension;
    std::string op;                      // =, !=, <, <=, >, >=, in
    std::vector<std::string> literals;   // one entry except for in
    bool quoted = false;
    std::size_t position = 0;            // byte offset of the dimension token
};

struct RawValueComparison {
    std::string op;
    std::string literal;
    std::size_t position = 0;
};

/// `select [cdt dim] [cdt val] tensor` parsed purely syntactically.
struct RawQuery {
    std::vector<RawComparison> dim_comparisons;
    std::vector<RawValueComparison> value_comparisons;
    std::string tensor_name;
};

/// Throws ParseError with the byte offset of the offending token.
RawQuery parse_query(std::string_view text);

struct BoundQuery {
    std::vector<DimCondition> dim_conditions;
    ValueCondition value_condition;
};

/// Bind raw comparisons against a tensor: dimension names resolve by exact
/// match, then by unique case-insensitive prefix; literals parse with the
/// resolved dimension's key type (so quoted dates hit timestamp dimensions).
/// Multiple >=/<=/>/< comparisons on one dimension merge into a single range
/// condition. Throws UnknownDimensionError or TypeMismatchError.
BoundQuery bind_query(const RawQuery& raw, const TypedTensor& t);

/// Convenience: parse, check the trailing tensor name, bind, run select.
TypedTensor run_query(const TypedTensor& t, std::string_view text);

}  // namespace tdm
