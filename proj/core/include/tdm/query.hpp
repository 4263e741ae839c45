#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tdm/tensor.hpp"

namespace tdm {

/// Condition on one dimension's keys. At most one condition per dimension;
/// conditions on different dimensions conjoin.
struct DimCondition {
    enum class Kind { Equals, In, Range, Any };

    std::string dimension;
    Kind kind = Kind::Any;
    std::vector<Key> keys;                       // Equals: one entry; In: the set
    std::optional<Key> low, high;                // Range bounds (absent = unbounded)
    bool low_inclusive = true, high_inclusive = true;

    static DimCondition equals(std::string dimension, Key key);
    static DimCondition in(std::string dimension, std::vector<Key> keys);
    static DimCondition range(std::string dimension, std::optional<Key> low,
                              std::optional<Key> high, bool low_inclusive = true,
                              bool high_inclusive = true);
    static DimCondition any(std::string dimension);
};

/// Condition on tensor values.
struct ValueCondition {
    enum class Kind { Equals, NotEquals, Range, Any };

    Kind kind = Kind::Any;
    std::optional<Value> a;        // Equals/NotEquals operand, Range low
    std::optional<Value> b;        // Range high (inclusive bounds)

    static ValueCondition equals(Value v);
    static ValueCondition not_equals(Value v);
    static ValueCondition range(std::optional<Value> low, std::optional<Value> high);
    static ValueCondition any();
};

/// Boolean tensor of t's shape: 1 where every coordinate satisfies its
/// dimension's condition. No conditions (or only Any) produces the all-ones
/// mask, stored as an empty tensor with default true. Otherwise the passing
/// product set is materialized with default false.
TypedTensor mask_from_conditions(const TypedTensor& t, std::span<const DimCondition> conds);

/// Keep entries where mask is 1, everything else reverts to t's default.
/// Dimensions are not compacted.
TypedTensor project(const TypedTensor& t, const TypedTensor& mask);

/// Two-level selection: an entry survives iff its coordinates pass every
/// dimension condition and its value passes the value condition.
TypedTensor select(const TypedTensor& t, std::span<const DimCondition> dim_conds,
                   const ValueCondition& val_cond);

enum class Reducer { Sum, Count, Max };

/// Collapse one mode by reducing each of its fibers; the result drops that
/// dimension (aggregating a 1-order tensor yields a 0-order scalar).
TypedTensor aggregate(const TypedTensor& t, std::size_t collapse_mode, Reducer reducer);

/// Per-mode indicator vectors (index 0 unused; slot i = 1-based index i
/// passes). Shared by the mask builder and select.
std::vector<std::vector<char>> dimension_indicators(const TypedTensor& t,
                                                    std::span<const DimCondition> conds);

}  // namespace tdm
