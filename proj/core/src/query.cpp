#include "tdm/query.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tdm/error.hpp"

namespace tdm {

DimCondition DimCondition::equals(std::string dimension, Key key) {
    DimCondition c;
    c.dimension = std::move(dimension);
    c.kind = Kind::Equals;
    c.keys.push_back(std::move(key));
    return c;
}

DimCondition DimCondition::in(std::string dimension, std::vector<Key> keys) {
    DimCondition c;
    c.dimension = std::move(dimension);
    c.kind = Kind::In;
    c.keys = std::move(keys);
    return c;
}

DimCondition DimCondition::range(std::string dimension, std::optional<Key> low,
                                 std::optional<Key> high, bool low_inclusive,
                                 bool high_inclusive) {
    DimCondition c;
    c.dimension = std::move(dimension);
    c.kind = Kind::Range;
    c.low = std::move(low);
    c.high = std::move(high);
    c.low_inclusive = low_inclusive;
    c.high_inclusive = high_inclusive;
    return c;
}

DimCondition DimCondition::any(std::string dimension) {
    DimCondition c;
    c.dimension = std::move(dimension);
    return c;
}

ValueCondition ValueCondition::equals(Value v) {
    ValueCondition c;
    c.kind = Kind::Equals;
    c.a = std::move(v);
    return c;
}

ValueCondition ValueCondition::not_equals(Value v) {
    ValueCondition c;
    c.kind = Kind::NotEquals;
    c.a = std::move(v);
    return c;
}

ValueCondition ValueCondition::range(std::optional<Value> low, std::optional<Value> high) {
    ValueCondition c;
    c.kind = Kind::Range;
    c.a = std::move(low);
    c.b = std::move(high);
    return c;
}

ValueCondition ValueCondition::any() { return ValueCondition{}; }

namespace {

void fill_indicator(const Dimension& dim, const DimCondition& cond, std::vector<char>& ind) {
    switch (cond.kind) {
        case DimCondition::Kind::Any:
            std::fill(ind.begin() + 1, ind.end(), 1);
            return;
        case DimCondition::Kind::Equals:
        case DimCondition::Kind::In:
            for (const auto& key : cond.keys) {
                if (!key_matches(key, dim.key_type())) {
                    throw TypeMismatchError("condition key does not match dimension '" +
                                            dim.name() + "' of type " +
                                            std::string(key_type_name(dim.key_type())));
                }
                if (auto idx = dim.find(key)) ind[*idx] = 1;
            }
            return;
        case DimCondition::Kind::Range: {
            Key low, high;
            if (cond.low) low = dim.normalize(*cond.low);
            if (cond.high) high = dim.normalize(*cond.high);
            for (std::size_t i = 1; i <= dim.size(); ++i) {
                const Key& key = dim.key_of(i);
                if (is_null(key)) continue;  // null never satisfies a range
                bool ok = true;
                if (cond.low) {
                    ok = cond.low_inclusive ? !key_less(key, low) : key_less(low, key);
                }
                if (ok && cond.high) {
                    ok = cond.high_inclusive ? !key_less(high, key) : key_less(key, high);
                }
                if (ok) ind[i] = 1;
            }
            return;
        }
    }
}

bool value_passes(const Value& v, const ValueCondition& cond, ValueType type) {
    switch (cond.kind) {
        case ValueCondition::Kind::Any:
            return true;
        case ValueCondition::Kind::Equals:
            if (!value_matches(*cond.a, type)) {
                throw TypeMismatchError("value condition operand does not match tensor type");
            }
            return v == *cond.a;
        case ValueCondition::Kind::NotEquals:
            if (!value_matches(*cond.a, type)) {
                throw TypeMismatchError("value condition operand does not match tensor type");
            }
            return !(v == *cond.a);
        case ValueCondition::Kind::Range: {
            const double x = value_as_real(v);
            if (cond.a) {
                if (!value_matches(*cond.a, type)) {
                    throw TypeMismatchError("value condition operand does not match tensor type");
                }
                if (x < value_as_real(*cond.a)) return false;
            }
            if (cond.b) {
                if (!value_matches(*cond.b, type)) {
                    throw TypeMismatchError("value condition operand does not match tensor type");
                }
                if (x > value_as_real(*cond.b)) return false;
            }
            return true;
        }
    }
    return false;
}

}  // namespace

std::vector<std::vector<char>> dimension_indicators(const TypedTensor& t,
                                                    std::span<const DimCondition> conds) {
    std::vector<std::vector<char>> ind(t.order());
    std::vector<char> conditioned(t.order(), 0);
    for (std::size_t n = 0; n < t.order(); ++n) {
        ind[n].assign(t.dim(n + 1).size() + 1, 0);
    }
    for (const auto& cond : conds) {
        const std::size_t mode = t.mode_of(cond.dimension);
        if (conditioned[mode - 1]) {
            throw Error("multiple conditions on dimension '" + cond.dimension + "'");
        }
        conditioned[mode - 1] = 1;
        fill_indicator(t.dim(mode), cond, ind[mode - 1]);
    }
    for (std::size_t n = 0; n < t.order(); ++n) {
        if (!conditioned[n]) std::fill(ind[n].begin() + 1, ind[n].end(), 1);
    }
    return ind;
}

TypedTensor mask_from_conditions(const TypedTensor& t, std::span<const DimCondition> conds) {
    const auto ind = dimension_indicators(t, conds);

    bool all_pass = true;
    for (std::size_t n = 0; n < t.order() && all_pass; ++n) {
        for (std::size_t i = 1; i < ind[n].size() && all_pass; ++i) {
            if (!ind[n][i]) all_pass = false;
        }
    }
    if (all_pass) {
        // All-ones mask: default true, nothing stored.
        return TensorBuilder(t.name() + "_mask", t.dims(), ValueType::Boolean, true).build();
    }

    std::vector<std::vector<Index>> passing(t.order());
    double extent = 1.0;
    for (std::size_t n = 0; n < t.order(); ++n) {
        for (std::size_t i = 1; i < ind[n].size(); ++i) {
            if (ind[n][i]) passing[n].push_back(static_cast<Index>(i));
        }
        extent *= static_cast<double>(passing[n].size());
    }
    if (extent > 5e7) {
        throw Error("mask materialization would store " + format_real(extent) + " entries");
    }

    TensorBuilder out(t.name() + "_mask", t.dims(), ValueType::Boolean, false);
    if (extent == 0.0) return std::move(out).build();

    Coords coords(t.order());
    std::vector<std::size_t> pos(t.order(), 0);
    while (true) {
        for (std::size_t n = 0; n < t.order(); ++n) coords[n] = passing[n][pos[n]];
        out.set_at(coords, true);
        std::size_t n = t.order();
        bool done = true;
        while (n-- > 0) {
            if (++pos[n] < passing[n].size()) {
                done = false;
                break;
            }
            pos[n] = 0;
        }
        if (done) break;
    }
    return std::move(out).build();
}

TypedTensor project(const TypedTensor& t, const TypedTensor& mask) {
    if (mask.value_type() != ValueType::Boolean) {
        throw TypeMismatchError("project mask must be boolean");
    }
    if (t.order() != mask.order()) {
        throw ShapeMismatchError("project: order " + std::to_string(t.order()) + " vs " +
                                 std::to_string(mask.order()));
    }
    for (std::size_t n = 1; n <= t.order(); ++n) {
        if (t.dim(n).size() != mask.dim(n).size()) {
            throw ShapeMismatchError("project: mode " + std::to_string(n) + " size mismatch");
        }
    }
    TensorBuilder out(t.name(), t.dims(), t.value_type(), t.default_value());
    for (const auto& [coords, v] : t.stored()) {
        if (std::get<bool>(mask.at(coords))) out.set_at(coords, v);
    }
    return std::move(out).build();
}

TypedTensor select(const TypedTensor& t, std::span<const DimCondition> dim_conds,
                   const ValueCondition& val_cond) {
    const auto ind = dimension_indicators(t, dim_conds);
    TensorBuilder out(t.name(), t.dims(), t.value_type(), t.default_value());
    for (const auto& [coords, v] : t.stored()) {
        bool pass = true;
        for (std::size_t n = 0; n < coords.size() && pass; ++n) {
            pass = ind[n][coords[n]] != 0;
        }
        if (pass && value_passes(v, val_cond, t.value_type())) out.set_at(coords, v);
    }
    return std::move(out).build();
}

TypedTensor aggregate(const TypedTensor& t, std::size_t collapse_mode, Reducer reducer) {
    if (collapse_mode < 1 || collapse_mode > t.order()) {
        throw ModeOutOfRangeError("mode " + std::to_string(collapse_mode) + " out of range [1, " +
                                  std::to_string(t.order()) + "]");
    }
    if (reducer != Reducer::Count && !t.is_numeric()) {
        throw NonNumericValueTypeError("sum/max aggregation requires a numeric tensor");
    }

    const std::size_t collapsed_size = t.dim(collapse_mode).size();
    std::vector<Dimension> dims;
    for (std::size_t n = 1; n <= t.order(); ++n) {
        if (n != collapse_mode) dims.push_back(t.dim(n));
    }

    const ValueType out_type = reducer == Reducer::Count ? ValueType::Integer : t.value_type();
    const double def = value_as_real(t.default_value());

    // Reducing an all-default fiber gives the result's default value.
    Value out_default;
    switch (reducer) {
        case Reducer::Sum:
            out_default = value_from_real(def * static_cast<double>(collapsed_size), out_type);
            break;
        case Reducer::Count:
            out_default = std::int64_t{0};
            break;
        case Reducer::Max:
            out_default = collapsed_size == 0 ? value_from_real(0.0, out_type) : t.default_value();
            break;
    }

    struct Acc {
        double sum = 0.0;
        std::int64_t isum = 0;
        std::size_t count = 0;
        double max = -std::numeric_limits<double>::infinity();
    };
    std::unordered_map<Coords, Acc, CoordsHash> groups;
    for (const auto& [coords, v] : t.stored()) {
        Coords reduced;
        reduced.reserve(coords.size() - 1);
        for (std::size_t n = 0; n < coords.size(); ++n) {
            if (n + 1 != collapse_mode) reduced.push_back(coords[n]);
        }
        Acc& acc = groups[reduced];
        const double x = value_as_real(v);
        acc.sum += x;
        if (std::holds_alternative<std::int64_t>(v)) acc.isum += std::get<std::int64_t>(v);
        acc.count += 1;
        acc.max = std::max(acc.max, x);
    }

    TensorBuilder out(t.name(), std::move(dims), out_type, out_default);
    for (const auto& [coords, acc] : groups) {
        const double absent = static_cast<double>(collapsed_size - acc.count);
        Value v;
        switch (reducer) {
            case Reducer::Sum:
                if (out_type == ValueType::Integer) {
                    v = acc.isum + static_cast<std::int64_t>(def) *
                                       static_cast<std::int64_t>(collapsed_size - acc.count);
                } else {
                    v = acc.sum + def * absent;
                }
                break;
            case Reducer::Count:
                v = static_cast<std::int64_t>(acc.count);
                break;
            case Reducer::Max:
                v = value_from_real(acc.count < collapsed_size ? std::max(acc.max, def) : acc.max,
                                    out_type);
                break;
        }
        out.set_at(coords, v);
    }
    return std::move(out).build();
}

}  // namespace tdm
