#include <unordered_map>

#include "tdm/error.hpp"
#include "tdm/polystore.hpp"

namespace tdm {

Dimension run_dimension_query(const Adapter& adapter, const DimensionSpec& spec) {
    DimensionBuilder builder(spec.name, spec.key_type, spec.granularity);
    const std::size_t arity =
        spec.query.aggregate.op == Aggregate::Op::None ? spec.query.select.size()
                                                       : spec.query.select.size() + 1;
    adapter.run(spec.query, arity, [&](const std::vector<std::string>& cells) {
        builder.add(parse_key(cells[0], spec.key_type));
    });
    Dimension dim = std::move(builder).build();
    if (spec.with_null && !dim.has_null()) dim = dim.with_null();
    return dim;
}

void run_value_query(const Adapter& adapter, const TableQuery& query, std::size_t arity,
                     const std::function<void(const AdapterRow&)>& sink) {
    if (arity < 2) throw ArityMismatchError("a values query needs at least one key column");
    adapter.run(query, arity, [&](const std::vector<std::string>& cells) {
        AdapterRow row;
        row.keys.assign(cells.begin(), cells.end() - 1);
        row.value = cells.back();
        sink(row);
    });
}

namespace {

/// A materialized dimension that can still grow under the extend policy.
struct DimensionState {
    DimensionBuilder builder;
    const DimensionSpec* spec;
    std::size_t null_index = 0;   // 0 = no null key

    explicit DimensionState(const DimensionSpec& s)
        : builder(s.name, s.key_type, s.granularity), spec(&s) {}
};

}  // namespace

TypedTensor build_tensor(const TensorSchema& schema, const std::string& tensor_name,
                         const AdapterRegistry& registry) {
    const TensorSpec& spec = schema.tensor(tensor_name);
    const std::size_t order = spec.dimensions.size();

    // Dimensions materialize before the values query runs.
    std::vector<DimensionState> dims;
    dims.reserve(order);
    for (const auto& dim_name : spec.dimensions) {
        const DimensionSpec& dspec = schema.dimension(dim_name);
        DimensionState state(dspec);
        const std::size_t arity = dspec.query.aggregate.op == Aggregate::Op::None
                                      ? dspec.query.select.size()
                                      : dspec.query.select.size() + 1;
        registry.at(dspec.adapter_id)
            .run(dspec.query, arity, [&](const std::vector<std::string>& cells) {
                state.builder.add(parse_key(cells[0], dspec.key_type));
            });
        if (dspec.with_null) state.null_index = state.builder.add(NullKey{});
        dims.push_back(std::move(state));
    }

    struct Acc {
        double sum = 0.0;
        std::int64_t isum = 0;
        std::int64_t count = 0;
        Value last = 0.0;
        bool seen = false;
    };
    std::unordered_map<Coords, Acc, CoordsHash> cells;

    Coords coords(order);
    run_value_query(registry.at(spec.adapter_id), spec.query, order + 1,
                    [&](const AdapterRow& row) {
        for (std::size_t n = 0; n < order; ++n) {
            DimensionState& state = dims[n];
            const Key key = parse_key(row.keys[n], state.spec->key_type);
            std::size_t idx = 0;
            switch (state.spec->unknown) {
                case UnknownKeyPolicy::Extend:
                    idx = state.builder.add(key);
                    break;
                case UnknownKeyPolicy::Strict: {
                    const auto found = state.builder.find(key);
                    if (!found) {
                        throw KeyNotFoundError("key '" + format_key(key, state.spec->key_type) +
                                               "' not present in dimension '" + state.spec->name +
                                               "'");
                    }
                    idx = *found;
                    break;
                }
                case UnknownKeyPolicy::Null: {
                    const auto found = state.builder.find(key);
                    idx = found ? *found : state.null_index;
                    break;
                }
            }
            coords[n] = static_cast<Index>(idx);
        }

        Acc& acc = cells[coords];
        const Value v = parse_value(row.value, spec.value_type);
        if (acc.seen && spec.merge == MergePolicy::Error) {
            throw MergeConflictError("duplicate coordinate under the error merge policy in '" +
                                     spec.name + "'");
        }
        if (acc.seen && spec.merge == MergePolicy::Sum && spec.value_type == ValueType::Boolean) {
            throw MergeConflictError("boolean duplicates cannot merge by sum in '" + spec.name +
                                     "'");
        }
        acc.sum += value_as_real(v);
        if (spec.value_type == ValueType::Integer) acc.isum += std::get<std::int64_t>(v);
        acc.count += 1;
        acc.last = v;
        acc.seen = true;
    });

    std::vector<Dimension> final_dims;
    final_dims.reserve(order);
    for (auto& state : dims) final_dims.push_back(std::move(state.builder).build());

    TensorBuilder out(spec.name, std::move(final_dims), spec.value_type, spec.default_value);
    for (const auto& [c, acc] : cells) {
        Value v;
        switch (spec.merge) {
            case MergePolicy::Sum:
                v = spec.value_type == ValueType::Integer ? Value(acc.isum)
                    : spec.value_type == ValueType::Real  ? Value(acc.sum)
                                                          : acc.last;
                break;
            case MergePolicy::Count:
                v = spec.value_type == ValueType::Real ? Value(static_cast<double>(acc.count))
                                                       : Value(acc.count);
                break;
            case MergePolicy::Last:
            case MergePolicy::Error:
                v = acc.last;
                break;
        }
        if (spec.value_type == ValueType::Boolean && spec.merge == MergePolicy::Count) {
            v = acc.count > 0;
        }
        out.set_at(c, v);
    }
    return std::move(out).build();
}

}  // namespace tdm
