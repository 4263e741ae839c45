#include <filesystem>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "tdm/error.hpp"
#include "tdm/io.hpp"
#include "tdm/polystore.hpp"

namespace tdm {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw SchemaError("schema: " + what); }

const json& need(const json& obj, const char* field, const std::string& where) {
    auto it = obj.find(field);
    if (it == obj.end()) fail(where + " needs a '" + field + "' field");
    return *it;
}

TableQuery parse_table_query(const json& q, const std::string& where) {
    TableQuery out;
    for (const auto& col : need(q, "select", where)) {
        out.select.push_back(col.get<std::string>());
    }
    if (out.select.empty()) fail(where + " selects no columns");
    if (q.contains("where")) {
        for (const auto& f : q["where"]) {
            RowFilter filter;
            filter.column = need(f, "column", where).get<std::string>();
            const std::string op = need(f, "op", where).get<std::string>();
            if (op == "=") filter.op = CmpOp::Eq;
            else if (op == "!=") filter.op = CmpOp::Ne;
            else if (op == "<") filter.op = CmpOp::Lt;
            else if (op == "<=") filter.op = CmpOp::Le;
            else if (op == ">") filter.op = CmpOp::Gt;
            else if (op == ">=") filter.op = CmpOp::Ge;
            else fail(where + " has unknown filter op '" + op + "'");
            const json& lit = need(f, "value", where);
            filter.literal = lit.is_string() ? lit.get<std::string>() : lit.dump();
            out.where.push_back(std::move(filter));
        }
    }
    if (q.contains("aggregate")) {
        const json& agg = q["aggregate"];
        const std::string op = need(agg, "op", where).get<std::string>();
        if (op == "count") out.aggregate.op = Aggregate::Op::Count;
        else if (op == "sum") out.aggregate.op = Aggregate::Op::Sum;
        else if (op == "last") out.aggregate.op = Aggregate::Op::Last;
        else fail(where + " has unknown aggregate op '" + op + "'");
        if (agg.contains("column")) out.aggregate.column = agg["column"].get<std::string>();
        if ((out.aggregate.op == Aggregate::Op::Sum || out.aggregate.op == Aggregate::Op::Last) &&
            out.aggregate.column.empty()) {
            fail(where + " sum/last aggregate needs a 'column'");
        }
    }
    return out;
}

Value parse_default(const json& v, ValueType type) {
    switch (type) {
        case ValueType::Integer: return v.get<std::int64_t>();
        case ValueType::Real: return v.get<double>();
        case ValueType::Boolean: return v.get<bool>();
    }
    return 0.0;
}

}  // namespace

const DimensionSpec& TensorSchema::dimension(const std::string& name) const {
    for (const auto& d : dimensions) {
        if (d.name == name) return d;
    }
    throw SchemaError("schema declares no dimension '" + name + "'");
}

const TensorSpec& TensorSchema::tensor(const std::string& name) const {
    for (const auto& t : tensors) {
        if (t.name == name) return t;
    }
    throw SchemaError("schema declares no tensor '" + name + "'");
}

const PipelineSpec& TensorSchema::pipeline(const std::string& name) const {
    for (const auto& p : pipelines) {
        if (p.name == name) return p;
    }
    throw SchemaError("schema declares no pipeline '" + name + "'");
}

TensorSchema load_schema(const std::string& path) {
    const std::string text = read_file(path);
    return parse_schema(text, std::filesystem::path(path).parent_path().string());
}

TensorSchema parse_schema(const std::string& json_text, const std::string& base_dir) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(std::string("not valid JSON: ") + e.what());
    }

    TensorSchema schema;

    for (const auto& a : root.value("adapters", json::array())) {
        AdapterDecl decl;
        decl.id = need(a, "id", "adapter").get<std::string>();
        decl.kind = need(a, "kind", "adapter '" + decl.id + "'").get<std::string>();
        if (decl.kind == "csv" || decl.kind == "jsonlines") {
            decl.path = need(a, "path", "adapter '" + decl.id + "'").get<std::string>();
            if (!base_dir.empty() && !std::filesystem::path(decl.path).is_absolute()) {
                decl.path = (std::filesystem::path(base_dir) / decl.path).string();
            }
            if (decl.kind == "csv") {
                const std::string delim = a.value("delimiter", ",");
                if (delim.size() != 1) fail("adapter '" + decl.id + "' delimiter must be one char");
                decl.delimiter = delim[0];
                decl.header = a.value("header", true);
            }
        } else if (decl.kind == "memtable") {
            const json& table = need(a, "table", "adapter '" + decl.id + "'");
            for (const auto& c : need(table, "columns", "adapter '" + decl.id + "'")) {
                decl.table.columns.push_back(c.get<std::string>());
            }
            for (const auto& r : need(table, "rows", "adapter '" + decl.id + "'")) {
                std::vector<std::string> row;
                for (const auto& cell : r) {
                    row.push_back(cell.is_string() ? cell.get<std::string>() : cell.dump());
                }
                decl.table.rows.push_back(std::move(row));
            }
        } else {
            fail("adapter '" + decl.id + "' has unknown kind '" + decl.kind + "'");
        }
        schema.adapters.push_back(std::move(decl));
    }

    std::unordered_set<std::string> dim_names;
    for (const auto& d : root.value("dimensions", json::array())) {
        DimensionSpec spec;
        spec.name = need(d, "name", "dimension").get<std::string>();
        if (spec.name.empty()) fail("dimension names must be non-empty");
        if (!dim_names.insert(spec.name).second) {
            fail("dimension '" + spec.name + "' declared twice");
        }
        const std::string type = d.value("key_type", "string");
        const auto kt = key_type_from_name(type);
        if (!kt) fail("dimension '" + spec.name + "' has unknown key_type '" + type + "'");
        spec.key_type = *kt;
        spec.granularity = d.value("granularity", std::int64_t{3600});
        if (spec.granularity < 1) fail("dimension '" + spec.name + "' granularity must be >= 1");
        spec.with_null = d.value("null_key", false);
        const std::string unknown = d.value("unknown_policy", "strict");
        if (unknown == "strict") spec.unknown = UnknownKeyPolicy::Strict;
        else if (unknown == "extend") spec.unknown = UnknownKeyPolicy::Extend;
        else if (unknown == "null") spec.unknown = UnknownKeyPolicy::Null;
        else fail("dimension '" + spec.name + "' has unknown unknown_policy '" + unknown + "'");
        if (spec.unknown == UnknownKeyPolicy::Null && !spec.with_null) {
            fail("dimension '" + spec.name + "' uses the null policy but declares no null_key");
        }
        spec.adapter_id = need(d, "adapter", "dimension '" + spec.name + "'").get<std::string>();
        spec.query = parse_table_query(need(d, "query", "dimension '" + spec.name + "'"),
                                       "dimension '" + spec.name + "'");
        if (spec.query.aggregate.op == Aggregate::Op::None && spec.query.select.size() != 1) {
            fail("dimension '" + spec.name + "' query must select exactly one column");
        }
        schema.dimensions.push_back(std::move(spec));
    }

    std::unordered_set<std::string> tensor_names;
    for (const auto& t : root.value("tensors", json::array())) {
        TensorSpec spec;
        spec.name = need(t, "name", "tensor").get<std::string>();
        if (!tensor_names.insert(spec.name).second) {
            fail("tensor '" + spec.name + "' declared twice");
        }
        std::unordered_set<std::string> seen;
        for (const auto& d : need(t, "dimensions", "tensor '" + spec.name + "'")) {
            const auto name = d.get<std::string>();
            if (!seen.insert(name).second) {
                fail("tensor '" + spec.name + "' binds dimension '" + name + "' twice");
            }
            if (!dim_names.count(name)) {
                fail("tensor '" + spec.name + "' references undeclared dimension '" + name + "'");
            }
            spec.dimensions.push_back(name);
        }
        if (spec.dimensions.empty()) fail("tensor '" + spec.name + "' has no dimensions");
        const std::string vt = t.value("value_type", "real");
        const auto v = value_type_from_name(vt);
        if (!v) fail("tensor '" + spec.name + "' has unknown value_type '" + vt + "'");
        spec.value_type = *v;
        spec.default_value = t.contains("default") ? parse_default(t["default"], spec.value_type)
                             : spec.value_type == ValueType::Integer ? Value(std::int64_t{0})
                             : spec.value_type == ValueType::Boolean ? Value(false)
                                                                     : Value(0.0);
        const std::string merge = t.value("merge", "sum");
        if (merge == "sum") spec.merge = MergePolicy::Sum;
        else if (merge == "count") spec.merge = MergePolicy::Count;
        else if (merge == "last") spec.merge = MergePolicy::Last;
        else if (merge == "error") spec.merge = MergePolicy::Error;
        else fail("tensor '" + spec.name + "' has unknown merge policy '" + merge + "'");
        const json& values = need(t, "values", "tensor '" + spec.name + "'");
        spec.adapter_id = need(values, "adapter", "tensor '" + spec.name + "'").get<std::string>();
        spec.query = parse_table_query(need(values, "query", "tensor '" + spec.name + "'"),
                                       "tensor '" + spec.name + "'");
        const std::size_t arity = spec.query.aggregate.op == Aggregate::Op::None
                                      ? spec.query.select.size()
                                      : spec.query.select.size() + 1;
        if (arity != spec.dimensions.size() + 1) {
            fail("tensor '" + spec.name + "' values query yields arity " + std::to_string(arity) +
                 ", need " + std::to_string(spec.dimensions.size() + 1));
        }
        schema.tensors.push_back(std::move(spec));
    }

    for (const auto& p : root.value("pipelines", json::array())) {
        PipelineSpec spec;
        spec.name = need(p, "name", "pipeline").get<std::string>();
        spec.tensor = need(p, "tensor", "pipeline '" + spec.name + "'").get<std::string>();
        if (!tensor_names.count(spec.tensor)) {
            fail("pipeline '" + spec.name + "' references undeclared tensor '" + spec.tensor + "'");
        }
        spec.user_dimension =
            need(p, "user_dimension", "pipeline '" + spec.name + "'").get<std::string>();
        if (p.contains("rank")) spec.rank = p["rank"].get<std::size_t>();
        if (p.contains("rank_range")) {
            for (const auto& r : p["rank_range"]) spec.rank_range.push_back(r.get<std::size_t>());
            for (std::size_t i = 1; i < spec.rank_range.size(); ++i) {
                if (spec.rank_range[i] <= spec.rank_range[i - 1]) {
                    fail("pipeline '" + spec.name + "' rank_range must ascend");
                }
            }
        }
        if (spec.rank == 0 && spec.rank_range.empty()) {
            fail("pipeline '" + spec.name + "' needs a rank or a rank_range");
        }
        spec.k = need(p, "k", "pipeline '" + spec.name + "'").get<std::size_t>();
        spec.seed = p.value("seed", std::uint64_t{0});
        spec.ari_threshold = p.value("ari_threshold", 1.0);
        if (spec.ari_threshold <= 0.0 || spec.ari_threshold > 1.0) {
            fail("pipeline '" + spec.name + "' ari_threshold must be in (0, 1]");
        }
        if (p.contains("breakout")) {
            const json& b = p["breakout"];
            BreakoutSpec bo;
            bo.dimension = need(b, "dimension", "pipeline '" + spec.name + "'").get<std::string>();
            bo.window = b.value("window", std::int64_t{3600});
            bo.min_segment = b.value("min_segment", std::size_t{24});
            bo.n_permutations = b.value("permutations", std::size_t{199});
            bo.alpha = b.value("alpha", 0.05);
            spec.breakout = std::move(bo);
        }
        schema.pipelines.push_back(std::move(spec));
    }

    // Every binding must point at a declared adapter.
    std::unordered_set<std::string> adapter_ids;
    for (const auto& a : schema.adapters) adapter_ids.insert(a.id);
    for (const auto& d : schema.dimensions) {
        if (!adapter_ids.count(d.adapter_id)) {
            fail("dimension '" + d.name + "' references undeclared adapter '" + d.adapter_id + "'");
        }
    }
    for (const auto& t : schema.tensors) {
        if (!adapter_ids.count(t.adapter_id)) {
            fail("tensor '" + t.name + "' references undeclared adapter '" + t.adapter_id + "'");
        }
    }
    return schema;
}

std::unique_ptr<Adapter> make_adapter(const AdapterDecl& decl) {
    if (decl.kind == "csv") {
        CsvConfig config;
        config.path = decl.path;
        config.delimiter = decl.delimiter;
        config.header = decl.header;
        return std::make_unique<CsvAdapter>(decl.id, std::move(config));
    }
    if (decl.kind == "jsonlines") {
        return std::make_unique<JsonLinesAdapter>(decl.id, decl.path);
    }
    if (decl.kind == "memtable") {
        return std::make_unique<MemTableAdapter>(decl.id, decl.table);
    }
    throw ConfigInvalidError("unknown adapter kind '" + decl.kind + "'");
}

AdapterRegistry make_registry(const TensorSchema& schema) {
    AdapterRegistry registry;
    for (const auto& decl : schema.adapters) registry.add(make_adapter(decl));
    return registry;
}

}  // namespace tdm
