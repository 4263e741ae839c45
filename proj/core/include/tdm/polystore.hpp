#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tdm/dimension.hpp"
#include "tdm/tensor.hpp"

namespace tdm {

/// One record of the uniform wrapper contract: N dimension keys followed by
/// one value. Cells travel as text; the schema types them on arrival.
struct AdapterRow {
    std::vector<std::string> keys;
    std::string value;
};

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

/// Row predicate; operands compare numerically when both sides parse as
/// numbers, lexicographically otherwise.
struct RowFilter {
    std::string column;
    CmpOp op = CmpOp::Eq;
    std::string literal;
};

struct Aggregate {
    enum class Op { None, Count, Sum, Last };
    Op op = Op::None;
    std::string column;   // Sum/Last source column
};

/// The adapter-side "native query": project columns, filter rows and
/// optionally group by the projected columns with one aggregate, which
/// appends the computed value cell.
struct TableQuery {
    std::vector<std::string> select;
    std::vector<RowFilter> where;
    Aggregate aggregate;
};

/// A wrapper around one data source. Every adapter kind answers the same
/// query shape and emits rows of a fixed arity; only the raw record scan
/// differs per kind.
class Adapter {
public:
    virtual ~Adapter() = default;

    const std::string& id() const { return id_; }

    /// Evaluate the query and push rows of exactly `arity` cells each
    /// (group-by emits groups in first-seen order). Throws
    /// ArityMismatchError or AdapterFailureError.
    void run(const TableQuery& query, std::size_t arity,
             const std::function<void(const std::vector<std::string>&)>& sink) const;

protected:
    explicit Adapter(std::string id) : id_(std::move(id)) {}

    /// Stream raw records projected onto `columns`, one cell per column;
    /// missing fields become empty cells.
    virtual void scan(const std::vector<std::string>& columns,
                      const std::function<void(const std::vector<std::string>&)>& yield) const = 0;

private:
    std::string id_;
};

struct CsvConfig {
    std::string path;
    char delimiter = ',';
    bool header = true;   // without a header, columns are addressed as #0, #1...
};

class CsvAdapter final : public Adapter {
public:
    CsvAdapter(std::string id, CsvConfig config);

protected:
    void scan(const std::vector<std::string>& columns,
              const std::function<void(const std::vector<std::string>&)>& yield) const override;

private:
    CsvConfig config_;
};

/// One JSON object per line; columns are dot-separated field paths. A path
/// ending in "[]" explodes an array into one row per element (an empty or
/// missing array yields a single empty cell, so downstream null policies can
/// catch it). At most one exploding path per query.
class JsonLinesAdapter final : public Adapter {
public:
    JsonLinesAdapter(std::string id, std::string path);

protected:
    void scan(const std::vector<std::string>& columns,
              const std::function<void(const std::vector<std::string>&)>& yield) const override;

private:
    std::string path_;
};

struct MemTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

class MemTableAdapter final : public Adapter {
public:
    MemTableAdapter(std::string id, MemTable table);

protected:
    void scan(const std::vector<std::string>& columns,
              const std::function<void(const std::vector<std::string>&)>& yield) const override;

private:
    MemTable table_;
};

class AdapterRegistry {
public:
    /// Throws DuplicateAdapterIdError.
    void add(std::unique_ptr<Adapter> adapter);

    bool contains(const std::string& id) const;

    /// Throws SchemaError when the id is unknown.
    const Adapter& at(const std::string& id) const;

private:
    std::vector<std::unique_ptr<Adapter>> adapters_;
};

// --- Schema -----------------------------------------------------------

enum class MergePolicy { Sum, Count, Last, Error };
enum class UnknownKeyPolicy { Strict, Extend, Null };

struct AdapterDecl {
    std::string id;
    std::string kind;        // csv | jsonlines | memtable
    std::string path;        // csv/jsonlines; resolved against the schema file
    char delimiter = ',';
    bool header = true;
    MemTable table;          // memtable rows declared inline
};

struct DimensionSpec {
    std::string name;
    KeyType key_type = KeyType::String;
    std::int64_t granularity = 3600;
    bool with_null = false;
    UnknownKeyPolicy unknown = UnknownKeyPolicy::Strict;
    std::string adapter_id;
    TableQuery query;
};

struct TensorSpec {
    std::string name;
    std::vector<std::string> dimensions;
    ValueType value_type = ValueType::Real;
    Value default_value = 0.0;
    MergePolicy merge = MergePolicy::Sum;
    std::string adapter_id;
    TableQuery query;
};

struct BreakoutSpec {
    std::string dimension;                // timestamp dimension to bucket
    std::int64_t window = 3600;
    std::size_t min_segment = 24;
    std::size_t n_permutations = 199;
    double alpha = 0.05;
};

struct PipelineSpec {
    std::string name;
    std::string tensor;
    std::string user_dimension;
    std::size_t rank = 0;                 // 0: sweep rank_range for stability
    std::vector<std::size_t> rank_range;  // ascending
    std::size_t k = 2;
    std::uint64_t seed = 0;
    double ari_threshold = 1.0;           // consecutive-rank agreement for the sweep
    std::optional<BreakoutSpec> breakout;
};

/// A set of typed tensor signatures plus their source bindings.
struct TensorSchema {
    std::vector<AdapterDecl> adapters;
    std::vector<DimensionSpec> dimensions;
    std::vector<TensorSpec> tensors;
    std::vector<PipelineSpec> pipelines;

    const DimensionSpec& dimension(const std::string& name) const;
    const TensorSpec& tensor(const std::string& name) const;
    const PipelineSpec& pipeline(const std::string& name) const;
};

/// Parse and validate a schema JSON file. Throws SchemaError/ConfigInvalidError.
TensorSchema load_schema(const std::string& path);
TensorSchema parse_schema(const std::string& json_text, const std::string& base_dir);

/// Instantiate one adapter; throws ConfigInvalidError.
std::unique_ptr<Adapter> make_adapter(const AdapterDecl& decl);

/// Adapters for every declaration in the schema.
AdapterRegistry make_registry(const TensorSchema& schema);

// --- Building ---------------------------------------------------------

/// Materialize a dimension from its binding: distinct keys in first-seen
/// order (duplicates collapse silently); with_null appends the sentinel.
Dimension run_dimension_query(const Adapter& adapter, const DimensionSpec& spec);

/// Stream the values binding as AdapterRows of the given arity, checking
/// the N+1 contract per row.
void run_value_query(const Adapter& adapter, const TableQuery& query, std::size_t arity,
                     const std::function<void(const AdapterRow&)>& sink);

/// Dimensions first, then the values query; keys resolve through the
/// dimension maps, duplicate coordinates combine per the merge policy and
/// unknown keys follow each dimension's policy.
TypedTensor build_tensor(const TensorSchema& schema, const std::string& tensor_name,
                         const AdapterRegistry& registry);

}  // namespace tdm
