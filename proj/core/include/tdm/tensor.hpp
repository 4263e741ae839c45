#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "tdm/dimension.hpp"
#include "tdm/value.hpp"

namespace tdm {

/// 1-based coordinate along one mode.
using Index = std::uint32_t;

/// Full coordinate tuple, one index per mode. Empty for a 0-order scalar.
using Coords = std::vector<Index>;

struct CoordsHash {
    std::size_t operator()(const Coords& c) const {
        std::size_t h = 0xcbf29ce484222325ULL;
        for (Index i : c) {
            h ^= i;
            h *= 0x100000001b3ULL;
        }
        return h;
    }
};

using EntryMap = std::unordered_map<Coords, Value, CoordsHash>;

/// Dense real matrix. Factor matrices and unfoldings live here.
using DenseMatrix = Eigen::MatrixXd;

/// Entries within this distance of the default are dropped when real-valued
/// results are re-sparsified (fold, reconstructions, mode products).
inline constexpr double kSparsifyEps = 1e-12;

/// Sparse N-order tensor over named typed dimensions, with a declared value
/// type and default value. Canonical form: no stored entry equals the
/// default. Immutable; set returns an updated copy, TensorBuilder serves
/// bulk construction.
class TypedTensor {
public:
    /// Throws DuplicateDimensionNameError or TypeMismatchError. dims may be
    /// empty, which makes a 0-order scalar addressed by the empty tuple.
    TypedTensor(std::string name, std::vector<Dimension> dims, ValueType value_type,
                Value default_value);

    const std::string& name() const { return data_->name; }
    std::size_t order() const { return data_->dims.size(); }
    const std::vector<Dimension>& dims() const { return data_->dims; }

    /// Dimension of a 1-based mode; throws ModeOutOfRangeError.
    const Dimension& dim(std::size_t mode) const;

    /// 1-based mode carrying the named dimension; throws UnknownDimensionError.
    std::size_t mode_of(const std::string& dimension_name) const;

    ValueType value_type() const { return data_->value_type; }
    const Value& default_value() const { return data_->default_value; }

    std::size_t stored_count() const { return data_->entries.size(); }
    const EntryMap& stored() const { return data_->entries; }

    /// Product of mode sizes as a double (0-order tensors report 1).
    double dense_extent() const;

    /// true for integer/real value types; booleans are masks, not numbers.
    bool is_numeric() const { return data_->value_type != ValueType::Boolean; }

    /// Element access by raw 1-based indices; throws IndexOutOfRangeError.
    Value at(const Coords& coords) const;

    /// Element access by dimension keys; throws KeyNotFoundError.
    Value get(const std::vector<Key>& keys) const;

    /// Resolve keys through the dimensions into raw indices.
    Coords resolve(const std::vector<Key>& keys) const;

    /// Copy with one entry updated; storing the default removes the entry.
    TypedTensor set_at(const Coords& coords, Value v) const;
    TypedTensor set(const std::vector<Key>& keys, Value v) const;

    /// Mode-n fiber: fix every mode except free_mode (N-1 indices, in mode
    /// order with free_mode skipped). Returns a 1-order tensor over that
    /// mode's dimension.
    TypedTensor fiber(std::size_t free_mode, const Coords& fixed) const;
    TypedTensor fiber_by_keys(std::size_t free_mode, const std::vector<Key>& fixed) const;

    /// Slice: fix every mode except two. Result dimensions follow the order
    /// (mode_a, mode_b) given.
    TypedTensor slice(std::size_t mode_a, std::size_t mode_b, const Coords& fixed) const;
    TypedTensor slice_by_keys(std::size_t mode_a, std::size_t mode_b, const std::vector<Key>& fixed) const;

    TypedTensor renamed(std::string name) const;

    /// Structural equality: dimensions, value type, default and stored map.
    /// The tensor name is metadata and not compared.
    friend bool operator==(const TypedTensor& a, const TypedTensor& b);

    /// Entries sorted lexicographically by coordinates (deterministic order
    /// for export and iteration).
    std::vector<std::pair<Coords, Value>> sorted_entries() const;

private:
    struct Data {
        std::string name;
        std::vector<Dimension> dims;
        ValueType value_type = ValueType::Real;
        Value default_value = 0.0;
        EntryMap entries;
    };

    explicit TypedTensor(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

    void check_coords(const Coords& coords) const;

    std::shared_ptr<const Data> data_;

    friend class TensorBuilder;
};

/// Accumulates entries and freezes them into a TypedTensor; the canonical
/// no-defaults-stored form is established at build().
class TensorBuilder {
public:
    TensorBuilder(std::string name, std::vector<Dimension> dims, ValueType value_type,
                  Value default_value);

    void set_at(const Coords& coords, Value v);
    void set(const std::vector<Key>& keys, Value v);

    TypedTensor build() &&;

private:
    std::shared_ptr<TypedTensor::Data> data_;
};

/// Mode-n unfolding: rows index mode n, column j = 1 + sum_{k!=n} (i_k-1) J_k
/// with J_k = prod_{m<k, m!=n} size_m. Throws ModeOutOfRangeError or
/// NonNumericValueTypeError.
DenseMatrix unfold(const TypedTensor& t, std::size_t mode);

/// Inverse of unfold for the same mode and dimensions. Entries within
/// kSparsifyEps of the default are dropped (exact comparison for integer and
/// boolean value types). Throws ShapeMismatchError.
TypedTensor fold(const DenseMatrix& m, std::size_t mode, std::vector<Dimension> dims,
                 ValueType value_type = ValueType::Real, Value default_value = 0.0,
                 std::string name = {});

/// sqrt of the sum of squared entries; accounts for nonzero defaults.
double frobenius_norm(const TypedTensor& t);

/// Copy with values converted to the target type (booleans become 0/1,
/// reals round to nearest integer). Default converts alongside.
TypedTensor cast_values(const TypedTensor& t, ValueType type);

/// Copy with the dimensions replaced; mode sizes must match.
TypedTensor with_dims(const TypedTensor& t, std::vector<Dimension> dims);

}  // namespace tdm
