#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tdm/value.hpp"

namespace tdm {

/// A named typed associative array: a bijection between a typed key set and
/// the contiguous indices 1..size, used to index one tensor mode.
///
/// Dimensions are immutable; extend/with_null return new values. The handle
/// is a shared pointer, so copies are cheap and thread-safe to share.
class Dimension {
public:
    /// Empty string-keyed dimension named "".
    Dimension();

    /// Keys occupy indices 1..keys.size() in the given order. Timestamp keys
    /// are bucketed to `granularity` seconds before insertion.
    /// Throws DuplicateKeyError or TypeMismatchError.
    Dimension(std::string name, KeyType key_type, std::vector<Key> keys,
              std::int64_t granularity = 3600);

    const std::string& name() const { return data_->name; }
    KeyType key_type() const { return data_->key_type; }
    std::size_t size() const { return data_->keys.size(); }
    bool empty() const { return data_->keys.empty(); }
    bool has_null() const { return data_->has_null; }

    /// Timestamp bucketing granularity in seconds (meaningful only for
    /// timestamp dimensions).
    std::int64_t granularity() const { return data_->granularity; }

    /// 1-based index of key; throws KeyNotFoundError.
    std::size_t index_of(const Key& key) const;

    /// Non-throwing lookup.
    std::optional<std::size_t> find(const Key& key) const;

    bool contains(const Key& key) const { return find(key).has_value(); }

    /// Key at 1-based index; throws IndexOutOfRangeError.
    const Key& key_of(std::size_t index) const;

    /// All keys in index order (position p holds the key of index p+1).
    const std::vector<Key>& keys() const { return data_->keys; }

    /// New dimension with key appended at index size+1.
    /// Throws DuplicateKeyError or TypeMismatchError.
    std::pair<Dimension, std::size_t> extend(const Key& key) const;

    /// New dimension with the null sentinel appended at index size+1.
    /// Throws NullAlreadyPresentError.
    Dimension with_null() const;

    /// Normalize a key for this dimension: type check plus timestamp
    /// bucketing. Throws TypeMismatchError.
    Key normalize(const Key& key) const;

    /// Same key set (order, type, null flag) and same name.
    friend bool operator==(const Dimension& a, const Dimension& b);

private:
    struct Data {
        std::string name;
        KeyType key_type = KeyType::String;
        std::int64_t granularity = 3600;
        bool has_null = false;
        std::vector<Key> keys;
        std::unordered_map<Key, std::size_t, KeyHash> index;
    };

    explicit Dimension(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

    std::shared_ptr<const Data> data_;

    friend class DimensionBuilder;
};

/// Incremental construction without per-insert copying; duplicates collapse
/// silently to their first-seen index (the ingestion behavior).
class DimensionBuilder {
public:
    DimensionBuilder(std::string name, KeyType key_type, std::int64_t granularity = 3600);

    /// Returns the (possibly pre-existing) 1-based index of key.
    std::size_t add(const Key& key);

    /// Lookup without inserting.
    std::optional<std::size_t> find(const Key& key) const;

    std::size_t size() const;

    Dimension build() &&;

private:
    std::shared_ptr<Dimension::Data> data_;
};

}  // namespace tdm
