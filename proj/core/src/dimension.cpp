#include "tdm/dimension.hpp"

#include "tdm/error.hpp"
#include "tdm/time.hpp"

namespace tdm {

Dimension::Dimension() : data_(std::make_shared<Data>()) {}

Dimension::Dimension(std::string name, KeyType key_type, std::vector<Key> keys,
                     std::int64_t granularity) {
    auto data = std::make_shared<Data>();
    data->name = std::move(name);
    data->key_type = key_type;
    data->granularity = granularity;
    data->keys.reserve(keys.size());
    for (auto& key : keys) {
        if (!key_matches(key, key_type)) {
            throw TypeMismatchError("key '" + format_key(key, key_type) + "' does not match type " +
                                    std::string(key_type_name(key_type)) + " in dimension '" +
                                    data->name + "'");
        }
        Key normalized = key;
        if (key_type == KeyType::Timestamp && !is_null(key)) {
            normalized = bucket_epoch(std::get<std::int64_t>(key), granularity);
        }
        if (is_null(normalized)) {
            if (data->has_null) throw DuplicateKeyError("duplicate null key in dimension '" + data->name + "'");
            data->has_null = true;
        }
        auto [it, inserted] = data->index.emplace(normalized, data->keys.size() + 1);
        if (!inserted) {
            throw DuplicateKeyError("duplicate key '" + format_key(normalized, key_type) +
                                    "' in dimension '" + data->name + "'");
        }
        data->keys.push_back(std::move(normalized));
    }
    data_ = std::move(data);
}

std::size_t Dimension::index_of(const Key& key) const {
    if (auto idx = find(key)) return *idx;
    throw KeyNotFoundError("key '" + format_key(key, key_type()) + "' not found in dimension '" +
                           name() + "'");
}

std::optional<std::size_t> Dimension::find(const Key& key) const {
    Key probe = key;
    if (key_type() == KeyType::Timestamp && !is_null(key) &&
        std::holds_alternative<std::int64_t>(key)) {
        probe = bucket_epoch(std::get<std::int64_t>(key), granularity());
    }
    auto it = data_->index.find(probe);
    if (it == data_->index.end()) return std::nullopt;
    return it->second;
}

const Key& Dimension::key_of(std::size_t index) const {
    if (index < 1 || index > size()) {
        throw IndexOutOfRangeError("index " + std::to_string(index) + " out of range [1, " +
                                   std::to_string(size()) + "] in dimension '" + name() + "'");
    }
    return data_->keys[index - 1];
}

std::pair<Dimension, std::size_t> Dimension::extend(const Key& key) const {
    const Key normalized = normalize(key);
    if (data_->index.count(normalized)) {
        throw DuplicateKeyError("key '" + format_key(normalized, key_type()) +
                                "' already present in dimension '" + name() + "'");
    }
    auto data = std::make_shared<Data>(*data_);
    data->keys.push_back(normalized);
    data->index.emplace(normalized, data->keys.size());
    if (is_null(normalized)) data->has_null = true;
    const std::size_t index = data->keys.size();
    return {Dimension(std::move(data)), index};
}

Dimension Dimension::with_null() const {
    if (has_null()) throw NullAlreadyPresentError("dimension '" + name() + "' already has a null key");
    return extend(NullKey{}).first;
}

Key Dimension::normalize(const Key& key) const {
    if (!key_matches(key, key_type())) {
        throw TypeMismatchError("key '" + format_key(key, key_type()) + "' does not match type " +
                                std::string(key_type_name(key_type())) + " in dimension '" +
                                name() + "'");
    }
    if (key_type() == KeyType::Timestamp && !is_null(key)) {
        return bucket_epoch(std::get<std::int64_t>(key), granularity());
    }
    return key;
}

bool operator==(const Dimension& a, const Dimension& b) {
    if (a.data_ == b.data_) return true;
    return a.name() == b.name() && a.key_type() == b.key_type() &&
           a.has_null() == b.has_null() && a.data_->keys == b.data_->keys;
}

DimensionBuilder::DimensionBuilder(std::string name, KeyType key_type, std::int64_t granularity)
    : data_(std::make_shared<Dimension::Data>()) {
    data_->name = std::move(name);
    data_->key_type = key_type;
    data_->granularity = granularity;
}

std::size_t DimensionBuilder::add(const Key& key) {
    if (!key_matches(key, data_->key_type)) {
        throw TypeMismatchError("key '" + format_key(key, data_->key_type) +
                                "' does not match type " +
                                std::string(key_type_name(data_->key_type)) + " in dimension '" +
                                data_->name + "'");
    }
    Key normalized = key;
    if (data_->key_type == KeyType::Timestamp && !is_null(key)) {
        normalized = bucket_epoch(std::get<std::int64_t>(key), data_->granularity);
    }
    auto [it, inserted] = data_->index.emplace(normalized, data_->keys.size() + 1);
    if (inserted) {
        data_->keys.push_back(std::move(normalized));
        if (is_null(data_->keys.back())) data_->has_null = true;
    }
    return it->second;
}

std::optional<std::size_t> DimensionBuilder::find(const Key& key) const {
    if (!key_matches(key, data_->key_type)) return std::nullopt;
    Key probe = key;
    if (data_->key_type == KeyType::Timestamp && !is_null(key)) {
        probe = bucket_epoch(std::get<std::int64_t>(key), data_->granularity);
    }
    auto it = data_->index.find(probe);
    if (it == data_->index.end()) return std::nullopt;
    return it->second;
}

std::size_t DimensionBuilder::size() const { return data_->keys.size(); }

Dimension DimensionBuilder::build() && { return Dimension(std::move(data_)); }

}  // namespace tdm
