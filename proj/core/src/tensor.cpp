#include "tdm/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <unordered_set>

#include "tdm/error.hpp"

namespace tdm {

namespace {

void check_mode(std::size_t mode, std::size_t order) {
    if (mode < 1 || mode > order) {
        throw ModeOutOfRangeError("mode " + std::to_string(mode) + " out of range [1, " +
                                  std::to_string(order) + "]");
    }
}

bool value_is_default(const Value& v, const Value& def) { return v == def; }

}  // namespace

TypedTensor::TypedTensor(std::string name, std::vector<Dimension> dims, ValueType value_type,
                         Value default_value) {
    auto data = std::make_shared<Data>();
    data->name = std::move(name);
    if (!value_matches(default_value, value_type)) {
        throw TypeMismatchError("default value does not match tensor value type " +
                                std::string(value_type_name(value_type)));
    }
    std::unordered_set<std::string> names;
    for (const auto& d : dims) {
        if (!names.insert(d.name()).second) {
            throw DuplicateDimensionNameError("dimension name '" + d.name() +
                                              "' repeated in tensor '" + data->name + "'");
        }
    }
    data->dims = std::move(dims);
    data->value_type = value_type;
    data->default_value = std::move(default_value);
    data_ = std::move(data);
}

const Dimension& TypedTensor::dim(std::size_t mode) const {
    check_mode(mode, order());
    return data_->dims[mode - 1];
}

std::size_t TypedTensor::mode_of(const std::string& dimension_name) const {
    for (std::size_t n = 0; n < order(); ++n) {
        if (data_->dims[n].name() == dimension_name) return n + 1;
    }
    throw UnknownDimensionError("tensor '" + name() + "' has no dimension '" + dimension_name + "'");
}

double TypedTensor::dense_extent() const {
    double extent = 1.0;
    for (const auto& d : data_->dims) extent *= static_cast<double>(d.size());
    return extent;
}

void TypedTensor::check_coords(const Coords& coords) const {
    if (coords.size() != order()) {
        throw IndexOutOfRangeError("coordinate arity " + std::to_string(coords.size()) +
                                   " does not match tensor order " + std::to_string(order()));
    }
    for (std::size_t n = 0; n < coords.size(); ++n) {
        if (coords[n] < 1 || coords[n] > data_->dims[n].size()) {
            throw IndexOutOfRangeError("index " + std::to_string(coords[n]) + " out of range [1, " +
                                       std::to_string(data_->dims[n].size()) + "] in mode " +
                                       std::to_string(n + 1));
        }
    }
}

Value TypedTensor::at(const Coords& coords) const {
    check_coords(coords);
    auto it = data_->entries.find(coords);
    return it == data_->entries.end() ? data_->default_value : it->second;
}

Coords TypedTensor::resolve(const std::vector<Key>& keys) const {
    if (keys.size() != order()) {
        throw IndexOutOfRangeError("key arity " + std::to_string(keys.size()) +
                                   " does not match tensor order " + std::to_string(order()));
    }
    Coords coords(keys.size());
    for (std::size_t n = 0; n < keys.size(); ++n) {
        coords[n] = static_cast<Index>(data_->dims[n].index_of(keys[n]));
    }
    return coords;
}

Value TypedTensor::get(const std::vector<Key>& keys) const { return at(resolve(keys)); }

TypedTensor TypedTensor::set_at(const Coords& coords, Value v) const {
    check_coords(coords);
    if (!value_matches(v, value_type())) {
        throw TypeMismatchError("value does not match tensor value type " +
                                std::string(value_type_name(value_type())));
    }
    auto data = std::make_shared<Data>(*data_);
    if (value_is_default(v, data->default_value)) {
        data->entries.erase(coords);
    } else {
        data->entries[coords] = std::move(v);
    }
    return TypedTensor(std::move(data));
}

TypedTensor TypedTensor::set(const std::vector<Key>& keys, Value v) const {
    return set_at(resolve(keys), std::move(v));
}

TypedTensor TypedTensor::fiber(std::size_t free_mode, const Coords& fixed) const {
    check_mode(free_mode, order());
    if (fixed.size() + 1 != order()) {
        throw IndexOutOfRangeError("fiber needs " + std::to_string(order() - 1) +
                                   " fixed indices, got " + std::to_string(fixed.size()));
    }
    TensorBuilder out(name(), {dim(free_mode)}, value_type(), default_value());
    // Rebuild the full template with a hole at free_mode.
    Coords probe(order());
    std::size_t f = 0;
    for (std::size_t n = 0; n < order(); ++n) {
        if (n + 1 == free_mode) continue;
        probe[n] = fixed[f++];
        if (probe[n] < 1 || probe[n] > data_->dims[n].size()) {
            throw IndexOutOfRangeError("fixed index " + std::to_string(probe[n]) +
                                       " out of range in mode " + std::to_string(n + 1));
        }
    }
    for (const auto& [coords, v] : data_->entries) {
        bool match = true;
        for (std::size_t n = 0; n < order() && match; ++n) {
            if (n + 1 != free_mode && coords[n] != probe[n]) match = false;
        }
        if (match) out.set_at({coords[free_mode - 1]}, v);
    }
    return std::move(out).build();
}

TypedTensor TypedTensor::fiber_by_keys(std::size_t free_mode, const std::vector<Key>& fixed) const {
    check_mode(free_mode, order());
    Coords fixed_idx;
    fixed_idx.reserve(fixed.size());
    std::size_t f = 0;
    for (std::size_t n = 0; n < order(); ++n) {
        if (n + 1 == free_mode) continue;
        if (f >= fixed.size()) break;
        fixed_idx.push_back(static_cast<Index>(data_->dims[n].index_of(fixed[f++])));
    }
    return fiber(free_mode, fixed_idx);
}

TypedTensor TypedTensor::slice(std::size_t mode_a, std::size_t mode_b, const Coords& fixed) const {
    check_mode(mode_a, order());
    check_mode(mode_b, order());
    if (mode_a == mode_b) throw ModeOutOfRangeError("slice modes must differ");
    if (fixed.size() + 2 != order()) {
        throw IndexOutOfRangeError("slice needs " + std::to_string(order() - 2) +
                                   " fixed indices, got " + std::to_string(fixed.size()));
    }
    TensorBuilder out(name(), {dim(mode_a), dim(mode_b)}, value_type(), default_value());
    Coords probe(order());
    std::size_t f = 0;
    for (std::size_t n = 0; n < order(); ++n) {
        if (n + 1 == mode_a || n + 1 == mode_b) continue;
        probe[n] = fixed[f++];
        if (probe[n] < 1 || probe[n] > data_->dims[n].size()) {
            throw IndexOutOfRangeError("fixed index " + std::to_string(probe[n]) +
                                       " out of range in mode " + std::to_string(n + 1));
        }
    }
    for (const auto& [coords, v] : data_->entries) {
        bool match = true;
        for (std::size_t n = 0; n < order() && match; ++n) {
            if (n + 1 != mode_a && n + 1 != mode_b && coords[n] != probe[n]) match = false;
        }
        if (match) out.set_at({coords[mode_a - 1], coords[mode_b - 1]}, v);
    }
    return std::move(out).build();
}

TypedTensor TypedTensor::slice_by_keys(std::size_t mode_a, std::size_t mode_b,
                                       const std::vector<Key>& fixed) const {
    check_mode(mode_a, order());
    check_mode(mode_b, order());
    Coords fixed_idx;
    fixed_idx.reserve(fixed.size());
    std::size_t f = 0;
    for (std::size_t n = 0; n < order(); ++n) {
        if (n + 1 == mode_a || n + 1 == mode_b) continue;
        if (f >= fixed.size()) break;
        fixed_idx.push_back(static_cast<Index>(data_->dims[n].index_of(fixed[f++])));
    }
    return slice(mode_a, mode_b, fixed_idx);
}

TypedTensor TypedTensor::renamed(std::string new_name) const {
    auto data = std::make_shared<Data>(*data_);
    data->name = std::move(new_name);
    return TypedTensor(std::move(data));
}

bool operator==(const TypedTensor& a, const TypedTensor& b) {
    if (a.data_ == b.data_) return true;
    return a.data_->dims == b.data_->dims && a.data_->value_type == b.data_->value_type &&
           a.data_->default_value == b.data_->default_value && a.data_->entries == b.data_->entries;
}

std::vector<std::pair<Coords, Value>> TypedTensor::sorted_entries() const {
    std::vector<std::pair<Coords, Value>> out(data_->entries.begin(), data_->entries.end());
    std::sort(out.begin(), out.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    return out;
}

TensorBuilder::TensorBuilder(std::string name, std::vector<Dimension> dims, ValueType value_type,
                             Value default_value) {
    TypedTensor empty(std::move(name), std::move(dims), value_type, std::move(default_value));
    data_ = std::make_shared<TypedTensor::Data>(*empty.data_);
}

void TensorBuilder::set_at(const Coords& coords, Value v) {
    if (coords.size() != data_->dims.size()) {
        throw IndexOutOfRangeError("coordinate arity " + std::to_string(coords.size()) +
                                   " does not match tensor order " +
                                   std::to_string(data_->dims.size()));
    }
    for (std::size_t n = 0; n < coords.size(); ++n) {
        if (coords[n] < 1 || coords[n] > data_->dims[n].size()) {
            throw IndexOutOfRangeError("index " + std::to_string(coords[n]) + " out of range [1, " +
                                       std::to_string(data_->dims[n].size()) + "] in mode " +
                                       std::to_string(n + 1));
        }
    }
    if (!value_matches(v, data_->value_type)) {
        throw TypeMismatchError("value does not match tensor value type " +
                                std::string(value_type_name(data_->value_type)));
    }
    if (value_is_default(v, data_->default_value)) {
        data_->entries.erase(coords);
    } else {
        data_->entries[coords] = std::move(v);
    }
}

void TensorBuilder::set(const std::vector<Key>& keys, Value v) {
    Coords coords(keys.size());
    if (keys.size() != data_->dims.size()) {
        throw IndexOutOfRangeError("key arity does not match tensor order");
    }
    for (std::size_t n = 0; n < keys.size(); ++n) {
        coords[n] = static_cast<Index>(data_->dims[n].index_of(keys[n]));
    }
    set_at(coords, std::move(v));
}

TypedTensor TensorBuilder::build() && { return TypedTensor(std::move(data_)); }

DenseMatrix unfold(const TypedTensor& t, std::size_t mode) {
    check_mode(mode, t.order());
    if (!t.is_numeric()) {
        throw NonNumericValueTypeError("unfold requires a numeric tensor; '" + t.name() +
                                       "' is boolean");
    }
    const std::size_t order = t.order();
    const std::size_t rows = t.dim(mode).size();
    std::size_t cols = 1;
    std::vector<std::size_t> stride(order, 0);
    for (std::size_t k = 0; k < order; ++k) {
        if (k + 1 == mode) continue;
        stride[k] = cols;
        cols *= t.dim(k + 1).size();
    }

    DenseMatrix m(rows, cols);
    m.setConstant(value_as_real(t.default_value()));
    for (const auto& [coords, v] : t.stored()) {
        std::size_t col = 0;
        for (std::size_t k = 0; k < order; ++k) {
            if (k + 1 == mode) continue;
            col += (coords[k] - 1) * stride[k];
        }
        m(static_cast<Eigen::Index>(coords[mode - 1] - 1), static_cast<Eigen::Index>(col)) =
            value_as_real(v);
    }
    return m;
}

TypedTensor fold(const DenseMatrix& m, std::size_t mode, std::vector<Dimension> dims,
                 ValueType value_type, Value default_value, std::string name) {
    const std::size_t order = dims.size();
    check_mode(mode, order);
    std::size_t cols = 1;
    std::vector<std::size_t> stride(order, 0);
    for (std::size_t k = 0; k < order; ++k) {
        if (k + 1 == mode) continue;
        stride[k] = cols;
        cols *= dims[k].size();
    }
    if (static_cast<std::size_t>(m.rows()) != dims[mode - 1].size() ||
        static_cast<std::size_t>(m.cols()) != cols) {
        throw ShapeMismatchError("matrix " + std::to_string(m.rows()) + "x" +
                                 std::to_string(m.cols()) + " does not fold into the given shape");
    }

    const double def = value_as_real(default_value);
    TensorBuilder out(std::move(name), std::move(dims), value_type, default_value);
    Coords coords(order);
    for (std::size_t col = 0; col < cols; ++col) {
        // Decompose col into per-mode offsets, largest stride first.
        std::size_t c = col;
        for (std::size_t k = order; k-- > 0;) {
            if (k + 1 == mode) continue;
            coords[k] = static_cast<Index>(c / stride[k] + 1);
            c %= stride[k];
        }
        for (std::size_t r = 0; r < static_cast<std::size_t>(m.rows()); ++r) {
            const double v = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col));
            bool keep;
            if (value_type == ValueType::Real) {
                keep = std::abs(v - def) > kSparsifyEps;
            } else {
                keep = value_from_real(v, value_type) != default_value;
            }
            if (keep) {
                coords[mode - 1] = static_cast<Index>(r + 1);
                out.set_at(coords, value_from_real(v, value_type));
            }
        }
    }
    return std::move(out).build();
}

double frobenius_norm(const TypedTensor& t) {
    if (!t.is_numeric()) {
        throw NonNumericValueTypeError("frobenius_norm requires a numeric tensor");
    }
    const double def = value_as_real(t.default_value());
    double sum = 0.0;
    for (const auto& [coords, v] : t.stored()) {
        const double x = value_as_real(v);
        sum += x * x;
    }
    if (def != 0.0) {
        const double absent = t.dense_extent() - static_cast<double>(t.stored_count());
        sum += def * def * absent;
    }
    return std::sqrt(sum);
}

TypedTensor cast_values(const TypedTensor& t, ValueType type) {
    if (t.value_type() == type) return t;
    TensorBuilder out(t.name(), t.dims(), type,
                      value_from_real(value_as_real(t.default_value()), type));
    for (const auto& [coords, v] : t.stored()) {
        out.set_at(coords, value_from_real(value_as_real(v), type));
    }
    return std::move(out).build();
}

TypedTensor with_dims(const TypedTensor& t, std::vector<Dimension> dims) {
    if (dims.size() != t.order()) {
        throw ShapeMismatchError("with_dims: order " + std::to_string(dims.size()) + " vs " +
                                 std::to_string(t.order()));
    }
    for (std::size_t n = 0; n < dims.size(); ++n) {
        if (dims[n].size() != t.dim(n + 1).size()) {
            throw ShapeMismatchError("with_dims: mode " + std::to_string(n + 1) +
                                     " size mismatch");
        }
    }
    TensorBuilder out(t.name(), std::move(dims), t.value_type(), t.default_value());
    for (const auto& [coords, v] : t.stored()) out.set_at(coords, v);
    return std::move(out).build();
}

}  // namespace tdm
