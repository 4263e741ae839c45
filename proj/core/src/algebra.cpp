#include "tdm/algebra.hpp"

#include <cmath>

#include "tdm/error.hpp"

namespace tdm {

namespace {

void check_same_shape(const TypedTensor& x, const TypedTensor& y, const char* op) {
    if (x.order() != y.order()) {
        throw ShapeMismatchError(std::string(op) + ": order " + std::to_string(x.order()) +
                                 " vs " + std::to_string(y.order()));
    }
    for (std::size_t n = 1; n <= x.order(); ++n) {
        if (x.dim(n).size() != y.dim(n).size()) {
            throw ShapeMismatchError(std::string(op) + ": mode " + std::to_string(n) + " size " +
                                     std::to_string(x.dim(n).size()) + " vs " +
                                     std::to_string(y.dim(n).size()));
        }
    }
}

ValueType promote_types(ValueType a, ValueType b) {
    if (a == ValueType::Boolean && b == ValueType::Boolean) return ValueType::Boolean;
    if (a == ValueType::Real || b == ValueType::Real) return ValueType::Real;
    return ValueType::Integer;
}

Value multiply(const Value& a, const Value& b, ValueType out) {
    switch (out) {
        case ValueType::Boolean:
            return std::get<bool>(a) && std::get<bool>(b);
        case ValueType::Integer: {
            const auto ai = static_cast<std::int64_t>(value_as_real(a));
            const auto bi = static_cast<std::int64_t>(value_as_real(b));
            return ai * bi;
        }
        case ValueType::Real:
            return value_as_real(a) * value_as_real(b);
    }
    return 0.0;
}

}  // namespace

TypedTensor hadamard(const TypedTensor& x, const TypedTensor& y) {
    check_same_shape(x, y, "hadamard");
    const ValueType out_type = promote_types(x.value_type(), y.value_type());
    const Value out_default = multiply(x.default_value(), y.default_value(), out_type);

    TensorBuilder out(x.name(), x.dims(), out_type, out_default);
    const bool x_zero = value_as_real(x.default_value()) == 0.0;
    const bool y_zero = value_as_real(y.default_value()) == 0.0;

    if (x_zero || y_zero) {
        // A zero default absorbs: only coordinates stored on that side can
        // produce a nonzero product. Walk the smaller eligible set.
        const TypedTensor* walk = &x;
        const TypedTensor* other = &y;
        if (!x_zero || (y_zero && y.stored_count() < x.stored_count())) {
            walk = &y;
            other = &x;
        }
        for (const auto& [coords, v] : walk->stored()) {
            out.set_at(coords, multiply(v, other->at(coords), out_type));
        }
    } else {
        for (const auto& [coords, v] : x.stored()) {
            out.set_at(coords, multiply(v, y.at(coords), out_type));
        }
        for (const auto& [coords, w] : y.stored()) {
            if (!x.stored().count(coords)) {
                out.set_at(coords, multiply(x.default_value(), w, out_type));
            }
        }
    }
    return std::move(out).build();
}

DenseMatrix kronecker(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

DenseMatrix khatri_rao(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.cols()) {
        throw ShapeMismatchError("khatri_rao: column counts " + std::to_string(a.cols()) +
                                 " vs " + std::to_string(b.cols()));
    }
    DenseMatrix out(a.rows() * b.rows(), a.cols());
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            out.col(k).segment(i * b.rows(), b.rows()) = a(i, k) * b.col(k);
        }
    }
    return out;
}

TypedTensor outer(std::span<const TypedTensor> vectors) {
    if (vectors.empty()) throw EmptyInputError("outer product of zero vectors");
    ValueType out_type = ValueType::Integer;
    std::vector<Dimension> dims;
    dims.reserve(vectors.size());
    bool all_zero_defaults = true;
    for (const auto& v : vectors) {
        if (v.order() != 1) {
            throw ShapeMismatchError("outer operands must be 1-order tensors");
        }
        if (v.value_type() == ValueType::Real) out_type = ValueType::Real;
        if (value_as_real(v.default_value()) != 0.0) all_zero_defaults = false;
        dims.push_back(v.dim(1));
    }
    const Value out_default = out_type == ValueType::Real ? Value(0.0) : Value(std::int64_t{0});
    TensorBuilder out("", std::move(dims), out_type, out_default);

    const std::size_t n = vectors.size();
    Coords coords(n);
    if (all_zero_defaults) {
        // Product of the stored supports only.
        std::vector<std::vector<std::pair<Index, double>>> support(n);
        for (std::size_t k = 0; k < n; ++k) {
            for (const auto& [c, v] : vectors[k].stored()) {
                support[k].emplace_back(c[0], value_as_real(v));
            }
            if (support[k].empty()) return std::move(out).build();
        }
        std::vector<std::size_t> pos(n, 0);
        while (true) {
            double prod = 1.0;
            for (std::size_t k = 0; k < n; ++k) {
                coords[k] = support[k][pos[k]].first;
                prod *= support[k][pos[k]].second;
            }
            if (prod != 0.0) out.set_at(coords, value_from_real(prod, out_type));
            std::size_t k = n;
            while (k-- > 0) {
                if (++pos[k] < support[k].size()) break;
                pos[k] = 0;
                if (k == 0) return std::move(out).build();
            }
        }
    }

    // Nonzero defaults force the full index product.
    std::vector<std::size_t> sizes(n);
    for (std::size_t k = 0; k < n; ++k) {
        sizes[k] = vectors[k].dim(1).size();
        if (sizes[k] == 0) return std::move(out).build();
    }
    coords.assign(n, 1);
    while (true) {
        double prod = 1.0;
        for (std::size_t k = 0; k < n; ++k) prod *= value_as_real(vectors[k].at({coords[k]}));
        if (prod != 0.0) out.set_at(coords, value_from_real(prod, out_type));
        std::size_t k = n;
        while (k-- > 0) {
            if (++coords[k] <= sizes[k]) break;
            coords[k] = 1;
            if (k == 0) return std::move(out).build();
        }
    }
}

TypedTensor n_mode_product(const TypedTensor& x, const DenseMatrix& m, std::size_t mode) {
    if (mode < 1 || mode > x.order()) {
        throw ModeOutOfRangeError("mode " + std::to_string(mode) + " out of range [1, " +
                                  std::to_string(x.order()) + "]");
    }
    if (!x.is_numeric()) {
        throw NonNumericValueTypeError("n_mode_product requires a numeric tensor");
    }
    const std::size_t mode_size = x.dim(mode).size();
    if (static_cast<std::size_t>(m.cols()) != mode_size) {
        throw ShapeMismatchError("n_mode_product: matrix has " + std::to_string(m.cols()) +
                                 " columns, mode " + std::to_string(mode) + " has size " +
                                 std::to_string(mode_size));
    }

    std::vector<Dimension> dims = x.dims();
    std::vector<Key> proj_keys;
    proj_keys.reserve(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index j = 0; j < m.rows(); ++j) proj_keys.emplace_back(std::int64_t(j + 1));
    dims[mode - 1] =
        Dimension(x.dim(mode).name() + "_proj", KeyType::Integer, std::move(proj_keys));

    if (value_as_real(x.default_value()) != 0.0) {
        // No uniform default survives the contraction; go through the dense
        // identity unfold(result) = m * unfold(x).
        return fold(m * unfold(x, mode), mode, std::move(dims));
    }

    std::unordered_map<Coords, double, CoordsHash> acc;
    for (const auto& [coords, v] : x.stored()) {
        const double value = value_as_real(v);
        Coords target = coords;
        for (Eigen::Index j = 0; j < m.rows(); ++j) {
            const double w = m(j, static_cast<Eigen::Index>(coords[mode - 1] - 1));
            if (w == 0.0) continue;
            target[mode - 1] = static_cast<Index>(j + 1);
            acc[target] += w * value;
        }
    }
    TensorBuilder out(x.name(), std::move(dims), ValueType::Real, 0.0);
    for (const auto& [coords, v] : acc) {
        if (std::abs(v) > kSparsifyEps) out.set_at(coords, v);
    }
    return std::move(out).build();
}

}  // namespace tdm
