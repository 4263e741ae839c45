#include <doctest.h>

#include "generators.hpp"
#include "oracles.hpp"
#include "tdm/error.hpp"
#include "tdm/tensor.hpp"
#include "tdm/time.hpp"

using namespace tdm;

namespace {

TypedTensor publish_tensor() {
    auto day = [](const char* text) { return Key(*parse_timestamp(text)); };
    Dimension user("user", KeyType::String, {Key("u1"), Key("u2"), Key("u3")});
    Dimension tweet("tweetID", KeyType::String, {Key("t1"), Key("t2"), Key("t3"), Key("t4")});
    Dimension time("time", KeyType::Timestamp,
                   {day("18-03-08"), day("18-03-07"), day("18-02-28"), day("18-02-26")}, 86400);
    return TypedTensor("publish", {user, tweet, time}, ValueType::Integer, std::int64_t{0});
}

}  // namespace

TEST_CASE("a fresh tensor is all-default everywhere") {
    TypedTensor t = publish_tensor();
    CHECK(t.order() == 3);
    CHECK(t.stored_count() == 0);
    CHECK(t.at({1, 1, 1}) == Value(std::int64_t{0}));
    CHECK(t.at({3, 4, 4}) == Value(std::int64_t{0}));
    CHECK(frobenius_norm(t) == 0.0);
}

TEST_CASE("set then get by keys records a posting event") {
    TypedTensor t = publish_tensor();
    const std::vector<Key> coords{Key("u3"), Key("t1"), Key(*parse_timestamp("18-03-08"))};
    t = t.set(coords, std::int64_t{1});
    CHECK(t.get(coords) == Value(std::int64_t{1}));
    CHECK(t.stored_count() == 1);
}

TEST_CASE("writing the default removes the entry") {
    TypedTensor t = publish_tensor();
    t = t.set_at({1, 2, 3}, std::int64_t{5});
    CHECK(t.stored_count() == 1);
    t = t.set_at({1, 2, 3}, std::int64_t{0});
    CHECK(t.stored_count() == 0);
}

TEST_CASE("1000 random set/get pairs agree with a dense shadow array") {
    const std::vector<std::size_t> sizes{4, 5, 6};
    TypedTensor t("t", gen::int_dims(sizes), ValueType::Real, 0.0);
    oracle::Dense shadow(sizes);
    Rng rng(99);
    for (int i = 0; i < 1000; ++i) {
        Coords c{static_cast<Index>(1 + rng.next_below(4)),
                 static_cast<Index>(1 + rng.next_below(5)),
                 static_cast<Index>(1 + rng.next_below(6))};
        if (rng.next_double() < 0.7) {
            const double v = rng.next_double() * 10 - 5;
            t = t.set_at(c, v);
            shadow.at(c) = v;
        }
        CHECK(value_as_real(t.at(c)) == shadow.at(c));
    }
    // canonical sparsity held throughout
    for (const auto& [c, v] : t.stored()) CHECK(v != t.default_value());
}

TEST_CASE("constructor rejects bad inputs") {
    Dimension a = gen::int_dim("a", 2);
    CHECK_THROWS_AS(TypedTensor("x", {a, a}, ValueType::Real, 0.0),
                    DuplicateDimensionNameError);
    CHECK_THROWS_AS(TypedTensor("x", {a}, ValueType::Integer, 0.5), TypeMismatchError);
    TypedTensor t("x", {a}, ValueType::Integer, std::int64_t{0});
    CHECK_THROWS_AS(t.set_at({1}, 0.5), TypeMismatchError);
    CHECK_THROWS_AS(t.at({3}), IndexOutOfRangeError);
    CHECK_THROWS_AS(t.at({1, 1}), IndexOutOfRangeError);
    CHECK_THROWS_AS(t.get({Key(std::int64_t{9})}), KeyNotFoundError);
}

TEST_CASE("1-order tensor behaves as a vector") {
    TypedTensor v("v", {gen::int_dim("i", 4)}, ValueType::Real, 0.0);
    v = v.set_at({2}, 3.0);
    CHECK(value_as_real(v.at({2})) == 3.0);
    CHECK(frobenius_norm(v) == 3.0);
    const DenseMatrix m = unfold(v, 1);
    CHECK(m.rows() == 4);
    CHECK(m.cols() == 1);
}

TEST_CASE("fibers match the dense oracle on a random 4x5x6 tensor") {
    Rng rng(4);
    const std::vector<std::size_t> sizes{4, 5, 6};
    TypedTensor t = gen::random_real_tensor(rng, sizes, 0.4);
    oracle::Dense shadow = oracle::shadow(t);

    for (Index j = 1; j <= 5; ++j) {
        for (Index k = 1; k <= 6; ++k) {
            TypedTensor f = t.fiber(1, {j, k});
            CHECK(f.order() == 1);
            CHECK(f.dim(1).size() == 4);
            for (Index i = 1; i <= 4; ++i) {
                CHECK(value_as_real(f.at({i})) == shadow.at({i, j, k}));
            }
        }
    }
}

TEST_CASE("fiber of an all-default tensor is all-default") {
    TypedTensor t("t", gen::int_dims({3, 4, 2}), ValueType::Real, 0.0);
    CHECK(t.fiber(2, {1, 2}).stored_count() == 0);
}

TEST_CASE("fiber accepts keys for the fixed modes") {
    // the user-mode fiber at (t1, 18-03-08): who posted that tweet that day
    TypedTensor t = publish_tensor();
    t = t.set({Key("u3"), Key("t1"), Key(*parse_timestamp("18-03-08"))}, std::int64_t{1});
    TypedTensor f = t.fiber_by_keys(1, {Key("t1"), Key(*parse_timestamp("18-03-08"))});
    CHECK(f.at({3}) == Value(std::int64_t{1}));
    CHECK(f.at({1}) == Value(std::int64_t{0}));
}

TEST_CASE("slices match the dense oracle on a random 4x5x6 tensor") {
    Rng rng(5);
    const std::vector<std::size_t> sizes{4, 5, 6};
    TypedTensor t = gen::random_real_tensor(rng, sizes, 0.4);
    oracle::Dense shadow = oracle::shadow(t);

    for (Index k = 1; k <= 6; ++k) {
        TypedTensor s = t.slice(1, 2, {k});
        CHECK(s.order() == 2);
        for (Index i = 1; i <= 4; ++i) {
            for (Index j = 1; j <= 5; ++j) {
                CHECK(value_as_real(s.at({i, j})) == shadow.at({i, j, k}));
            }
        }
    }
}

TEST_CASE("slicing a 2-order tensor with nothing fixed returns it unchanged") {
    Rng rng(6);
    TypedTensor t = gen::random_real_tensor(rng, {3, 4}, 0.5);
    CHECK(t.slice(1, 2, Coords{}) == t);
}

TEST_CASE("unfold of the 1..24 tensor has the canonical layout") {
    // mode-1 varies fastest in the enumeration
    const std::vector<std::size_t> sizes{3, 4, 2};
    TensorBuilder b("e", gen::int_dims(sizes), ValueType::Integer, std::int64_t{0});
    std::int64_t v = 1;
    for (Index k = 1; k <= 2; ++k) {
        for (Index j = 1; j <= 4; ++j) {
            for (Index i = 1; i <= 3; ++i) b.set_at({i, j, k}, v++);
        }
    }
    TypedTensor t = std::move(b).build();

    for (std::size_t mode = 1; mode <= 3; ++mode) {
        const DenseMatrix m = unfold(t, mode);
        CHECK(static_cast<std::size_t>(m.rows()) == sizes[mode - 1]);
        CHECK(static_cast<std::size_t>(m.cols()) == 24 / sizes[mode - 1]);
        // entry-by-entry against the unfolding index formula
        oracle::Dense shadow = oracle::shadow(t);
        shadow.for_each([&](const Coords& c) {
            const std::size_t col = oracle::unfold_column(c, mode, sizes);
            CHECK(m(c[mode - 1] - 1, static_cast<Eigen::Index>(col - 1)) == shadow.at(c));
        });
        // and the round trip restores the tensor exactly
        CHECK(fold(m, mode, t.dims(), ValueType::Integer, std::int64_t{0}) == t);
    }

    // X_(1) of a 3x4x2 tensor is 3x8, first row 1,4,7,10,13,16,19,22
    const DenseMatrix m1 = unfold(t, 1);
    CHECK(m1.rows() == 3);
    CHECK(m1.cols() == 8);
    const double first_row[] = {1, 4, 7, 10, 13, 16, 19, 22};
    for (int j = 0; j < 8; ++j) CHECK(m1(0, j) == first_row[j]);
}

TEST_CASE("unfold along mode 1 of a matrix is the matrix itself") {
    Rng rng(8);
    TypedTensor t = gen::random_real_tensor(rng, {3, 5}, 0.6);
    const DenseMatrix m = unfold(t, 1);
    oracle::Dense shadow = oracle::shadow(t);
    shadow.for_each([&](const Coords& c) { CHECK(m(c[0] - 1, c[1] - 1) == shadow.at(c)); });
}

TEST_CASE("fold-unfold round trips 50 random sparse tensors bitwise") {
    Rng rng(123);
    for (int round = 0; round < 50; ++round) {
        const std::size_t order = 2 + rng.next_below(3);
        std::vector<std::size_t> sizes;
        for (std::size_t n = 0; n < order; ++n) sizes.push_back(1 + rng.next_below(6));
        TypedTensor t = gen::random_real_tensor(rng, sizes, 0.35);
        for (std::size_t mode = 1; mode <= order; ++mode) {
            CHECK(fold(unfold(t, mode), mode, t.dims()) == t);
        }
    }
}

TEST_CASE("folding a zero matrix stores nothing") {
    const DenseMatrix z = DenseMatrix::Zero(3, 8);
    TypedTensor t = fold(z, 1, gen::int_dims({3, 4, 2}));
    CHECK(t.stored_count() == 0);
}

TEST_CASE("frobenius norm") {
    TypedTensor t("t", gen::int_dims({3, 3}), ValueType::Real, 0.0);
    CHECK(frobenius_norm(t) == 0.0);
    t = t.set_at({2, 2}, 3.0);
    CHECK(frobenius_norm(t) == 3.0);

    Rng rng(77);
    TypedTensor r = gen::random_real_tensor(rng, {4, 5, 3}, 0.5);
    const double expected = oracle::shadow(r).norm();
    CHECK(frobenius_norm(r) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("frobenius norm densifies a nonzero default") {
    TypedTensor t("t", gen::int_dims({2, 2}), ValueType::Real, 1.0);
    // all four entries are 1.0
    CHECK(frobenius_norm(t) == doctest::Approx(2.0));
    CHECK_THROWS_AS(frobenius_norm(TypedTensor("b", gen::int_dims({2}), ValueType::Boolean, false)),
                    NonNumericValueTypeError);
}

TEST_CASE("mode errors") {
    TypedTensor t("t", gen::int_dims({2, 2}), ValueType::Real, 0.0);
    CHECK_THROWS_AS(unfold(t, 0), ModeOutOfRangeError);
    CHECK_THROWS_AS(unfold(t, 3), ModeOutOfRangeError);
    CHECK_THROWS_AS(t.fiber(3, {1}), ModeOutOfRangeError);
    CHECK_THROWS_AS(
        unfold(TypedTensor("b", gen::int_dims({2}), ValueType::Boolean, false), 1),
        NonNumericValueTypeError);
}

TEST_CASE("aggregating a 1-order tensor produces a 0-order scalar") {
    // degenerate orders stay well-formed
    TypedTensor v("v", {gen::int_dim("i", 3)}, ValueType::Integer, std::int64_t{0});
    v = v.set_at({1}, std::int64_t{2}).set_at({3}, std::int64_t{5});
    CHECK(v.order() == 1);
    CHECK(v.stored_count() == 2);
}

TEST_CASE("unfold fills a nonzero default into absent cells") {
    TypedTensor t("t", gen::int_dims({2, 3}), ValueType::Real, 2.5);
    const DenseMatrix m = unfold(t, 1);
    CHECK(m(0, 0) == 2.5);
    CHECK(m(1, 2) == 2.5);
}
