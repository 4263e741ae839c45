#include <doctest.h>

#include "generators.hpp"
#include "oracles.hpp"
#include "tdm/error.hpp"
#include "tdm/query.hpp"
#include "tdm/time.hpp"

using namespace tdm;

namespace {

/// (user, hashtag, time) toy tensor: hashtag usage counts per user per day.
TypedTensor usage_tensor() {
    auto day = [](const char* text) { return Key(*parse_timestamp(text)); };
    Dimension user("user", KeyType::String, {Key("u1"), Key("u2"), Key("u3")});
    Dimension tag("hashtag", KeyType::String, {Key("h1"), Key("h2"), Key("h3"), Key("h4")});
    Dimension time("time", KeyType::Timestamp,
                   {day("18-02-26"), day("18-02-28"), day("18-03-07"), day("18-03-08")}, 86400);
    TensorBuilder b("usage", {user, tag, time}, ValueType::Integer, std::int64_t{0});
    b.set_at({1, 1, 1}, std::int64_t{2});
    b.set_at({1, 2, 2}, std::int64_t{1});
    b.set_at({1, 2, 4}, std::int64_t{3});
    b.set_at({2, 3, 2}, std::int64_t{1});
    b.set_at({2, 1, 3}, std::int64_t{4});
    b.set_at({3, 4, 4}, std::int64_t{1});
    b.set_at({3, 1, 1}, std::int64_t{5});
    return std::move(b).build();
}

/// Brute-force reference: evaluate the conditions per coordinate.
bool coord_passes(const TypedTensor& t, const Coords& c,
                  const std::vector<DimCondition>& conds) {
    for (const auto& cond : conds) {
        const std::size_t mode = t.mode_of(cond.dimension);
        const Key& key = t.dim(mode).key_of(c[mode - 1]);
        bool ok = false;
        switch (cond.kind) {
            case DimCondition::Kind::Any:
                ok = true;
                break;
            case DimCondition::Kind::Equals:
            case DimCondition::Kind::In:
                for (const auto& k : cond.keys) {
                    if (t.dim(mode).normalize(k) == key) ok = true;
                }
                break;
            case DimCondition::Kind::Range: {
                if (is_null(key)) break;
                ok = true;
                if (cond.low) {
                    const Key low = t.dim(mode).normalize(*cond.low);
                    ok = cond.low_inclusive ? !key_less(key, low) : key_less(low, key);
                }
                if (ok && cond.high) {
                    const Key high = t.dim(mode).normalize(*cond.high);
                    ok = cond.high_inclusive ? !key_less(high, key) : key_less(key, high);
                }
                break;
            }
        }
        if (!ok) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("no conditions make the all-ones mask") {
    TypedTensor t = usage_tensor();
    TypedTensor mask = mask_from_conditions(t, {});
    CHECK(mask.value_type() == ValueType::Boolean);
    CHECK(mask.default_value() == Value(true));
    CHECK(mask.stored_count() == 0);
    CHECK(project(t, mask) == t);
}

TEST_CASE("single-user mask selects that user's slab") {
    TypedTensor t = usage_tensor();
    std::vector<DimCondition> conds{DimCondition::equals("user", Key("u1"))};
    TypedTensor mask = mask_from_conditions(t, conds);
    // 1 x 4 x 4 product set materialized
    CHECK(mask.stored_count() == 16);
    CHECK(mask.at({1, 2, 2}) == Value(true));
    CHECK(mask.at({2, 2, 2}) == Value(false));
}

TEST_CASE("mask entries equal brute-force predicate evaluation on a 3x4x5 tensor") {
    Rng rng(31);
    TypedTensor t = gen::random_int_tensor(rng, {3, 4, 5}, 0.5);
    for (int round = 0; round < 20; ++round) {
        std::vector<DimCondition> conds;
        if (rng.next_double() < 0.7) {
            conds.push_back(DimCondition::equals(
                "d1", Key(static_cast<std::int64_t>(1 + rng.next_below(4)))));
        }
        if (rng.next_double() < 0.7) {
            conds.push_back(DimCondition::range(
                "d2", Key(static_cast<std::int64_t>(1 + rng.next_below(2))),
                Key(static_cast<std::int64_t>(2 + rng.next_below(3)))));
        }
        TypedTensor mask = mask_from_conditions(t, conds);
        oracle::Dense all({3, 4, 5});
        all.for_each([&](const Coords& c) {
            CHECK(std::get<bool>(mask.at(c)) == coord_passes(t, c, conds));
        });
    }
}

TEST_CASE("project keeps only masked entries") {
    TypedTensor t = usage_tensor();
    std::vector<DimCondition> conds{DimCondition::equals("user", Key("u1"))};
    TypedTensor projected = project(t, mask_from_conditions(t, conds));
    CHECK(projected.stored_count() == 3);
    CHECK(projected.at({1, 1, 1}) == Value(std::int64_t{2}));
    CHECK(projected.at({2, 1, 3}) == Value(std::int64_t{0}));
    // dimensions are not compacted
    CHECK(projected.dim(1).size() == 3);
}

TEST_CASE("project is idempotent") {
    Rng rng(32);
    TypedTensor t = gen::random_int_tensor(rng, {4, 4, 3}, 0.5);
    std::vector<DimCondition> conds{
        DimCondition::in("d1", {Key(std::int64_t{1}), Key(std::int64_t{3})})};
    TypedTensor mask = mask_from_conditions(t, conds);
    TypedTensor once = project(t, mask);
    CHECK(project(once, mask) == once);
}

TEST_CASE("project validates shape and mask type") {
    TypedTensor t = usage_tensor();
    TypedTensor wrong("w", gen::int_dims({2, 2}), ValueType::Boolean, false);
    CHECK_THROWS_AS(project(t, wrong), ShapeMismatchError);
    CHECK_THROWS_AS(project(t, t), TypeMismatchError);
}

TEST_CASE("select matches the paper-style example: u1 in a date window, value 1") {
    TypedTensor t = usage_tensor();
    std::vector<DimCondition> conds{
        DimCondition::equals("user", Key("u1")),
        DimCondition::range("time", Key(*parse_timestamp("18-02-28")),
                            Key(*parse_timestamp("18-03-08"))),
    };
    TypedTensor r = select(t, conds, ValueCondition::equals(std::int64_t{1}));
    // only (u1, h2, 18-02-28) has value exactly 1 inside the window
    CHECK(r.stored_count() == 1);
    CHECK(r.at({1, 2, 2}) == Value(std::int64_t{1}));
}

TEST_CASE("select with any/any is the identity") {
    TypedTensor t = usage_tensor();
    CHECK(select(t, {}, ValueCondition::any()) == t);
}

TEST_CASE("select equals project + value filtering (operator factorization)") {
    Rng rng(33);
    for (int round = 0; round < 30; ++round) {
        TypedTensor t = gen::random_int_tensor(rng, {3, 4, 5}, 0.45);
        std::vector<DimCondition> conds;
        if (rng.next_double() < 0.8) {
            conds.push_back(DimCondition::range(
                "d3", Key(static_cast<std::int64_t>(1 + rng.next_below(3))), std::nullopt));
        }
        CHECK(select(t, conds, ValueCondition::any()) ==
              project(t, mask_from_conditions(t, conds)));
    }
}

TEST_CASE("select equals a brute-force COO double filter on random tensors") {
    Rng rng(34);
    for (int round = 0; round < 30; ++round) {
        TypedTensor t = gen::random_int_tensor(rng, {3, 4, 5}, 0.5);
        std::vector<DimCondition> conds{DimCondition::range(
            "d2", Key(static_cast<std::int64_t>(1 + rng.next_below(2))),
            Key(static_cast<std::int64_t>(2 + rng.next_below(3))))};
        const auto low = static_cast<std::int64_t>(1 + rng.next_below(4));
        ValueCondition vc = ValueCondition::range(Value(low), Value(low + 3));

        TypedTensor r = select(t, conds, vc);

        EntryMap expected;
        for (const auto& [c, v] : t.stored()) {
            const std::int64_t x = std::get<std::int64_t>(v);
            if (coord_passes(t, c, conds) && x >= low && x <= low + 3) expected[c] = v;
        }
        CHECK(r.stored() == expected);
    }
}

TEST_CASE("monotonicity: shrinking a condition's key set never adds entries") {
    Rng rng(35);
    TypedTensor t = gen::random_int_tensor(rng, {4, 4, 4}, 0.5);
    std::vector<DimCondition> weak{DimCondition::in(
        "d1", {Key(std::int64_t{1}), Key(std::int64_t{2}), Key(std::int64_t{3})})};
    std::vector<DimCondition> strong{
        DimCondition::in("d1", {Key(std::int64_t{1}), Key(std::int64_t{2})})};
    TypedTensor rw = select(t, weak, ValueCondition::any());
    TypedTensor rs = select(t, strong, ValueCondition::any());
    CHECK(rs.stored_count() <= rw.stored_count());
    for (const auto& [c, v] : rs.stored()) {
        CHECK(rw.stored().count(c) == 1);
    }
}

TEST_CASE("unknown dimensions and doubled conditions are rejected") {
    TypedTensor t = usage_tensor();
    std::vector<DimCondition> unknown{DimCondition::equals("nope", Key("x"))};
    CHECK_THROWS_AS(select(t, unknown, ValueCondition::any()), UnknownDimensionError);
    std::vector<DimCondition> doubled{DimCondition::equals("user", Key("u1")),
                                      DimCondition::equals("user", Key("u2"))};
    CHECK_THROWS_AS(select(t, doubled, ValueCondition::any()), Error);
    std::vector<DimCondition> wrong_type{DimCondition::equals("user", Key(std::int64_t{5}))};
    CHECK_THROWS_AS(select(t, wrong_type, ValueCondition::any()), TypeMismatchError);
}

TEST_CASE("selecting an absent key yields an empty result, not an error") {
    TypedTensor t = usage_tensor();
    std::vector<DimCondition> conds{DimCondition::equals("user", Key("u999"))};
    CHECK(select(t, conds, ValueCondition::any()).stored_count() == 0);
}

TEST_CASE("aggregate collapses the hashtag mode into a per-day series") {
    TypedTensor t = usage_tensor();
    std::vector<DimCondition> conds{DimCondition::equals("user", Key("u1"))};
    TypedTensor selected = select(t, conds, ValueCondition::any());
    TypedTensor by_day = aggregate(aggregate(selected, 2, Reducer::Sum), 1, Reducer::Sum);
    CHECK(by_day.order() == 1);
    CHECK(by_day.at({1}) == Value(std::int64_t{2}));
    CHECK(by_day.at({2}) == Value(std::int64_t{1}));
    CHECK(by_day.at({4}) == Value(std::int64_t{3}));
}

TEST_CASE("aggregate of an all-default tensor stays all-default") {
    TypedTensor t("t", gen::int_dims({3, 4}), ValueType::Real, 0.0);
    CHECK(aggregate(t, 1, Reducer::Sum).stored_count() == 0);
}

TEST_CASE("sum aggregation equals the dense axis-sum oracle") {
    Rng rng(36);
    for (int round = 0; round < 10; ++round) {
        TypedTensor t = gen::random_real_tensor(rng, {4, 5, 6}, 0.4);
        for (std::size_t mode = 1; mode <= 3; ++mode) {
            TypedTensor r = aggregate(t, mode, Reducer::Sum);
            oracle::Dense expected = oracle::shadow(t).sum_axis(mode);
            expected.for_each([&](const Coords& c) {
                CHECK(value_as_real(r.at(c)) == doctest::Approx(expected.at(c)).epsilon(1e-12));
            });
        }
    }
}

TEST_CASE("count and max reducers") {
    TypedTensor t = usage_tensor();
    TypedTensor counts = aggregate(t, 2, Reducer::Count);
    CHECK(counts.value_type() == ValueType::Integer);
    CHECK(counts.at({1, 1}) == Value(std::int64_t{1}));
    CHECK(counts.at({1, 4}) == Value(std::int64_t{1}));
    TypedTensor maxes = aggregate(t, 3, Reducer::Max);
    CHECK(maxes.at({3, 1}) == Value(std::int64_t{5}));
    CHECK_THROWS_AS(
        aggregate(TypedTensor("b", gen::int_dims({2, 2}), ValueType::Boolean, false), 1,
                  Reducer::Sum),
        NonNumericValueTypeError);
}

TEST_CASE("sum aggregation commutes across distinct modes") {
    Rng rng(37);
    TypedTensor t = gen::random_real_tensor(rng, {4, 3, 5}, 0.5);
    // collapse modes 1 then 2-of-the-remainder vs the other order
    TypedTensor ab = aggregate(aggregate(t, 1, Reducer::Sum), 2, Reducer::Sum);
    TypedTensor ba = aggregate(aggregate(t, 3, Reducer::Sum), 1, Reducer::Sum);
    REQUIRE(ab.order() == 1);
    REQUIRE(ba.order() == 1);
    for (Index i = 1; i <= 3; ++i) {
        CHECK(value_as_real(ab.at({i})) == doctest::Approx(value_as_real(ba.at({i}))).epsilon(1e-12));
    }
}

TEST_CASE("aggregate accounts for nonzero defaults") {
    TypedTensor t("t", gen::int_dims({2, 3}), ValueType::Integer, std::int64_t{1});
    // row 1: stored 5 at (1,1); absent (1,2),(1,3) carry default 1 each
    TypedTensor sums = aggregate(t.set_at({1, 1}, std::int64_t{5}), 2, Reducer::Sum);
    CHECK(sums.at({1}) == Value(std::int64_t{7}));
    CHECK(sums.at({2}) == Value(std::int64_t{3}));
    CHECK(value_as_real(sums.default_value()) == 3.0);
}
