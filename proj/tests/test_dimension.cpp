#include <doctest.h>

#include "tdm/dimension.hpp"
#include "tdm/error.hpp"
#include "tdm/rng.hpp"
#include "tdm/time.hpp"

using namespace tdm;

TEST_CASE("create maps keys to 1-based insertion-order indices") {
    Dimension user("user", KeyType::String, {Key("u1"), Key("u2"), Key("u3")});
    CHECK(user.size() == 3);
    CHECK(user.index_of(Key("u1")) == 1);
    CHECK(user.index_of(Key("u2")) == 2);
    CHECK(user.index_of(Key("u3")) == 3);
    CHECK_FALSE(user.has_null());
}

TEST_CASE("timestamp keys keep the figure's ordering") {
    auto day = [](const char* text) { return Key(*parse_timestamp(text)); };
    Dimension time("time", KeyType::Timestamp,
                   {day("18-03-08"), day("18-03-07"), day("18-02-28"), day("18-02-26")}, 86400);
    CHECK(time.size() == 4);
    CHECK(time.index_of(day("18-03-08")) == 1);
    CHECK(time.index_of(day("18-02-26")) == 4);
}

TEST_CASE("empty dimension") {
    Dimension d("x", KeyType::String, {});
    CHECK(d.size() == 0);
    CHECK(d.empty());
    CHECK_THROWS_AS(d.key_of(1), IndexOutOfRangeError);
}

TEST_CASE("singleton lookups") {
    Dimension d("s", KeyType::String, {Key("k")});
    CHECK(d.index_of(Key("k")) == 1);
    CHECK(std::get<std::string>(d.key_of(1)) == "k");
}

TEST_CASE("tweet dimension matches the 4-key example") {
    Dimension tw("tweetID", KeyType::String, {Key("t1"), Key("t2"), Key("t3"), Key("t4")});
    CHECK(tw.index_of(Key("t4")) == 4);
}

TEST_CASE("key_of and index_of are mutual inverses over 100 keys") {
    std::vector<Key> keys;
    for (int i = 0; i < 100; ++i) keys.emplace_back("key-" + std::to_string(i * 7));
    Dimension d("big", KeyType::String, keys);
    for (std::size_t i = 1; i <= d.size(); ++i) {
        CHECK(d.index_of(d.key_of(i)) == i);
    }
    for (const auto& k : keys) {
        CHECK(d.key_of(d.index_of(k)) == k);
    }
}

TEST_CASE("extend appends at size+1 and preserves prior mappings") {
    Dimension d("u", KeyType::String, {Key("u1")});
    auto [d2, idx] = d.extend(Key("u2"));
    CHECK(idx == 2);
    CHECK(d2.size() == 2);
    CHECK(d2.index_of(Key("u1")) == 1);
    CHECK(d2.index_of(Key("u2")) == 2);
    // the original value is untouched
    CHECK(d.size() == 1);
}

TEST_CASE("extend from empty") {
    Dimension d("u", KeyType::String, {});
    auto [d2, idx] = d.extend(Key("k"));
    CHECK(idx == 1);
    CHECK(d2.index_of(Key("k")) == 1);
}

TEST_CASE("1000 extends equal the batch constructor") {
    std::vector<Key> keys;
    for (int i = 0; i < 1000; ++i) keys.emplace_back("k" + std::to_string(i));
    Dimension batch("big", KeyType::String, keys);
    Dimension grown("big", KeyType::String, {});
    for (const auto& k : keys) grown = grown.extend(k).first;
    CHECK(grown == batch);
}

TEST_CASE("with_null appends the sentinel at size+1") {
    Dimension d("h", KeyType::String, {Key("h1"), Key("h2")});
    Dimension n = d.with_null();
    CHECK(n.has_null());
    CHECK(n.size() == 3);
    CHECK(n.index_of(Key(NullKey{})) == 3);
    CHECK_THROWS_AS(n.with_null(), NullAlreadyPresentError);
}

TEST_CASE("with_null on an empty dimension") {
    Dimension d("h", KeyType::String, {});
    Dimension n = d.with_null();
    CHECK(n.size() == 1);
    CHECK(n.index_of(Key(NullKey{})) == 1);
}

TEST_CASE("with_null lands at size+1 for random dimensions") {
    Rng rng(42);
    for (int round = 0; round < 20; ++round) {
        std::vector<Key> keys;
        const std::size_t n = rng.next_below(30);
        for (std::size_t i = 0; i < n; ++i) keys.emplace_back("k" + std::to_string(i));
        Dimension d("r", KeyType::String, keys);
        CHECK(d.with_null().index_of(Key(NullKey{})) == d.size() + 1);
    }
}

TEST_CASE("duplicate keys are rejected") {
    CHECK_THROWS_AS(Dimension("d", KeyType::String, {Key("a"), Key("a")}), DuplicateKeyError);
    Dimension d("d", KeyType::String, {Key("a")});
    CHECK_THROWS_AS(d.extend(Key("a")), DuplicateKeyError);
}

TEST_CASE("keys must match the declared type") {
    CHECK_THROWS_AS(Dimension("d", KeyType::Integer, {Key("oops")}), TypeMismatchError);
    Dimension d("d", KeyType::Integer, {Key(std::int64_t{1})});
    CHECK_THROWS_AS(d.extend(Key("nope")), TypeMismatchError);
    // lookups treat a wrong-typed key as absent
    CHECK_THROWS_AS(d.index_of(Key("nope")), KeyNotFoundError);
}

TEST_CASE("missing keys raise KeyNotFound") {
    Dimension d("d", KeyType::String, {Key("a")});
    CHECK_THROWS_AS(d.index_of(Key("b")), KeyNotFoundError);
    CHECK(d.find(Key("b")) == std::nullopt);
}

TEST_CASE("timestamp keys bucket to the declared granularity") {
    const std::int64_t base = *parse_timestamp("2018-03-08");
    Dimension d("time", KeyType::Timestamp, {Key(base + 125)}, 3600);
    // 00:02:05 buckets to the hour
    CHECK(d.index_of(Key(base)) == 1);
    CHECK(d.index_of(Key(base + 3599)) == 1);
    CHECK(std::get<std::int64_t>(d.key_of(1)) == base);
    // two keys in one bucket collide
    CHECK_THROWS_AS(Dimension("t", KeyType::Timestamp, {Key(base), Key(base + 10)}, 3600),
                    DuplicateKeyError);
}

TEST_CASE("builder collapses duplicates to the first-seen index") {
    DimensionBuilder b("user", KeyType::String);
    CHECK(b.add(Key("u1")) == 1);
    CHECK(b.add(Key("u2")) == 2);
    CHECK(b.add(Key("u1")) == 1);
    CHECK(b.find(Key("u2")) == 2);
    CHECK(b.find(Key("u9")) == std::nullopt);
    Dimension d = std::move(b).build();
    CHECK(d.size() == 2);
}

TEST_CASE("contiguity: the index image is exactly 1..size") {
    Rng rng(7);
    std::vector<Key> keys;
    for (int i = 0; i < 50; ++i) keys.emplace_back("x" + std::to_string(rng.next_u64()));
    Dimension d("r", KeyType::String, keys);
    std::vector<bool> seen(d.size() + 1, false);
    for (const auto& k : d.keys()) {
        const std::size_t idx = d.index_of(k);
        REQUIRE(idx >= 1);
        REQUIRE(idx <= d.size());
        CHECK_FALSE(seen[idx]);
        seen[idx] = true;
    }
}
