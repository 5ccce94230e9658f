#include <doctest.h>

#include <random>

#include "storm_audit/decimal.hpp"

using storm_audit::Decimal;

TEST_CASE("decimal parse and render") {
    CHECK(Decimal::parse("1.55")->to_string() == "1.55");
    CHECK(Decimal::parse("001.500")->to_string() == "1.5");
    CHECK(Decimal::parse("0.000")->to_string() == "0");
    CHECK(Decimal::parse("-2.50")->to_string() == "-2.5");
    CHECK(Decimal::parse(".5")->to_string() == "0.5");
    CHECK(Decimal::parse("5.")->to_string() == "5");
    CHECK_FALSE(Decimal::parse(""));
    CHECK_FALSE(Decimal::parse("."));
    CHECK_FALSE(Decimal::parse("-"));
    CHECK_FALSE(Decimal::parse("1.2.3"));
    CHECK_FALSE(Decimal::parse("1e9"));
    CHECK_FALSE(Decimal::parse(" 1"));
}

TEST_CASE("large values never render in scientific notation") {
    CHECK(Decimal(115).scaled_by_pow10(9).to_string() == "115000000000");
    CHECK(Decimal::pow10(20).to_string() == "100000000000000000000");
    CHECK(Decimal::pow10(-4).to_string() == "0.0001");
    CHECK(Decimal::parse("1.55")->scaled_by_pow10(9).to_string() == "1550000000");
}

TEST_CASE("normalized representation makes equal values compare equal") {
    CHECK(*Decimal::parse("1.50") == *Decimal::parse("1.5"));
    CHECK(*Decimal::parse("1500") == Decimal::parse("1.5")->scaled_by_pow10(3));
    CHECK(Decimal(0) == *Decimal::parse("0.00"));
    CHECK(Decimal(0).exponent() == 0);
    CHECK(Decimal(1000).exponent() == 3);
}

TEST_CASE("arithmetic and ordering") {
    auto a = *Decimal::parse("2.5");
    auto b = *Decimal::parse("0.75");
    CHECK((a + b).to_string() == "3.25");
    CHECK((a - b).to_string() == "1.75");
    CHECK((b - a).to_string() == "-1.75");
    CHECK((a * b).to_string() == "1.875");
    CHECK(b < a);
    CHECK(Decimal(-1) < Decimal(0));
    CHECK(Decimal::pow10(-3) < Decimal::pow10(-2));
    CHECK(Decimal(2499000) < Decimal(2499001));
}

TEST_CASE("decimal agrees with integer arithmetic on random inputs") {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<std::int64_t> value(-1'000'000'000, 1'000'000'000);
    std::uniform_int_distribution<int> shift(0, 6);
    for (int i = 0; i < 2000; ++i) {
        auto x = value(rng);
        auto y = value(rng);
        int s = shift(rng);
        // x / 10^s and y / 10^s keep integer-backed truth for comparisons
        auto dx = Decimal(x).scaled_by_pow10(-s);
        auto dy = Decimal(y).scaled_by_pow10(-s);
        CHECK((dx + dy) == Decimal(x + y).scaled_by_pow10(-s));
        CHECK((dx - dy) == Decimal(x - y).scaled_by_pow10(-s));
        CHECK(((dx < dy) == (x < y)));
        CHECK(((dx == dy) == (x == y)));
        CHECK(*Decimal::parse(dx.to_string()) == dx);
    }
}
