#include "qparity/rational.hpp"

#include <doctest.h>

using namespace qparity;

TEST_CASE("rational parse and print round-trip") {
    CHECK(rat_parse("1/2") == Rat(1, 2));
    CHECK(rat_parse("-3/6") == Rat(-1, 2));
    CHECK(rat_parse("7") == Rat(7));
    CHECK(rat_str(Rat(2, 4)) == "1/2");
    CHECK(rat_str(Rat(-10)) == "-10");
    CHECK(rat_str(rat_parse("123456789123456789/2")) == "123456789123456789/2");
}

TEST_CASE("rational rejects malformed input") {
    CHECK_THROWS_AS(rat_parse(""), std::invalid_argument);
    CHECK_THROWS_AS(rat_parse("1/0"), std::invalid_argument);
    CHECK_THROWS_AS(rat_parse("1/-2"), std::invalid_argument);
    CHECK_THROWS_AS(rat_parse("a/b"), std::invalid_argument);
}

TEST_CASE("exact arithmetic has no drift") {
    Rat third(1, 3);
    Rat sum(0);
    for (int i = 0; i < 3000; ++i)
        sum += third;
    CHECK(sum == Rat(1000));
    CHECK(Rat(1, 3) + Rat(1, 6) == Rat(1, 2));
    CHECK(Rat(1, 2) * Rat(2, 3) == Rat(1, 3));
    CHECK(rat_abs(Rat(-5, 7)) == Rat(5, 7));
}
