#include "doctest.h"
#include "trs/shape.hpp"

using namespace trs;

TEST_CASE("shape basics") {
    const Shape s({3, 4, 5});
    CHECK(s.order() == 3);
    CHECK(s.dim(1) == 3);
    CHECK(s.dim(3) == 5);
    CHECK(s.size() == 60);
    CHECK(s.to_string() == "3x4x5");
    CHECK(s == Shape({3, 4, 5}));
    CHECK(s != Shape({3, 4}));
    CHECK_THROWS_AS(s.dim(0), std::domain_error);
    CHECK_THROWS_AS(s.dim(4), std::domain_error);
    CHECK_THROWS_AS(Shape(std::vector<Index>{}), std::invalid_argument);
    CHECK_THROWS_AS(Shape({3, 0}), std::invalid_argument);
    CHECK_THROWS_AS(Shape({-1}), std::invalid_argument);
}

TEST_CASE("linearize pins both conventions") {
    const Shape s({3, 4, 5});
    // first index fastest
    CHECK(linearize({2, 3, 1}, s, Endian::little) == 8);
    // last index fastest
    CHECK(linearize({2, 3, 1}, s, Endian::big) == 31);
    CHECK(linearize({1, 1, 1}, s, Endian::little) == 1);
    CHECK(linearize({3, 4, 5}, s, Endian::little) == 60);
    CHECK(linearize({1, 1, 1}, s, Endian::big) == 1);
    CHECK(linearize({3, 4, 5}, s, Endian::big) == 60);
    // default is storage order (little)
    CHECK(linearize({2, 3, 1}, s) == 8);
}

TEST_CASE("linearize validates input") {
    const Shape s({3, 4, 5});
    CHECK_THROWS_AS(linearize({1, 1}, s), std::invalid_argument);
    CHECK_THROWS_AS(linearize({0, 1, 1}, s), std::domain_error);
    CHECK_THROWS_AS(linearize({1, 5, 1}, s), std::domain_error);
}

TEST_CASE("delinearize inverts linearize on the full range") {
    const Shape s({3, 4, 5});
    for (const Endian e : {Endian::little, Endian::big}) {
        for (Index flat = 1; flat <= s.size(); ++flat) {
            const MultiIndex idx = delinearize(flat, s, e);
            CHECK(linearize(idx, s, e) == flat);
        }
    }
    CHECK_THROWS_AS(delinearize(0, s), std::domain_error);
    CHECK_THROWS_AS(delinearize(61, s), std::domain_error);
}

TEST_CASE("storage strides follow first-fastest order") {
    const auto strides = storage_strides(Shape({3, 4, 5}));
    REQUIRE(strides.size() == 3);
    CHECK(strides[0] == 1);
    CHECK(strides[1] == 3);
    CHECK(strides[2] == 12);
}
