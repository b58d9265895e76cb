#include <cmath>

#include "doctest.h"
#include "temt/error.hpp"
#include "temt/time_encoding.hpp"

using namespace temt;

namespace {
double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
}  // namespace

TEST_SUITE("time-encoding") {
    TEST_CASE("origin encodes as alternating 0, 1") {
        const auto e = encode_time(1900, 1900, 8);
        CHECK(e == std::vector<double>{0, 1, 0, 1, 0, 1, 0, 1});
    }

    TEST_CASE("d'=2, offset 1") {
        const auto e = encode_time(1901, 1900, 2);
        CHECK(e[0] == doctest::Approx(0.8414709848078965).epsilon(1e-15));
        CHECK(e[1] == doctest::Approx(0.5403023058681398).epsilon(1e-15));
    }

    TEST_CASE("frequencies follow 10000^(i/d')") {
        const auto e = encode_time(1917, 1900, 64);
        for (std::size_t i = 0; i < 32; ++i) {
            const double angle = 17.0 / std::pow(10000.0, static_cast<double>(i) / 64.0);
            CHECK(e[2 * i] == doctest::Approx(std::sin(angle)).epsilon(1e-14));
            CHECK(e[2 * i + 1] == doctest::Approx(std::cos(angle)).epsilon(1e-14));
        }
        for (double x : e) CHECK(std::abs(x) <= 1.0);
    }

    TEST_CASE("odd dimension is a configuration error") {
        CHECK_THROWS_AS(encode_time(2000, 1900, 7), ConfigError);
        CHECK_THROWS_AS(encode_time(2000, 1900, 0), ConfigError);
    }

    TEST_CASE("distinct years, distinct vectors") {
        CHECK(encode_time(1950, 1900, 64) != encode_time(2350, 1900, 64));
    }

    TEST_CASE("time table rows match encode_time") {
        const TimeRange r{1990, 1995};
        const auto table = time_table(r, 4);
        REQUIRE(table.size() == 24);
        for (Year t = 1990; t <= 1995; ++t) {
            const auto e = encode_time(t, r, 4);
            for (std::size_t j = 0; j < 4; ++j) CHECK(table[static_cast<std::size_t>(t - 1990) * 4 + j] == e[j]);
        }
    }

    TEST_CASE("inner product depends on the offset only") {
        for (int k = 0; k < 5; ++k) {
            const double ref = dot(encode_time(1900, 1900, 64), encode_time(1900 + k, 1900, 64));
            for (Year t : {1913, 1950, 2210}) CHECK(dot(encode_time(t, 1900, 64), encode_time(t + k, 1900, 64)) ==
                                                   doctest::Approx(ref).epsilon(1e-9));
        }
    }
}
