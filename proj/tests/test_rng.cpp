#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

#include "airkit/rng.hpp"

using namespace airkit;

TEST_CASE("philox4x32-10 known-answer vectors") {
    // Published test vectors for the 10-round Philox4x32 generator.
    CHECK(philox4x32({0u, 0u, 0u, 0u}, {0u, 0u}) ==
          std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                     {0xffffffffu, 0xffffffffu}) ==
          std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                     {0xa4093822u, 0x299f31d0u}) ==
          std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("counter rng is pure random access") {
    const CounterRng rng(12345, 7);
    const auto a = rng.block(1000, 3);
    const auto b = rng.block(0, 0);
    CHECK(rng.block(1000, 3) == a);  // order of access does not matter
    CHECK(rng.block(0, 0) == b);
    CHECK(a != b);

    // distinct seeds and streams decorrelate
    CHECK(CounterRng(12345, 8).block(1000, 3) != a);
    CHECK(CounterRng(12346, 7).block(1000, 3) != a);
}

TEST_CASE("uniform01 range and moments") {
    const CounterRng rng(42, 0);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01(static_cast<std::uint64_t>(i), 0);
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sum2 += u * u;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
    CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("gaussian pair moments") {
    const CounterRng rng(77, 1);
    const int n = 100000;
    double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto [z0, z1] = rng.gaussian_pair(static_cast<std::uint64_t>(i), 0);
        for (double z : {z0, z1}) {
            sum += z;
            sum2 += z * z;
            sum4 += z * z * z * z;
        }
    }
    const double m1 = sum / (2 * n);
    const double m2 = sum2 / (2 * n);
    const double m4 = sum4 / (2 * n);
    CHECK(std::abs(m1) < 0.01);
    CHECK(m2 == doctest::Approx(1.0).epsilon(0.02));
    CHECK(m4 == doctest::Approx(3.0).epsilon(0.05));  // normal kurtosis
}

TEST_CASE("uniform_pow2 hits every value") {
    const CounterRng rng(5, 2);
    std::vector<int> counts(256, 0);
    for (int i = 0; i < 65536; ++i)
        ++counts[rng.uniform_pow2(static_cast<std::uint64_t>(i), 0, 256)];
    for (int c : counts) CHECK(c > 150);  // expectation 256
}

TEST_CASE("sequential rng next_below stays in range and varies") {
    SequentialRng rng(9, 4);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t v = rng.next_below(37);
        REQUIRE(v < 37);
        seen.insert(v);
    }
    CHECK(seen.size() == 37);
}

TEST_CASE("seeded shuffle is deterministic and a permutation") {
    std::vector<int> a(100), b(100);
    std::iota(a.begin(), a.end(), 0);
    std::iota(b.begin(), b.end(), 0);
    seeded_shuffle(a.data(), a.size(), 2024, 1);
    seeded_shuffle(b.data(), b.size(), 2024, 1);
    CHECK(a == b);
    CHECK(a != std::vector<int>(100, 0));
    std::vector<int> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> identity(100);
    std::iota(identity.begin(), identity.end(), 0);
    CHECK(sorted == identity);

    std::vector<int> c(100);
    std::iota(c.begin(), c.end(), 0);
    seeded_shuffle(c.data(), c.size(), 2025, 1);
    CHECK(c != a);
}
