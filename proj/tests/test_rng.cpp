#include <catch_amalgamated.hpp>

#include "harris/rng.hpp"
#include "harris/stats.hpp"

#include <cmath>
#include <set>
#include <vector>

using namespace harris;

TEST_CASE("philox known-answer vectors") {
    // Reference vectors from the Random123 distribution (kat_vectors).
    auto out = detail::philox4x32_10({0, 0, 0, 0}, {0, 0});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);

    out = detail::philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                {0xffffffffu, 0xffffffffu});
    CHECK(out[0] == 0x408f276du);
    CHECK(out[1] == 0x41c83b0eu);
    CHECK(out[2] == 0xa20bc7c6u);
    CHECK(out[3] == 0x6d5451fdu);

    out = detail::philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                {0xa4093822u, 0x299f31d0u});
    CHECK(out[0] == 0xd16cfe09u);
    CHECK(out[1] == 0x94fdccebu);
    CHECK(out[2] == 0x5001e420u);
    CHECK(out[3] == 0x24126ea1u);
}

TEST_CASE("identical triples replay identical sequences") {
    RngStream a(42, 7), b(42, 7);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

    RngStream c(42, 7);
    std::vector<double> first;
    for (int i = 0; i < 16; ++i) first.push_back(c.next_normal());
    RngStream d(42, 7);
    for (int i = 0; i < 16; ++i) REQUIRE(d.next_normal() == first[size_t(i)]);
}

TEST_CASE("distinct replicas and lanes give distinct sequences") {
    RngStream a(1, 0, 0), b(1, 1, 0), c(1, 0, 1);
    std::set<std::uint64_t> firsts{a.next_u64(), b.next_u64(), c.next_u64()};
    CHECK(firsts.size() == 3);
}

TEST_CASE("inverse normal cdf against reference values") {
    // scipy.stats.norm.ppf, frozen.
    struct Row { double p, x; };
    const Row rows[] = {
        {1e-300, -37.0470962993612},
        {1e-100, -21.273453560965322},
        {1e-30, -11.464024688443613},
        {1e-10, -6.361340902404056},
        {0.001, -3.090232306167813},
        {0.025, -1.9599639845400545},
        {0.3, -0.5244005127080409},
        {0.5, 0.0},
        {0.7, 0.5244005127080407},
        {0.975, 1.959963984540054},
        {0.999, 3.090232306167813},
        {0.9999999999, 6.361340889697422},
    };
    for (const auto& r : rows) {
        if (r.x == 0.0)
            CHECK(std::abs(detail::normal_icdf(r.p)) < 1e-15);
        else
            CHECK(detail::normal_icdf(r.p) == Catch::Approx(r.x).epsilon(1e-12));
    }
}

TEST_CASE("normal draws have the right moments") {
    RngStream rng(2024, 0);
    const int n = 200000;
    std::vector<double> x(n);
    for (auto& v : x) v = rng.next_normal();
    const double m = mean(x);
    const double var = sample_variance(x);
    const double se = std::sqrt(1.0 / n);
    CHECK(std::abs(m) < 4.0 * se);
    CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
    // symmetric tails at the 2-sigma level
    int above = 0, below = 0;
    for (double v : x) {
        if (v > 2.0) ++above;
        if (v < -2.0) ++below;
    }
    const double p = 0.02275;
    CHECK(std::abs(above / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));
    CHECK(std::abs(below / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("uniforms stay inside the open interval") {
    RngStream rng(5, 3);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.next_uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
    }
}
