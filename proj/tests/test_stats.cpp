#include <catch_amalgamated.hpp>

#include "harris/stats.hpp"

#include <vector>

using namespace harris;

TEST_CASE("pairwise sum matches naive sum on exact inputs") {
    std::vector<double> v;
    for (int i = 1; i <= 1000; ++i) v.push_back(double(i));
    CHECK(pairwise_sum(v) == 500500.0);
    CHECK(mean(v) == 500.5);
}

TEST_CASE("median and quantiles") {
    std::vector<double> v = {5, 1, 4, 2, 3};
    CHECK(median(v) == 3.0);
    std::vector<double> w = {1, 2, 3, 4};
    CHECK(median(w) == 2.5);
    CHECK(quantile(w, 0.0) == 1.0);
    CHECK(quantile(w, 1.0) == 4.0);
    CHECK(interquartile_range(w) == Catch::Approx(1.5));
}

TEST_CASE("sample variance and stderr") {
    std::vector<double> v = {2, 4, 4, 4, 5, 5, 7, 9};
    CHECK(sample_variance(v) == Catch::Approx(32.0 / 7.0));
    CHECK(stderr_of_mean(v) == Catch::Approx(std::sqrt(32.0 / 7.0 / 8.0)));
}

TEST_CASE("ks statistic separates shifted samples") {
    std::vector<double> a, b;
    for (int i = 0; i < 500; ++i) {
        a.push_back(i / 500.0);
        b.push_back(i / 500.0 + 0.5);
    }
    CHECK(ks_statistic(a, a) == 0.0);
    CHECK(ks_statistic(a, b) == Catch::Approx(0.5).margin(0.01));
    CHECK(ks_critical(500, 500, 0.01) == Catch::Approx(1.6276 * std::sqrt(2.0 / 500.0)).epsilon(1e-3));
}
