#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rsdiff/entropy.hpp"

using namespace rsdiff;

TEST_CASE("exact entropy values") {
    CHECK(entropy_exact(Family::Fibonacci) == doctest::Approx(0.444398725).epsilon(1e-8));
    CHECK(entropy_exact(Family::PeriodDoubling) ==
          doctest::Approx((2.0 / 3.0) * std::log(2.0)).epsilon(1e-15));
    CHECK(entropy_exact(Family::PeriodDoubling) == doctest::Approx(0.46209812).epsilon(1e-7));
    CHECK_THROWS_AS(entropy_exact(Family::NobleMeans), std::invalid_argument);

    // series stability: summing far beyond the stopping bound changes nothing
    double tau = 0.5 * (1 + std::sqrt(5.0));
    double manual = 0;
    for (int l = 2; l <= 300; ++l) manual += std::log(static_cast<double>(l)) / std::pow(tau, l + 2);
    CHECK(std::abs(entropy_exact(Family::Fibonacci) - manual) < 1e-12);

    // single-term truncation approaches from below
    double first = std::log(2.0) / std::pow(tau, 4);
    CHECK(first == doctest::Approx(0.1011).epsilon(1e-3));
    CHECK(first < entropy_exact(Family::Fibonacci));
}

TEST_CASE("pd exact word counts: formula vs brute force") {
    std::vector<long> expected{1, 2, 4, 32, 1024};
    for (int r = 0; r <= 4; ++r) {
        CHECK(count_exact_words(r, CountMode::Formula) == BigInt(expected[static_cast<size_t>(r)]));
        CHECK(count_exact_words(r, CountMode::Formula) ==
              count_exact_words(r, CountMode::BruteForce));
    }
    CHECK_THROWS_AS(count_exact_words(5, CountMode::BruteForce), GuardError);
    // formula mode handles huge levels exactly: #_10 = 2^((2^12 - 1 - 3)/6) = 2^682
    BigInt big = count_exact_words(10, CountMode::Formula);
    CHECK(mpz_sizeinbase(big.get_mpz_t(), 2) == 683);

    // a-counts: every level-3 word has exactly 5 letters a
    CHECK(pd_a_count(3) == BigInt(5));
    auto words = exact_patches(period_doubling_spec(0.4), 3);
    for (const auto& [w, prob] : words)
        CHECK(BigInt(static_cast<long>(std::count(w.begin(), w.end(), 'a'))) == pd_a_count(3));
}

TEST_CASE("entropy estimates") {
    auto pd = period_doubling_spec(0.5);
    auto [e1, c1] = entropy_estimate(pd, 1);
    CHECK(c1 == 2);
    CHECK(e1 == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // trend: estimates at n = 8, 12, 16 close in on (2/3) log 2
    double target = entropy_exact(Family::PeriodDoubling);
    auto [e8, c8] = entropy_estimate(pd, 8);
    auto [e12, c12] = entropy_estimate(pd, 12);
    auto [e16, c16] = entropy_estimate(pd, 16);
    CHECK(std::abs(e12 - target) < std::abs(e8 - target));
    CHECK(std::abs(e16 - target) < std::abs(e12 - target));

    auto fib = fibonacci_spec(0.5);
    auto [f2, fc2] = entropy_estimate(fib, 2);
    CHECK(fc2 == 4); // {aa, ab, ba, bb}: bb is legal from level 3 on
    CHECK(f2 == doctest::Approx(std::log(4.0) / 2).epsilon(1e-12));

    CHECK_THROWS_AS(entropy_estimate(pd, 19), GuardError);
}

TEST_CASE("legal word counts are submultiplicative") {
    auto pd = period_doubling_spec(0.5);
    std::vector<size_t> counts{0};
    for (int n = 1; n <= 12; ++n) counts.push_back(legal_words(pd, n).size());
    for (int m = 1; m <= 6; ++m)
        for (int n = 1; m + n <= 12; ++n)
            CHECK(counts[static_cast<size_t>(m + n)] <=
                  counts[static_cast<size_t>(m)] * counts[static_cast<size_t>(n)]);

    auto fib = fibonacci_spec(0.5);
    std::vector<size_t> fcounts{0};
    for (int n = 1; n <= 8; ++n) fcounts.push_back(legal_words(fib, n).size());
    for (int m = 1; m <= 4; ++m)
        for (int n = 1; m + n <= 8; ++n)
            CHECK(fcounts[static_cast<size_t>(m + n)] <=
                  fcounts[static_cast<size_t>(m)] * fcounts[static_cast<size_t>(n)]);
}
