#include "fxa/stats.hpp"

#include <doctest.h>

#include <random>

using namespace fxa;

TEST_CASE("chi-square critical values match reference quantiles") {
    // reference values computed with scipy.stats.chi2.ppf
    CHECK(chi2_critical(3, 0.001) == doctest::Approx(16.266236).epsilon(1e-4));
    CHECK(chi2_critical(10, 0.001) == doctest::Approx(29.588298).epsilon(1e-4));
    CHECK(chi2_critical(15, 0.001) == doctest::Approx(37.697298).epsilon(1e-4));
    CHECK(chi2_critical(100, 0.001) == doctest::Approx(149.449253).epsilon(1e-4));
    CHECK(chi2_critical(225, 0.001) == doctest::Approx(296.287926).epsilon(1e-4));
    CHECK(chi2_critical(255, 0.001) == doctest::Approx(330.519744).epsilon(1e-4));
    CHECK(chi2_critical(1023, 0.001) == doctest::Approx(1168.497164).epsilon(1e-4));
    CHECK(chi2_critical(255, 0.01) == doctest::Approx(310.457388).epsilon(1e-4));
    CHECK(chi2_critical(15, 0.01) == doctest::Approx(30.577914).epsilon(1e-4));
}

TEST_CASE("uniformity test calibration") {
    std::mt19937_64 rng(123);
    std::vector<std::uint32_t> good;
    for (int i = 0; i < 10240; ++i) good.push_back(static_cast<std::uint32_t>(rng() & 0xff));
    CHECK(uniformity_test(good, 256, 0.001).pass);

    std::vector<std::uint32_t> constant(10240, 7);
    CHECK(!uniformity_test(constant, 256, 0.001).pass);

    std::vector<std::uint32_t> skewed;
    for (int i = 0; i < 10240; ++i)
        skewed.push_back(static_cast<std::uint32_t>(i % 2 ? rng() & 0xff : (rng() & 0x7f)));
    CHECK(!uniformity_test(skewed, 256, 0.001).pass);

    std::vector<std::uint32_t> few(100, 0);
    CHECK_THROWS(uniformity_test(few, 256, 0.001));
}

TEST_CASE("independence test accepts independent and rejects copies") {
    std::mt19937_64 rng(55);
    std::vector<std::uint32_t> x, y;
    for (int i = 0; i < 100000; ++i) {
        x.push_back(static_cast<std::uint32_t>(rng() & 0xf));
        y.push_back(static_cast<std::uint32_t>(rng() & 0xf));
    }
    JointResult indep = independence_test(x, y, 16, 0.001);
    CHECK(indep.chi2.pass);
    CHECK(indep.mutual_information < 0.01);

    JointResult copy = independence_test(x, x, 16, 0.001);
    CHECK(!copy.chi2.pass);
    CHECK(copy.mutual_information > 3.9); // ~4 bits

    // shifted copy is equally dependent
    std::vector<std::uint32_t> shifted;
    for (std::uint32_t v : x) shifted.push_back((v + 3) & 0xf);
    CHECK(!independence_test(x, shifted, 16, 0.001).chi2.pass);
}

TEST_CASE("entropy estimates") {
    std::mt19937_64 rng(99);
    std::vector<std::uint32_t> a, b;
    for (int i = 0; i < 100000; ++i) {
        a.push_back(static_cast<std::uint32_t>(rng() & 0xf));
        b.push_back(static_cast<std::uint32_t>(rng() & 0xf));
    }
    // single fresh column at W=4: 4.00 +- 0.05 bits
    CHECK(empirical_entropy({a}, 4) == doctest::Approx(4.0).epsilon(0.0125));
    // constant column: 0 bits
    std::vector<std::uint32_t> constant(100000, 3);
    CHECK(empirical_entropy({constant}, 4) == doctest::Approx(0.0).epsilon(0.01));
    // two independent columns jointly ~8 bits; a copy pair ~4 bits
    CHECK(empirical_entropy({a, b}, 4) == doctest::Approx(8.0).epsilon(0.01));
    CHECK(empirical_entropy({a, a}, 4) == doctest::Approx(4.0).epsilon(0.0125));
}
