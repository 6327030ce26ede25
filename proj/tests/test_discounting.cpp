#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "hyperdisc/discount.hpp"
#include "hyperdisc/hazard.hpp"
#include "hyperdisc/quadrature.hpp"

using namespace hyperdisc;

TEST_CASE("survival closed forms match quadrature") {
    const double k = 0.05;
    const HazardPrior exp_prior = HazardPrior::exponential(k);
    const HazardPrior uni_prior = HazardPrior::uniform(k);
    const HazardPrior del_prior = HazardPrior::delta(k);
    for (double t : {0.0, 1.0, 5.0, 25.0, 100.0, 225.0}) {
        CHECK_THAT(survival_from_prior(del_prior, t),
                   Catch::Matchers::WithinAbs(std::exp(-k * t), 1e-12));
        CHECK_THAT(survival_from_prior(exp_prior, t),
                   Catch::Matchers::WithinAbs(1.0 / (1.0 + k * t), 1e-6));
        const double uni_ref = t == 0.0 ? 1.0 : -std::expm1(-k * t) / (k * t);
        CHECK_THAT(survival_from_prior(uni_prior, t),
                   Catch::Matchers::WithinAbs(uni_ref, 1e-6));
    }
}

TEST_CASE("survival is a proper survival function") {
    for (const HazardPrior& prior :
         {HazardPrior::exponential(0.2), HazardPrior::uniform(0.3), HazardPrior::delta(0.1)}) {
        double prev = survival_from_prior(prior, 0.0);
        CHECK_THAT(prev, Catch::Matchers::WithinAbs(1.0, 1e-8));
        for (double t = 1.0; t <= 64.0; t *= 2.0) {
            const double s = survival_from_prior(prior, t);
            CHECK(s > 0.0);
            CHECK(s <= prev + 1e-8);
            prev = s;
        }
    }
    CHECK_THROWS_AS(survival_from_prior(HazardPrior::exponential(0.1), -1.0),
                    std::domain_error);
}

TEST_CASE("discount forms and their prior pairing") {
    const DiscountSpec hyp = DiscountSpec::hyperbolic(0.05);
    CHECK(discount_value(hyp, 0.0) == 1.0);
    CHECK_THAT(discount_value(hyp, 20.0), Catch::Matchers::WithinAbs(0.5, 1e-12));

    const DiscountSpec expd = DiscountSpec::exponential(0.9);
    CHECK_THAT(discount_value(expd, 3.0), Catch::Matchers::WithinAbs(0.729, 1e-12));

    const DiscountSpec uni = DiscountSpec::uniform_hazard(0.1);
    CHECK(discount_value(uni, 0.0) == 1.0);
    CHECK_THAT(discount_value(uni, 10.0),
               Catch::Matchers::WithinAbs(-std::expm1(-1.0), 1e-12));

    // each prior's implied discount equals its survival function
    for (const HazardPrior& prior :
         {HazardPrior::delta(0.1), HazardPrior::exponential(0.05), HazardPrior::uniform(0.2)}) {
        const DiscountSpec d = discount_for_prior(prior);
        for (double t : {0.0, 1.0, 7.0, 50.0})
            CHECK_THAT(discount_value(d, t),
                       Catch::Matchers::WithinAbs(survival_from_prior(prior, t), 1e-6));
    }
}

TEST_CASE("tabulated discount agrees with its exponential source") {
    std::vector<double> table;
    for (int t = 0; t <= 50; ++t) table.push_back(std::pow(0.95, t));
    const DiscountSpec tab = DiscountSpec::tabulated(table);
    const DiscountSpec expd = DiscountSpec::exponential(0.95);
    for (int t = 0; t <= 50; ++t)
        CHECK_THAT(discount_value(tab, t),
                   Catch::Matchers::WithinAbs(discount_value(expd, t), 1e-12));
    CHECK_THROWS_AS(discount_value(tab, 51.0), std::out_of_range);
    CHECK_THROWS_AS(discount_value(tab, 1.5), std::out_of_range);
}

TEST_CASE("discount factory validation") {
    CHECK_THROWS_AS(DiscountSpec::exponential(0.0), std::invalid_argument);
    CHECK_THROWS_AS(DiscountSpec::exponential(1.5), std::invalid_argument);
    CHECK_THROWS_AS(DiscountSpec::hyperbolic(0.0), std::invalid_argument);
    CHECK_THROWS_AS(DiscountSpec::uniform_hazard(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(DiscountSpec::tabulated({0.9}), std::invalid_argument);
    CHECK_THROWS_AS(DiscountSpec::tabulated({1.0, 0.5, 0.6}), std::invalid_argument);
    CHECK_NOTHROW(DiscountSpec::exponential(1.0));
}

TEST_CASE("hyperbolic dominates the mean-matched exponential") {
    // Jensen: E[e^{-lambda t}] >= e^{-E[lambda] t}
    const double k = 0.05;
    const DiscountSpec hyp = DiscountSpec::hyperbolic(k);
    const DiscountSpec expd = DiscountSpec::exponential(std::exp(-k));
    for (double t = 1.0; t <= 300.0; t += 7.0)
        CHECK(discount_value(hyp, t) >= discount_value(expd, t));
}

TEST_CASE("hazard / gamma conversions") {
    CHECK_THAT(hazard_to_gamma(0.0), Catch::Matchers::WithinAbs(1.0, 0.0));
    for (double lam : {0.01, 0.1, 1.0, 5.0})
        CHECK_THAT(gamma_to_hazard(hazard_to_gamma(lam)),
                   Catch::Matchers::WithinAbs(lam, 1e-12));
    CHECK_THROWS_AS(hazard_to_gamma(-0.1), std::domain_error);
    CHECK_THROWS_AS(gamma_to_hazard(0.0), std::domain_error);
}

TEST_CASE("hazard sampling matches prior moments") {
    const int n = 100000;
    std::mt19937_64 rng(42);

    SECTION("delta is deterministic") {
        const HazardPrior prior = HazardPrior::delta(0.3);
        for (int i = 0; i < 10; ++i) CHECK(sample_hazard(prior, rng) == 0.3);
    }
    SECTION("exponential mean and variance") {
        const double k = 0.2;
        const HazardPrior prior = HazardPrior::exponential(k);
        double sum = 0.0, sum_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = sample_hazard(prior, rng);
            CHECK(x >= 0.0);
            sum += x;
            sum_sq += x * x;
        }
        const double mean = sum / n;
        const double var = sum_sq / n - mean * mean;
        CHECK_THAT(mean, Catch::Matchers::WithinAbs(k, 3.0 * k / std::sqrt(double(n))));
        CHECK_THAT(var, Catch::Matchers::WithinAbs(k * k, 0.1 * k * k));
    }
    SECTION("uniform mean and support") {
        const double k = 0.4;
        const HazardPrior prior = HazardPrior::uniform(k);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = sample_hazard(prior, rng);
            CHECK(x >= 0.0);
            CHECK(x <= k);
            sum += x;
        }
        const double se = k / std::sqrt(12.0 * n);
        CHECK_THAT(sum / n, Catch::Matchers::WithinAbs(k / 2.0, 3.0 * se));
    }
    SECTION("seeded overload is deterministic") {
        const HazardPrior prior = HazardPrior::exponential(0.05);
        CHECK(sample_hazard(prior, std::uint64_t{7}) == sample_hazard(prior, std::uint64_t{7}));
    }
}

TEST_CASE("adaptive quadrature hits analytic integrals") {
    CHECK_THAT(integrate([](double x) { return x * x; }, 0.0, 1.0, 1e-10),
               Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-9));
    CHECK_THAT(integrate([](double x) { return std::exp(-x); }, 0.0, 20.0, 1e-10),
               Catch::Matchers::WithinAbs(1.0 - std::exp(-20.0), 1e-8));
}
