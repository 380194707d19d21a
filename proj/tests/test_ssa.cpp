#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "support.hpp"

using namespace crnfit;

namespace {

SsaConfig base_config(std::vector<long long> counts, double volume, double t_end, double h,
                      int n_points, std::uint64_t seed) {
    SsaConfig cfg;
    cfg.initial_counts = std::move(counts);
    cfg.volume = volume;
    cfg.t_end = t_end;
    cfg.h = h;
    cfg.n_points = n_points;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("zero rates freeze the initial state onto the grid") {
    ReactionLibrary lib = enumerate_library(2);
    RateVector rates(17, 0.0);
    SsaConfig cfg = base_config({50, 30}, 10.0, 3.0, 0.5, 5, 1);
    TimeSeries ts = gillespie(lib, rates, cfg);
    REQUIRE(ts.points() == 5);
    for (int n = 0; n < 5; ++n) {
        CHECK(ts.values(n, 0) == 5.0);
        CHECK(ts.values(n, 1) == 3.0);
    }
    CHECK(ts.t0 == 0.0);
    CHECK(ts.h == 0.5);

    cfg.t0 = 1.0; // a shifted recording grid holds the same state
    TimeSeries shifted = gillespie(lib, rates, cfg);
    CHECK(shifted.t0 == 1.0);
    CHECK((shifted.values - ts.values).norm() == 0.0);
}

TEST_CASE("pure death matches the exponential decay law across an ensemble") {
    ReactionLibrary lib = enumerate_library(1);
    RateVector rates(4, 0.0);
    rates[0] = 1.0; // X -> 0
    const long long x0 = 20;
    const int paths = 10000;

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(11);
    for (int i = 0; i < paths; ++i) {
        SsaConfig cfg = base_config({x0}, 1.0, 2.0, 0.2, 11, 1000 + static_cast<std::uint64_t>(i));
        TimeSeries ts = gillespie(lib, rates, cfg);
        mean += ts.values.col(0);
    }
    mean /= static_cast<double>(paths);

    // each molecule survives to time t independently with probability e^-t,
    // so the count is binomial and the ensemble mean has a known standard error
    for (int k = 1; k <= 10; ++k) {
        double t = 0.2 * k;
        double p = std::exp(-t);
        double expected = static_cast<double>(x0) * p;
        double se = std::sqrt(static_cast<double>(x0) * p * (1.0 - p) / paths);
        CAPTURE(t, mean(k), expected, se);
        CHECK(std::abs(mean(k) - expected) <= 3.0 * se);
    }
    CHECK(mean(0) == static_cast<double>(x0));
}

TEST_CASE("a large-volume birth-death path tracks the logistic rate equation") {
    ReactionLibrary lib = enumerate_library(1);
    RateVector rates(4, 0.0);
    rates[1] = 1.0; // X -> X + X contributes +x
    rates[2] = 1.0; // X + X -> 0 contributes -x^2
    const double volume = 1e4;
    SsaConfig cfg = base_config({1000}, volume, 10.0, 1.0, 11, 99);
    TimeSeries ts = gillespie(lib, rates, cfg);
    for (int n = 0; n <= 10; ++n) {
        double t = static_cast<double>(n);
        double exact = 0.1 * std::exp(t) / (1.0 + 0.1 * (std::exp(t) - 1.0));
        CAPTURE(n, ts.values(n, 0), exact);
        CHECK(std::abs(ts.values(n, 0) - exact) < 0.05);
    }
}

TEST_CASE("unimolecular conversion conserves total count and decays exponentially") {
    ReactionLibrary lib = enumerate_library(2);
    RateVector rates(17, 0.0);
    rates[2] = 2.0; // X -> Z
    const int paths = 500;

    Eigen::VectorXd mean_x = Eigen::VectorXd::Zero(5);
    for (int i = 0; i < paths; ++i) {
        SsaConfig cfg = base_config({200, 0}, 1.0, 1.0, 0.25, 5, 4000 + static_cast<std::uint64_t>(i));
        TimeSeries ts = gillespie(lib, rates, cfg);
        for (int n = 0; n < 5; ++n) {
            CHECK(ts.values(n, 0) + ts.values(n, 1) == 200.0);
            CHECK(ts.values(n, 0) >= 0.0);
            CHECK(ts.values(n, 1) >= 0.0);
        }
        mean_x += ts.values.col(0);
    }
    mean_x /= static_cast<double>(paths);

    for (int n = 1; n < 5; ++n) {
        double t = 0.25 * n;
        double p = std::exp(-2.0 * t);
        double expected = 200.0 * p;
        double se = std::sqrt(200.0 * p * (1.0 - p) / paths);
        CAPTURE(t, mean_x(n), expected);
        CHECK(std::abs(mean_x(n) - expected) <= 3.0 * se);
    }
}

TEST_CASE("the same seed reproduces a path bit for bit") {
    ReactionLibrary lib = enumerate_library(1);
    RateVector rates(4, 0.0);
    rates[0] = 1.0;
    SsaConfig cfg = base_config({100}, 1.0, 2.0, 0.1, 21, 7);
    TimeSeries a = gillespie(lib, rates, cfg);
    TimeSeries b = gillespie(lib, rates, cfg);
    CHECK((a.values - b.values).norm() == 0.0);

    cfg.seed = 8;
    TimeSeries c = gillespie(lib, rates, cfg);
    CHECK((a.values - c.values).norm() != 0.0);
}

TEST_CASE("pair annihilation from an odd count strands one molecule") {
    ReactionLibrary lib = enumerate_library(1);
    RateVector rates(4, 0.0);
    rates[2] = 5.0; // X + X -> 0
    SsaConfig cfg = base_config({101}, 1.0, 5.0, 0.5, 11, 3);
    TimeSeries ts = gillespie(lib, rates, cfg);
    CHECK(ts.values(0, 0) == 101.0);
    for (int n = 0; n < ts.points(); ++n) CHECK(ts.values(n, 0) >= 0.0);
    // pairs vanish two at a time, so an odd population ends absorbed at one
    CHECK(ts.values(ts.points() - 1, 0) == 1.0);
}

TEST_CASE("an extinct population stays extinct on the rest of the grid") {
    ReactionLibrary lib = enumerate_library(1);
    RateVector rates(4, 0.0);
    rates[0] = 10.0;
    SsaConfig cfg = base_config({5}, 1.0, 10.0, 1.0, 11, 21);
    TimeSeries ts = gillespie(lib, rates, cfg);
    bool extinct = false;
    for (int n = 1; n < ts.points(); ++n) {
        CHECK(ts.values(n, 0) <= ts.values(n - 1, 0)); // death only shrinks
        if (ts.values(n, 0) == 0.0) extinct = true;
        if (extinct) CHECK(ts.values(n, 0) == 0.0);
    }
    CHECK(extinct); // mean lifetime 1/10, horizon 10: certain in practice
}

TEST_CASE("simulation inputs are validated") {
    ReactionLibrary lib = enumerate_library(1);
    RateVector rates(4, 0.0);
    SsaConfig good = base_config({10}, 1.0, 1.0, 0.5, 3, 0);
    CHECK_NOTHROW(gillespie(lib, rates, good));

    RateVector short_rates(3, 0.0);
    CHECK_THROWS_AS(gillespie(lib, short_rates, good), invalid_input_error);

    RateVector negative(4, 0.0);
    negative[1] = -1.0;
    CHECK_THROWS_AS(gillespie(lib, negative, good), invalid_input_error);

    SsaConfig bad = good;
    bad.initial_counts = {10, 10};
    CHECK_THROWS_AS(gillespie(lib, rates, bad), invalid_input_error);
    bad = good;
    bad.initial_counts = {-1};
    CHECK_THROWS_AS(gillespie(lib, rates, bad), invalid_input_error);
    bad = good;
    bad.volume = 0.0;
    CHECK_THROWS_AS(gillespie(lib, rates, bad), invalid_input_error);
    bad = good;
    bad.h = 0.0;
    CHECK_THROWS_AS(gillespie(lib, rates, bad), invalid_input_error);
    bad = good;
    bad.t_end = 0.0;
    CHECK_THROWS_AS(gillespie(lib, rates, bad), invalid_input_error);
    bad = good;
    bad.n_points = 0;
    CHECK_THROWS_AS(gillespie(lib, rates, bad), invalid_input_error);

    // the recording grid may overhang by at most one step
    SsaConfig grid = base_config({10}, 1.0, 1.0, 0.5, 5, 0);
    CHECK_THROWS_AS(gillespie(lib, rates, grid), invalid_input_error);
    grid.n_points = 4;
    CHECK_NOTHROW(gillespie(lib, rates, grid));
}
