#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "support.hpp"

using namespace crnfit;

namespace {

PolynomialODE decay_ode() {
    PolynomialODE ode(1); // y' = -y
    ode.add_term(0, {1}, -1.0);
    return ode;
}

PolynomialODE square_ode() {
    PolynomialODE ode(1); // y' = y^2, finite-time blow-up from y0 > 0
    ode.add_term(0, {2}, 1.0);
    return ode;
}

} // namespace

TEST_CASE("a zero vector field leaves the state untouched") {
    PolynomialODE ode(2);
    Eigen::Vector2d y0(0.7, -0.3);
    IntegrationConfig cfg;
    cfg.t_end = 1.0;
    cfg.h = 0.1;
    TimeSeries ts = integrate_rk4(ode, y0, cfg);
    REQUIRE(ts.points() == 11);
    for (int n = 0; n < ts.points(); ++n) {
        CHECK(ts.values(n, 0) == 0.7);
        CHECK(ts.values(n, 1) == -0.3);
    }
}

TEST_CASE("exponential decay is integrated to near machine accuracy") {
    IntegrationConfig cfg;
    cfg.t_end = 1.0;
    cfg.h = 0.01;
    Eigen::VectorXd y0(1);
    y0 << 1.0;
    TimeSeries ts = integrate_rk4(decay_ode(), y0, cfg);
    CHECK(std::abs(ts.values(ts.points() - 1, 0) - std::exp(-1.0)) < 1e-9);
}

TEST_CASE("halving the step divides the error by roughly sixteen") {
    Eigen::VectorXd y0(1);
    y0 << 1.0;
    auto error_at = [&](double h) {
        IntegrationConfig cfg;
        cfg.t_end = 1.0;
        cfg.h = h;
        TimeSeries ts = integrate_rk4(decay_ode(), y0, cfg);
        return std::abs(ts.values(ts.points() - 1, 0) - std::exp(-1.0));
    };
    double prev = error_at(0.1);
    for (double h : {0.05, 0.025}) {
        double cur = error_at(h);
        double ratio = prev / cur;
        CAPTURE(h, prev, cur);
        CHECK(ratio > 12.0);
        CHECK(ratio < 20.0);
        prev = cur;
    }
}

TEST_CASE("finite-time blow-up aborts with the offending time") {
    Eigen::VectorXd y0(1);
    y0 << 2.0; // exact solution 2/(1 - 2t) explodes at t = 1/2
    IntegrationConfig cfg;
    cfg.t_end = 1.0;
    cfg.h = 0.001;
    try {
        integrate_rk4(square_ode(), y0, cfg);
        FAIL("expected an instability_error");
    } catch (const instability_error& e) {
        CHECK(e.time > 0.3);
        CHECK(e.time < 0.7);
        CHECK(std::string(e.what()).find("blew") != std::string::npos);
    }
}

TEST_CASE("integration inputs are validated") {
    PolynomialODE ode = decay_ode();
    Eigen::VectorXd y0(1);
    y0 << 1.0;
    Eigen::VectorXd wrong(2);
    wrong << 1.0, 2.0;
    IntegrationConfig good;
    good.t_end = 1.0;
    good.h = 0.1;
    CHECK_THROWS_AS(integrate_rk4(ode, wrong, good), invalid_input_error);

    IntegrationConfig bad = good;
    bad.h = 0.0;
    CHECK_THROWS_AS(integrate_rk4(ode, y0, bad), invalid_input_error);
    bad.h = -0.1;
    CHECK_THROWS_AS(integrate_rk4(ode, y0, bad), invalid_input_error);
    bad = good;
    bad.t_end = 0.0;
    CHECK_THROWS_AS(integrate_rk4(ode, y0, bad), invalid_input_error);
    bad = good;
    bad.h = 2.0; // step longer than the whole horizon
    CHECK_THROWS_AS(integrate_rk4(ode, y0, bad), invalid_input_error);
}

TEST_CASE("the grid rounds the horizon to the nearest whole step") {
    PolynomialODE ode = decay_ode();
    Eigen::VectorXd y0(1);
    y0 << 1.0;
    IntegrationConfig cfg;
    cfg.t_end = 1.0;
    cfg.h = 0.3; // 3.33 steps round to 3
    TimeSeries ts = integrate_rk4(ode, y0, cfg, 5.0);
    CHECK(ts.points() == 4);
    CHECK(ts.t0 == 5.0);
    CHECK(ts.h == 0.3);
    CHECK(std::abs(ts.time(3) - 5.9) < 1e-12);
}

TEST_CASE("the reference generator keeps the origin fixed") {
    PolynomialODE gen = testsup::reference_generator();
    Eigen::Vector2d origin(0.0, 0.0);
    IntegrationConfig cfg;
    cfg.t_end = 1.0;
    cfg.h = 0.1;
    TimeSeries ts = integrate_rk4(gen, origin, cfg);
    CHECK(ts.values.norm() == 0.0);
}

TEST_CASE("the reference trajectory grows to a plateau") {
    TimeSeries ts = testsup::reference_series();
    REQUIRE(ts.points() == 1801);
    REQUIRE(ts.dimension() == 2);
    CHECK(ts.values.allFinite());

    const double x_end = ts.values(1800, 0);
    const double z_end = ts.values(1800, 1);
    CHECK(x_end > 0.5);
    CHECK(x_end < 1.05);
    CHECK(z_end >= 0.0);
    CHECK(z_end < 0.2);
    CHECK(x_end > ts.values(0, 0));

    // by the end of the window the flow has nearly stalled
    PolynomialODE gen = testsup::reference_generator();
    Eigen::Vector2d final_state(x_end, z_end);
    CHECK(gen.eval(final_state).lpNorm<Eigen::Infinity>() < 1e-2);
}

TEST_CASE("equilibrium search settles the logistic flow at one") {
    PolynomialODE ode(1); // y' = y - y^2
    ode.add_term(0, {1}, 1.0);
    ode.add_term(0, {2}, -1.0);
    Eigen::VectorXd y0(1);
    y0 << 0.2;
    Eigen::VectorXd eq = find_equilibrium(ode, y0, 100.0, 1e-10);
    CHECK(std::abs(eq(0) - 1.0) < 1e-6);
}

TEST_CASE("equilibrium search stops once the field is below tolerance") {
    Eigen::VectorXd y0(1);
    y0 << 1.0;
    Eigen::VectorXd eq = find_equilibrium(decay_ode(), y0, 100.0, 1e-8);
    CHECK(std::abs(eq(0)) < 1e-8);
}

TEST_CASE("the reference generator has an interior equilibrium") {
    PolynomialODE gen = testsup::reference_generator();
    Eigen::Vector2d y0(0.001, 0.324);
    Eigen::VectorXd eq = find_equilibrium(gen, y0, 200.0, 1e-8);
    CHECK(eq(0) > 0.0);
    CHECK(eq(0) < 1.0);
    CHECK(eq(1) > 0.0);
    CHECK(eq(1) < 1.0);
    CHECK(gen.eval(eq).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("a closed orbit never reaches an equilibrium") {
    PolynomialODE ode(2); // x' = -z, z' = x: circles around the origin
    ode.add_term(0, {0, 1}, -1.0);
    ode.add_term(1, {1, 0}, 1.0);
    Eigen::Vector2d y0(1.0, 0.0);
    try {
        find_equilibrium(ode, y0, 10.0, 1e-3);
        FAIL("expected a no_equilibrium_error");
    } catch (const no_equilibrium_error& e) {
        REQUIRE(e.final_state.size() == 2);
        double radius = std::hypot(e.final_state[0], e.final_state[1]);
        CHECK(std::abs(radius - 1.0) < 0.05); // the orbit stays on the unit circle
    }
}

TEST_CASE("equilibrium search surfaces a blow-up") {
    Eigen::VectorXd y0(1);
    y0 << 2.0;
    CHECK_THROWS_AS(find_equilibrium(square_ode(), y0, 10.0, 1e-8, 0.001), instability_error);
}

TEST_CASE("equilibrium search validates its parameters") {
    PolynomialODE ode = decay_ode();
    Eigen::VectorXd y0(1);
    y0 << 1.0;
    Eigen::VectorXd wrong(2);
    wrong << 1.0, 1.0;
    CHECK_THROWS_AS(find_equilibrium(ode, wrong, 10.0, 1e-8), invalid_input_error);
    CHECK_THROWS_AS(find_equilibrium(ode, y0, 0.0, 1e-8), invalid_input_error);
    CHECK_THROWS_AS(find_equilibrium(ode, y0, 10.0, 0.0), invalid_input_error);
    CHECK_THROWS_AS(find_equilibrium(ode, y0, 10.0, 1e-8, 0.0), invalid_input_error);
}
