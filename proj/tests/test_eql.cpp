#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <vector>

#include "support.hpp"

using namespace crnfit;

namespace {

TimeSeries series_from_function(int points, double h, int dim,
                                const std::function<double(double, int)>& f) {
    TimeSeries ts;
    ts.h = h;
    ts.values.resize(points, dim);
    for (int n = 0; n < points; ++n)
        for (int c = 0; c < dim; ++c) ts.values(n, c) = f(h * n, c);
    return ts;
}

} // namespace

TEST_CASE("the coupled design matrix carries stoichiometry times propensity") {
    ReactionLibrary lib = enumerate_library(2);
    TimeSeries ts;
    ts.h = 1.0;
    ts.values.resize(1, 2);
    ts.values << 1.0, 2.0;
    DesignMatrix dm = coupled_design_matrix(ts, lib);
    REQUIRE(dm.layout == DesignLayout::coupled);
    REQUIRE(dm.entries.rows() == 2);
    REQUIRE(dm.entries.cols() == 17);

    // X + Z -> 0 at (1,2): propensity 2, both species lose one
    CHECK(dm.entries(0, 14) == -2.0);
    CHECK(dm.entries(1, 14) == -2.0);
    // X + X -> Z at (1,2): propensity 1/2, x drops by two, z gains one
    CHECK(dm.entries(0, 11) == -1.0);
    CHECK(dm.entries(1, 11) == 0.5);
    // X -> X + X at (1,2): propensity 1, x gains one
    CHECK(dm.entries(0, 4) == 1.0);
    CHECK(dm.entries(1, 4) == 0.0);

    for (int j = 0; j < 17; ++j) CHECK(dm.reaction_ids[static_cast<size_t>(j)] == j);
}

TEST_CASE("coupled rows are stacked component-major") {
    ReactionLibrary lib = enumerate_library(2);
    TimeSeries ts;
    ts.h = 1.0;
    ts.values.resize(2, 2);
    ts.values << 1.0, 2.0, 3.0, 4.0;
    DesignMatrix dm = coupled_design_matrix(ts, lib);
    REQUIRE(dm.entries.rows() == 4);
    // X -> 0: the x rows see -x, the z rows see nothing
    Eigen::Vector4d expected(-1.0, -3.0, 0.0, 0.0);
    CHECK((dm.entries.col(0) - expected).norm() == 0.0);
}

TEST_CASE("the decoupled design matrix evaluates the monomial dictionary") {
    TimeSeries ts;
    ts.h = 1.0;
    ts.values.resize(1, 2);
    ts.values << 2.0, 3.0;
    std::vector<Monomial> basis = canonical_quadratic_basis(2);
    DesignMatrix dm = decoupled_design_matrix(ts, basis);
    REQUIRE(dm.layout == DesignLayout::decoupled);
    Eigen::RowVectorXd expected(5);
    expected << 2.0, 4.0, 3.0, 9.0, 6.0; // x, x^2, z, z^2, x*z
    CHECK((dm.entries.row(0) - expected).norm() == 0.0);
    CHECK(dm.monomials == basis);
}

TEST_CASE("candidate monomials are validated") {
    TimeSeries ts;
    ts.h = 1.0;
    ts.values.resize(3, 2);
    ts.values.setOnes();
    CHECK_THROWS_AS(decoupled_design_matrix(ts, {}), invalid_input_error);
    CHECK_THROWS_AS(decoupled_design_matrix(ts, {Monomial{{1}}}), invalid_input_error);
    CHECK_THROWS_AS(decoupled_design_matrix(ts, {Monomial{{-1, 2}}}), invalid_input_error);
    CHECK_THROWS_AS(decoupled_design_matrix(ts, {Monomial{{0, 0}}}), invalid_input_error);
    CHECK_THROWS_AS(decoupled_design_matrix(ts, {Monomial{{2, 1}}}), invalid_input_error);
}

TEST_CASE("data pinned at the origin cannot be fitted") {
    TimeSeries ts;
    ts.h = 0.1;
    ts.values = Eigen::MatrixXd::Zero(5, 2);
    CHECK_THROWS_WITH(fit_coupled(ts, enumerate_library(2)),
                      Catch::Matchers::ContainsSubstring("identically zero"));
}

TEST_CASE("a single-species decay series recovers the degradation reaction") {
    TimeSeries ts = series_from_function(2001, 0.001, 1,
                                         [](double t, int) { return std::exp(-t); });
    ReactionLibrary lib = enumerate_library(1);
    FitResult fit = fit_coupled(ts, lib);
    REQUIRE(fit.rates.size() == 4);
    CHECK(std::abs(fit.rates[0] - 1.0) < 1e-3); // X -> 0
    for (double k : fit.rates) CHECK(k >= 0.0);
    CHECK(std::abs(fit.model.coefficient(0, {1}) + 1.0) < 1e-3);
    CHECK(std::abs(fit.model.coefficient(0, {2})) < 1e-3);

    std::vector<int> expected_active;
    for (int j = 0; j < 4; ++j)
        if (fit.rates[static_cast<size_t>(j)] > 0.0) expected_active.push_back(j);
    CHECK(fit.active_reactions == expected_active);
    CHECK(fit.mse_valid);
}

TEST_CASE("exclusions are validated, recorded sorted, and forced to zero") {
    TimeSeries ts = testsup::reference_series(30);
    ReactionLibrary lib = enumerate_library(2);

    CHECK_THROWS_WITH(fit_coupled(ts, lib, {17}),
                      Catch::Matchers::ContainsSubstring("out of range"));
    CHECK_THROWS_AS(fit_coupled(ts, lib, {-1}), invalid_input_error);
    CHECK_THROWS_AS(prune_and_refit(ts, lib, {}), invalid_input_error);

    std::vector<int> all(17);
    for (int j = 0; j < 17; ++j) all[static_cast<size_t>(j)] = j;
    CHECK_THROWS_WITH(fit_coupled(ts, lib, all),
                      Catch::Matchers::ContainsSubstring("all library reactions"));

    FitResult fit = fit_coupled(ts, lib, {14, 3});
    CHECK(fit.excluded == std::vector<int>{3, 14});
    CHECK(fit.rates[3] == 0.0);
    CHECK(fit.rates[14] == 0.0);

    FitResult again = prune_and_refit(ts, lib, {14, 3});
    CHECK(again.rates == fit.rates);
    CHECK(again.residual_norm == fit.residual_norm);
}

TEST_CASE("removing a load-bearing reaction degrades the fit") {
    // sample the full horizon coarsely so the excluded channel actually matters
    TimeSeries ts = subsample(testsup::reference_series(1800), 10);
    ReactionLibrary lib = enumerate_library(2);
    FitResult full = fit_coupled(ts, lib);
    REQUIRE(full.rates[11] > 0.0); // the only x^2 source for z' is in use
    FitResult pruned = prune_and_refit(ts, lib, {11});
    CHECK(pruned.residual_norm > full.residual_norm);
}

TEST_CASE("a decoupled fit recovers a planted quadratic field") {
    PolynomialODE truth(2); // x' = 2x - x^2, z' = -z
    truth.add_term(0, {1, 0}, 2.0);
    truth.add_term(0, {2, 0}, -1.0);
    truth.add_term(1, {0, 1}, -1.0);
    IntegrationConfig cfg;
    cfg.h = 0.01;
    cfg.t_end = 5.0;
    Eigen::Vector2d y0(0.1, 1.0);
    TimeSeries ts = integrate_rk4(truth, y0, cfg);

    std::vector<Monomial> basis = canonical_quadratic_basis(2);
    FitResult fit = fit_decoupled(ts, basis, SolverKind::normal_equations);
    REQUIRE(fit.mode == FitMode::decoupled);
    REQUIRE(fit.coefficients.rows() == 5);
    REQUIRE(fit.coefficients.cols() == 2);
    for (size_t m = 0; m < basis.size(); ++m) {
        for (int c = 0; c < 2; ++c) {
            double want = truth.coefficients[static_cast<size_t>(c)]
                                            [static_cast<size_t>(truth.basis_index(basis[m].exponents))];
            CAPTURE(m, c);
            CHECK(std::abs(fit.coefficients(static_cast<int>(m), c) - want) < 1e-3);
        }
    }
    CHECK(fit.mse_valid);
}

TEST_CASE("a single-monomial dictionary estimates a growth rate") {
    TimeSeries ts = series_from_function(1001, 0.001, 1,
                                         [](double t, int) { return std::exp(3.0 * t); });
    FitResult fit = fit_decoupled(ts, {Monomial{{1}}}, SolverKind::normal_equations);
    CHECK(std::abs(fit.coefficients(0, 0) - 3.0) < 1e-4);
}

TEST_CASE("the reported residual matches the stacked regression problem") {
    TimeSeries ts = testsup::reference_series(180);
    ReactionLibrary lib = enumerate_library(2);
    FitResult fit = fit_coupled(ts, lib);

    DesignMatrix dm = coupled_design_matrix(ts, lib);
    Eigen::VectorXd b = detail::stack_derivatives(ts);
    Eigen::VectorXd x(17);
    for (int j = 0; j < 17; ++j) x(j) = fit.rates[static_cast<size_t>(j)];
    CHECK(std::abs(fit.residual_norm - (dm.entries * x - b).norm()) < 1e-10);
}

TEST_CASE("a tenfold subsample leaves the identified model essentially unchanged") {
    TimeSeries ts = testsup::reference_series(1800);
    ReactionLibrary lib = enumerate_library(2);
    FitResult fine = fit_coupled(ts, lib);
    FitResult coarse = fit_coupled(subsample(ts, 10), lib);
    CHECK(testsup::max_scaled_deviation(coarse.model, fine.model) < 0.01);
}

TEST_CASE("trajectory error is zero when the model reproduces the data") {
    PolynomialODE model(2); // zero field
    TimeSeries data;
    data.h = 0.5;
    data.values.resize(4, 2);
    data.values << 1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0;
    TrajectoryMse m = trajectory_mse(model, data, Eigen::Vector2d(1.0, 2.0));
    CHECK(m.trajectory.norm() == 0.0);
    CHECK(m.final_point.norm() == 0.0);
}

TEST_CASE("trajectory error averages squared deviations over the grid") {
    PolynomialODE model(1); // zero field keeps y at 1
    TimeSeries data;
    data.h = 0.5;
    data.values.resize(4, 1);
    data.values << 1.0, 1.25, 1.25, 1.25;
    Eigen::VectorXd y0(1);
    y0 << 1.0;
    TrajectoryMse m = trajectory_mse(model, data, y0);
    CHECK(std::abs(m.trajectory(0) - 3.0 * 0.0625 / 4.0) < 1e-14);
    CHECK(std::abs(m.final_point(0) - 0.0625) < 1e-14);

    TimeSeries single;
    single.h = 0.5;
    single.values.resize(1, 1);
    single.values << 1.0;
    CHECK_THROWS_AS(trajectory_mse(model, single, y0), invalid_input_error);
}

TEST_CASE("smoothing averages interior points and preserves linear trends") {
    TimeSeries ts;
    ts.h = 1.0;
    ts.values.resize(5, 1);
    ts.values << 0.0, 3.0, 0.0, 3.0, 0.0;

    TimeSeries same = smooth_series(ts, 1);
    CHECK((same.values - ts.values).norm() == 0.0);
    CHECK_THROWS_AS(smooth_series(ts, 2), invalid_input_error);
    CHECK_THROWS_AS(smooth_series(ts, 0), invalid_input_error);

    TimeSeries out = smooth_series(ts, 3);
    Eigen::VectorXd expected(5);
    expected << 0.0, 1.0, 2.0, 1.0, 0.0;
    CHECK((out.values.col(0) - expected).norm() < 1e-14);

    TimeSeries line = series_from_function(9, 1.0, 1, [](double t, int) { return 2.0 * t + 1.0; });
    TimeSeries smooth_line = smooth_series(line, 5);
    CHECK((smooth_line.values - line.values).norm() < 1e-12);
    CHECK(smooth_line.values(0, 0) == line.values(0, 0));
    CHECK(smooth_line.values(8, 0) == line.values(8, 0));
}

TEST_CASE("fitting through a smoothing window still recovers the reference model") {
    TimeSeries ts = testsup::reference_series(1800);
    ReactionLibrary lib = enumerate_library(2);
    FitResult fit = fit_coupled(ts, lib, {}, 5);
    CHECK(fit.mse_valid);
    CHECK(testsup::max_scaled_deviation(fit.model, testsup::reference_generator()) < 0.02);
}

TEST_CASE("decoupled fits report one diagnostic per component") {
    TimeSeries ts = testsup::reference_series(60);
    FitResult fit = fit_decoupled(ts, canonical_quadratic_basis(2), SolverKind::lsqr);
    REQUIRE(fit.diagnostics.size() == 2);
    for (const SolverResult& d : fit.diagnostics) CHECK(d.iterations >= 1);
}
