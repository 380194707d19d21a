#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "crnfit/errors.hpp"
#include "crnfit/ode_sim.hpp"
#include "crnfit/polynomial_ode.hpp"
#include "crnfit/reactions.hpp"
#include "crnfit/solvers.hpp"
#include "crnfit/timeseries.hpp"

namespace crnfit {

enum class DesignLayout { coupled, decoupled };

// Candidate-term matrix for derivative regression, with the metadata needed
// to map columns back to reactions or monomials.
struct DesignMatrix {
    Eigen::MatrixXd entries;
    DesignLayout layout = DesignLayout::decoupled;
    std::vector<int> reaction_ids;  // coupled layout: column -> library reaction
    std::vector<Monomial> monomials; // decoupled layout: column -> monomial
};

// Rows are component-major: component i at sample n sits in row i*N + n. The
// column for reaction j holds nu_j[i] * a_j(y(t_n)), so a nonnegative rate
// vector explains all components at once.
inline DesignMatrix coupled_design_matrix(const TimeSeries& ts, const ReactionLibrary& lib) {
    validate_series(ts);
    if (ts.dimension() != lib.dimension())
        throw invalid_input_error("time series dimension does not match the reaction library");
    const int n = ts.points();
    const int d = ts.dimension();
    DesignMatrix dm;
    dm.layout = DesignLayout::coupled;
    dm.entries.resize(static_cast<long>(d) * n, lib.size());
    dm.reaction_ids.resize(static_cast<size_t>(lib.size()));
    Eigen::VectorXd y(d);
    for (int row = 0; row < n; ++row) {
        y = ts.values.row(row);
        for (int j = 0; j < lib.size(); ++j) {
            const Reaction& r = lib.reactions[static_cast<size_t>(j)];
            double a = r.propensity.eval(y);
            for (int i = 0; i < d; ++i)
                dm.entries(static_cast<long>(i) * n + row, j) =
                    a * r.stoichiometry[static_cast<size_t>(i)];
        }
    }
    for (int j = 0; j < lib.size(); ++j)
        dm.reaction_ids[static_cast<size_t>(j)] = lib.reactions[static_cast<size_t>(j)].id;
    return dm;
}

// One row per sample, one column per candidate monomial.
inline DesignMatrix decoupled_design_matrix(const TimeSeries& ts,
                                            const std::vector<Monomial>& monomials) {
    validate_series(ts);
    if (monomials.empty()) throw invalid_input_error("candidate monomial list is empty");
    for (const Monomial& m : monomials) {
        if (static_cast<int>(m.exponents.size()) != ts.dimension())
            throw invalid_input_error("candidate monomial has wrong dimension");
        for (int e : m.exponents)
            if (e < 0) throw invalid_input_error("candidate monomial has a negative exponent");
        if (m.degree() < 1 || m.degree() > 2)
            throw invalid_input_error("candidate monomials must have total degree 1 or 2");
    }
    DesignMatrix dm;
    dm.layout = DesignLayout::decoupled;
    dm.monomials = monomials;
    dm.entries.resize(ts.points(), static_cast<int>(monomials.size()));
    Eigen::VectorXd y(ts.dimension());
    for (int n = 0; n < ts.points(); ++n) {
        y = ts.values.row(n);
        for (size_t m = 0; m < monomials.size(); ++m)
            dm.entries(n, static_cast<int>(m)) = monomials[m].eval(y);
    }
    return dm;
}

enum class FitMode { coupled, decoupled };

struct FitResult {
    FitMode mode = FitMode::coupled;
    PolynomialODE model;

    // coupled fits
    RateVector rates;                  // one entry per library reaction, zeros included
    std::vector<int> excluded;         // reaction ids forced out before fitting
    std::vector<int> active_reactions; // reaction ids with strictly positive rate

    // decoupled fits
    std::vector<Monomial> monomials;
    Eigen::MatrixXd coefficients; // monomial x component

    double residual_norm = 0.0;
    std::vector<SolverResult> diagnostics; // one per linear solve

    Eigen::VectorXd mse_trajectory; // per component, mean over the grid
    Eigen::VectorXd mse_final;      // per component, at the last sample
    bool mse_valid = false;
    std::string integration_error;
};

struct TrajectoryMse {
    Eigen::VectorXd trajectory; // per component
    Eigen::VectorXd final_point;
};

// Integrates the model on the data grid from y0 and compares pointwise.
// Divergence beyond the blow-up bound surfaces as an instability error.
inline TrajectoryMse trajectory_mse(const PolynomialODE& model, const TimeSeries& data,
                                    const Eigen::VectorXd& y0) {
    validate_series(data, 2);
    if (y0.size() != model.dimension || model.dimension != data.dimension())
        throw invalid_input_error("model, data, and initial state dimensions disagree");
    IntegrationConfig cfg;
    cfg.h = data.h;
    cfg.t_end = data.h * (data.points() - 1);
    TimeSeries sim = integrate_rk4(model, y0, cfg, data.t0);
    if (sim.points() != data.points())
        throw invalid_input_error("integration grid does not match the data grid");
    TrajectoryMse out;
    out.trajectory = Eigen::VectorXd::Zero(data.dimension());
    for (int n = 0; n < data.points(); ++n)
        out.trajectory += (sim.values.row(n) - data.values.row(n)).array().square().matrix();
    out.trajectory /= static_cast<double>(data.points());
    out.final_point = (sim.values.row(data.points() - 1) - data.values.row(data.points() - 1))
                          .array()
                          .square();
    return out;
}

// Centered moving average whose window shrinks symmetrically near the ends,
// keeping the average phase-aligned with the grid (the endpoints are left
// untouched). The window must be odd; 1 is the identity.
inline TimeSeries smooth_series(const TimeSeries& ts, int window) {
    validate_series(ts);
    if (window < 1 || window % 2 == 0)
        throw invalid_input_error("smoothing window must be a positive odd number");
    TimeSeries out = ts;
    const int n = ts.points();
    const int r = window / 2;
    for (int row = 0; row < n; ++row) {
        int reach = std::min(r, std::min(row, n - 1 - row));
        if (reach == 0) continue;
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(ts.dimension());
        for (int k = row - reach; k <= row + reach; ++k) acc += ts.values.row(k);
        out.values.row(row) = acc / static_cast<double>(2 * reach + 1);
    }
    return out;
}

namespace detail {

inline void attach_mse(FitResult& fit, const TimeSeries& data) {
    try {
        TrajectoryMse m = trajectory_mse(fit.model, data, data.values.row(0).transpose());
        fit.mse_trajectory = m.trajectory;
        fit.mse_final = m.final_point;
        fit.mse_valid = true;
    } catch (const instability_error& e) {
        fit.mse_valid = false;
        fit.integration_error = e.what();
        fit.mse_trajectory = Eigen::VectorXd::Constant(data.dimension(),
                                                       std::numeric_limits<double>::quiet_NaN());
        fit.mse_final = fit.mse_trajectory;
    }
}

inline Eigen::VectorXd stack_derivatives(const TimeSeries& ts) {
    DerivativeEstimate der = finite_difference(ts);
    const int n = ts.points();
    const int d = ts.dimension();
    Eigen::VectorXd b(static_cast<long>(d) * n);
    for (int i = 0; i < d; ++i)
        for (int row = 0; row < n; ++row) b(static_cast<long>(i) * n + row) = der.values(row, i);
    return b;
}

} // namespace detail

// Fits nonnegative reaction rates to finite-difference derivatives of the
// series. Rates the solver leaves at zero are reported as exactly zero; the
// active set keeps the strictly positive ones. smooth_window > 1 runs the
// series through smooth_series before differentiating; the default leaves the
// data alone. Trajectory error is always measured against the raw series.
inline FitResult fit_coupled(const TimeSeries& ts, const ReactionLibrary& lib,
                             const std::vector<int>& excluded_ids = {}, int smooth_window = 1) {
    validate_series(ts, 3);
    for (int id : excluded_ids)
        if (id < 0 || id >= lib.size())
            throw invalid_input_error("excluded reaction id " + std::to_string(id) +
                                      " is out of range");
    const TimeSeries data = smooth_window > 1 ? smooth_series(ts, smooth_window) : ts;
    DesignMatrix dm = coupled_design_matrix(data, lib);
    Eigen::VectorXd b = detail::stack_derivatives(data);

    std::vector<char> keep(static_cast<size_t>(lib.size()), 1);
    for (int id : excluded_ids) keep[static_cast<size_t>(id)] = 0;
    std::vector<int> cols;
    for (int j = 0; j < lib.size(); ++j)
        if (keep[static_cast<size_t>(j)]) cols.push_back(j);
    if (cols.empty()) throw invalid_input_error("all library reactions were excluded");

    RegressionProblem p;
    p.b = std::move(b);
    p.A.resize(dm.entries.rows(), static_cast<int>(cols.size()));
    for (size_t j = 0; j < cols.size(); ++j)
        p.A.col(static_cast<int>(j)) = dm.entries.col(cols[j]);
    if (p.A.cwiseAbs().maxCoeff() == 0.0)
        throw invalid_input_error("design matrix is identically zero; the data never leave the origin");

    SolverResult sol = solve_nnls(p);

    FitResult fit;
    fit.mode = FitMode::coupled;
    fit.rates.assign(static_cast<size_t>(lib.size()), 0.0);
    for (size_t j = 0; j < cols.size(); ++j)
        fit.rates[static_cast<size_t>(cols[j])] = sol.x(static_cast<int>(j));
    fit.excluded = excluded_ids;
    std::sort(fit.excluded.begin(), fit.excluded.end());
    for (int j = 0; j < lib.size(); ++j)
        if (fit.rates[static_cast<size_t>(j)] > 0.0) fit.active_reactions.push_back(j);
    fit.model = assemble_polynomial(lib, fit.rates);
    fit.residual_norm = sol.residual_norm;
    fit.diagnostics.push_back(std::move(sol));
    detail::attach_mse(fit, ts);
    return fit;
}

// Re-fit with the given reactions removed from the candidate set. Ids index
// the original library, so reports from the full and pruned fits line up.
inline FitResult prune_and_refit(const TimeSeries& ts, const ReactionLibrary& lib,
                                 const std::vector<int>& excluded_ids, int smooth_window = 1) {
    if (excluded_ids.empty()) throw invalid_input_error("no reactions to exclude");
    return fit_coupled(ts, lib, excluded_ids, smooth_window);
}

// Fits each component independently on a shared monomial dictionary with the
// requested linear solver. Coefficients may take either sign.
inline FitResult fit_decoupled(const TimeSeries& ts, const std::vector<Monomial>& monomials,
                               SolverKind solver, const SolverOptions& options = {},
                               int smooth_window = 1) {
    validate_series(ts, 3);
    const TimeSeries data = smooth_window > 1 ? smooth_series(ts, smooth_window) : ts;
    DesignMatrix dm = decoupled_design_matrix(data, monomials);
    DerivativeEstimate der = finite_difference(data);

    FitResult fit;
    fit.mode = FitMode::decoupled;
    fit.monomials = monomials;
    fit.coefficients.resize(static_cast<int>(monomials.size()), ts.dimension());
    fit.model = PolynomialODE(ts.dimension());

    double residual2 = 0.0;
    for (int c = 0; c < ts.dimension(); ++c) {
        RegressionProblem p;
        p.A = dm.entries;
        p.b = der.values.col(c);
        SolverResult sol = solve(p, solver, options);
        fit.coefficients.col(c) = sol.x;
        for (size_t m = 0; m < monomials.size(); ++m)
            if (sol.x(static_cast<int>(m)) != 0.0)
                fit.model.add_term(c, monomials[m].exponents, sol.x(static_cast<int>(m)));
        residual2 += sol.residual_norm * sol.residual_norm;
        fit.diagnostics.push_back(std::move(sol));
    }
    fit.residual_norm = std::sqrt(residual2);
    detail::attach_mse(fit, ts);
    return fit;
}

} // namespace crnfit
