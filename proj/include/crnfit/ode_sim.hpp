#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "crnfit/errors.hpp"
#include "crnfit/polynomial_ode.hpp"
#include "crnfit/timeseries.hpp"

namespace crnfit {

inline Eigen::VectorXd eval_rhs(const PolynomialODE& ode, const Eigen::VectorXd& y) {
    return ode.eval(y);
}

struct IntegrationConfig {
    double t_end = 0.0;
    double h = 0.0;
    double blowup_bound = 1e6; // any |y_i| beyond this aborts the run
};

namespace detail {

inline Eigen::VectorXd rk4_step(const PolynomialODE& ode, const Eigen::VectorXd& y, double h) {
    Eigen::VectorXd k1 = ode.eval(y);
    Eigen::VectorXd k2 = ode.eval(y + 0.5 * h * k1);
    Eigen::VectorXd k3 = ode.eval(y + 0.5 * h * k2);
    Eigen::VectorXd k4 = ode.eval(y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace detail

// Classical fixed-step fourth-order Runge-Kutta on the uniform grid
// t0 + n*h. The step count is t_end/h rounded to the nearest integer. A state
// component exceeding the blow-up bound in magnitude aborts with the first
// offending time.
inline TimeSeries integrate_rk4(const PolynomialODE& ode, const Eigen::VectorXd& y0,
                                const IntegrationConfig& cfg, double t0 = 0.0) {
    if (y0.size() != ode.dimension) throw invalid_input_error("initial state has wrong dimension");
    if (!(cfg.h > 0.0)) throw invalid_input_error("integration step must be positive");
    if (!(cfg.t_end > 0.0)) throw invalid_input_error("integration horizon must be positive");
    if (cfg.h > cfg.t_end) throw invalid_input_error("integration step exceeds the horizon");
    const long long steps = std::max(1LL, std::llround(cfg.t_end / cfg.h));

    TimeSeries ts;
    ts.t0 = t0;
    ts.h = cfg.h;
    ts.values.resize(static_cast<int>(steps) + 1, ode.dimension);
    Eigen::VectorXd y = y0;
    ts.values.row(0) = y;
    for (long long n = 1; n <= steps; ++n) {
        y = detail::rk4_step(ode, y, cfg.h);
        double t = t0 + cfg.h * static_cast<double>(n);
        for (int c = 0; c < ode.dimension; ++c) {
            if (!std::isfinite(y[c]) || std::abs(y[c]) > cfg.blowup_bound)
                throw instability_error("trajectory blew up at t = " + std::to_string(t), t);
        }
        ts.values.row(static_cast<int>(n)) = y;
    }
    return ts;
}

// Integrates until ||f(y)||_inf < tolerance and returns that state. Reaching
// the horizon first raises an error carrying the final state.
inline Eigen::VectorXd find_equilibrium(const PolynomialODE& ode, const Eigen::VectorXd& y0,
                                        double horizon, double tolerance, double h = 0.01) {
    if (y0.size() != ode.dimension) throw invalid_input_error("initial state has wrong dimension");
    if (!(h > 0.0)) throw invalid_input_error("integration step must be positive");
    if (!(horizon > 0.0)) throw invalid_input_error("horizon must be positive");
    if (!(tolerance > 0.0)) throw invalid_input_error("tolerance must be positive");

    Eigen::VectorXd y = y0;
    const long long steps = std::max(1LL, std::llround(horizon / h));
    for (long long n = 0; n <= steps; ++n) {
        if (ode.eval(y).lpNorm<Eigen::Infinity>() < tolerance) return y;
        if (n == steps) break;
        y = detail::rk4_step(ode, y, h);
        double t = h * static_cast<double>(n + 1);
        for (int c = 0; c < ode.dimension; ++c) {
            if (!std::isfinite(y[c]) || std::abs(y[c]) > 1e6)
                throw instability_error("trajectory blew up at t = " + std::to_string(t), t);
        }
    }
    std::vector<double> state(y.data(), y.data() + y.size());
    throw no_equilibrium_error("no equilibrium within the horizon", std::move(state));
}

} // namespace crnfit
