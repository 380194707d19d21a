#pragma once

#include <Eigen/Dense>
#include <vector>

#include "crnfit/errors.hpp"

namespace crnfit {

// Uniformly sampled multivariate series: row n holds the state at t0 + n*h.
struct TimeSeries {
    double t0 = 0.0;
    double h = 0.0;
    Eigen::MatrixXd values; // points x dimension

    int points() const { return static_cast<int>(values.rows()); }
    int dimension() const { return static_cast<int>(values.cols()); }
    double time(int n) const { return t0 + h * n; }
};

inline void validate_series(const TimeSeries& ts, int min_points = 1) {
    if (!(ts.h > 0.0)) throw invalid_input_error("time series step must be positive");
    if (ts.points() < min_points)
        throw invalid_input_error("time series has fewer than " + std::to_string(min_points) + " points");
    if (ts.dimension() < 1) throw invalid_input_error("time series has no components");
}

// Runs on a shared time grid.
struct Ensemble {
    std::vector<TimeSeries> runs;
};

inline TimeSeries ensemble_mean(const Ensemble& ensemble) {
    if (ensemble.runs.empty()) throw invalid_input_error("ensemble is empty");
    const TimeSeries& first = ensemble.runs.front();
    validate_series(first);
    TimeSeries mean;
    mean.t0 = first.t0;
    mean.h = first.h;
    mean.values = Eigen::MatrixXd::Zero(first.points(), first.dimension());
    for (const TimeSeries& run : ensemble.runs) {
        if (run.t0 != first.t0 || run.h != first.h || run.points() != first.points() ||
            run.dimension() != first.dimension())
            throw invalid_input_error("ensemble runs are not on a common grid");
        mean.values += run.values;
    }
    mean.values /= static_cast<double>(ensemble.runs.size());
    return mean;
}

// Second-order accurate time derivatives on the sample grid.
struct DerivativeEstimate {
    Eigen::MatrixXd values; // same shape as the source series
};

// Central differences inside, one-sided three-point stencils at both ends;
// exact for quadratics. Needs at least 3 points.
inline DerivativeEstimate finite_difference(const TimeSeries& ts) {
    validate_series(ts, 3);
    const int n = ts.points();
    const int d = ts.dimension();
    DerivativeEstimate est;
    est.values.resize(n, d);
    const double inv2h = 1.0 / (2.0 * ts.h);
    est.values.row(0) =
        (-3.0 * ts.values.row(0) + 4.0 * ts.values.row(1) - ts.values.row(2)) * inv2h;
    for (int i = 1; i + 1 < n; ++i)
        est.values.row(i) = (ts.values.row(i + 1) - ts.values.row(i - 1)) * inv2h;
    est.values.row(n - 1) =
        (3.0 * ts.values.row(n - 1) - 4.0 * ts.values.row(n - 2) + ts.values.row(n - 3)) * inv2h;
    return est;
}

// Keeps rows 0, stride, 2*stride, ... and scales the step accordingly. The
// result must still have at least 3 points.
inline TimeSeries subsample(const TimeSeries& ts, int stride) {
    validate_series(ts);
    if (stride < 1) throw invalid_input_error("subsample stride must be >= 1");
    const int n = 1 + (ts.points() - 1) / stride;
    if (n < 3) throw invalid_input_error("subsampled series would have fewer than 3 points");
    TimeSeries out;
    out.t0 = ts.t0;
    out.h = ts.h * stride;
    out.values.resize(n, ts.dimension());
    for (int i = 0; i < n; ++i) out.values.row(i) = ts.values.row(i * stride);
    return out;
}

} // namespace crnfit
