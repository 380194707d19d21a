#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "crnfit/errors.hpp"

namespace crnfit {

// Least-squares data: minimise ||A x - b||_2 (solvers add their own
// regularisation or constraints on top).
struct RegressionProblem {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;

    int rows() const { return static_cast<int>(A.rows()); }
    int cols() const { return static_cast<int>(A.cols()); }
};

struct SolverResult {
    Eigen::VectorXd x;
    double residual_norm = 0.0; // ||A x - b||_2 recomputed from the returned x
    int iterations = 0;
    bool converged = true;
    std::optional<double> condition_warning; // estimate, set when it exceeds 1e12
    std::string note;
};

namespace detail {

inline void validate_problem(const RegressionProblem& p) {
    if (p.rows() < 1 || p.cols() < 1)
        throw invalid_input_error("regression problem must have at least one row and column");
    if (p.b.size() != p.rows())
        throw invalid_input_error("right-hand side length does not match matrix rows");
}

inline void finalize(SolverResult& r, const RegressionProblem& p) {
    r.residual_norm = (p.A * r.x - p.b).norm();
}

// Cholesky solve of (A^T A + k I) x = A^T b that reports which column made
// the system singular. Pivot threshold is relative to the largest diagonal
// entry of the Gram matrix.
inline Eigen::VectorXd gram_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double k) {
    const int n = static_cast<int>(A.cols());
    Eigen::MatrixXd G = A.transpose() * A;
    if (k != 0.0) G.diagonal().array() += k;
    Eigen::VectorXd g = A.transpose() * b;
    const double maxdiag = G.diagonal().maxCoeff();
    if (!(maxdiag > 0.0))
        throw singular_error("normal equations are singular: column 0 has zero norm", 0);
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (int kk = 0; kk < n; ++kk) {
        double d = G(kk, kk);
        for (int j = 0; j < kk; ++j) d -= L(kk, j) * L(kk, j);
        if (d < 1e-12 * maxdiag)
            throw singular_error("normal equations are singular at column " + std::to_string(kk), kk);
        L(kk, kk) = std::sqrt(d);
        for (int i = kk + 1; i < n; ++i) {
            double s = G(i, kk);
            for (int j = 0; j < kk; ++j) s -= L(i, j) * L(kk, j);
            L(i, kk) = s / L(kk, kk);
        }
    }
    // forward then backward substitution
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        double s = g(i);
        for (int j = 0; j < i; ++j) s -= L(i, j) * y(j);
        y(i) = s / L(i, i);
    }
    Eigen::VectorXd x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = y(i);
        for (int j = i + 1; j < n; ++j) s -= L(j, i) * x(j);
        x(i) = s / L(i, i);
    }
    return x;
}

// max|R_ii| / min|R_ii| from a Householder QR; infinity when the smallest
// diagonal entry is zero.
inline double qr_diagonal_ratio(const Eigen::HouseholderQR<Eigen::MatrixXd>& qr, int cols) {
    Eigen::VectorXd diag = qr.matrixQR().diagonal().head(cols).cwiseAbs();
    double hi = diag.maxCoeff();
    double lo = diag.minCoeff();
    if (lo == 0.0) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

} // namespace detail

// Unregularised least squares via the normal equations.
inline SolverResult solve_normal_equations(const RegressionProblem& p) {
    detail::validate_problem(p);
    SolverResult r;
    r.x = detail::gram_solve(p.A, p.b, 0.0);
    r.iterations = 0;
    r.converged = true;
    detail::finalize(r, p);
    return r;
}

// Tikhonov-regularised least squares: (A^T A + k I) x = A^T b.
inline SolverResult solve_ridge(const RegressionProblem& p, double k) {
    detail::validate_problem(p);
    if (k < 0.0) throw invalid_input_error("ridge parameter must be nonnegative");
    SolverResult r;
    r.x = detail::gram_solve(p.A, p.b, k);
    r.iterations = 0;
    r.converged = true;
    detail::finalize(r, p);
    return r;
}

// Iterative least squares on the Golub-Kahan bidiagonalisation. Stops when
// either ||r|| <= tol*||b|| + tol*||A||*||x|| or ||A^T r|| <= tol*||A||*||r||;
// hitting the iteration cap clears the converged flag but the current iterate
// is still returned.
inline SolverResult solve_lsqr(const RegressionProblem& p, int max_iterations = -1,
                               double tolerance = 1e-10) {
    detail::validate_problem(p);
    if (tolerance <= 0.0) throw invalid_input_error("LSQR tolerance must be positive");
    if (max_iterations == -1) max_iterations = 2 * std::max(p.rows(), p.cols());
    if (max_iterations < 1) throw invalid_input_error("LSQR iteration cap must be at least 1");

    SolverResult res;
    res.x = Eigen::VectorXd::Zero(p.cols());

    const double bnorm = p.b.norm();
    if (bnorm == 0.0) {
        res.converged = true;
        detail::finalize(res, p);
        return res;
    }

    double beta = bnorm;
    Eigen::VectorXd u = p.b / beta;
    Eigen::VectorXd v = p.A.transpose() * u;
    double alpha = v.norm();
    if (alpha == 0.0) {
        res.converged = true;
        detail::finalize(res, p);
        return res;
    }
    v /= alpha;

    Eigen::VectorXd w = v;
    double phibar = beta;
    double rhobar = alpha;
    double anorm2 = alpha * alpha;

    res.converged = false;
    for (int it = 1; it <= max_iterations; ++it) {
        u = p.A * v - alpha * u;
        beta = u.norm();
        if (beta > 0.0) u /= beta;
        anorm2 += beta * beta;

        v = p.A.transpose() * u - beta * v;
        alpha = v.norm();
        if (alpha > 0.0) v /= alpha;
        anorm2 += alpha * alpha;

        const double rho = std::hypot(rhobar, beta);
        const double c = rhobar / rho;
        const double s = beta / rho;
        const double theta = s * alpha;
        rhobar = -c * alpha;
        const double phi = c * phibar;
        phibar = s * phibar;

        res.x += (phi / rho) * w;
        w = v - (theta / rho) * w;
        res.iterations = it;

        const double anorm = std::sqrt(anorm2);
        const double rnorm = phibar;                       // ||A x - b|| estimate
        const double arnorm = phibar * alpha * std::abs(c); // ||A^T r|| estimate
        if (rnorm <= tolerance * bnorm + tolerance * anorm * res.x.norm() ||
            arnorm <= tolerance * anorm * rnorm) {
            res.converged = true;
            break;
        }
    }
    detail::finalize(res, p);
    return res;
}

// L1-penalised least squares: minimise ||A x - b||^2 + lambda*||x||_1 by
// proximal gradient descent from x = 0 with fixed step 1/(2 L), where L is
// the largest eigenvalue of A^T A. One step therefore soft-thresholds at
// lambda/(2 L); for orthonormal A this is the exact solution after a single
// pass. Converges when the iterate stops moving in the sup norm.
inline SolverResult solve_lasso(const RegressionProblem& p, double lambda,
                                int max_iterations = 10000, double tolerance = 1e-12) {
    detail::validate_problem(p);
    if (lambda < 0.0) throw invalid_input_error("lasso penalty must be nonnegative");
    if (max_iterations < 1) throw invalid_input_error("lasso iteration cap must be at least 1");
    if (tolerance <= 0.0) throw invalid_input_error("lasso tolerance must be positive");

    const Eigen::MatrixXd G = p.A.transpose() * p.A;
    const Eigen::VectorXd Atb = p.A.transpose() * p.b;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
    const double L = std::max(0.0, eig.eigenvalues().maxCoeff());

    SolverResult res;
    res.x = Eigen::VectorXd::Zero(p.cols());
    if (L == 0.0) { // zero matrix: x = 0 minimises both terms
        res.converged = true;
        detail::finalize(res, p);
        return res;
    }

    const double step = 1.0 / (2.0 * L);
    const double thresh = lambda * step;
    auto soft = [&](double v) {
        if (v > thresh) return v - thresh;
        if (v < -thresh) return v + thresh;
        return 0.0;
    };

    res.converged = false;
    Eigen::VectorXd xnew(p.cols());
    for (int it = 1; it <= max_iterations; ++it) {
        Eigen::VectorXd grad = 2.0 * (G * res.x - Atb);
        double delta = 0.0;
        for (int i = 0; i < p.cols(); ++i) {
            xnew(i) = soft(res.x(i) - step * grad(i));
            delta = std::max(delta, std::abs(xnew(i) - res.x(i)));
        }
        res.x = xnew;
        res.iterations = it;
        if (delta < tolerance) {
            res.converged = true;
            break;
        }
    }
    detail::finalize(res, p);
    return res;
}

// Sequentially thresholded ridge regression. Each sweep refits on the active
// columns and zeroes any coefficient with |x_i| < threshold; stops when the
// active set is stable. Pruning everything is a valid (empty) model, flagged
// in the note rather than as an error. With threshold 0 nothing can be
// pruned, so the result is plain ridge.
inline SolverResult solve_stlsq(const RegressionProblem& p, double ridge_k, double threshold,
                                int max_sweeps = 10) {
    detail::validate_problem(p);
    if (ridge_k < 0.0) throw invalid_input_error("ridge parameter must be nonnegative");
    if (threshold < 0.0) throw invalid_input_error("threshold must be nonnegative");
    if (max_sweeps < 1) throw invalid_input_error("sweep limit must be >= 1");

    const int n = p.cols();
    std::vector<int> active(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) active[static_cast<size_t>(i)] = i;

    SolverResult res;
    res.x = Eigen::VectorXd::Zero(n);
    res.converged = false;
    while (res.iterations < max_sweeps) {
        Eigen::MatrixXd Asub(p.rows(), static_cast<int>(active.size()));
        for (size_t j = 0; j < active.size(); ++j)
            Asub.col(static_cast<int>(j)) = p.A.col(active[j]);
        Eigen::VectorXd z = detail::gram_solve(Asub, p.b, ridge_k);
        res.x.setZero();
        for (size_t j = 0; j < active.size(); ++j) res.x(active[j]) = z(static_cast<int>(j));
        ++res.iterations;

        std::vector<int> keep;
        for (int i : active)
            if (std::abs(res.x(i)) >= threshold) keep.push_back(i);
        if (keep.size() == active.size()) {
            res.converged = true;
            break;
        }
        for (int i : active) {
            if (std::abs(res.x(i)) < threshold) res.x(i) = 0.0;
        }
        active = std::move(keep);
        if (active.empty()) {
            res.x.setZero();
            res.converged = true;
            res.note = "all coefficients pruned";
            break;
        }
    }
    if (!res.converged) {
        // sweep budget exhausted: enforce the threshold on the last refit so
        // every surviving coefficient still honours it
        for (int i = 0; i < n; ++i)
            if (std::abs(res.x(i)) < threshold) res.x(i) = 0.0;
        res.note = "sweep limit reached before the active set stabilised";
    }
    detail::finalize(res, p);
    return res;
}

// Nonnegative least squares by the Lawson-Hanson active-set method. Inactive
// coefficients are exact zeros. A coordinate enters the passive set when its
// dual exceeds 1e-12*||A^T b||_inf (ties broken by smallest index); the
// iteration cap (default 3 * columns) counts insertions and clears the
// converged flag when exceeded. Condition warnings use the R-diagonal ratio
// of the passive-column QR factorisations, threshold 1e12.
inline SolverResult solve_nnls(const RegressionProblem& p, int max_iterations = -1) {
    detail::validate_problem(p);
    const int n = p.cols();
    if (max_iterations == -1) max_iterations = 3 * n;
    if (max_iterations < 1) throw invalid_input_error("NNLS iteration cap must be at least 1");

    SolverResult res;
    res.x = Eigen::VectorXd::Zero(n);
    res.converged = true;

    const Eigen::VectorXd Atb = p.A.transpose() * p.b;
    const double entry_tol = 1e-12 * Atb.cwiseAbs().maxCoeff();

    std::vector<char> passive(static_cast<size_t>(n), 0);
    std::vector<int> pidx;
    double worst_ratio = 0.0;

    auto solve_passive = [&]() -> Eigen::VectorXd {
        Eigen::MatrixXd Ap(p.rows(), static_cast<int>(pidx.size()));
        for (size_t j = 0; j < pidx.size(); ++j) Ap.col(static_cast<int>(j)) = p.A.col(pidx[j]);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(Ap);
        worst_ratio = std::max(worst_ratio, detail::qr_diagonal_ratio(qr, static_cast<int>(pidx.size())));
        return qr.solve(p.b);
    };

    while (true) {
        Eigen::VectorXd w = Atb - p.A.transpose() * (p.A * res.x);
        int t = -1;
        double best = entry_tol;
        for (int i = 0; i < n; ++i) {
            if (passive[static_cast<size_t>(i)]) continue;
            if (w(i) > best) { // strict: ties keep the smallest index
                best = w(i);
                t = i;
            }
        }
        if (t < 0) break; // KKT satisfied
        if (res.iterations >= max_iterations) {
            res.converged = false;
            res.note = "iteration cap reached before optimality";
            break;
        }
        ++res.iterations;
        passive[static_cast<size_t>(t)] = 1;
        pidx.push_back(t);
        std::sort(pidx.begin(), pidx.end());

        Eigen::VectorXd z = solve_passive();
        while (true) {
            bool all_positive = true;
            for (int j = 0; j < static_cast<int>(pidx.size()); ++j)
                if (z(j) <= 0.0) { all_positive = false; break; }
            if (all_positive) break;

            // largest feasible step toward z along the segment from x
            const double inf = std::numeric_limits<double>::infinity();
            std::vector<double> step(pidx.size(), inf);
            double alpha = inf;
            for (size_t j = 0; j < pidx.size(); ++j) {
                if (z(static_cast<int>(j)) > 0.0) continue;
                double xi = res.x(pidx[j]);
                double denom = xi - z(static_cast<int>(j));
                step[j] = denom > 0.0 ? xi / denom : 0.0;
                alpha = std::min(alpha, step[j]);
            }
            for (size_t j = 0; j < pidx.size(); ++j)
                res.x(pidx[j]) += alpha * (z(static_cast<int>(j)) - res.x(pidx[j]));
            // drop the step-limiting coordinates (and any that landed at or
            // below zero) with exact zeros
            std::vector<int> still;
            for (size_t j = 0; j < pidx.size(); ++j) {
                int i = pidx[j];
                if (step[j] <= alpha || res.x(i) <= 0.0) {
                    res.x(i) = 0.0;
                    passive[static_cast<size_t>(i)] = 0;
                } else {
                    still.push_back(i);
                }
            }
            pidx = std::move(still);
            if (pidx.empty()) break;
            z = solve_passive();
        }
        for (int i = 0; i < n; ++i)
            if (!passive[static_cast<size_t>(i)]) res.x(i) = 0.0;
        for (int j = 0; j < static_cast<int>(pidx.size()); ++j)
            res.x(pidx[static_cast<size_t>(j)]) = z(j);
    }

    if (worst_ratio > 1e12) res.condition_warning = worst_ratio;
    detail::finalize(res, p);
    return res;
}

// ------------------------------------------------------------ dispatch

enum class SolverKind { normal_equations, ridge, lsqr, lasso, stlsq, nnls };

struct SolverOptions {
    double ridge_k = 0.0;
    double lambda = 0.0;
    double threshold = 0.0;
    int max_iterations = 0; // 0 keeps each solver's default
    double tolerance = 0.0; // 0 keeps each solver's default
    int max_sweeps = 10;
};

inline SolverKind solver_kind_from_name(const std::string& name) {
    if (name == "lsq") return SolverKind::normal_equations;
    if (name == "ridge") return SolverKind::ridge;
    if (name == "lsqr") return SolverKind::lsqr;
    if (name == "lasso") return SolverKind::lasso;
    if (name == "stlsq") return SolverKind::stlsq;
    if (name == "nnls") return SolverKind::nnls;
    throw invalid_input_error("unknown solver '" + name +
                              "' (expected lsq, ridge, lsqr, lasso, stlsq, or nnls)");
}

inline const char* solver_name(SolverKind kind) {
    switch (kind) {
        case SolverKind::normal_equations: return "lsq";
        case SolverKind::ridge: return "ridge";
        case SolverKind::lsqr: return "lsqr";
        case SolverKind::lasso: return "lasso";
        case SolverKind::stlsq: return "stlsq";
        case SolverKind::nnls: return "nnls";
    }
    return "?";
}

inline SolverResult solve(const RegressionProblem& p, SolverKind kind,
                          const SolverOptions& opt = {}) {
    switch (kind) {
        case SolverKind::normal_equations:
            return solve_normal_equations(p);
        case SolverKind::ridge:
            return solve_ridge(p, opt.ridge_k);
        case SolverKind::lsqr:
            return solve_lsqr(p, opt.max_iterations != 0 ? opt.max_iterations : -1,
                              opt.tolerance > 0 ? opt.tolerance : 1e-10);
        case SolverKind::lasso:
            return solve_lasso(p, opt.lambda, opt.max_iterations != 0 ? opt.max_iterations : 10000,
                               opt.tolerance > 0 ? opt.tolerance : 1e-12);
        case SolverKind::stlsq:
            return solve_stlsq(p, opt.ridge_k, opt.threshold, opt.max_sweeps);
        case SolverKind::nnls:
            return solve_nnls(p, opt.max_iterations != 0 ? opt.max_iterations : -1);
    }
    throw invalid_input_error("unknown solver kind");
}

} // namespace crnfit
