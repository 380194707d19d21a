#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "crnfit/errors.hpp"

namespace crnfit {

// Product of species powers. Exponents are per-species, total degree 1 or 2
// everywhere this library uses them.
struct Monomial {
    std::vector<int> exponents;

    int degree() const {
        int s = 0;
        for (int e : exponents) s += e;
        return s;
    }

    double eval(const Eigen::VectorXd& y) const {
        double v = 1.0;
        for (size_t i = 0; i < exponents.size(); ++i) {
            for (int k = 0; k < exponents[i]; ++k) v *= y[static_cast<int>(i)];
        }
        return v;
    }

    bool operator==(const Monomial& o) const { return exponents == o.exponents; }
};

// Default species names: "x" for d=1, "x","z" for d=2, else "x1".."xd".
inline std::vector<std::string> default_species_names(int dimension) {
    if (dimension == 1) return {"x"};
    if (dimension == 2) return {"x", "z"};
    std::vector<std::string> names;
    names.reserve(static_cast<size_t>(dimension));
    for (int i = 0; i < dimension; ++i) names.push_back("x" + std::to_string(i + 1));
    return names;
}

// Canonical quadratic basis: x_i then x_i^2 for each species, then the cross
// terms x_i*x_j for i < j in lexicographic order. For d=2 this is
// (x, x^2, z, z^2, x*z).
inline std::vector<Monomial> canonical_quadratic_basis(int dimension) {
    if (dimension < 1) throw invalid_input_error("basis dimension must be >= 1");
    std::vector<Monomial> basis;
    for (int i = 0; i < dimension; ++i) {
        Monomial lin{std::vector<int>(static_cast<size_t>(dimension), 0)};
        lin.exponents[static_cast<size_t>(i)] = 1;
        basis.push_back(lin);
        Monomial sq{std::vector<int>(static_cast<size_t>(dimension), 0)};
        sq.exponents[static_cast<size_t>(i)] = 2;
        basis.push_back(sq);
    }
    for (int i = 0; i < dimension; ++i) {
        for (int j = i + 1; j < dimension; ++j) {
            Monomial cross{std::vector<int>(static_cast<size_t>(dimension), 0)};
            cross.exponents[static_cast<size_t>(i)] = 1;
            cross.exponents[static_cast<size_t>(j)] = 1;
            basis.push_back(cross);
        }
    }
    return basis;
}

// Polynomial vector field y' = f(y) with one quadratic polynomial per
// component, stored densely on the canonical basis (one entry per distinct
// monomial).
struct PolynomialODE {
    int dimension = 0;
    std::vector<Monomial> basis;
    std::vector<std::vector<double>> coefficients; // [component][basis index]
    std::vector<std::string> species_names;

    PolynomialODE() = default;

    explicit PolynomialODE(int dim)
        : dimension(dim),
          basis(canonical_quadratic_basis(dim)),
          coefficients(static_cast<size_t>(dim),
                       std::vector<double>(canonical_quadratic_basis(dim).size(), 0.0)),
          species_names(default_species_names(dim)) {}

    // Index of an exponent vector in the canonical basis. Throws if the
    // monomial has total degree outside {1, 2} or the wrong length.
    int basis_index(const std::vector<int>& exponents) const {
        if (static_cast<int>(exponents.size()) != dimension)
            throw invalid_input_error("monomial exponent vector has wrong length");
        for (size_t i = 0; i < basis.size(); ++i) {
            if (basis[i].exponents == exponents) return static_cast<int>(i);
        }
        throw invalid_input_error("monomial is not in the quadratic basis (degree must be 1 or 2)");
    }

    void add_term(int component, const std::vector<int>& exponents, double coeff) {
        if (component < 0 || component >= dimension)
            throw invalid_input_error("component index out of range");
        coefficients[static_cast<size_t>(component)][static_cast<size_t>(basis_index(exponents))] += coeff;
    }

    double coefficient(int component, const std::vector<int>& exponents) const {
        if (component < 0 || component >= dimension)
            throw invalid_input_error("component index out of range");
        return coefficients[static_cast<size_t>(component)][static_cast<size_t>(basis_index(exponents))];
    }

    Eigen::VectorXd eval(const Eigen::VectorXd& y) const {
        if (y.size() != dimension)
            throw invalid_input_error("state vector has wrong dimension");
        Eigen::VectorXd out = Eigen::VectorXd::Zero(dimension);
        std::vector<double> mono(basis.size());
        for (size_t m = 0; m < basis.size(); ++m) mono[m] = basis[m].eval(y);
        for (int c = 0; c < dimension; ++c) {
            double acc = 0.0;
            const auto& row = coefficients[static_cast<size_t>(c)];
            for (size_t m = 0; m < basis.size(); ++m) acc += row[m] * mono[m];
            out[c] = acc;
        }
        return out;
    }
};

// "x*z", "x^2", "z" with the polynomial's species names.
inline std::string render_monomial(const Monomial& mono, const std::vector<std::string>& names) {
    std::string out;
    for (size_t i = 0; i < mono.exponents.size(); ++i) {
        if (mono.exponents[i] == 0) continue;
        if (!out.empty()) out += "*";
        out += names[i];
        if (mono.exponents[i] > 1) out += "^" + std::to_string(mono.exponents[i]);
    }
    return out.empty() ? "1" : out;
}

// One line per component, e.g. "x' = 2.5877*x - 2.6283*x^2".
inline std::vector<std::string> render_ode(const PolynomialODE& ode) {
    std::vector<std::string> lines;
    char buf[64];
    for (int c = 0; c < ode.dimension; ++c) {
        std::string rhs;
        const auto& row = ode.coefficients[static_cast<size_t>(c)];
        for (size_t m = 0; m < ode.basis.size(); ++m) {
            if (row[m] == 0.0) continue;
            double mag = std::abs(row[m]);
            std::snprintf(buf, sizeof(buf), "%.9g", mag);
            if (rhs.empty()) {
                rhs += (row[m] < 0 ? "-" : "");
            } else {
                rhs += (row[m] < 0 ? " - " : " + ");
            }
            rhs += buf;
            rhs += "*" + render_monomial(ode.basis[m], ode.species_names);
        }
        if (rhs.empty()) rhs = "0";
        lines.push_back(ode.species_names[static_cast<size_t>(c)] + "' = " + rhs);
    }
    return lines;
}

} // namespace crnfit
