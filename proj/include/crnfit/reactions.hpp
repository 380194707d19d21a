#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "crnfit/errors.hpp"
#include "crnfit/polynomial_ode.hpp"

namespace crnfit {

struct Species {
    int index = 0;
    std::string name;
};

// A reaction side with at most two molecules in total. Species indices are
// stored sorted, repeated according to multiplicity.
struct Complex {
    std::vector<int> species;

    int count(int species_index) const {
        int c = 0;
        for (int s : species) c += (s == species_index) ? 1 : 0;
        return c;
    }
    int total() const { return static_cast<int>(species.size()); }
    bool operator==(const Complex& o) const { return species == o.species; }
};

// Mass-action propensity c * prod_i y_i^e_i with exact rational coefficient.
// The coefficient is 1 except for homodimer reactants, where it is 1/2.
struct PropensityMonomial {
    long long coeff_num = 1;
    long long coeff_den = 1;
    std::vector<int> exponents;

    double coefficient() const {
        return static_cast<double>(coeff_num) / static_cast<double>(coeff_den);
    }
    double eval(const Eigen::VectorXd& y) const {
        double v = coefficient();
        for (size_t i = 0; i < exponents.size(); ++i) {
            for (int k = 0; k < exponents[i]; ++k) v *= y[static_cast<int>(i)];
        }
        return v;
    }
};

struct Reaction {
    int id = 0; // position in the library, 0-based
    Complex reactants;
    Complex products;
    std::vector<int> stoichiometry; // products - reactants, per species
    PropensityMonomial propensity;
};

struct ReactionLibrary {
    std::vector<Species> species;
    std::vector<Reaction> reactions;

    int dimension() const { return static_cast<int>(species.size()); }
    int size() const { return static_cast<int>(reactions.size()); }
};

// Nonnegative rate constant per library reaction.
using RateVector = std::vector<double>;

inline std::vector<std::string> reaction_display_names(int dimension) {
    if (dimension == 1) return {"X"};
    if (dimension == 2) return {"X", "Z"};
    std::vector<std::string> names;
    for (int i = 0; i < dimension; ++i) names.push_back("X" + std::to_string(i + 1));
    return names;
}

namespace detail {

inline Reaction make_reaction(int dimension, const Complex& reactants, const Complex& products) {
    Reaction r;
    r.reactants = reactants;
    r.products = products;
    r.stoichiometry.assign(static_cast<size_t>(dimension), 0);
    for (int s : products.species) r.stoichiometry[static_cast<size_t>(s)] += 1;
    for (int s : reactants.species) r.stoichiometry[static_cast<size_t>(s)] -= 1;
    r.propensity.exponents.assign(static_cast<size_t>(dimension), 0);
    for (int s : reactants.species) r.propensity.exponents[static_cast<size_t>(s)] += 1;
    bool homodimer = reactants.total() == 2 && reactants.species[0] == reactants.species[1];
    r.propensity.coeff_num = 1;
    r.propensity.coeff_den = homodimer ? 2 : 1;
    return r;
}

} // namespace detail

// All distinct reactions with at most two reactant and two product molecules
// whose propensity depends on the reactants:
//   unimolecular X_i -> 0, X_i -> X_j (j != i), X_i -> X_i + X_j;
//   homodimer    X_i + X_i -> 0, X_i + X_i -> X_j;
//   heterodimer  X_i + X_j -> 0, X_i + X_j -> X_i, X_i + X_j -> X_j (i < j).
// Sizes: 2d^2 unimolecular, d(d+1) homodimer, 3d(d-1)/2 heterodimer; 17 at
// d=2. Within each family, reactions are ordered by reactant species index;
// product variants list the self-product first, then the remaining species in
// ascending order.
inline ReactionLibrary enumerate_library(int dimension) {
    if (dimension < 1) throw invalid_input_error("library dimension must be >= 1");
    ReactionLibrary lib;
    auto names = default_species_names(dimension);
    for (int i = 0; i < dimension; ++i) lib.species.push_back({i, names[static_cast<size_t>(i)]});

    auto add = [&](const Complex& reactants, const Complex& products) {
        Reaction r = detail::make_reaction(dimension, reactants, products);
        r.id = static_cast<int>(lib.reactions.size());
        lib.reactions.push_back(std::move(r));
    };
    // Product orderings visit the reactant species first, then the others in
    // ascending index order.
    auto partners = [&](int i) {
        std::vector<int> order{i};
        for (int j = 0; j < dimension; ++j)
            if (j != i) order.push_back(j);
        return order;
    };

    // Unimolecular: decay, then conversions, then catalytic productions.
    for (int i = 0; i < dimension; ++i) add({{i}}, {{}});
    for (int i = 0; i < dimension; ++i)
        for (int j = 0; j < dimension; ++j)
            if (j != i) add({{i}}, {{j}});
    for (int i = 0; i < dimension; ++i)
        for (int j : partners(i)) add({{i}}, {{std::min(i, j), std::max(i, j)}});

    // Homodimer: annihilation, then conversions (self-product = dimerisation
    // decay X+X -> X first).
    for (int i = 0; i < dimension; ++i) add({{i, i}}, {{}});
    for (int i = 0; i < dimension; ++i)
        for (int j : partners(i)) add({{i, i}}, {{j}});

    // Heterodimer: annihilation, then absorption into either partner.
    for (int i = 0; i < dimension; ++i)
        for (int j = i + 1; j < dimension; ++j) add({{i, j}}, {{}});
    for (int i = 0; i < dimension; ++i)
        for (int j = i + 1; j < dimension; ++j) {
            add({{i, j}}, {{i}});
            add({{i, j}}, {{j}});
        }
    return lib;
}

inline double propensity_eval(const Reaction& reaction, const Eigen::VectorXd& state) {
    if (state.size() != static_cast<int>(reaction.propensity.exponents.size()))
        throw invalid_input_error("state vector has wrong dimension for reaction propensity");
    return reaction.propensity.eval(state);
}

// Mean-field vector field of the network: x_i' = sum_j K_j * nu_j[i] * a_j(x).
inline PolynomialODE assemble_polynomial(const ReactionLibrary& lib, const RateVector& rates) {
    if (static_cast<int>(rates.size()) != lib.size())
        throw invalid_input_error("rate vector length does not match library size");
    for (size_t j = 0; j < rates.size(); ++j) {
        if (!(rates[j] >= 0.0))
            throw invalid_input_error("rate constant " + std::to_string(j) + " is negative");
    }
    PolynomialODE ode(lib.dimension());
    for (const Reaction& r : lib.reactions) {
        double k = rates[static_cast<size_t>(r.id)];
        if (k == 0.0) continue;
        double c = k * r.propensity.coefficient();
        for (int i = 0; i < lib.dimension(); ++i) {
            int nu = r.stoichiometry[static_cast<size_t>(i)];
            if (nu != 0) ode.add_term(i, r.propensity.exponents, c * nu);
        }
    }
    return ode;
}

// "X + X -> Z"; an empty side renders as "0".
inline std::string render_reaction(const Reaction& reaction) {
    auto names = reaction_display_names(static_cast<int>(reaction.propensity.exponents.size()));
    auto side = [&](const Complex& c) -> std::string {
        if (c.species.empty()) return "0";
        std::string out;
        for (size_t i = 0; i < c.species.size(); ++i) {
            if (i > 0) out += " + ";
            out += names[static_cast<size_t>(c.species[i])];
        }
        return out;
    };
    return side(reaction.reactants) + " -> " + side(reaction.products);
}

} // namespace crnfit
