#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "crnfit/errors.hpp"
#include "crnfit/reactions.hpp"
#include "crnfit/rng.hpp"
#include "crnfit/timeseries.hpp"

namespace crnfit {

// States are recorded as densities (count/volume) on the uniform grid
// t0 + k*h, k = 0..n_points-1.
struct SsaConfig {
    std::vector<long long> initial_counts;
    double volume = 1.0;
    double t_end = 0.0;
    double t0 = 0.0;
    double h = 0.0;
    int n_points = 0;
    std::uint64_t seed = 0;
};

namespace detail {

// Count-based mass-action propensity. The volume scaling makes concentration
// means of the jump process track the rate-equation ODE of the same library:
// unimolecular k*x, homodimer k*x*(x-1)/(2V), heterodimer k*x*y/V.
inline double count_propensity(const Reaction& r, const std::vector<long long>& counts,
                               double rate, double volume) {
    const auto& re = r.reactants.species;
    if (re.empty()) return rate;
    if (re.size() == 1) return rate * static_cast<double>(counts[static_cast<size_t>(re[0])]);
    if (re[0] == re[1]) {
        double x = static_cast<double>(counts[static_cast<size_t>(re[0])]);
        return rate * x * (x - 1.0) / (2.0 * volume);
    }
    double x = static_cast<double>(counts[static_cast<size_t>(re[0])]);
    double y = static_cast<double>(counts[static_cast<size_t>(re[1])]);
    return rate * x * y / volume;
}

} // namespace detail

// Exact stochastic simulation of the reaction network (direct method): draw
// the waiting time from the total propensity, pick a reaction proportionally,
// apply its stoichiometry. Densities (count/volume) are recorded on the
// uniform grid by holding the last value; once every propensity is zero the
// state is frozen onto the remaining grid points. Species counts never go
// negative because any reaction that would consume an absent molecule has
// zero propensity.
inline TimeSeries gillespie(const ReactionLibrary& lib, const RateVector& rates,
                            const SsaConfig& cfg) {
    const int d = lib.dimension();
    if (static_cast<int>(rates.size()) != lib.size())
        throw invalid_input_error("rate vector length does not match library size");
    for (double k : rates)
        if (!(k >= 0.0)) throw invalid_input_error("rate constants must be nonnegative");
    if (static_cast<int>(cfg.initial_counts.size()) != d)
        throw invalid_input_error("initial counts have wrong dimension");
    for (long long c : cfg.initial_counts)
        if (c < 0) throw invalid_input_error("initial counts must be nonnegative");
    if (!(cfg.volume > 0.0)) throw invalid_input_error("volume must be positive");
    if (!(cfg.h > 0.0)) throw invalid_input_error("recording step must be positive");
    if (!(cfg.t_end > 0.0)) throw invalid_input_error("horizon must be positive");
    if (!(cfg.t0 >= 0.0)) throw invalid_input_error("recording start must be nonnegative");
    if (cfg.n_points < 1) throw invalid_input_error("recording grid needs at least one point");
    if (cfg.t0 + cfg.h * static_cast<double>(cfg.n_points - 1) > cfg.t_end + cfg.h)
        throw invalid_input_error("recording grid extends past the simulation horizon");

    const long long npoints = cfg.n_points;
    TimeSeries ts;
    ts.t0 = cfg.t0;
    ts.h = cfg.h;
    ts.values.resize(static_cast<int>(npoints), d);

    std::mt19937_64 gen(cfg.seed);
    std::vector<long long> counts = cfg.initial_counts;
    std::vector<double> prop(static_cast<size_t>(lib.size()), 0.0);
    double t = 0.0;
    long long next_record = 0;

    auto record_point = [&]() {
        for (int c = 0; c < d; ++c)
            ts.values(static_cast<int>(next_record), c) =
                static_cast<double>(counts[static_cast<size_t>(c)]) / cfg.volume;
        ++next_record;
    };
    auto record_until = [&](double up_to) {
        while (next_record < npoints &&
               ts.t0 + ts.h * static_cast<double>(next_record) <= up_to)
            record_point();
    };
    auto record_rest = [&]() {
        while (next_record < npoints) record_point();
    };

    while (next_record < npoints) {
        double total = 0.0;
        for (int j = 0; j < lib.size(); ++j) {
            prop[static_cast<size_t>(j)] = detail::count_propensity(
                lib.reactions[static_cast<size_t>(j)], counts, rates[static_cast<size_t>(j)],
                cfg.volume);
            total += prop[static_cast<size_t>(j)];
        }
        if (total <= 0.0) {
            record_rest(); // absorbed: state holds forever
            break;
        }
        double dt = exponential_sample(gen, total);
        if (t + dt > cfg.t_end) {
            record_rest(); // state holds through the horizon
            break;
        }
        record_until(t + dt);
        t += dt;

        double u = rng01(gen) * total;
        int chosen = lib.size() - 1;
        double acc = 0.0;
        for (int j = 0; j < lib.size(); ++j) {
            acc += prop[static_cast<size_t>(j)];
            if (u < acc) {
                chosen = j;
                break;
            }
        }
        const Reaction& r = lib.reactions[static_cast<size_t>(chosen)];
        for (int c = 0; c < d; ++c) counts[static_cast<size_t>(c)] += r.stoichiometry[static_cast<size_t>(c)];
    }
    return ts;
}

} // namespace crnfit
