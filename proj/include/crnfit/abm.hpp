#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "crnfit/errors.hpp"
#include "crnfit/rng.hpp"
#include "crnfit/timeseries.hpp"

namespace crnfit {

enum class CellKind : std::uint8_t { healthy, tumour };

// Structural parameters default to the standard scenario; behavioural rates
// default to zero and must come from a config file (validation rejects a
// config that was never filled in).
struct AbmConfig {
    int lattice_size = 100;
    double healthy_density = 0.324;
    double tumour_density = 0.001;
    double ecm_density = 0.1;
    double ecm_breakdown_prob = 0.5;

    double death_prob_healthy = 0.0; // per-step death probabilities
    double death_prob_tumour = 0.0;
    double movement_prob = 0.0;      // per-step chance of relocating
    double division_age = 0.0;       // age threshold before a division attempt
    double competition_rate = 0.0;   // tumour strength bonus and displacement chance
    double stickiness = 0.0;         // jump probability is 1/(1+stickiness)
    int jump_radius = 1;             // Chebyshev radius for long-range moves
    int max_healthy_divisions = 1;   // lifetime division cap per healthy cell

    double dt = 2.0 / 135.0;
    int steps = 1800;
    std::uint64_t seed = 0;
};

inline void validate_abm_config(const AbmConfig& cfg) {
    if (cfg.lattice_size < 3) throw invalid_input_error("lattice size must be at least 3");
    auto prob = [](double p, const char* what) {
        if (!(p >= 0.0 && p <= 1.0))
            throw invalid_input_error(std::string(what) + " must lie in [0, 1]");
    };
    prob(cfg.healthy_density, "healthy density");
    prob(cfg.tumour_density, "tumour density");
    prob(cfg.ecm_density, "ECM density");
    if (cfg.healthy_density + cfg.tumour_density + cfg.ecm_density > 1.0)
        throw invalid_input_error("initial densities exceed the lattice capacity");
    prob(cfg.ecm_breakdown_prob, "ECM breakdown probability");
    prob(cfg.death_prob_healthy, "healthy death probability");
    prob(cfg.death_prob_tumour, "tumour death probability");
    prob(cfg.movement_prob, "movement probability");
    if (!(cfg.division_age > 0.0)) throw invalid_input_error("division age must be positive");
    if (!(cfg.competition_rate >= 0.0)) throw invalid_input_error("competition rate must be nonnegative");
    if (!(cfg.stickiness >= 0.0)) throw invalid_input_error("stickiness must be nonnegative");
    if (cfg.jump_radius < 1) throw invalid_input_error("jump radius must be at least 1");
    if (cfg.max_healthy_divisions < 1)
        throw invalid_input_error("healthy division cap must be at least 1");
    if (!(cfg.dt > 0.0)) throw invalid_input_error("time step must be positive");
    if (cfg.steps < 0) throw invalid_input_error("step count must be nonnegative");
}

struct Cell {
    CellKind kind = CellKind::healthy;
    bool alive = false;
    std::int32_t division_count = 0;
    std::int32_t site = -1;
    double age = 0.0;
    double strength = 0.0;
};

// Site values: -1 empty, -2 ECM obstacle, otherwise an index into cells.
struct LatticeState {
    int L = 0;
    std::vector<std::int32_t> grid;
    std::vector<Cell> cells;
    std::vector<std::int32_t> free_slots;    // reusable dead slots
    std::vector<std::int32_t> pending_free;  // freed during the current sweep
    std::vector<std::uint8_t> fence;         // 1 = intact fence segment (boundary only)
    double time = 0.0;
    std::mt19937_64 rng;
    int live_healthy = 0;
    int live_tumour = 0;
    int obstacle_count = 0;
    int fence_intact = 0;

    int site_of(int row, int col) const { return row * L + col; }
    bool on_boundary(int site) const {
        int r = site / L, c = site % L;
        return r == 0 || c == 0 || r == L - 1 || c == L - 1;
    }
};

inline double tumour_density(const LatticeState& s) {
    return static_cast<double>(s.live_tumour) / (static_cast<double>(s.L) * s.L);
}
inline double healthy_density(const LatticeState& s) {
    return static_cast<double>(s.live_healthy) / (static_cast<double>(s.L) * s.L);
}

namespace detail {

inline std::int32_t abm_spawn(LatticeState& s, CellKind kind, int site, double age,
                              double strength) {
    std::int32_t slot;
    if (!s.free_slots.empty()) {
        slot = s.free_slots.back();
        s.free_slots.pop_back();
    } else {
        slot = static_cast<std::int32_t>(s.cells.size());
        s.cells.push_back({});
    }
    Cell& c = s.cells[static_cast<size_t>(slot)];
    c.kind = kind;
    c.alive = true;
    c.division_count = 0;
    c.site = site;
    c.age = age;
    c.strength = strength;
    s.grid[static_cast<size_t>(site)] = slot;
    (kind == CellKind::tumour ? s.live_tumour : s.live_healthy) += 1;
    return slot;
}

inline void abm_remove(LatticeState& s, std::int32_t slot) {
    Cell& c = s.cells[static_cast<size_t>(slot)];
    s.grid[static_cast<size_t>(c.site)] = -1;
    c.alive = false;
    (c.kind == CellKind::tumour ? s.live_tumour : s.live_healthy) -= 1;
    s.pending_free.push_back(slot);
}

} // namespace detail

// Populates the lattice by a single uniform shuffle of all sites: the first
// segments become obstacles, healthy cells, and tumour cells. Initial ages
// are uniform in [0, division_age) so divisions do not fire in lockstep. The
// whole boundary starts as intact fence.
inline LatticeState init_state(const AbmConfig& cfg) {
    validate_abm_config(cfg);
    LatticeState s;
    s.L = cfg.lattice_size;
    const long nsites = static_cast<long>(s.L) * s.L;
    s.grid.assign(static_cast<size_t>(nsites), -1);
    s.fence.assign(static_cast<size_t>(nsites), 0);
    s.rng.seed(cfg.seed);

    const long n_obstacle = std::lround(cfg.ecm_density * static_cast<double>(nsites));
    const long n_healthy = std::lround(cfg.healthy_density * static_cast<double>(nsites));
    long n_tumour = std::lround(cfg.tumour_density * static_cast<double>(nsites));
    if (n_tumour < 1) n_tumour = 1; // the scenario needs a seed tumour cell
    if (n_obstacle + n_healthy + n_tumour > nsites)
        throw invalid_input_error("rounded initial populations exceed the lattice");

    std::vector<std::int32_t> sites(static_cast<size_t>(nsites));
    for (long i = 0; i < nsites; ++i) sites[static_cast<size_t>(i)] = static_cast<std::int32_t>(i);
    shuffle_in_place(sites, s.rng);

    // an infinite division age means divisions never fire; start those runs
    // at age 0 rather than letting 0 * inf poison the ages
    auto draw_age = [&]() {
        double u = rng01(s.rng);
        return std::isfinite(cfg.division_age) ? u * cfg.division_age : 0.0;
    };
    long pos = 0;
    for (long i = 0; i < n_obstacle; ++i)
        s.grid[static_cast<size_t>(sites[static_cast<size_t>(pos++)])] = -2;
    s.obstacle_count = static_cast<int>(n_obstacle);
    for (long i = 0; i < n_healthy; ++i)
        detail::abm_spawn(s, CellKind::healthy, sites[static_cast<size_t>(pos++)], draw_age(),
                          1.0);
    for (long i = 0; i < n_tumour; ++i)
        detail::abm_spawn(s, CellKind::tumour, sites[static_cast<size_t>(pos++)], draw_age(),
                          1.0 + cfg.competition_rate);

    for (long i = 0; i < nsites; ++i) {
        if (s.on_boundary(static_cast<int>(i))) {
            s.fence[static_cast<size_t>(i)] = 1;
            ++s.fence_intact;
        }
    }
    return s;
}

// One sweep over the live cells in fresh random order. Each cell first risks
// death; a cell at or past its division age then attempts division (healthy
// cells only while under the lifetime cap): a daughter goes to a uniformly
// chosen empty Moore neighbour, or, failing that, a strictly weaker neighbour
// is displaced with probability min(1, competition_rate). A division attempt,
// successful or not, uses up the turn. Other cells may relocate: with
// probability 1/(1+stickiness) a jump to a uniform empty site within the jump
// radius, otherwise a local move. After the sweep, tumour cells sitting on
// intact fence break through with the breakdown probability and leave the
// lattice; broken segments stay broken. Finally every survivor ages by dt.
inline void step(LatticeState& s, const AbmConfig& cfg) {
    const int L = s.L;
    // reuse slots freed in earlier sweeps only, so a snapshot id never gets
    // recycled into a newborn within the same sweep
    s.free_slots.insert(s.free_slots.end(), s.pending_free.begin(), s.pending_free.end());
    s.pending_free.clear();

    std::vector<std::int32_t> order;
    order.reserve(s.cells.size());
    for (size_t i = 0; i < s.cells.size(); ++i)
        if (s.cells[i].alive) order.push_back(static_cast<std::int32_t>(i));
    shuffle_in_place(order, s.rng);

    const double jump_prob = 1.0 / (1.0 + cfg.stickiness);
    const double displace_prob = std::min(1.0, cfg.competition_rate);
    std::int32_t moore[8];
    std::int32_t weaker[8];
    std::vector<std::int32_t> empties; // jump candidates, reused across cells

    auto moore_neighbours = [&](int site, auto&& accept) {
        int r = site / L, c = site % L, n = 0;
        for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
                if (dr == 0 && dc == 0) continue;
                int rr = r + dr, cc = c + dc;
                if (rr < 0 || cc < 0 || rr >= L || cc >= L) continue;
                int ns = rr * L + cc;
                if (accept(ns)) moore[n++] = ns;
            }
        }
        return n;
    };

    for (std::int32_t slot : order) {
        Cell& cell = s.cells[static_cast<size_t>(slot)];
        if (!cell.alive) continue; // displaced or escaped earlier in the sweep

        const double death_p =
            cell.kind == CellKind::tumour ? cfg.death_prob_tumour : cfg.death_prob_healthy;
        if (rng01(s.rng) < death_p) {
            detail::abm_remove(s, slot);
            continue;
        }

        const bool may_divide =
            cell.age >= cfg.division_age &&
            (cell.kind == CellKind::tumour || cell.division_count < cfg.max_healthy_divisions);
        if (may_divide) {
            int n_empty = moore_neighbours(cell.site, [&](int ns) { return s.grid[static_cast<size_t>(ns)] == -1; });
            int target = -1;
            if (n_empty > 0) {
                target = moore[rng_below(s.rng, static_cast<std::uint64_t>(n_empty))];
            } else {
                int n_weak = 0;
                {
                    int r = cell.site / L, c = cell.site % L;
                    for (int dr = -1; dr <= 1; ++dr) {
                        for (int dc = -1; dc <= 1; ++dc) {
                            if (dr == 0 && dc == 0) continue;
                            int rr = r + dr, cc = c + dc;
                            if (rr < 0 || cc < 0 || rr >= L || cc >= L) continue;
                            std::int32_t occ = s.grid[static_cast<size_t>(rr * L + cc)];
                            if (occ >= 0 && s.cells[static_cast<size_t>(occ)].strength < cell.strength)
                                weaker[n_weak++] = occ;
                        }
                    }
                }
                if (n_weak > 0) {
                    std::int32_t victim = weaker[rng_below(s.rng, static_cast<std::uint64_t>(n_weak))];
                    if (rng01(s.rng) < displace_prob) {
                        target = s.cells[static_cast<size_t>(victim)].site;
                        detail::abm_remove(s, victim);
                    }
                }
            }
            if (target >= 0) {
                detail::abm_spawn(s, cell.kind, target, 0.0, cell.strength);
                Cell& mother = s.cells[static_cast<size_t>(slot)]; // spawn may reallocate
                mother.division_count += 1;
                mother.age = 0.0;
            }
            continue; // the division attempt was this cell's action
        }

        if (rng01(s.rng) < cfg.movement_prob) {
            int dest = -1;
            if (rng01(s.rng) < jump_prob) {
                const int r = cell.site / L, c = cell.site % L, jr = cfg.jump_radius;
                empties.clear();
                for (int rr = std::max(0, r - jr); rr <= std::min(L - 1, r + jr); ++rr)
                    for (int cc = std::max(0, c - jr); cc <= std::min(L - 1, c + jr); ++cc) {
                        int ns = rr * L + cc;
                        if (ns != cell.site && s.grid[static_cast<size_t>(ns)] == -1)
                            empties.push_back(ns);
                    }
                if (!empties.empty())
                    dest = empties[rng_below(s.rng, empties.size())];
            } else {
                int n_empty = moore_neighbours(cell.site, [&](int ns) { return s.grid[static_cast<size_t>(ns)] == -1; });
                if (n_empty > 0) dest = moore[rng_below(s.rng, static_cast<std::uint64_t>(n_empty))];
            }
            if (dest >= 0) {
                s.grid[static_cast<size_t>(cell.site)] = -1;
                s.grid[static_cast<size_t>(dest)] = slot;
                cell.site = dest;
            }
        }
    }

    // fence phase: fixed scan order keeps runs reproducible
    const long nsites = static_cast<long>(L) * L;
    for (long site = 0; site < nsites; ++site) {
        if (!s.fence[static_cast<size_t>(site)]) continue;
        std::int32_t occ = s.grid[static_cast<size_t>(site)];
        if (occ < 0 || s.cells[static_cast<size_t>(occ)].kind != CellKind::tumour) continue;
        if (rng01(s.rng) < cfg.ecm_breakdown_prob) {
            s.fence[static_cast<size_t>(site)] = 0;
            --s.fence_intact;
            detail::abm_remove(s, occ); // the cell escapes through the breach
        }
    }

    for (Cell& c : s.cells)
        if (c.alive) c.age += cfg.dt;
    s.time += cfg.dt;
}

// Density trace (tumour, healthy) including the initial state: steps+1 rows
// on the grid t = n*dt.
inline TimeSeries run(const AbmConfig& cfg) {
    validate_abm_config(cfg);
    LatticeState s = init_state(cfg);
    TimeSeries ts;
    ts.t0 = 0.0;
    ts.h = cfg.dt;
    ts.values.resize(cfg.steps + 1, 2);
    ts.values(0, 0) = tumour_density(s);
    ts.values(0, 1) = healthy_density(s);
    for (int n = 1; n <= cfg.steps; ++n) {
        step(s, cfg);
        ts.values(n, 0) = tumour_density(s);
        ts.values(n, 1) = healthy_density(s);
    }
    return ts;
}

// Independent replicates with seeds base_seed, base_seed+1, ...
inline Ensemble run_ensemble(const AbmConfig& cfg, int runs, std::uint64_t base_seed) {
    if (runs < 1) throw invalid_input_error("ensemble needs at least one run");
    Ensemble e;
    e.runs.reserve(static_cast<size_t>(runs));
    for (int r = 0; r < runs; ++r) {
        AbmConfig c = cfg;
        c.seed = base_seed + static_cast<std::uint64_t>(r);
        e.runs.push_back(run(c));
    }
    return e;
}

} // namespace crnfit
