#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crnfit/abm.hpp"
#include "crnfit/errors.hpp"
#include "crnfit/polynomial_ode.hpp"
#include "crnfit/reactions.hpp"
#include "crnfit/timeseries.hpp"

namespace crnfit {

using json = nlohmann::json;

// ---------------------------------------------------------------- CSV

// Column layout: t,x1,...,xd. Values carry 17 significant digits so doubles
// survive a round trip.
inline void write_timeseries_csv(const std::string& path, const TimeSeries& ts) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << "t";
    for (int c = 0; c < ts.dimension(); ++c) out << ",x" << (c + 1);
    out << "\n";
    char buf[40];
    for (int n = 0; n < ts.points(); ++n) {
        std::snprintf(buf, sizeof(buf), "%.17g", ts.time(n));
        out << buf;
        for (int c = 0; c < ts.dimension(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", ts.values(n, c));
            out << ',' << buf;
        }
        out << "\n";
    }
    out.flush();
    if (!out) throw io_error("write to '" + path + "' failed");
}

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) fields.push_back(trim(cur));
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

inline double parse_double(const std::string& s, const std::string& context) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw invalid_input_error("cannot parse number '" + s + "' in " + context);
    }
}

} // namespace detail

// Accepts any d state columns after the leading time column; header names
// after "t" are informational ("x,z" and "x1,x2" both denote two components).
// The time column must be uniformly spaced.
inline TimeSeries read_timeseries_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "' for reading");
    std::string line;
    std::vector<std::vector<double>> rows;
    std::vector<double> times;
    bool header_seen = false;
    size_t ncols = 0;
    while (std::getline(in, line)) {
        std::string t = detail::trim(line);
        if (t.empty()) continue;
        auto fields = detail::split_csv_line(t);
        if (!header_seen) {
            if (fields.empty() || detail::trim(fields[0]) != "t")
                throw invalid_input_error("CSV '" + path + "' must start with a 't,...' header");
            if (fields.size() < 2)
                throw invalid_input_error("CSV '" + path + "' has no state columns");
            ncols = fields.size();
            header_seen = true;
            continue;
        }
        if (fields.size() != ncols)
            throw invalid_input_error("CSV '" + path + "' row " + std::to_string(rows.size() + 1) +
                                      " has " + std::to_string(fields.size()) + " fields, expected " +
                                      std::to_string(ncols));
        times.push_back(detail::parse_double(fields[0], path));
        std::vector<double> row;
        for (size_t c = 1; c < fields.size(); ++c) row.push_back(detail::parse_double(fields[c], path));
        rows.push_back(std::move(row));
    }
    if (!header_seen) throw invalid_input_error("CSV '" + path + "' is empty");
    if (rows.empty()) throw invalid_input_error("CSV '" + path + "' has no data rows");

    TimeSeries ts;
    ts.t0 = times.front();
    if (times.size() >= 2) {
        ts.h = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
        if (!(ts.h > 0.0)) throw invalid_input_error("CSV '" + path + "' time column is not increasing");
        for (size_t n = 0; n < times.size(); ++n) {
            double expected = ts.t0 + ts.h * static_cast<double>(n);
            double scale = std::max({1.0, std::abs(expected), std::abs(times.back())});
            if (std::abs(times[n] - expected) > 1e-9 * scale)
                throw invalid_input_error("CSV '" + path + "' time column is not uniformly spaced at row " +
                                          std::to_string(n + 1));
        }
    } else {
        ts.h = 1.0; // single sample: step is irrelevant but must stay positive
    }
    ts.values.resize(static_cast<int>(rows.size()), static_cast<int>(ncols - 1));
    for (size_t n = 0; n < rows.size(); ++n)
        for (size_t c = 0; c + 1 < ncols; ++c)
            ts.values(static_cast<int>(n), static_cast<int>(c)) = rows[n][c];
    return ts;
}

// ---------------------------------------------------------------- JSON

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "' for reading");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw invalid_input_error("cannot parse JSON '" + path + "': " + e.what());
    }
    return j;
}

inline void save_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
    out.flush();
    if (!out) throw io_error("write to '" + path + "' failed");
}

inline json library_to_json(const ReactionLibrary& lib) {
    json j;
    j["species"] = json::array();
    for (const Species& s : lib.species) j["species"].push_back(s.name);
    j["reactions"] = json::array();
    for (const Reaction& r : lib.reactions) {
        json jr;
        jr["id"] = r.id;
        jr["reactants"] = r.reactants.species;
        jr["products"] = r.products.species;
        jr["stoich"] = r.stoichiometry;
        jr["propensity"] = {{"coeff_num", r.propensity.coeff_num},
                            {"coeff_den", r.propensity.coeff_den},
                            {"exponents", r.propensity.exponents}};
        jr["display"] = render_reaction(r);
        j["reactions"].push_back(std::move(jr));
    }
    return j;
}

inline ReactionLibrary library_from_json(const json& j) {
    try {
        ReactionLibrary lib;
        const auto& sp = j.at("species");
        for (size_t i = 0; i < sp.size(); ++i)
            lib.species.push_back({static_cast<int>(i), sp[i].get<std::string>()});
        int d = lib.dimension();
        if (d < 1) throw invalid_input_error("reaction library has no species");
        for (const auto& jr : j.at("reactions")) {
            Reaction r;
            r.id = jr.at("id").get<int>();
            if (r.id != static_cast<int>(lib.reactions.size()))
                throw invalid_input_error("reaction ids must be 0-based and consecutive");
            r.reactants.species = jr.at("reactants").get<std::vector<int>>();
            r.products.species = jr.at("products").get<std::vector<int>>();
            r.stoichiometry = jr.at("stoich").get<std::vector<int>>();
            const auto& jp = jr.at("propensity");
            r.propensity.coeff_num = jp.at("coeff_num").get<long long>();
            r.propensity.coeff_den = jp.at("coeff_den").get<long long>();
            r.propensity.exponents = jp.at("exponents").get<std::vector<int>>();
            if (static_cast<int>(r.stoichiometry.size()) != d ||
                static_cast<int>(r.propensity.exponents.size()) != d)
                throw invalid_input_error("reaction " + std::to_string(r.id) + " has wrong dimension");
            for (int i = 0; i < d; ++i) {
                if (r.stoichiometry[static_cast<size_t>(i)] !=
                    r.products.count(i) - r.reactants.count(i))
                    throw invalid_input_error("reaction " + std::to_string(r.id) +
                                              " stoichiometry does not match its complexes");
                if (r.propensity.exponents[static_cast<size_t>(i)] != r.reactants.count(i))
                    throw invalid_input_error("reaction " + std::to_string(r.id) +
                                              " propensity exponents do not match its reactants");
            }
            lib.reactions.push_back(std::move(r));
        }
        return lib;
    } catch (const json::exception& e) {
        throw invalid_input_error(std::string("malformed reaction library JSON: ") + e.what());
    }
}

inline json rates_to_json(const RateVector& rates) {
    json j;
    j["values"] = rates;
    return j;
}

inline RateVector rates_from_json(const json& j) {
    try {
        return j.at("values").get<RateVector>();
    } catch (const json::exception& e) {
        throw invalid_input_error(std::string("malformed rate vector JSON: ") + e.what());
    }
}

inline json polynomial_to_json(const PolynomialODE& ode) {
    json j;
    j["dimension"] = ode.dimension;
    j["species"] = ode.species_names;
    j["components"] = json::array();
    for (int c = 0; c < ode.dimension; ++c) {
        json terms = json::array();
        for (size_t m = 0; m < ode.basis.size(); ++m) {
            double coeff = ode.coefficients[static_cast<size_t>(c)][m];
            if (coeff == 0.0) continue;
            terms.push_back({{"exponents", ode.basis[m].exponents}, {"coefficient", coeff}});
        }
        j["components"].push_back(std::move(terms));
    }
    return j;
}

inline json abm_config_to_json(const AbmConfig& cfg) {
    json j;
    j["lattice_size"] = cfg.lattice_size;
    j["healthy_density"] = cfg.healthy_density;
    j["tumour_density"] = cfg.tumour_density;
    j["ecm_density"] = cfg.ecm_density;
    j["ecm_breakdown_prob"] = cfg.ecm_breakdown_prob;
    j["death_prob"] = {{"healthy", cfg.death_prob_healthy}, {"tumour", cfg.death_prob_tumour}};
    j["movement_prob"] = cfg.movement_prob;
    j["division_age"] = cfg.division_age;
    j["competition_rate"] = cfg.competition_rate;
    j["stickiness"] = cfg.stickiness;
    j["jump_radius"] = cfg.jump_radius;
    j["max_healthy_divisions"] = cfg.max_healthy_divisions;
    j["dt"] = cfg.dt;
    j["steps"] = cfg.steps;
    j["seed"] = cfg.seed;
    return j;
}

// Strict schema: every behavioural and structural field must be present so a
// half-filled config cannot silently fall back to zeros. Only the seed is
// optional (CLI runs usually override it anyway).
inline AbmConfig abm_config_from_json(const json& j) {
    try {
        AbmConfig cfg;
        cfg.lattice_size = j.at("lattice_size").get<int>();
        cfg.healthy_density = j.at("healthy_density").get<double>();
        cfg.tumour_density = j.at("tumour_density").get<double>();
        cfg.ecm_density = j.at("ecm_density").get<double>();
        cfg.ecm_breakdown_prob = j.at("ecm_breakdown_prob").get<double>();
        cfg.death_prob_healthy = j.at("death_prob").at("healthy").get<double>();
        cfg.death_prob_tumour = j.at("death_prob").at("tumour").get<double>();
        cfg.movement_prob = j.at("movement_prob").get<double>();
        cfg.division_age = j.at("division_age").get<double>();
        cfg.competition_rate = j.at("competition_rate").get<double>();
        cfg.stickiness = j.at("stickiness").get<double>();
        cfg.jump_radius = j.at("jump_radius").get<int>();
        cfg.max_healthy_divisions = j.at("max_healthy_divisions").get<int>();
        cfg.dt = j.at("dt").get<double>();
        cfg.steps = j.at("steps").get<int>();
        cfg.seed = j.value("seed", std::uint64_t{0});
        validate_abm_config(cfg);
        return cfg;
    } catch (const json::exception& e) {
        throw invalid_input_error(std::string("malformed simulation config JSON: ") + e.what());
    }
}

inline std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline PolynomialODE polynomial_from_json(const json& j) {
    try {
        int d = j.at("dimension").get<int>();
        PolynomialODE ode(d);
        if (j.contains("species")) {
            auto names = j.at("species").get<std::vector<std::string>>();
            if (static_cast<int>(names.size()) != d)
                throw invalid_input_error("polynomial species list has wrong length");
            ode.species_names = std::move(names);
        }
        const auto& comps = j.at("components");
        if (static_cast<int>(comps.size()) != d)
            throw invalid_input_error("polynomial component list has wrong length");
        for (int c = 0; c < d; ++c) {
            for (const auto& term : comps[static_cast<size_t>(c)]) {
                ode.add_term(c, term.at("exponents").get<std::vector<int>>(),
                             term.at("coefficient").get<double>());
            }
        }
        return ode;
    } catch (const json::exception& e) {
        throw invalid_input_error(std::string("malformed polynomial JSON: ") + e.what());
    }
}

} // namespace crnfit
