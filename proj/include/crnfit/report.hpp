#pragma once

#include <string>
#include <vector>

#include "crnfit/eql.hpp"
#include "crnfit/io.hpp"
#include "crnfit/version.hpp"

namespace crnfit {

// Everything a fit run produced, in a form that survives a JSON round trip
// bit for bit. Reaction ids are the library's own 0-based ids.
struct FitReport {
    std::string tool_version;
    std::string method; // "coupled" or "decoupled"
    std::string solver;

    std::string data_path;
    int n_points = 0;
    int dimension = 0;
    double t0 = 0.0;
    double h = 0.0;
    int subsample_stride = 1;

    json library = json::object(); // coupled fits embed the candidate library
    std::vector<double> rates;
    std::vector<int> excluded;         // library reaction ids
    std::vector<int> active_reactions; // library reaction ids with positive rate

    std::vector<std::vector<int>> monomials; // decoupled candidate exponents
    std::vector<std::vector<double>> coefficients; // [component][monomial]

    json polynomial = json::object();
    std::vector<std::string> equations;

    double residual_norm = 0.0;
    std::vector<double> mse_trajectory;
    std::vector<double> mse_final;
    bool mse_valid = false;
    std::string integration_error;

    struct Diagnostic {
        int iterations = 0;
        bool converged = true;
        bool has_condition_warning = false;
        double condition_warning = 0.0;
        std::string note;
        bool operator==(const Diagnostic&) const = default;
    };
    std::vector<Diagnostic> diagnostics;

    bool operator==(const FitReport&) const = default;
};

struct FitProvenance {
    std::string data_path;
    int subsample_stride = 1;
};

inline FitReport make_report(const FitResult& fit, const TimeSeries& data,
                             const FitProvenance& prov, const std::string& solver,
                             const ReactionLibrary* lib) {
    FitReport r;
    r.tool_version = version;
    r.method = fit.mode == FitMode::coupled ? "coupled" : "decoupled";
    r.solver = solver;
    r.data_path = prov.data_path;
    r.n_points = data.points();
    r.dimension = data.dimension();
    r.t0 = data.t0;
    r.h = data.h;
    r.subsample_stride = prov.subsample_stride;

    if (fit.mode == FitMode::coupled) {
        if (lib == nullptr) throw invalid_input_error("coupled report needs its library");
        r.library = library_to_json(*lib);
        r.rates = fit.rates;
        r.excluded = fit.excluded;
        r.active_reactions = fit.active_reactions;
    } else {
        for (const Monomial& m : fit.monomials) r.monomials.push_back(m.exponents);
        for (int c = 0; c < fit.coefficients.cols(); ++c) {
            std::vector<double> col(static_cast<size_t>(fit.coefficients.rows()));
            for (int m = 0; m < fit.coefficients.rows(); ++m)
                col[static_cast<size_t>(m)] = fit.coefficients(m, c);
            r.coefficients.push_back(std::move(col));
        }
    }
    r.polynomial = polynomial_to_json(fit.model);
    r.equations = render_ode(fit.model);
    r.residual_norm = fit.residual_norm;
    // an invalid measurement is all NaN, which JSON cannot carry; the report
    // stores empty arrays and lets mse_valid signal the absence
    if (fit.mse_valid && fit.mse_trajectory.size() > 0) {
        r.mse_trajectory.assign(fit.mse_trajectory.data(),
                                fit.mse_trajectory.data() + fit.mse_trajectory.size());
        r.mse_final.assign(fit.mse_final.data(), fit.mse_final.data() + fit.mse_final.size());
    }
    r.mse_valid = fit.mse_valid;
    r.integration_error = fit.integration_error;
    for (const SolverResult& d : fit.diagnostics) {
        FitReport::Diagnostic diag;
        diag.iterations = d.iterations;
        diag.converged = d.converged;
        diag.has_condition_warning = d.condition_warning.has_value();
        diag.condition_warning = d.condition_warning.value_or(0.0);
        diag.note = d.note;
        r.diagnostics.push_back(std::move(diag));
    }
    return r;
}

inline json report_to_json(const FitReport& r) {
    json j;
    j["tool_version"] = r.tool_version;
    j["method"] = r.method;
    j["solver"] = r.solver;
    j["data"] = {{"path", r.data_path},       {"n_points", r.n_points},
                 {"dimension", r.dimension},  {"t0", r.t0},
                 {"h", r.h},                  {"subsample_stride", r.subsample_stride}};
    j["library"] = r.library;
    j["rates"] = r.rates;
    j["excluded"] = r.excluded;
    j["active_reactions"] = r.active_reactions;
    j["monomials"] = r.monomials;
    j["coefficients"] = r.coefficients;
    j["polynomial"] = r.polynomial;
    j["equations"] = r.equations;
    j["residual_norm"] = r.residual_norm;
    j["mse_trajectory"] = r.mse_trajectory;
    j["mse_final"] = r.mse_final;
    j["mse_valid"] = r.mse_valid;
    j["integration_error"] = r.integration_error;
    j["diagnostics"] = json::array();
    for (const auto& d : r.diagnostics) {
        j["diagnostics"].push_back({{"iterations", d.iterations},
                                    {"converged", d.converged},
                                    {"has_condition_warning", d.has_condition_warning},
                                    {"condition_warning", d.condition_warning},
                                    {"note", d.note}});
    }
    return j;
}

inline FitReport report_from_json(const json& j) {
    try {
        FitReport r;
        r.tool_version = j.at("tool_version").get<std::string>();
        r.method = j.at("method").get<std::string>();
        r.solver = j.at("solver").get<std::string>();
        const auto& d = j.at("data");
        r.data_path = d.at("path").get<std::string>();
        r.n_points = d.at("n_points").get<int>();
        r.dimension = d.at("dimension").get<int>();
        r.t0 = d.at("t0").get<double>();
        r.h = d.at("h").get<double>();
        r.subsample_stride = d.at("subsample_stride").get<int>();
        r.library = j.at("library");
        r.rates = j.at("rates").get<std::vector<double>>();
        r.excluded = j.at("excluded").get<std::vector<int>>();
        r.active_reactions = j.at("active_reactions").get<std::vector<int>>();
        r.monomials = j.at("monomials").get<std::vector<std::vector<int>>>();
        r.coefficients = j.at("coefficients").get<std::vector<std::vector<double>>>();
        r.polynomial = j.at("polynomial");
        r.equations = j.at("equations").get<std::vector<std::string>>();
        r.residual_norm = j.at("residual_norm").get<double>();
        r.mse_trajectory = j.at("mse_trajectory").get<std::vector<double>>();
        r.mse_final = j.at("mse_final").get<std::vector<double>>();
        r.mse_valid = j.at("mse_valid").get<bool>();
        r.integration_error = j.at("integration_error").get<std::string>();
        for (const auto& jd : j.at("diagnostics")) {
            FitReport::Diagnostic diag;
            diag.iterations = jd.at("iterations").get<int>();
            diag.converged = jd.at("converged").get<bool>();
            diag.has_condition_warning = jd.at("has_condition_warning").get<bool>();
            diag.condition_warning = jd.at("condition_warning").get<double>();
            diag.note = jd.at("note").get<std::string>();
            r.diagnostics.push_back(std::move(diag));
        }
        return r;
    } catch (const json::exception& e) {
        throw invalid_input_error(std::string("malformed fit report JSON: ") + e.what());
    }
}

} // namespace crnfit
