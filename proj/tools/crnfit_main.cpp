#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "crnfit/crnfit.hpp"

namespace {

using namespace crnfit;

// Exit codes are a stable contract: 0 success, 2 input or usage error,
// 3 output IO failure, 4 numerical instability.
constexpr int exit_ok = 0;
constexpr int exit_input = 2;
constexpr int exit_io = 3;
constexpr int exit_unstable = 4;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int cmd_library(int species, const std::string& out) {
    try {
        ReactionLibrary lib = enumerate_library(species);
        save_json(out, library_to_json(lib));
    } catch (const error& e) {
        std::cerr << "crnfit library: " << e.what() << "\n";
        return exit_input;
    }
    std::cout << "wrote " << out << "\n";
    return exit_ok;
}

int cmd_abm(const std::string& config_path, int runs, bool seed_given, std::uint64_t seed,
            const std::string& out_dir) {
    AbmConfig cfg;
    try {
        cfg = abm_config_from_json(load_json(config_path));
    } catch (const error& e) {
        std::cerr << "crnfit abm: " << e.what() << "\n";
        return exit_input;
    }
    const std::uint64_t base = seed_given ? seed : cfg.seed;
    try {
        std::filesystem::create_directories(out_dir);
        Ensemble ens = run_ensemble(cfg, runs, base);

        json manifest;
        manifest["tool_version"] = version;
        manifest["runs"] = runs;
        manifest["base_seed"] = base;
        manifest["config"] = abm_config_to_json(cfg);
        manifest["config_hash"] = fnv1a_hex(abm_config_to_json(cfg).dump());
        json seeds = json::array();
        json files = json::array();
        for (int r = 0; r < runs; ++r) {
            char name[32];
            std::snprintf(name, sizeof name, "run_%04d.csv", r);
            write_timeseries_csv(out_dir + "/" + name, ens.runs[static_cast<size_t>(r)]);
            seeds.push_back(base + static_cast<std::uint64_t>(r));
            files.push_back(name);
        }
        write_timeseries_csv(out_dir + "/mean.csv", ensemble_mean(ens));
        manifest["seeds"] = seeds;
        manifest["files"] = files;
        manifest["mean"] = "mean.csv";
        save_json(out_dir + "/manifest.json", manifest);
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "crnfit abm: " << e.what() << "\n";
        return exit_io;
    } catch (const io_error& e) {
        std::cerr << "crnfit abm: " << e.what() << "\n";
        return exit_io;
    } catch (const error& e) {
        std::cerr << "crnfit abm: " << e.what() << "\n";
        return exit_input;
    }
    std::cout << "wrote " << runs << " runs + mean.csv + manifest.json to " << out_dir << "\n";
    return exit_ok;
}

struct FitFlags {
    std::string data;
    std::string mode = "coupled";
    std::string solver; // empty picks the mode's default
    double ridge_k = 0.0;
    double lambda = 0.0;
    double threshold = 0.0;
    int max_iter = 0;
    int max_sweeps = 10;
    double tol = 0.0;
    int stride = 1;
    int smooth = 1;
    std::vector<int> exclude; // 1-based, prune subcommand only
    std::string out;
};

// Shared by fit and prune; prune is a coupled fit with a mandatory exclusion
// list. The report is written even when the fitted model blows up during the
// error measurement, so the diagnostics survive the failure.
int run_fit(const FitFlags& f, const char* tool) {
    TimeSeries ts;
    try {
        ts = read_timeseries_csv(f.data);
        if (f.stride > 1) ts = subsample(ts, f.stride);
    } catch (const error& e) {
        std::cerr << "crnfit " << tool << ": " << e.what() << "\n";
        return exit_input;
    }

    FitResult fit;
    FitReport rep;
    ReactionLibrary lib;
    try {
        FitProvenance prov;
        prov.data_path = f.data;
        prov.subsample_stride = f.stride;
        if (f.mode == "coupled") {
            if (!f.solver.empty() && f.solver != "nnls") {
                std::cerr << "crnfit " << tool
                          << ": coupled fitting is tied to the nnls solver\n";
                return exit_input;
            }
            lib = enumerate_library(ts.dimension());
            std::vector<int> excluded;
            for (int id : f.exclude) {
                if (id < 1 || id > lib.size()) {
                    std::cerr << "crnfit " << tool << ": reaction ids are 1-based, got "
                              << id << "\n";
                    return exit_input;
                }
                excluded.push_back(id - 1);
            }
            fit = f.exclude.empty() ? fit_coupled(ts, lib, {}, f.smooth)
                                    : prune_and_refit(ts, lib, excluded, f.smooth);
            rep = make_report(fit, ts, prov, "nnls", &lib);
        } else {
            SolverKind kind = solver_kind_from_name(f.solver.empty() ? "lsq" : f.solver);
            SolverOptions opt;
            opt.ridge_k = f.ridge_k;
            opt.lambda = f.lambda;
            opt.threshold = f.threshold;
            opt.max_iterations = f.max_iter;
            opt.tolerance = f.tol;
            opt.max_sweeps = f.max_sweeps;
            fit = fit_decoupled(ts, canonical_quadratic_basis(ts.dimension()), kind, opt,
                                f.smooth);
            rep = make_report(fit, ts, prov, f.solver.empty() ? "lsq" : f.solver, nullptr);
        }
    } catch (const instability_error& e) {
        std::cerr << "crnfit " << tool << ": " << e.what() << "\n";
        return exit_unstable;
    } catch (const singular_error& e) {
        std::cerr << "crnfit " << tool << ": " << e.what() << "\n";
        return exit_unstable;
    } catch (const error& e) {
        std::cerr << "crnfit " << tool << ": " << e.what() << "\n";
        return exit_input;
    }

    try {
        save_json(f.out, report_to_json(rep));
    } catch (const io_error& e) {
        std::cerr << "crnfit " << tool << ": " << e.what() << "\n";
        return exit_io;
    }
    for (const std::string& line : rep.equations) std::cout << line << "\n";
    if (!fit.mse_valid) {
        std::cerr << "crnfit " << tool << ": " << fit.integration_error << "\n";
        return exit_unstable;
    }
    return exit_ok;
}

int cmd_integrate(const std::string& report_path, const std::vector<double>& y0v, double t_end,
                  double h, double t0, const std::string& out) {
    PolynomialODE model;
    try {
        FitReport rep = report_from_json(load_json(report_path));
        model = polynomial_from_json(rep.polynomial);
    } catch (const error& e) {
        std::cerr << "crnfit integrate: " << e.what() << "\n";
        return exit_input;
    }
    if (static_cast<int>(y0v.size()) != model.dimension) {
        std::cerr << "crnfit integrate: --y0 needs " << model.dimension << " components\n";
        return exit_input;
    }
    Eigen::VectorXd y0(model.dimension);
    for (int i = 0; i < model.dimension; ++i) y0(i) = y0v[static_cast<size_t>(i)];

    TimeSeries traj;
    try {
        IntegrationConfig cfg;
        cfg.t_end = t_end;
        cfg.h = h;
        traj = integrate_rk4(model, y0, cfg, t0);
    } catch (const instability_error& e) {
        std::cerr << "crnfit integrate: " << e.what() << "\n";
        return exit_unstable;
    } catch (const error& e) {
        std::cerr << "crnfit integrate: " << e.what() << "\n";
        return exit_input;
    }
    try {
        write_timeseries_csv(out, traj);
    } catch (const io_error& e) {
        std::cerr << "crnfit integrate: " << e.what() << "\n";
        return exit_io;
    }
    std::cout << "wrote " << traj.points() << " rows to " << out << "\n";
    return exit_ok;
}

int cmd_mse(const std::string& report_path, const std::string& data_path,
            const std::vector<double>& y0v) {
    try {
        FitReport rep = report_from_json(load_json(report_path));
        PolynomialODE model = polynomial_from_json(rep.polynomial);
        TimeSeries data = read_timeseries_csv(data_path);
        Eigen::VectorXd y0;
        if (y0v.empty()) {
            y0 = data.values.row(0).transpose();
        } else {
            if (static_cast<int>(y0v.size()) != data.dimension()) {
                std::cerr << "crnfit mse: --y0 needs " << data.dimension() << " components\n";
                return exit_input;
            }
            y0.resize(data.dimension());
            for (int i = 0; i < data.dimension(); ++i) y0(i) = y0v[static_cast<size_t>(i)];
        }
        TrajectoryMse m = trajectory_mse(model, data, y0);
        for (int c = 0; c < data.dimension(); ++c)
            std::cout << "mse_trajectory " << model.species_names[static_cast<size_t>(c)]
                      << " = " << fmt17(m.trajectory(c)) << "\n";
        for (int c = 0; c < data.dimension(); ++c)
            std::cout << "mse_final " << model.species_names[static_cast<size_t>(c)] << " = "
                      << fmt17(m.final_point(c)) << "\n";
    } catch (const instability_error& e) {
        std::cerr << "crnfit mse: " << e.what() << "\n";
        return exit_unstable;
    } catch (const error& e) {
        std::cerr << "crnfit mse: " << e.what() << "\n";
        return exit_input;
    }
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"learn chemical reaction network ODEs from time series data"};
    app.set_version_flag("--version", std::string(crnfit::version));
    app.require_subcommand(1);

    int rc = exit_ok;

    // library
    auto* lib_cmd = app.add_subcommand("library", "enumerate the candidate reaction library");
    int species = 0;
    std::string lib_out = "library.json";
    lib_cmd->add_option("--species", species, "number of species")->required();
    lib_cmd->add_option("--out", lib_out, "output JSON path");
    lib_cmd->callback([&] { rc = cmd_library(species, lib_out); });

    // abm
    auto* abm_cmd = app.add_subcommand("abm", "run the lattice tumour model ensemble");
    std::string abm_config;
    std::string abm_out = "abm_out";
    int abm_runs = 500;
    std::uint64_t abm_seed = 0;
    abm_cmd->add_option("--config", abm_config, "AbmConfig JSON path")->required();
    abm_cmd->add_option("--runs", abm_runs, "ensemble size")
        ->check(CLI::PositiveNumber);
    auto* abm_seed_opt =
        abm_cmd->add_option("--seed", abm_seed, "base seed (run r uses seed + r)");
    abm_cmd->add_option("--out", abm_out, "output directory");
    abm_cmd->callback([&] {
        rc = cmd_abm(abm_config, abm_runs, abm_seed_opt->count() > 0, abm_seed, abm_out);
    });

    // fit and prune share their flag set
    FitFlags ff;
    auto add_fit_flags = [&](CLI::App* cmd, bool pruning) {
        cmd->add_option("--data", ff.data, "time series CSV")->required();
        cmd->add_option("--out", ff.out, "fit report JSON path")->required();
        if (!pruning) {
            cmd->add_option("--mode", ff.mode, "coupled or decoupled")
                ->check(CLI::IsMember({"coupled", "decoupled"}));
            cmd->add_option("--solver", ff.solver,
                            "nnls, lsq, ridge, lsqr, lasso, or stlsq");
            cmd->add_option("--ridge-k", ff.ridge_k, "ridge penalty");
            cmd->add_option("--lambda", ff.lambda, "lasso penalty");
            cmd->add_option("--threshold", ff.threshold, "stlsq pruning threshold");
            cmd->add_option("--max-iter", ff.max_iter, "iteration cap (0 = solver default)");
            cmd->add_option("--max-sweeps", ff.max_sweeps, "stlsq sweep cap");
            cmd->add_option("--tol", ff.tol, "solver tolerance (0 = solver default)");
        } else {
            cmd->add_option("--exclude", ff.exclude,
                            "comma-separated 1-based reaction ids to drop")
                ->required()
                ->delimiter(',');
        }
        cmd->add_option("--subsample", ff.stride, "keep every stride-th sample")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--smooth", ff.smooth, "odd moving-average window (1 = off)")
            ->check(CLI::PositiveNumber);
    };

    auto* fit_cmd = app.add_subcommand("fit", "fit an ODE to a time series");
    add_fit_flags(fit_cmd, false);
    fit_cmd->callback([&] { rc = run_fit(ff, "fit"); });

    auto* prune_cmd =
        app.add_subcommand("prune", "re-fit with chosen reactions removed from the library");
    add_fit_flags(prune_cmd, true);
    prune_cmd->callback([&] {
        ff.mode = "coupled";
        rc = run_fit(ff, "prune");
    });

    // integrate
    auto* int_cmd = app.add_subcommand("integrate", "integrate a fitted model");
    std::string int_report, int_out = "trajectory.csv";
    std::vector<double> int_y0;
    double int_tend = 0.0, int_h = 0.0, int_t0 = 0.0;
    int_cmd->add_option("--report", int_report, "fit report JSON")->required();
    int_cmd->add_option("--y0", int_y0, "comma-separated initial state")
        ->required()
        ->delimiter(',');
    int_cmd->add_option("--t-end", int_tend, "integration horizon")->required();
    int_cmd->add_option("--step", int_h, "step size")->required();
    int_cmd->add_option("--t0", int_t0, "start time");
    int_cmd->add_option("--out", int_out, "trajectory CSV path");
    int_cmd->callback(
        [&] { rc = cmd_integrate(int_report, int_y0, int_tend, int_h, int_t0, int_out); });

    // mse
    auto* mse_cmd = app.add_subcommand("mse", "compare a fitted model against data");
    std::string mse_report, mse_data;
    std::vector<double> mse_y0;
    mse_cmd->add_option("--report", mse_report, "fit report JSON")->required();
    mse_cmd->add_option("--data", mse_data, "time series CSV")->required();
    mse_cmd->add_option("--y0", mse_y0, "initial state (default: first data row)")
        ->delimiter(',');
    mse_cmd->callback([&] { rc = cmd_mse(mse_report, mse_data, mse_y0); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_input;
    }
    return rc;
}
