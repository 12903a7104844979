#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "bulkq/errors.hpp"
#include "bulkq/pipeline.hpp"
#include "bulkq/tables.hpp"

namespace {

enum ExitCode { kOk = 0, kInvalidModel = 1, kUnstable = 2, kNumericalFailure = 3 };

void emit(const bulkq::Table& table, const std::string& format,
          const std::string& out_dir) {
    if (format == "text" || format == "both") {
        std::cout << "== " << table.name << " ==\n"
                  << bulkq::render_text(table) << "\n";
    }
    if (format == "csv" || format == "both") {
        const std::filesystem::path path =
            std::filesystem::path(out_dir) / (table.name + ".csv");
        std::ofstream out(path);
        out << bulkq::render_csv(table);
        std::cout << "wrote " << path.string() << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Analytic solver for the stationary BMAP/G(a,b)/1 batch-service "
                 "queue with batch-size-dependent service times"};
    std::string config_path;
    std::string out_dir = ".";
    std::string format = "text";
    std::string epochs = "all";
    int nmax = -1;
    double tol = -1.0;
    bool with_sim = false;
    bool selfcheck = false;
    std::uint64_t seed = 0;
    bool seed_set = false;

    app.add_option("--config", config_path, "model specification (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--nmax", nmax, "truncation override for the printed tables");
    app.add_option("--tol", tol, "series tail tolerance override");
    app.add_flag("--sim", with_sim, "run the simulation oracle and compare");
    app.add_option("--seed", seed, "simulation master seed override")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_option("--out", out_dir, "output directory for CSV files");
    app.add_option("--format", format, "text, csv or both")
        ->check(CLI::IsMember({"text", "csv", "both"}));
    app.add_option("--epochs", epochs, "which tables to emit")
        ->check(CLI::IsMember({"departure", "arbitrary", "prearrival", "all"}));
    app.add_flag("--selfcheck", selfcheck, "run the identity suite and print pass/fail");
    CLI11_PARSE(app, argc, argv);

    bulkq::ModelSpec spec;
    try {
        spec = bulkq::load_model_spec(config_path);
    } catch (const std::exception& e) {
        std::cerr << "model invalid: " << e.what() << "\n";
        return kInvalidModel;
    }
    if (tol > 0.0) spec.solver.series_tail_tol = tol;
    if (seed_set) spec.sim.seed = seed;

    bulkq::Solution sol;
    try {
        sol = bulkq::solve(spec.model, spec.policy, spec.solver);
    } catch (const bulkq::UnstableSystemError& e) {
        std::cerr << "unstable (rho >= 1): " << e.what() << "\n";
        return kUnstable;
    } catch (const bulkq::SolverError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericalFailure;
    }

    std::filesystem::create_directories(out_dir);
    const int display = nmax > 0 ? nmax : bulkq::default_display_rows(sol);
    if (epochs == "departure" || epochs == "all")
        emit(bulkq::departure_table(sol, display), format, out_dir);
    if (epochs == "arbitrary" || epochs == "all") {
        emit(bulkq::arbitrary_table(sol, display), format, out_dir);
        emit(bulkq::measures_panel(sol), format, out_dir);
    }
    if (epochs == "prearrival" || epochs == "all")
        emit(bulkq::pre_arrival_table(sol, display), format, out_dir);

    if (with_sim) {
        const bulkq::SimEstimate sim =
            bulkq::simulate(spec.model, spec.policy, spec.sim);
        if (sim.drift_warning)
            std::cerr << "warning: simulated queue drifted past the configured bound\n";
        emit(bulkq::comparison_table(sol, sim), format, out_dir);
    }

    if (selfcheck) {
        const auto checks = bulkq::self_check(spec.model, spec.policy, sol);
        bool all_pass = true;
        for (const auto& c : checks) {
            std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  value "
                      << c.value << "  tol " << c.tolerance << "\n";
            all_pass = all_pass && c.pass;
        }
        if (!all_pass) {
            std::cerr << "selfcheck failed\n";
            return kNumericalFailure;
        }
    }
    return kOk;
}
