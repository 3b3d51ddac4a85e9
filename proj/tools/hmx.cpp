// hmx: build, inspect, solve and benchmark mixed-precision H-matrix systems.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hmx/bench.hpp"
#include "hmx/bicgstab.hpp"
#include "hmx/error.hpp"
#include "hmx/matvec.hpp"

namespace {

void add_problem_options(CLI::App* app, hmx::BenchConfig& cfg) {
    app->add_option("--spheres", cfg.spheres, "number of spheres on the x axis")->check(CLI::PositiveNumber);
    app->add_option("--refine", cfg.refinement, "icosphere refinement level")->check(CLI::NonNegativeNumber);
    app->add_option("--spacing", cfg.spacing, "center-to-center sphere distance");
    app->add_option("--radius", cfg.radius, "sphere radius");
    app->add_option("--voltages", cfg.voltages, "per-sphere voltages (default all 1)")->delimiter(',');
    app->add_option("--aca-tol", cfg.aca_tol, "ACA tolerance");
    app->add_option("--leaf", cfg.leaf_size, "cluster tree leaf size")->check(CLI::PositiveNumber);
    app->add_option("--eta", cfg.eta, "admissibility parameter");
}

std::vector<hmx::PrecisionScheme> parse_schemes(const std::vector<std::string>& names) {
    std::vector<hmx::PrecisionScheme> out;
    for (const auto& n : names) out.push_back(hmx::PrecisionScheme::parse(n));
    return out;
}

nlohmann::json build_report_json(const hmx::HMatrixF64& h) {
    const auto& r = h.report();
    nlohmann::json hist = nlohmann::json::object();
    for (const auto& [rank, count] : r.rank_histogram) hist[std::to_string(rank)] = count;
    return {{"n", h.size()},
            {"blocks", h.blocks().size()},
            {"dense_blocks", r.dense_blocks},
            {"lowrank_blocks", r.lowrank_blocks},
            {"aca_fallbacks", r.aca_fallbacks},
            {"stored_scalars", r.stored_scalars},
            {"compression_ratio", r.compression_ratio},
            {"rank_histogram", hist}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mixed-precision H-matrix vector products and BiCGSTAB"};
    app.require_subcommand(1);

    hmx::BenchConfig cfg;

    // info
    auto* info = app.add_subcommand("info", "print the H-matrix build report");
    add_problem_options(info, cfg);
    std::string info_format = "text";
    std::string partition_path;
    std::string mesh_path;
    info->add_option("--format", info_format)->check(CLI::IsMember({"text", "json"}));
    info->add_option("--dump-partition", partition_path, "write `i_s i_e j_s j_e admissible` lines");
    info->add_option("--dump-mesh", mesh_path, "write `cx cy cz area sphere_id` lines");

    // solve
    auto* solve = app.add_subcommand("solve", "run one BiCGSTAB solve and print its report");
    add_problem_options(solve, cfg);
    std::string scheme_name = "m1-double";
    int solve_threads = 1;
    solve->add_option("--scheme", scheme_name, "m1-double|m1-single|m1-mixed|m2-*|m3:c=<int>");
    solve->add_option("--threads", solve_threads)->check(CLI::PositiveNumber);
    solve->add_option("--tol", cfg.solver_tol);
    solve->add_option("--max-iter", cfg.max_iter)->check(CLI::PositiveNumber);
    std::string solve_format = "text";
    solve->add_option("--format", solve_format)->check(CLI::IsMember({"text", "json"}));

    // bench
    auto* bench = app.add_subcommand("bench", "time products or solves across schemes");
    std::string mode;
    bench->add_option("mode", mode, "matvec or solve")->required()->check(CLI::IsMember({"matvec", "solve"}));
    add_problem_options(bench, cfg);
    std::vector<std::string> scheme_names;
    bench->add_option("--schemes", scheme_names, "comma-separated scheme list")->delimiter(',');
    bench->add_option("--c-list", cfg.c_list, "m3 split parameters, e.g. --c-list=-1,1,2")->delimiter(',');
    bench->add_option("--threads", cfg.threads, "thread counts")->delimiter(',');
    bench->add_option("--reps", cfg.reps, "products per set")->check(CLI::PositiveNumber);
    bench->add_option("--sets", cfg.sets, "timed sets")->check(CLI::PositiveNumber);
    bench->add_option("--seed", cfg.seed, "source vector seed");
    bench->add_option("--tol", cfg.solver_tol, "solver tolerance");
    bench->add_option("--max-iter", cfg.max_iter)->check(CLI::PositiveNumber);
    std::string bench_format = "csv";
    bench->add_option("--format", bench_format)->check(CLI::IsMember({"csv", "json"}));
    bench->add_option("--out", cfg.out, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*info) {
            const auto problem = hmx::build_problem(cfg);
            if (info_format == "json")
                std::cout << build_report_json(*problem.h).dump(2) << '\n';
            else
                hmx::write_build_report(std::cout, *problem.h);
            if (!partition_path.empty()) {
                std::ofstream out(partition_path);
                if (!out) throw hmx::IoError("cannot open '" + partition_path + "'");
                hmx::write_partition(out, problem.partition);
            }
            if (!mesh_path.empty()) {
                std::ofstream out(mesh_path);
                if (!out) throw hmx::IoError("cannot open '" + mesh_path + "'");
                hmx::write_mesh(out, problem.mesh);
            }
            return 0;
        }

        if (*solve) {
            const auto scheme = hmx::PrecisionScheme::parse(scheme_name);
            const auto problem = hmx::build_problem(cfg);
            const auto sh = hmx::prepare_scheme(problem.h, scheme);
            const hmx::SolverConfig scfg{cfg.solver_tol, cfg.max_iter, scheme, solve_threads};
            const auto result = hmx::bicgstab(sh, *problem.h, problem.rhs, scfg);
            const auto& rep = result.report;
            if (solve_format == "json") {
                nlohmann::json o{{"scheme", scheme.name()},
                                 {"n", problem.mesh.size()},
                                 {"converged", rep.converged},
                                 {"iterations", rep.iterations},
                                 {"residual_history", rep.residual_history},
                                 {"true_residual", rep.true_residual ? nlohmann::json(*rep.true_residual)
                                                                     : nlohmann::json(nullptr)},
                                 {"seconds", rep.seconds},
                                 {"payload_bytes", hmx::payload_bytes(sh)},
                                 {"breakdown", rep.breakdown ? nlohmann::json(*rep.breakdown)
                                                             : nlohmann::json(nullptr)}};
                std::cout << o.dump(2) << '\n';
            } else {
                std::printf("scheme          %s\n", scheme.name().c_str());
                std::printf("N               %zu\n", problem.mesh.size());
                std::printf("converged       %s\n", rep.converged ? "yes" : "no");
                std::printf("iterations      %zu\n", rep.iterations);
                if (rep.true_residual) std::printf("true residual   %.3e\n", *rep.true_residual);
                std::printf("final residual  %.3e\n", rep.residual_history.back());
                std::printf("time            %.6f s\n", rep.seconds);
                std::printf("payload bytes   %zu\n", hmx::payload_bytes(sh));
                if (rep.breakdown) std::printf("breakdown       %s\n", rep.breakdown->c_str());
            }
            return rep.converged ? 0 : 2;
        }

        if (!scheme_names.empty()) cfg.schemes = parse_schemes(scheme_names);
        else if (!cfg.c_list.empty()) cfg.schemes = {hmx::PrecisionScheme::method1(hmx::Variant::Double)};
        cfg.format = bench_format == "json" ? hmx::ReportFormat::Json : hmx::ReportFormat::Csv;
        const auto records = mode == "matvec" ? hmx::run_matvec_bench(cfg) : hmx::run_solver_bench(cfg);
        if (cfg.out.empty())
            std::cout << hmx::format_report(records, cfg.format);
        else
            hmx::emit_report(records, cfg.format, cfg.out);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "hmx: " << e.what() << '\n';
        return 1;
    }
}
