#include "hmx/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "hmx/error.hpp"
#include "hmx/matvec.hpp"

namespace hmx {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void validate(const BenchConfig& cfg) {
    if (cfg.reps < 1) throw ContractError("repetitions must be >= 1");
    if (cfg.sets < 1) throw ContractError("sets must be >= 1");
    if (cfg.threads.empty()) throw ContractError("thread list is empty");
    for (int t : cfg.threads)
        if (t < 1) throw ContractError("thread counts must be >= 1");
}

void summarize(BenchRecord& rec) {
    const auto& v = rec.set_times_s;
    double mean = 0.0;
    for (double t : v) mean += t;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double t : v) var += (t - mean) * (t - mean);
    rec.mean_time_s = mean;
    rec.stddev_s = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
}

// Runs `measure` for the baseline too when the caller did not ask for it, then
// drops it from the output after computing speedups.
template <class Measure>
std::vector<BenchRecord> run_all(const BenchProblem& problem, const BenchConfig& cfg, Measure measure) {
    validate(cfg);
    const auto baseline = PrecisionScheme::method1(Variant::Double);
    auto schemes = bench_schemes(cfg);
    bool baseline_requested = false;
    for (const auto& s : schemes) baseline_requested |= s == baseline;
    if (!baseline_requested) schemes.insert(schemes.begin(), baseline);

    std::vector<BenchRecord> records;
    std::map<int, double> baseline_time;
    for (const auto& scheme : schemes) {
        const SchemeHMatrix sh = prepare_scheme(problem.h, scheme);
        for (int threads : cfg.threads) {
            BenchRecord rec;
            rec.scheme = scheme.name();
            rec.threads = threads;
            rec.payload_bytes = payload_bytes(sh);
            measure(sh, threads, rec);
            summarize(rec);
            if (scheme == baseline) baseline_time[threads] = rec.mean_time_s;
            records.push_back(std::move(rec));
        }
    }
    std::vector<BenchRecord> out;
    for (auto& rec : records) {
        const double base = baseline_time.at(rec.threads);
        rec.speedup = rec.mean_time_s > 0.0 ? base / rec.mean_time_s : 1.0;
        if (rec.scheme == baseline.name() && !baseline_requested) continue;
        out.push_back(std::move(rec));
    }
    return out;
}

std::string sig9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

double round9(double v) { return std::strtod(sig9(v).c_str(), nullptr); }

}  // namespace

BenchProblem build_problem(const BenchConfig& cfg) {
    SphereLayout layout = default_layout(cfg.spheres, cfg.refinement, cfg.spacing, cfg.radius);
    if (!cfg.voltages.empty()) layout.voltages = cfg.voltages;
    PanelMesh mesh = build_sphere_mesh(layout);
    ClusterTree tree = build_cluster_tree(mesh, cfg.leaf_size);
    BlockPartition partition = build_block_partition(tree, cfg.eta);
    auto h = std::make_shared<const HMatrixF64>(
        build_hmatrix(mesh, tree, partition, CompressionOptions{cfg.aca_tol, 0}));
    auto rhs = right_hand_side(mesh);
    return {std::move(mesh), std::move(tree), std::move(partition), std::move(h), std::move(rhs)};
}

std::vector<PrecisionScheme> bench_schemes(const BenchConfig& cfg) {
    auto out = cfg.schemes;
    for (int c : cfg.c_list) {
        const auto s = PrecisionScheme::method3(c);
        bool present = false;
        for (const auto& t : out) present |= t == s;
        if (!present) out.push_back(s);
    }
    if (out.empty()) throw ContractError("no precision schemes selected");
    return out;
}

std::vector<double> seeded_source(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::vector<double> x(n);
    for (auto& v : x) v = 2.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 1.0;
    return x;
}

std::vector<BenchRecord> run_matvec_bench(const BenchProblem& problem, const BenchConfig& cfg) {
    const auto x = seeded_source(problem.mesh.size(), cfg.seed);
    return run_all(problem, cfg, [&](const SchemeHMatrix& sh, int threads, BenchRecord& rec) {
        for (std::size_t set = 0; set < cfg.sets; ++set) {
            const auto t0 = Clock::now();
            for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
                const auto y = matvec_threaded(sh, x, threads);
                if (y.empty()) throw Error("empty product");
            }
            rec.set_times_s.push_back(seconds_since(t0) / static_cast<double>(cfg.reps));
        }
    });
}

std::vector<BenchRecord> run_matvec_bench(const BenchConfig& cfg) {
    validate(cfg);
    return run_matvec_bench(build_problem(cfg), cfg);
}

std::vector<BenchRecord> run_solver_bench(const BenchProblem& problem, const BenchConfig& cfg) {
    return run_all(problem, cfg, [&](const SchemeHMatrix& sh, int threads, BenchRecord& rec) {
        SolverConfig scfg{cfg.solver_tol, cfg.max_iter, sh.scheme(), threads};
        for (std::size_t set = 0; set < cfg.sets; ++set) {
            const auto t0 = Clock::now();
            const auto result = bicgstab(sh, *problem.h, problem.rhs, scfg);
            rec.set_times_s.push_back(seconds_since(t0));
            rec.iterations = result.report.iterations;
            rec.true_residual = result.report.true_residual;
            rec.converged = result.report.converged;
        }
    });
}

std::vector<BenchRecord> run_solver_bench(const BenchConfig& cfg) {
    validate(cfg);
    return run_solver_bench(build_problem(cfg), cfg);
}

std::string format_report(const std::vector<BenchRecord>& records, ReportFormat format) {
    if (format == ReportFormat::Csv) {
        std::ostringstream out;
        out << "scheme,threads,mean_time_s,stddev_s,payload_bytes,iterations,true_residual,speedup\n";
        for (const auto& r : records) {
            out << r.scheme << ',' << r.threads << ',' << sig9(r.mean_time_s) << ','
                << sig9(r.stddev_s) << ',' << r.payload_bytes << ',';
            if (r.iterations) out << *r.iterations;
            out << ',';
            if (r.true_residual) out << sig9(*r.true_residual);
            out << ',' << sig9(r.speedup) << '\n';
        }
        return out.str();
    }
    auto arr = nlohmann::json::array();
    for (const auto& r : records) {
        nlohmann::json o;
        o["scheme"] = r.scheme;
        o["threads"] = r.threads;
        o["mean_time_s"] = round9(r.mean_time_s);
        o["stddev_s"] = round9(r.stddev_s);
        o["payload_bytes"] = r.payload_bytes;
        o["iterations"] = r.iterations ? nlohmann::json(*r.iterations) : nlohmann::json(nullptr);
        o["true_residual"] =
            r.true_residual ? nlohmann::json(round9(*r.true_residual)) : nlohmann::json(nullptr);
        o["speedup"] = round9(r.speedup);
        arr.push_back(std::move(o));
    }
    return arr.dump(2) + "\n";
}

void emit_report(const std::vector<BenchRecord>& records, ReportFormat format, const std::string& path) {
    if (records.empty()) throw ContractError("no records to report");
    const std::string text = format_report(records, format);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<BenchRecord> parse_json_report(const std::string& text) {
    std::vector<BenchRecord> out;
    try {
        const auto arr = nlohmann::json::parse(text);
        if (!arr.is_array()) throw IoError("report must be a JSON array");
        for (const auto& o : arr) {
            BenchRecord r;
            r.scheme = o.at("scheme").get<std::string>();
            r.threads = o.at("threads").get<int>();
            r.mean_time_s = o.at("mean_time_s").get<double>();
            r.stddev_s = o.at("stddev_s").get<double>();
            r.payload_bytes = o.at("payload_bytes").get<std::size_t>();
            if (!o.at("iterations").is_null()) r.iterations = o.at("iterations").get<std::size_t>();
            if (!o.at("true_residual").is_null()) r.true_residual = o.at("true_residual").get<double>();
            r.speedup = o.at("speedup").get<double>();
            out.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed report: ") + e.what());
    }
    return out;
}

}  // namespace hmx
