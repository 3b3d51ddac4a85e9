// Acceptance suite: one PASS/FAIL line per criterion. Criterion 10 is
// report-only and never fails the run.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hmx/bench.hpp"
#include "hmx/bicgstab.hpp"
#include "hmx/matvec.hpp"
#include "hmx/oracle.hpp"
#include "hmx/precision.hpp"

using namespace hmx;

namespace {

// pinned tolerances
constexpr double kCompressionTol = 1e-6;
constexpr double kAcaTol = 1e-8;
constexpr double kUlps = 4.0;
constexpr double kOracleFp64 = 1e-6;
constexpr double kOracleFp32 = 1e-4;
constexpr double kThreadRel = 1e-12;
constexpr double kSolverTol = 1e-6;
constexpr std::size_t kSolverMaxIter = 200;
constexpr double kTimingRatio = 0.95;
constexpr double kLuRel = 1e-5;
// forward error <= cond(A) * residual; see criterion 11
constexpr double kLuSolverTol = 1e-8;

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int hard_failures = 0;

void run(int id, const char* title, bool soft, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = Clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (budget_s > 0.0 && secs > budget_s) {
        out.pass = false;
        out.detail += " (over the " + std::to_string(int(budget_s)) + " s budget)";
    }
    const char* tag = out.pass ? "PASS" : (soft ? "WARN" : "FAIL");
    if (!out.pass && !soft) ++hard_failures;
    std::printf("[%s] %2d %s: %s [%.2f s]\n", tag, id, title, out.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::vector<PrecisionScheme> study_schemes() {
    auto out = standard_schemes();
    for (int c : {-1, 1, 3, 5, 7}) out.push_back(PrecisionScheme::method3(c));
    return out;
}

bool fp32_bearing(const PrecisionScheme& s) { return s.method() == 3 || s.variant() != Variant::Double; }

BenchProblem problem(int refinement, std::size_t spheres = 3) {
    BenchConfig cfg;
    cfg.spheres = spheres;
    cfg.refinement = refinement;
    cfg.aca_tol = kAcaTol;
    return build_problem(cfg);
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double rel_inf(const std::vector<double>& got, const std::vector<double>& ref) {
    double m = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) m = std::max(m, std::abs(got[i] - ref[i]));
    return m / max_abs(ref);
}

Outcome partition_correctness() {
    std::string detail;
    bool ok = true;
    const std::pair<std::size_t, int> meshes[] = {{1, 0}, {1, 2}, {3, 2}};
    for (auto [spheres, r] : meshes) {
        const auto mesh = build_sphere_mesh(default_layout(spheres, r));
        const auto part = build_block_partition(build_cluster_tree(mesh));
        const bool area = part.area_identity_holds();
        const bool bitmap = mesh.size() > 512 || part.bitmap_cover_holds();
        ok &= area && bitmap;
        detail += "N=" + std::to_string(mesh.size()) + (area ? " area ok" : " AREA BAD") +
                  (mesh.size() <= 512 ? (bitmap ? "/bitmap ok" : "/BITMAP BAD") : "") + "; ";
    }
    return {ok, detail};
}

Outcome compression_fidelity(const BenchProblem& p) {
    const double err = oracle::frobenius_error(assemble_dense(p.mesh), densify(*p.h));
    return {err <= kCompressionTol, "rel Frobenius error " + fmt("%.3e", err) + " (<= 1e-6)"};
}

Outcome scaling_identity() {
    std::mt19937_64 gen(20240611);
    std::uniform_int_distribution<std::size_t> dim(1, 64), rk(1, 16);
    std::uniform_real_distribution<double> unit(-1.0, 1.0), expo(-3.0, 3.0);
    double worst = 0.0;
    bool normalized = true;
    for (int t = 0; t < 200; ++t) {
        const std::size_t rows = dim(gen), cols = dim(gen), rank = rk(gen);
        LowRankBlockF64 b{rows, cols, rank, std::vector<double>(rows * rank), std::vector<double>(rank * cols)};
        for (std::size_t k = 0; k < rank; ++k) {
            const double sv = std::pow(10.0, expo(gen)), sw = std::pow(10.0, expo(gen));
            for (std::size_t i = 0; i < rows; ++i) b.v[k * rows + i] = sv * unit(gen);
            for (std::size_t j = 0; j < cols; ++j) b.w[k * cols + j] = sw * unit(gen);
        }
        const auto s = scale_decompose(b);
        for (std::size_t k = 0; k < rank; ++k) {
            double vm = 0.0, wm = 0.0;
            for (std::size_t i = 0; i < rows; ++i) vm = std::max(vm, std::abs(s.vp[k * rows + i]));
            for (std::size_t j = 0; j < cols; ++j) wm = std::max(wm, std::abs(s.wp[k * cols + j]));
            normalized &= vm == 1.0 && wm == 1.0;
        }
        // both products in extended precision so only the factor rounding is measured
        std::vector<long double> vw(rows * cols, 0.0L), vdw(rows * cols, 0.0L);
        for (std::size_t k = 0; k < rank; ++k)
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < cols; ++j) {
                    vw[i * cols + j] += (long double)b.v[k * rows + i] * b.w[k * cols + j];
                    vdw[i * cols + j] += (long double)s.vp[k * rows + i] * s.d[k] * s.wp[k * cols + j];
                }
        long double mx = 0.0L, diff = 0.0L;
        for (std::size_t e = 0; e < vw.size(); ++e) {
            mx = std::max(mx, std::abs(vw[e]));
            diff = std::max(diff, std::abs(vdw[e] - vw[e]));
        }
        const double m = static_cast<double>(mx);
        const double ulp = std::nextafter(m, INFINITY) - m;
        worst = std::max(worst, static_cast<double>(diff) / ulp);
    }
    return {worst <= kUlps && normalized,
            "max deviation " + fmt("%.3f", worst) + " ulps of max|VW| (<= 4); max-abs normalization " +
                (normalized ? "exact" : "VIOLATED")};
}

Outcome split_criterion() {
    std::mt19937_64 gen(7);
    std::uniform_int_distribution<std::size_t> len(1, 32);
    std::uniform_real_distribution<double> expo(-12.0, 0.0), scale(-3.0, 3.0);
    std::vector<int> cs = {-1, 0, 1, 2, 3, 4, 5, 6, 7, 400};
    std::size_t checked = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = len(gen);
        const double s = std::pow(10.0, scale(gen));
        std::vector<double> d(n);
        for (auto& v : d) v = s * std::pow(10.0, expo(gen));
        if (t % 10 == 0) d[t % n] = 0.0;
        double dmax = 0.0;
        for (double v : d) dmax = std::max(dmax, v);
        std::size_t prev32 = n + 1;
        std::vector<char> prev_in32(n, 1);
        for (int c : cs) {
            const auto sp = split_indices(d, c);
            const double thr = dmax * std::pow(10.0, -static_cast<double>(c));
            std::vector<char> in32(n, 0), seen(n, 0);
            for (auto i : sp.fp32) {
                in32[i] = 1;
                ++seen[i];
            }
            for (auto i : sp.fp64) ++seen[i];
            for (std::size_t i = 0; i < n; ++i) {
                if (seen[i] != 1) return {false, "indices not partitioned"};
                if ((d[i] < thr) != bool(in32[i])) return {false, "strict predicate violated"};
                if (in32[i] && !prev_in32[i]) return {false, "FP32 class grew with c"};
            }
            // an all-zero D meets the strict predicate nowhere, so "all FP32" needs d_max > 0
            if (c == -1 && dmax > 0.0 && !sp.fp64.empty()) return {false, "c = -1 left FP64 columns"};
            if (sp.fp32.size() > prev32) return {false, "FP32 class grew with c"};
            prev32 = sp.fp32.size();
            prev_in32 = in32;
            ++checked;
        }
    }
    return {true, std::to_string(checked) + " (D, c) cases: strict predicate, c=-1 all FP32 (d_max > 0), monotone in c"};
}

Outcome oracle_equivalence(const BenchProblem& p) {
    const auto exact = assemble_dense(p.mesh);
    const auto x = seeded_source(p.mesh.size(), 42);
    const auto ref = oracle::dense_matvec(exact, x);
    bool ok = true;
    double worst64 = 0.0, worst32 = 0.0;
    for (const auto& s : study_schemes()) {
        const double err = rel_inf(matvec(prepare_scheme(p.h, s), x), ref);
        if (fp32_bearing(s)) {
            worst32 = std::max(worst32, err);
            ok &= err <= kOracleFp32;
        } else {
            worst64 = std::max(worst64, err);
            ok &= err <= kOracleFp64;
        }
    }
    return {ok, "FP64 schemes " + fmt("%.2e", worst64) + " (<= 1e-6), FP32-bearing " + fmt("%.2e", worst32) +
                    " (<= 1e-4), 11 schemes"};
}

Outcome thread_equivalence(const BenchProblem& p) {
    const auto x = seeded_source(p.mesh.size(), 43);
    double worst = 0.0;
    for (const auto& s : study_schemes()) {
        const auto sh = prepare_scheme(p.h, s);
        const auto one = matvec_threaded(sh, x, 1);
        for (int t : {2, 4, 8}) {
            const auto y = matvec_threaded(sh, x, t);
            for (std::size_t i = 0; i < y.size(); ++i)
                if (one[i] != 0.0) worst = std::max(worst, std::abs(y[i] - one[i]) / std::abs(one[i]));
                else if (y[i] != 0.0) worst = INFINITY;
        }
    }
    return {worst <= kThreadRel, "max elementwise relative difference " + fmt("%.2e", worst) + " (<= 1e-12)"};
}

struct SolveRow {
    std::string name;
    SolverReport report;
};

std::vector<SolveRow> solve_all(const BenchProblem& p) {
    std::vector<SolveRow> rows;
    for (const auto& s : study_schemes()) {
        SolverConfig cfg{kSolverTol, kSolverMaxIter, s, 1};
        rows.push_back({s.name(), bicgstab(prepare_scheme(p.h, s), *p.h, p.rhs, cfg).report});
    }
    return rows;
}

std::size_t iters(const std::vector<SolveRow>& rows, const std::string& name) {
    for (const auto& r : rows)
        if (r.name == name) return r.report.iterations;
    throw std::runtime_error("no solve for " + name);
}

Outcome solver_convergence(const std::vector<SolveRow>& rows) {
    bool ok = true;
    std::string detail;
    for (const auto& r : rows) {
        const bool good = r.report.converged && r.report.true_residual && *r.report.true_residual < kSolverTol &&
                          r.report.iterations <= kSolverMaxIter;
        ok &= good;
        detail += r.name + "=" + std::to_string(r.report.iterations) +
                  (r.report.true_residual ? "/" + fmt("%.2e", *r.report.true_residual) : "/-") + (good ? "" : "!") +
                  " ";
    }
    return {ok, detail};
}

Outcome iteration_orderings(const std::vector<SolveRow>& rows) {
    const auto m1d = iters(rows, "m1-double"), m1m = iters(rows, "m1-mixed"), m1s = iters(rows, "m1-single");
    const auto m2d = iters(rows, "m2-double"), m2m = iters(rows, "m2-mixed");
    const auto c7 = iters(rows, "m3:c=7"), c1 = iters(rows, "m3:c=1");
    const bool a = m1d <= m1m + 2 && m1m + 2 <= m1s + 4;
    const bool b = m2d <= m1d + 2;
    const bool c = m2m <= m1s;
    const bool d = c7 <= c1 + 2;
    auto n = [](std::size_t v) { return std::to_string(v); };
    return {a && b && c && d, "M1-D " + n(m1d) + " <= M1-M " + n(m1m) + "+2 <= M1-S " + n(m1s) + "+4 " +
                                  (a ? "ok" : "NO") + "; M2-D " + n(m2d) + " <= M1-D+2 " + (b ? "ok" : "NO") +
                                  "; M2-M " + n(m2m) + " <= M1-S " + (c ? "ok" : "NO") + "; M3(7) " + n(c7) +
                                  " <= M3(1) " + n(c1) + "+2 " + (d ? "ok" : "NO")};
}

Outcome storage_halving(const BenchProblem& p) {
    const auto d = payload_bytes(prepare_scheme(p.h, PrecisionScheme::method1(Variant::Double)));
    const auto s = payload_bytes(prepare_scheme(p.h, PrecisionScheme::method1(Variant::Single)));
    const auto m2 = payload_bytes(prepare_scheme(p.h, PrecisionScheme::method2(Variant::Double)));
    const auto r = p.h->report().rank_sum;
    const bool ok = 2 * s == d && m2 - d == 8 * r;
    return {ok, "M1-D " + std::to_string(d) + " B, M1-S " + std::to_string(s) + " B, M2-D - M1-D = " +
                    std::to_string(m2 - d) + " B, 8*sum(r) = " + std::to_string(8 * r)};
}

Outcome timing() {
    BenchConfig cfg;
    cfg.refinement = 4;
    cfg.aca_tol = kAcaTol;
    cfg.schemes = {PrecisionScheme::method1(Variant::Double), PrecisionScheme::method1(Variant::Single)};
    cfg.threads = {4};
    cfg.reps = 5;
    cfg.sets = 3;
    const auto recs = run_matvec_bench(cfg);
    const double d = recs.at(0).mean_time_s, s = recs.at(1).mean_time_s;
    return {s <= kTimingRatio * d, "N=15360, 4 threads: M1-S/M1-D time ratio " + fmt("%.3f", s / d) +
                                       " (<= 0.95, report-only)"};
}

Outcome lu_oracle(const BenchProblem& p) {
    const auto exact = oracle::dense_solve(assemble_dense(p.mesh), p.rhs);
    auto rel_l2 = [&](const std::vector<double>& x) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            num += (x[i] - exact[i]) * (x[i] - exact[i]);
            den += exact[i] * exact[i];
        }
        return std::sqrt(num / den);
    };
    const auto scheme = PrecisionScheme::method1(Variant::Double);
    const auto sh = prepare_scheme(p.h, scheme);
    const auto tight = bicgstab(sh, *p.h, p.rhs, SolverConfig{kLuSolverTol, 1000, scheme, 1});
    const auto loose = bicgstab(sh, *p.h, p.rhs, SolverConfig{kSolverTol, 1000, scheme, 1});
    const double err = rel_l2(tight.x);
    return {tight.report.converged && err <= kLuRel,
            "rel L2 " + fmt("%.2e", err) + " at solver tol 1e-8 (<= 1e-5); " + fmt("%.2e", rel_l2(loose.x)) +
                " at tol 1e-6"};
}

}  // namespace

int main() {
    std::printf("hmx acceptance suite\n");
    run(1, "partition correctness", false, 10, partition_correctness);

    const auto t0 = Clock::now();
    const auto p1 = problem(1);
    const double build1 = std::chrono::duration<double>(Clock::now() - t0).count();
    run(2, "compression fidelity", false, 30 - build1, [&] { return compression_fidelity(p1); });
    run(3, "scaling identity", false, 0, scaling_identity);
    run(4, "split criterion", false, 0, split_criterion);
    run(5, "matvec oracle equivalence", false, 60, [&] { return oracle_equivalence(p1); });

    const auto p2 = problem(2);
    run(6, "thread equivalence", false, 60, [&] { return thread_equivalence(p2); });
    std::vector<SolveRow> rows;
    run(7, "solver convergence", false, 120, [&] {
        rows = solve_all(p2);
        return solver_convergence(rows);
    });
    run(8, "iteration-count orderings", false, 0, [&] { return iteration_orderings(rows); });
    run(9, "storage halving", false, 0, [&] { return storage_halving(p2); });
    run(10, "matvec timing", true, 0, timing);
    run(11, "solver vs dense LU", false, 60, [&] { return lu_oracle(p2); });

    std::printf("%s: %d hard criteria failed\n", hard_failures ? "FAILED" : "OK", hard_failures);
    return hard_failures ? 1 : 0;
}
