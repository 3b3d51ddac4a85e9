#include "hmx/bicgstab.hpp"

#include <chrono>
#include <cmath>
#include <memory>

#include "hmx/error.hpp"
#include "hmx/matvec.hpp"

namespace hmx {

namespace {

constexpr double kBreakdown = 1e-300;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double residual_ratio(const LinearOperator& op, std::span<const double> x, std::span<const double> b,
                      std::vector<double>& work) {
    op(x, work);
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double d = b[i] - work[i];
        s += d * d;
    }
    const double bn = norm2(b);
    if (bn == 0.0) return std::sqrt(s) == 0.0 ? 0.0 : INFINITY;
    return std::sqrt(s) / bn;
}

// shared M1-Double view over FP64 masters that the caller keeps alive
LinearOperator fp64_operator(const HMatrixF64& h64, int threads) {
    auto view = std::shared_ptr<const HMatrixF64>(&h64, [](const HMatrixF64*) {});
    auto sh = std::make_shared<SchemeHMatrix>(prepare_scheme(view, PrecisionScheme::method1(Variant::Double)));
    return [sh, threads](std::span<const double> x, std::span<double> y) {
        const auto r = matvec_threaded(*sh, x, threads);
        std::copy(r.begin(), r.end(), y.begin());
    };
}

}  // namespace

SolveResult bicgstab(const LinearOperator& apply, const LinearOperator& verify,
                     std::span<const double> b, const SolverConfig& cfg) {
    if (!(cfg.tol > 0.0)) throw ContractError("solver tolerance must be positive");
    if (cfg.max_iter < 1) throw ContractError("max_iter must be >= 1");

    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = b.size();
    SolveResult out;
    auto& rep = out.report;
    auto& x = out.x;
    x.assign(n, 0.0);

    auto finish = [&] {
        rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return std::move(out);
    };

    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        rep.converged = true;
        rep.residual_history.push_back(0.0);
        rep.true_residual = 0.0;
        return finish();
    }

    std::vector<double> r(n), rhat(n), p(n), v(n), s(n), t(n), work(n), trial(n);
    apply(x, work);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - work[i];
    rhat = r;
    rep.residual_history.push_back(norm2(r) / bnorm);

    double rho_prev = 1.0;
    double alpha = 1.0;
    double omega = 1.0;

    for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
        const double rho = dot(rhat, r);
        if (std::abs(rho) < kBreakdown) {
            rep.breakdown = "rho vanished";
            break;
        }
        if (it == 1) {
            p = r;
        } else {
            const double beta = (rho / rho_prev) * (alpha / omega);
            for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        apply(p, v);
        const double rhat_v = dot(rhat, v);
        if (std::abs(rhat_v) < kBreakdown) {
            rep.breakdown = "r^T v vanished";
            break;
        }
        alpha = rho / rhat_v;
        for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
        rep.iterations = it;

        const double snorm = norm2(s) / bnorm;
        if (snorm < cfg.tol) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + alpha * p[i];
            const double tr = residual_ratio(verify, trial, b, work);
            rep.true_residual = tr;
            if (tr < cfg.tol) {
                x = trial;
                rep.residual_history.push_back(snorm);
                rep.converged = true;
                return finish();
            }
        }

        apply(s, t);
        const double tt = dot(t, t);
        if (tt < kBreakdown) {
            rep.residual_history.push_back(snorm);
            rep.breakdown = "t vanished";
            break;
        }
        omega = dot(t, s) / tt;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        const double rnorm = norm2(r) / bnorm;
        rep.residual_history.push_back(rnorm);

        if (rnorm < cfg.tol) {
            const double tr = residual_ratio(verify, x, b, work);
            rep.true_residual = tr;
            if (tr < cfg.tol) {
                rep.converged = true;
                return finish();
            }
        }
        if (std::abs(omega) < kBreakdown) {
            rep.breakdown = "omega vanished";
            break;
        }
        rho_prev = rho;
    }
    return finish();
}

SolveResult bicgstab(const SchemeHMatrix& sh, const HMatrixF64& h64, std::span<const double> b,
                     const SolverConfig& cfg) {
    if (b.size() != sh.size() || h64.size() != sh.size())
        throw ContractError("right-hand side and matrices must share dimension N");
    if (!(cfg.scheme == sh.scheme()))
        throw ContractError("solver configured for " + cfg.scheme.name() + " but matrix prepared for " +
                            sh.scheme().name());
    if (cfg.threads < 1) throw ContractError("thread count must be >= 1");
    const int threads = cfg.threads;
    LinearOperator apply = [&sh, threads](std::span<const double> x, std::span<double> y) {
        const auto r = matvec_threaded(sh, x, threads);
        std::copy(r.begin(), r.end(), y.begin());
    };
    return bicgstab(apply, fp64_operator(h64, threads), b, cfg);
}

double true_residual(const HMatrixF64& h64, std::span<const double> x, std::span<const double> b) {
    if (x.size() != h64.size() || b.size() != h64.size())
        throw ContractError("true residual needs vectors of length N");
    std::vector<double> work(b.size());
    return residual_ratio(fp64_operator(h64, 1), x, b, work);
}

}  // namespace hmx
