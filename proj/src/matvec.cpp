#include "hmx/matvec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hmx/error.hpp"

namespace hmx {

SourceVector::SourceVector(const HMatrixF64& h, std::span<const double> x, bool fp32_shadow) {
    if (x.size() != h.size())
        throw ContractError("source vector length " + std::to_string(x.size()) +
                            " does not match N = " + std::to_string(h.size()));
    const auto perm = h.permutation();
    fp64_.resize(x.size());
    for (std::size_t k = 0; k < perm.size(); ++k) fp64_[k] = x[perm[k]];
    if (fp32_shadow) {
        fp32_.resize(fp64_.size());
        for (std::size_t k = 0; k < fp64_.size(); ++k) fp32_[k] = static_cast<float>(fp64_[k]);
    }
}

//
// The kernels spell out each update with the operand types of the stored data,
// so C++'s usual arithmetic conversions give the promotion rules directly: two
// FP32 operands multiply in FP32, anything touching FP64 is formed in FP64.
//

template <class A, class X>
void block_mul_dense(std::span<const A> a, std::size_t rows, std::size_t cols,
                     std::span<const X> x, std::span<double> y) {
    std::size_t i = 0;
    // four rows at a time; each row still accumulates left to right
    for (; i + 4 <= rows; i += 4) {
        const A* r0 = a.data() + i * cols;
        const A* r1 = r0 + cols;
        const A* r2 = r1 + cols;
        const A* r3 = r2 + cols;
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            const X xj = x[j];
            s0 += r0[j] * xj;
            s1 += r1[j] * xj;
            s2 += r2[j] * xj;
            s3 += r3[j] * xj;
        }
        y[i] += s0;
        y[i + 1] += s1;
        y[i + 2] += s2;
        y[i + 3] += s3;
    }
    for (; i < rows; ++i) {
        const A* r = a.data() + i * cols;
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) s += r[j] * x[j];
        y[i] += s;
    }
}

template void block_mul_dense<double, double>(std::span<const double>, std::size_t, std::size_t,
                                              std::span<const double>, std::span<double>);
template void block_mul_dense<float, double>(std::span<const float>, std::size_t, std::size_t,
                                             std::span<const double>, std::span<double>);
template void block_mul_dense<float, float>(std::span<const float>, std::size_t, std::size_t,
                                            std::span<const float>, std::span<double>);

namespace {

// z[k] = sum_j w[k][j] x[j], accumulated in Z
template <class W, class X, class Z>
void rows_times(const W* w, std::size_t rank, std::size_t cols, const X* x, Z* z) {
    std::size_t k = 0;
    for (; k + 4 <= rank; k += 4) {
        const W* w0 = w + k * cols;
        const W* w1 = w0 + cols;
        const W* w2 = w1 + cols;
        const W* w3 = w2 + cols;
        Z s0 = 0, s1 = 0, s2 = 0, s3 = 0;
        for (std::size_t j = 0; j < cols; ++j) {
            const X xj = x[j];
            s0 = static_cast<Z>(s0 + w0[j] * xj);
            s1 = static_cast<Z>(s1 + w1[j] * xj);
            s2 = static_cast<Z>(s2 + w2[j] * xj);
            s3 = static_cast<Z>(s3 + w3[j] * xj);
        }
        z[k] = s0;
        z[k + 1] = s1;
        z[k + 2] = s2;
        z[k + 3] = s3;
    }
    for (; k < rank; ++k) {
        const W* wk = w + k * cols;
        Z s = 0;
        for (std::size_t j = 0; j < cols; ++j) s = static_cast<Z>(s + wk[j] * x[j]);
        z[k] = s;
    }
}

// yhat[i] += sum_k v[i][k] z[k], v column-major
template <class V, class Z>
void columns_times(const V* v, std::size_t rows, std::size_t rank, const Z* z, double* yhat) {
    for (std::size_t k = 0; k < rank; ++k) {
        const V* vk = v + k * rows;
        const Z zk = z[k];
        for (std::size_t i = 0; i < rows; ++i) yhat[i] += vk[i] * zk;
    }
}

struct Scratch {
    std::vector<double> z64;
    std::vector<float> z32;
    std::vector<double> yhat;
    std::vector<double> yhat2;

    Scratch(std::size_t max_rank, std::size_t max_rows)
        : z64(max_rank), z32(max_rank), yhat(max_rows), yhat2(max_rows) {}
};

template <class V, class W, class X, class Z>
void lowrank_product(const V* v, const W* w, const double* d, std::size_t rows, std::size_t cols,
                     std::size_t rank, const X* x, Z* z, double* yhat) {
    rows_times(w, rank, cols, x, z);
    if (d != nullptr)
        for (std::size_t k = 0; k < rank; ++k) z[k] *= d[k];
    columns_times(v, rows, rank, z, yhat);
}

class BlockKernel {
public:
    BlockKernel(const SchemeHMatrix& sh, const SourceVector& x, Scratch& scratch)
        : sh_(sh), x_(x), s_(scratch) {}

    // accumulate block m's contribution into y (permuted order, length N)
    void operator()(std::size_t m, std::span<double> y) {
        const Block& b = sh_.masters().partition().blocks()[m];
        block_ = &b;
        y_ = y.subspan(b.row_begin, b.rows());
        std::visit(*this, sh_.payload(m));
    }

    void operator()(const DenseMaster&) {
        const auto& d = std::get<DenseBlockF64>(sh_.masters().block(index()));
        block_mul_dense<double, double>(d.values, d.rows, d.cols, x64(), y_);
    }

    void operator()(const DenseF32& p) {
        if (sh_.scheme().fp32_source())
            block_mul_dense<float, float>(p.a, block_->rows(), block_->cols(), x32(), y_);
        else
            block_mul_dense<float, double>(p.a, block_->rows(), block_->cols(), x64(), y_);
    }

    void operator()(const LowRankMaster&) {
        const auto& lr = std::get<LowRankBlockF64>(sh_.masters().block(index()));
        run(lr.v.data(), lr.w.data(), nullptr, lr.rank, x64().data(), s_.z64.data());
    }

    void operator()(const LowRankF32& p) {
        if (sh_.scheme().fp32_source())
            run(p.v.data(), p.w.data(), nullptr, p.rank, x32().data(), s_.z32.data());
        else
            run(p.v.data(), p.w.data(), nullptr, p.rank, x64().data(), s_.z32.data());
    }

    void operator()(const ScaledF64& p) {
        const auto& f = p.factors;
        run(f.vp.data(), f.wp.data(), f.d.data(), f.rank, x64().data(), s_.z64.data());
    }

    void operator()(const ScaledF32& p) {
        const auto& f = p.factors;
        if (sh_.scheme().fp32_source())
            run(p.vp.data(), p.wp.data(), f.d.data(), f.rank, x32().data(), s_.z64.data());
        else
            run(p.vp.data(), p.wp.data(), f.d.data(), f.rank, x64().data(), s_.z64.data());
    }

    // FP64 class as in m2-double, FP32 class as in m2-mixed, partial results added
    void operator()(const SplitLowRank& p) {
        const std::size_t rows = block_->rows();
        const std::size_t cols = block_->cols();
        double* part64 = s_.yhat.data();
        double* part32 = s_.yhat2.data();
        std::fill_n(part64, rows, 0.0);
        std::fill_n(part32, rows, 0.0);
        const double* x = x64().data();
        lowrank_product(p.vp64.data(), p.wp64.data(), p.d.data(), rows, cols, p.rank64(), x,
                        s_.z64.data(), part64);
        if (p.rank32() > 0)
            lowrank_product(p.vp32.data(), p.wp32.data(), p.d.data() + p.rank64(), rows, cols,
                            p.rank32(), x, s_.z64.data(), part32);
        for (std::size_t i = 0; i < rows; ++i) y_[i] += part64[i] + part32[i];
    }

private:
    std::size_t index() const {
        return static_cast<std::size_t>(block_ - sh_.masters().partition().blocks().data());
    }
    std::span<const double> x64() const {
        return x_.fp64().subspan(block_->col_begin, block_->cols());
    }
    std::span<const float> x32() const {
        return x_.fp32().subspan(block_->col_begin, block_->cols());
    }

    template <class V, class W, class X, class Z>
    void run(const V* v, const W* w, const double* d, std::size_t rank, const X* x, Z* z) {
        const std::size_t rows = block_->rows();
        double* yhat = s_.yhat.data();
        std::fill_n(yhat, rows, 0.0);
        lowrank_product(v, w, d, rows, block_->cols(), rank, x, z, yhat);
        for (std::size_t i = 0; i < rows; ++i) y_[i] += yhat[i];
    }

    const SchemeHMatrix& sh_;
    const SourceVector& x_;
    Scratch& s_;
    const Block* block_ = nullptr;
    std::span<double> y_;
};

void check_source(const SchemeHMatrix& sh, const SourceVector& x) {
    if (x.size() != sh.size())
        throw ContractError("source vector length " + std::to_string(x.size()) +
                            " does not match N = " + std::to_string(sh.size()));
    if (sh.scheme().fp32_source() && !x.has_fp32())
        throw ContractError("scheme " + sh.scheme().name() + " needs an FP32 source image");
}

bool all_finite(std::span<const double> y) {
    return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

[[noreturn]] void report_non_finite(const SchemeHMatrix& sh, const SourceVector& x) {
    Scratch scratch(sh.max_rank(), sh.max_block_rows());
    BlockKernel kernel(sh, x, scratch);
    std::vector<double> y(sh.size());
    for (std::size_t m = 0; m < sh.payloads().size(); ++m) {
        std::fill(y.begin(), y.end(), 0.0);
        kernel(m, y);
        if (!all_finite(y))
            throw NumericError("non-finite value in the product from block " + std::to_string(m));
    }
    throw NumericError("non-finite value in the product");
}

std::vector<double> unpermute(const SchemeHMatrix& sh, std::span<const double> y) {
    const auto perm = sh.masters().permutation();
    std::vector<double> out(y.size());
    for (std::size_t k = 0; k < perm.size(); ++k) out[perm[k]] = y[k];
    return out;
}

}  // namespace

std::vector<double> matvec_threaded(const SchemeHMatrix& sh, const SourceVector& x, int threads) {
    if (threads < 1) throw ContractError("thread count must be >= 1");
    check_source(sh, x);
    const std::size_t n = sh.size();
    const auto order = sh.work_order();
    const auto workers = static_cast<std::size_t>(threads);

    std::vector<std::vector<double>> partial(workers);

#pragma omp parallel num_threads(threads)
    {
        Scratch scratch(sh.max_rank(), sh.max_block_rows());
        BlockKernel kernel(sh, x, scratch);
        // logical workers are fixed by `threads`, whatever OpenMP actually grants
#pragma omp for schedule(static, 1)
        for (std::size_t w = 0; w < workers; ++w) {
            partial[w].assign(n, 0.0);
            for (std::size_t pos = w; pos < order.size(); pos += workers) kernel(order[pos], partial[w]);
        }
    }

    std::vector<double> y = std::move(partial[0]);
    if (workers > 1) {
#pragma omp parallel for num_threads(threads) schedule(static)
        for (std::size_t i = 0; i < n; ++i) {
            double s = y[i];
            for (std::size_t w = 1; w < workers; ++w) s += partial[w][i];
            y[i] = s;
        }
    }
    if (!all_finite(y)) report_non_finite(sh, x);
    return unpermute(sh, y);
}

std::vector<double> matvec_threaded(const SchemeHMatrix& sh, std::span<const double> x, int threads) {
    return matvec_threaded(sh, SourceVector(sh, x), threads);
}

std::vector<double> matvec(const SchemeHMatrix& sh, const SourceVector& x) {
    return matvec_threaded(sh, x, 1);
}

std::vector<double> matvec(const SchemeHMatrix& sh, std::span<const double> x) {
    return matvec_threaded(sh, SourceVector(sh, x), 1);
}

}  // namespace hmx
