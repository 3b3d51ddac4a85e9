#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hmx/precision.hpp"

namespace hmx {

//
// Source vector in the H-matrix's permuted ordering, with an optional FP32
// image for schemes that read the source in single precision.
//
class SourceVector {
public:
    // x in original panel order
    SourceVector(const HMatrixF64& h, std::span<const double> x, bool fp32_shadow);
    SourceVector(const SchemeHMatrix& sh, std::span<const double> x)
        : SourceVector(sh.masters(), x, sh.scheme().fp32_source()) {}

    std::size_t size() const { return fp64_.size(); }
    std::span<const double> fp64() const { return fp64_; }
    std::span<const float> fp32() const { return fp32_; }
    bool has_fp32() const { return !fp32_.empty() || fp64_.empty(); }

private:
    std::vector<double> fp64_;
    std::vector<float> fp32_;
};

// y = A x, with x and the result in original panel order. Always FP64 out.
// Throws ContractError on a length mismatch, NumericError (naming the first
// offending block) if the result is not finite.
std::vector<double> matvec(const SchemeHMatrix& sh, const SourceVector& x);
std::vector<double> matvec(const SchemeHMatrix& sh, std::span<const double> x);

// Blocks dealt round-robin (in work order) to `threads` workers, each summing into
// a private vector; the private vectors are then added in worker order.
std::vector<double> matvec_threaded(const SchemeHMatrix& sh, const SourceVector& x, int threads);
std::vector<double> matvec_threaded(const SchemeHMatrix& sh, std::span<const double> x, int threads);

// Single-block kernels, exposed for tests. `y` is the block's row slice of the
// result and is accumulated into.
template <class A, class X>
void block_mul_dense(std::span<const A> a, std::size_t rows, std::size_t cols,
                     std::span<const X> x, std::span<double> y);

}  // namespace hmx
