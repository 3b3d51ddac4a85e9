#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hmx/hmatrix.hpp"

namespace hmx {

enum class Variant { Double, Single, Mixed };

//
// Storage/arithmetic assignment for the H-matrix vector product.
//   method 1: original V W factors, cast wholesale
//   method 2: V' D W' with max-abs normalized factors and an FP64 diagonal
//   method 3: V' D W' with each column/row in FP32 or FP64 depending on d_i
//
class PrecisionScheme {
public:
    static PrecisionScheme method1(Variant v) { return {1, v, 0}; }
    static PrecisionScheme method2(Variant v) { return {2, v, 0}; }
    static PrecisionScheme method3(int c) { return {3, Variant::Double, c}; }

    // m1-double, m1-single, m1-mixed, m2-double, m2-single, m2-mixed, m3:c=<int>
    static PrecisionScheme parse(std::string_view name);

    int method() const { return method_; }
    std::optional<Variant> variant() const;
    std::optional<int> c() const;
    std::string name() const;

    // source vector read in FP32 (the Single variants)
    bool fp32_source() const { return method_ != 3 && variant_ == Variant::Single; }

    bool operator==(const PrecisionScheme&) const = default;

private:
    PrecisionScheme(int method, Variant v, int c) : method_(method), variant_(v), c_(c) {}

    int method_;
    Variant variant_;
    int c_;
};

// The schemes studied side by side: m1/m2 in every variant.
std::vector<PrecisionScheme> standard_schemes();

enum class Precision {
    None,   // symbol not used by the scheme
    FP64,
    FP32,
    Split,  // per column/row, FP64 or FP32
};

std::string_view to_string(Precision p);

// Storage precision of every symbol touched by the product, dense part then low-rank part.
struct PrecisionTable {
    Precision dense_yhat;
    Precision dense_a;
    Precision dense_x;
    Precision lowrank_z;
    Precision lowrank_w;
    Precision lowrank_x;
    Precision lowrank_d;
    Precision lowrank_yhat;
    Precision lowrank_v;
    Precision result;

    bool operator==(const PrecisionTable&) const = default;
};

PrecisionTable precision_table(const PrecisionScheme& scheme);

// V' D W' with every nonzero column of V' and row of W' at max-abs exactly 1.
struct ScaledLowRank {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t rank = 0;
    std::vector<double> vp;  // column-major, like LowRankBlockF64::v
    std::vector<double> wp;  // row-major, like LowRankBlockF64::w
    std::vector<double> d;
};

ScaledLowRank scale_decompose(const LowRankBlockF64& block);

struct SplitIndices {
    std::vector<std::size_t> fp64;  // d_i >= d_max * 10^-c
    std::vector<std::size_t> fp32;  // d_i <  d_max * 10^-c
};

// 0-based indices, each class in ascending order
SplitIndices split_indices(std::span<const double> d, int c);

//
// Scheme-specific payloads. Blocks that read the FP64 masters directly refer
// to them by block index into the owning HMatrixF64.
//
struct DenseMaster {};
struct DenseF32 {
    std::vector<float> a;
};
struct LowRankMaster {};
struct LowRankF32 {
    std::size_t rank = 0;
    std::vector<float> v;
    std::vector<float> w;
};
struct ScaledF64 {
    ScaledLowRank factors;
};
struct ScaledF32 {
    ScaledLowRank factors;  // FP64 masters, not read by the product
    std::vector<float> vp;
    std::vector<float> wp;
};
// Columns of V' / rows of W' reordered so each class is contiguous, FP64 class first.
struct SplitLowRank {
    ScaledLowRank factors;  // unsplit FP64 masters, original order
    SplitIndices classes;
    std::vector<double> d;  // reordered diagonal, FP64 class then FP32 class
    std::vector<double> vp64;
    std::vector<double> wp64;
    std::vector<float> vp32;
    std::vector<float> wp32;

    std::size_t rank64() const { return classes.fp64.size(); }
    std::size_t rank32() const { return classes.fp32.size(); }
};

using SchemePayload =
    std::variant<DenseMaster, DenseF32, LowRankMaster, LowRankF32, ScaledF64, ScaledF32, SplitLowRank>;

struct CastReport {
    std::size_t fp32_values = 0;
    // nonzero FP64 values that became FP32 subnormals or zero
    std::size_t underflows = 0;
};

class SchemeHMatrix {
public:
    SchemeHMatrix(std::shared_ptr<const HMatrixF64> masters, PrecisionScheme scheme,
                  std::vector<SchemePayload> payloads, CastReport casts);

    const HMatrixF64& masters() const { return *masters_; }
    std::shared_ptr<const HMatrixF64> masters_ptr() const { return masters_; }
    const PrecisionScheme& scheme() const { return scheme_; }
    std::size_t size() const { return masters_->size(); }
    std::span<const SchemePayload> payloads() const { return payloads_; }
    const SchemePayload& payload(std::size_t m) const { return payloads_[m]; }
    const CastReport& casts() const { return casts_; }

    // Block ids in descending work order, ties by id; the threaded product deals them round-robin.
    std::span<const std::size_t> work_order() const { return work_order_; }
    std::size_t max_block_rows() const { return max_rows_; }
    std::size_t max_rank() const { return max_rank_; }

    // Precisions actually present in the built payloads.
    PrecisionTable observed_precisions() const;

private:
    std::shared_ptr<const HMatrixF64> masters_;
    PrecisionScheme scheme_;
    std::vector<SchemePayload> payloads_;
    CastReport casts_;
    std::vector<std::size_t> work_order_;
    std::size_t max_rows_ = 0;
    std::size_t max_rank_ = 0;
};

// Builds the casts a scheme needs. Throws NumericError naming the block when an
// FP64 value exceeds the FP32 range.
SchemeHMatrix prepare_scheme(std::shared_ptr<const HMatrixF64> h, const PrecisionScheme& scheme);

// Matrix bytes read by one product under the scheme.
std::size_t payload_bytes(const SchemeHMatrix& sh);

}  // namespace hmx
