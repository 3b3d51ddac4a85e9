#include "hmx/precision.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <type_traits>
#include <utility>

#include "hmx/error.hpp"

namespace hmx {

PrecisionScheme PrecisionScheme::parse(std::string_view name) {
    if (name == "m1-double") return method1(Variant::Double);
    if (name == "m1-single") return method1(Variant::Single);
    if (name == "m1-mixed") return method1(Variant::Mixed);
    if (name == "m2-double") return method2(Variant::Double);
    if (name == "m2-single") return method2(Variant::Single);
    if (name == "m2-mixed") return method2(Variant::Mixed);
    constexpr std::string_view m3 = "m3:c=";
    if (name.starts_with(m3)) {
        const auto digits = name.substr(m3.size());
        int c = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), c);
        if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty())
            return method3(c);
    }
    throw ContractError("unknown precision scheme '" + std::string(name) + "'");
}

std::optional<Variant> PrecisionScheme::variant() const {
    if (method_ == 3) return std::nullopt;
    return variant_;
}

std::optional<int> PrecisionScheme::c() const {
    if (method_ != 3) return std::nullopt;
    return c_;
}

std::string PrecisionScheme::name() const {
    if (method_ == 3) return "m3:c=" + std::to_string(c_);
    std::string out = method_ == 1 ? "m1-" : "m2-";
    switch (variant_) {
        case Variant::Double: return out + "double";
        case Variant::Single: return out + "single";
        case Variant::Mixed: return out + "mixed";
    }
    return out;
}

std::vector<PrecisionScheme> standard_schemes() {
    return {PrecisionScheme::method1(Variant::Double), PrecisionScheme::method1(Variant::Single),
            PrecisionScheme::method1(Variant::Mixed),  PrecisionScheme::method2(Variant::Double),
            PrecisionScheme::method2(Variant::Single), PrecisionScheme::method2(Variant::Mixed)};
}

std::string_view to_string(Precision p) {
    switch (p) {
        case Precision::None: return "-";
        case Precision::FP64: return "FP64";
        case Precision::FP32: return "FP32";
        case Precision::Split: return "FP64/FP32";
    }
    return "?";
}

namespace {

// FP32 intermediate z only where the factors are cast wholesale without a diagonal
bool fp32_intermediate(const PrecisionScheme& s) {
    return s.method() == 1 && s.variant() != Variant::Double;
}

bool fp32_matrix(const PrecisionScheme& s) {
    return s.method() != 3 && s.variant() != Variant::Double;
}

Precision source_precision(const PrecisionScheme& s) {
    return s.fp32_source() ? Precision::FP32 : Precision::FP64;
}

}  // namespace

PrecisionTable precision_table(const PrecisionScheme& s) {
    const Precision matrix = fp32_matrix(s) ? Precision::FP32 : Precision::FP64;
    const Precision factors = s.method() == 3 ? Precision::Split : matrix;
    return {
        .dense_yhat = Precision::FP64,
        .dense_a = s.method() == 3 ? Precision::FP64 : matrix,
        .dense_x = source_precision(s),
        .lowrank_z = fp32_intermediate(s) ? Precision::FP32 : Precision::FP64,
        .lowrank_w = factors,
        .lowrank_x = source_precision(s),
        .lowrank_d = s.method() == 1 ? Precision::None : Precision::FP64,
        .lowrank_yhat = Precision::FP64,
        .lowrank_v = factors,
        .result = Precision::FP64,
    };
}

ScaledLowRank scale_decompose(const LowRankBlockF64& block) {
    const std::size_t rows = block.rows;
    const std::size_t cols = block.cols;
    const std::size_t rank = block.rank;
    ScaledLowRank out{rows, cols, rank, block.v, block.w, std::vector<double>(rank, 0.0)};

    for (std::size_t k = 0; k < rank; ++k) {
        double* vcol = out.vp.data() + k * rows;
        double* wrow = out.wp.data() + k * cols;
        double vmax = 0.0;
        double wmax = 0.0;
        for (std::size_t i = 0; i < rows; ++i) vmax = std::max(vmax, std::abs(vcol[i]));
        for (std::size_t j = 0; j < cols; ++j) wmax = std::max(wmax, std::abs(wrow[j]));
        // a zero column or row stays zero and the product survives through d = 0
        if (vmax > 0.0)
            for (std::size_t i = 0; i < rows; ++i) vcol[i] /= vmax;
        if (wmax > 0.0)
            for (std::size_t j = 0; j < cols; ++j) wrow[j] /= wmax;
        out.d[k] = vmax * wmax;
    }
    return out;
}

SplitIndices split_indices(std::span<const double> d, int c) {
    SplitIndices out;
    if (d.empty()) return out;
    const double dmax = *std::max_element(d.begin(), d.end());
    const double threshold = dmax * std::pow(10.0, -static_cast<double>(c));
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] < 0.0) throw ContractError("diagonal entries must be non-negative");
        (d[i] < threshold ? out.fp32 : out.fp64).push_back(i);
    }
    return out;
}

namespace {

class Caster {
public:
    explicit Caster(std::size_t block) : block_(block) {}

    std::vector<float> operator()(std::span<const double> in) {
        constexpr double fmax = std::numeric_limits<float>::max();
        constexpr float fmin = std::numeric_limits<float>::min();
        std::vector<float> out(in.size());
        for (std::size_t i = 0; i < in.size(); ++i) {
            if (std::abs(in[i]) > fmax)
                throw NumericError("block " + std::to_string(block_) + ": value " +
                                   std::to_string(in[i]) + " overflows FP32");
            out[i] = static_cast<float>(in[i]);
            if (in[i] != 0.0 && std::abs(out[i]) < fmin) ++report.underflows;
        }
        report.fp32_values += in.size();
        return out;
    }

    CastReport report;

private:
    std::size_t block_;
};

SplitLowRank split(ScaledLowRank factors, int c, Caster& cast) {
    SplitLowRank out;
    out.classes = split_indices(factors.d, c);
    const std::size_t rows = factors.rows;
    const std::size_t cols = factors.cols;

    std::vector<double> v32;
    std::vector<double> w32;
    for (auto k : out.classes.fp64) {
        out.d.push_back(factors.d[k]);
        out.vp64.insert(out.vp64.end(), factors.vp.begin() + k * rows, factors.vp.begin() + (k + 1) * rows);
        out.wp64.insert(out.wp64.end(), factors.wp.begin() + k * cols, factors.wp.begin() + (k + 1) * cols);
    }
    for (auto k : out.classes.fp32) {
        out.d.push_back(factors.d[k]);
        v32.insert(v32.end(), factors.vp.begin() + k * rows, factors.vp.begin() + (k + 1) * rows);
        w32.insert(w32.end(), factors.wp.begin() + k * cols, factors.wp.begin() + (k + 1) * cols);
    }
    out.vp32 = cast(v32);
    out.wp32 = cast(w32);
    out.factors = std::move(factors);
    return out;
}

SchemePayload make_payload(const BlockData& block, const PrecisionScheme& scheme, Caster& cast) {
    if (const auto* dense = std::get_if<DenseBlockF64>(&block)) {
        if (fp32_matrix(scheme)) return DenseF32{cast(dense->values)};
        return DenseMaster{};
    }
    const auto& lr = std::get<LowRankBlockF64>(block);
    switch (scheme.method()) {
        case 1:
            if (!fp32_matrix(scheme)) return LowRankMaster{};
            return LowRankF32{lr.rank, cast(lr.v), cast(lr.w)};
        case 2: {
            auto scaled = scale_decompose(lr);
            if (!fp32_matrix(scheme)) return ScaledF64{std::move(scaled)};
            auto vp = cast(scaled.vp);
            auto wp = cast(scaled.wp);
            return ScaledF32{std::move(scaled), std::move(vp), std::move(wp)};
        }
        default:
            return split(scale_decompose(lr), *scheme.c(), cast);
    }
}

Precision merge(Precision a, Precision b) {
    if (a == Precision::None) return b;
    if (b == Precision::None || a == b) return a;
    return Precision::Split;
}

}  // namespace

SchemeHMatrix::SchemeHMatrix(std::shared_ptr<const HMatrixF64> masters, PrecisionScheme scheme,
                             std::vector<SchemePayload> payloads, CastReport casts)
    : masters_(std::move(masters)),
      scheme_(scheme),
      payloads_(std::move(payloads)),
      casts_(casts) {
    if (!masters_) throw ContractError("scheme matrix needs FP64 masters");
    if (payloads_.size() != masters_->blocks().size())
        throw ContractError("need exactly one scheme payload per block");

    const auto blocks = masters_->partition().blocks();
    std::vector<std::size_t> work(blocks.size());
    for (std::size_t m = 0; m < blocks.size(); ++m) {
        const Block& b = blocks[m];
        max_rows_ = std::max(max_rows_, b.rows());
        if (const auto* lr = std::get_if<LowRankBlockF64>(&masters_->block(m))) {
            max_rank_ = std::max(max_rank_, lr->rank);
            work[m] = lr->rank * (b.rows() + b.cols());
        } else {
            work[m] = b.rows() * b.cols();
        }
    }
    work_order_.resize(blocks.size());
    std::iota(work_order_.begin(), work_order_.end(), std::size_t{0});
    std::stable_sort(work_order_.begin(), work_order_.end(),
                     [&](std::size_t a, std::size_t b) { return work[a] > work[b]; });
}

PrecisionTable SchemeHMatrix::observed_precisions() const {
    PrecisionTable t{};
    t.result = Precision::FP64;
    bool any_dense = false;
    bool any_lowrank = false;
    for (const auto& p : payloads_) {
        std::visit(
            [&](const auto& q) {
                using T = std::decay_t<decltype(q)>;
                if constexpr (std::is_same_v<T, DenseMaster> || std::is_same_v<T, DenseF32>) {
                    any_dense = true;
                    t.dense_a = merge(t.dense_a, std::is_same_v<T, DenseF32> ? Precision::FP32
                                                                            : Precision::FP64);
                } else {
                    any_lowrank = true;
                    Precision factors = Precision::FP64;
                    Precision diag = Precision::FP64;
                    if constexpr (std::is_same_v<T, LowRankMaster>) diag = Precision::None;
                    if constexpr (std::is_same_v<T, LowRankF32>) {
                        factors = Precision::FP32;
                        diag = Precision::None;
                    }
                    if constexpr (std::is_same_v<T, ScaledF32>) factors = Precision::FP32;
                    if constexpr (std::is_same_v<T, SplitLowRank>) {
                        factors = Precision::None;
                        if (q.rank64() > 0) factors = merge(factors, Precision::FP64);
                        if (q.rank32() > 0) factors = merge(factors, Precision::FP32);
                    }
                    t.lowrank_w = merge(t.lowrank_w, factors);
                    t.lowrank_v = merge(t.lowrank_v, factors);
                    t.lowrank_d = merge(t.lowrank_d, diag);
                }
            },
            p);
    }
    if (any_dense) {
        t.dense_yhat = Precision::FP64;
        t.dense_x = source_precision(scheme_);
    }
    if (any_lowrank) {
        t.lowrank_yhat = Precision::FP64;
        t.lowrank_x = source_precision(scheme_);
        t.lowrank_z = fp32_intermediate(scheme_) ? Precision::FP32 : Precision::FP64;
    }
    return t;
}

SchemeHMatrix prepare_scheme(std::shared_ptr<const HMatrixF64> h, const PrecisionScheme& scheme) {
    if (!h) throw ContractError("prepare_scheme needs an H-matrix");
    const auto blocks = h->blocks();
    std::vector<SchemePayload> payloads(blocks.size());
    std::vector<CastReport> reports(blocks.size());
    std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 4)
    for (std::size_t m = 0; m < blocks.size(); ++m) {
        try {
            Caster cast(m);
            payloads[m] = make_payload(blocks[m], scheme, cast);
            reports[m] = cast.report;
        } catch (...) {
#pragma omp critical(hmx_prepare_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    CastReport total;
    for (const auto& r : reports) {
        total.fp32_values += r.fp32_values;
        total.underflows += r.underflows;
    }
    return SchemeHMatrix(std::move(h), scheme, std::move(payloads), total);
}

std::size_t payload_bytes(const SchemeHMatrix& sh) {
    const auto blocks = sh.masters().partition().blocks();
    std::size_t bytes = 0;
    for (std::size_t m = 0; m < blocks.size(); ++m) {
        const std::size_t rows = blocks[m].rows();
        const std::size_t cols = blocks[m].cols();
        bytes += std::visit(
            [&](const auto& p) -> std::size_t {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, DenseMaster>) return 8 * rows * cols;
                if constexpr (std::is_same_v<T, DenseF32>) return 4 * rows * cols;
                if constexpr (std::is_same_v<T, LowRankMaster>)
                    return 8 * std::get<LowRankBlockF64>(sh.masters().block(m)).rank * (rows + cols);
                if constexpr (std::is_same_v<T, LowRankF32>) return 4 * p.rank * (rows + cols);
                if constexpr (std::is_same_v<T, ScaledF64>)
                    return 8 * p.factors.rank * (rows + cols) + 8 * p.factors.rank;
                if constexpr (std::is_same_v<T, ScaledF32>)
                    return 4 * p.factors.rank * (rows + cols) + 8 * p.factors.rank;
                if constexpr (std::is_same_v<T, SplitLowRank>)
                    return 8 * p.rank64() * (rows + cols) + 4 * p.rank32() * (rows + cols) +
                           8 * p.d.size();
                return 0;
            },
            sh.payload(m));
    }
    return bytes;
}

}  // namespace hmx
