#include "hmx/aca.hpp"

#include <algorithm>
#include <cmath>

#include "hmx/error.hpp"

namespace hmx {

double LowRankBlockF64::entry(std::size_t i, std::size_t j) const {
    double s = 0.0;
    for (std::size_t k = 0; k < rank; ++k) s += v_at(i, k) * w_at(k, j);
    return s;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

LowRankBlockF64 pack(std::size_t rows, std::size_t cols, const std::vector<std::vector<double>>& us,
                     const std::vector<std::vector<double>>& vs) {
    LowRankBlockF64 out{rows, cols, us.size(), {}, {}};
    out.v.reserve(rows * us.size());
    out.w.reserve(cols * us.size());
    for (const auto& u : us) out.v.insert(out.v.end(), u.begin(), u.end());
    for (const auto& v : vs) out.w.insert(out.w.end(), v.begin(), v.end());
    return out;
}

// exact representation of a dense block as identity * A or A * identity
LowRankBlockF64 dense_as_factors(const EntryFn& entry, std::size_t rows, std::size_t cols) {
    LowRankBlockF64 out{rows, cols, std::min(rows, cols), {}, {}};
    out.v.assign(rows * out.rank, 0.0);
    out.w.assign(out.rank * cols, 0.0);
    if (rows <= cols) {
        for (std::size_t k = 0; k < rows; ++k) out.v[k * rows + k] = 1.0;
        for (std::size_t k = 0; k < rows; ++k)
            for (std::size_t j = 0; j < cols; ++j) out.w[k * cols + j] = entry(k, j);
    } else {
        for (std::size_t k = 0; k < cols; ++k)
            for (std::size_t i = 0; i < rows; ++i) out.v[k * rows + i] = entry(i, k);
        for (std::size_t k = 0; k < cols; ++k) out.w[k * cols + k] = 1.0;
    }
    return out;
}

}  // namespace

AcaResult aca_approximate(const EntryFn& entry, std::size_t rows, std::size_t cols, double tol,
                          std::size_t max_rank) {
    if (rows == 0 || cols == 0) throw ContractError("ACA block must be nonempty");
    if (!(tol > 0.0)) throw ContractError("ACA tolerance must be positive");

    const std::size_t rank_cap = std::min({max_rank, rows, cols});
    std::vector<std::vector<double>> us;  // columns, length rows
    std::vector<std::vector<double>> vs;  // rows, length cols
    std::vector<char> row_used(rows, 0);
    std::size_t rows_left = rows;
    std::size_t pivot_row = 0;
    double frob2 = 0.0;
    bool converged = false;
    bool exhausted = false;

    std::vector<double> r(cols);
    std::vector<double> c(rows);

    auto first_unused_row = [&] {
        for (std::size_t i = 0; i < rows; ++i)
            if (!row_used[i]) return i;
        return rows;
    };

    while (us.size() < rank_cap) {
        // row residual at the pivot row; rows with an identically zero residual are skipped
        std::size_t pivot_col = 0;
        bool found = false;
        while (rows_left > 0) {
            row_used[pivot_row] = 1;
            --rows_left;
            double rmax = 0.0;
            for (std::size_t j = 0; j < cols; ++j) {
                double value = entry(pivot_row, j);
                for (std::size_t l = 0; l < us.size(); ++l) value -= us[l][pivot_row] * vs[l][j];
                r[j] = value;
                if (std::abs(value) > rmax) {
                    rmax = std::abs(value);
                    pivot_col = j;
                }
            }
            if (rmax > 0.0) {
                found = true;
                break;
            }
            pivot_row = first_unused_row();
        }
        if (!found) {
            exhausted = true;
            break;
        }

        const double pivot = r[pivot_col];
        for (std::size_t i = 0; i < rows; ++i) {
            double value = entry(i, pivot_col);
            for (std::size_t l = 0; l < us.size(); ++l) value -= us[l][i] * vs[l][pivot_col];
            c[i] = value / pivot;
        }

        const double cross2 = dot(c, c) * dot(r, r);
        double mixed = 0.0;
        for (std::size_t l = 0; l < us.size(); ++l) mixed += dot(c, us[l]) * dot(r, vs[l]);
        const double next_frob2 = frob2 + cross2 + 2.0 * mixed;
        if (!us.empty() && std::sqrt(cross2) <= tol * std::sqrt(std::max(next_frob2, 0.0))) {
            converged = true;
            break;
        }
        us.push_back(c);
        vs.push_back(r);
        frob2 = next_frob2;

        double cmax = -1.0;
        std::size_t next = rows;
        for (std::size_t i = 0; i < rows; ++i)
            if (!row_used[i] && std::abs(c[i]) > cmax) {
                cmax = std::abs(c[i]);
                next = i;
            }
        if (next == rows) {
            exhausted = rows_left == 0;
            if (exhausted) break;
        }
        pivot_row = next;
    }

    AcaResult result;
    result.block = pack(rows, cols, us, vs);
    if (converged || !exhausted || us.size() == rank_cap) return result;

    // Every row has served as a pivot candidate. Earlier zero-residual rows may have
    // picked up contributions from later crosses, so check the remainder explicitly.
    double err2 = 0.0;
    double norm2 = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            const double a = entry(i, j);
            const double d = a - result.block.entry(i, j);
            norm2 += a * a;
            err2 += d * d;
        }
    if (err2 <= tol * tol * norm2) return result;

    result.block = dense_as_factors(entry, rows, cols);
    result.dense_fallback = true;
    return result;
}

}  // namespace hmx
