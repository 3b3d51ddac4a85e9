#include "hmx/oracle.hpp"

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/SVD>

#include "hmx/error.hpp"

namespace hmx::oracle {

std::vector<double> dense_matvec(const DenseMatrix& a, std::span<const double> x) {
    if (x.size() != a.cols) throw ContractError("dense_matvec: shape mismatch");
    std::vector<double> y(a.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

std::vector<double> dense_solve(const DenseMatrix& a, std::span<const double> b, std::size_t cap) {
    const std::size_t n = a.rows;
    if (a.cols != n) throw ContractError("dense_solve: matrix must be square");
    if (b.size() != n) throw ContractError("dense_solve: shape mismatch");
    if (n > cap) throw SizeError("dense_solve: N = " + std::to_string(n) + " exceeds cap");

    double norm_inf = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += std::abs(a(i, j));
        norm_inf = std::max(norm_inf, s);
    }

    DenseMatrix lu = a;
    std::vector<double> x(b.begin(), b.end());
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
        if (std::abs(lu(piv, k)) < 1e-14 * norm_inf)
            throw SingularityError("dense_solve: matrix is numerically singular");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
            std::swap(x[k], x[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = lu(i, k) / lu(k, k);
            if (f == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
            x[i] -= f * x[k];
        }
    }
    for (std::size_t k = n; k-- > 0;) {
        double s = x[k];
        for (std::size_t j = k + 1; j < n; ++j) s -= lu(k, j) * x[j];
        x[k] = s / lu(k, k);
    }
    return x;
}

double frobenius_error(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows != b.rows || a.cols != b.cols) throw ContractError("frobenius_error: shape mismatch");
    double diff = 0.0;
    double ref = 0.0;
    for (std::size_t k = 0; k < a.data.size(); ++k) {
        const double d = a.data[k] - b.data[k];
        diff += d * d;
        ref += a.data[k] * a.data[k];
    }
    if (ref == 0.0) return diff == 0.0 ? 0.0 : INFINITY;
    return std::sqrt(diff / ref);
}

std::vector<double> singular_values(const DenseMatrix& a) {
    using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const Mat> m(a.data.data(), static_cast<Eigen::Index>(a.rows),
                                  static_cast<Eigen::Index>(a.cols));
    const Eigen::JacobiSVD<Mat> svd(m);
    const auto& s = svd.singularValues();
    return {s.data(), s.data() + s.size()};
}

double best_rank_error(const DenseMatrix& a, std::size_t rank) {
    const auto s = singular_values(a);
    double tail = 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        total += s[k] * s[k];
        if (k >= rank) tail += s[k] * s[k];
    }
    return total == 0.0 ? 0.0 : std::sqrt(tail / total);
}

}  // namespace hmx::oracle
