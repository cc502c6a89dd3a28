#pragma once

#include "qparity/rational.hpp"

#include <optional>
#include <vector>

namespace qparity {

/// Solves A x = b by exact Gaussian elimination with partial (first
/// non-zero) pivoting. Returns nullopt when A is singular.
inline std::optional<std::vector<Rat>> solve_linear(std::vector<std::vector<Rat>> a,
                                                    std::vector<Rat> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        while (pivot < n && a[pivot][col] == 0)
            ++pivot;
        if (pivot == n)
            return std::nullopt;
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t row = col + 1; row < n; ++row) {
            if (a[row][col] == 0)
                continue;
            Rat f = a[row][col] / a[col][col];
            a[row][col] = 0;
            for (std::size_t k = col + 1; k < n; ++k)
                a[row][k] -= f * a[col][k];
            b[row] -= f * b[col];
        }
    }
    std::vector<Rat> x(n);
    for (std::size_t i = n; i-- > 0;) {
        Rat acc = b[i];
        for (std::size_t k = i + 1; k < n; ++k)
            acc -= a[i][k] * x[k];
        x[i] = acc / a[i][i];
    }
    return x;
}

} // namespace qparity
